#pragma once

#include <densemark/geometry.hpp>
#include <densemark/image.hpp>
#include <densemark/rng.hpp>

#include <vector>

namespace densemark {

/// Patch geometry: side length in pixels and its relation to the aligned
/// face frame. The training offset bound is tied to the patch size.
struct PatchSpec {
    int size = 64;
    double patch_face_ratio = 1.0 / 16.0;

    double offset_bound() const { return size / 8.0; }

    /// Throws Error{Config} if size is odd or < 8.
    void validate() const;
    /// Additionally checks size == ratio * reference_face_size.
    void validate_against(double reference_face_size) const;
};

/// Normal-aligned grayscale crop; the regression model's input unit.
/// After extraction the +x axis of the patch points along the landmark
/// normal, so the refinement target is 1D.
struct Patch {
    int size = 0;
    std::vector<double> pixels;  // row-major, [0,1]
    double t = 0.0;              // soft index of the source landmark
    double normal_angle = 0.0;   // radians, in image coordinates
    Vec2 center;                 // image coordinates of the patch center

    double at(int x, int y) const { return pixels[static_cast<size_t>(y) * size + x]; }
    double& at(int x, int y) { return pixels[static_cast<size_t>(y) * size + x]; }
};

/// Training ground truth: a signed scalar displacement (pixels) along the
/// landmark normal, drawn uniformly from (-size/8, +size/8).
double generate_offset(Rng& rng, const PatchSpec& spec);

/// Sample a size x size grid whose +x axis lies along the normal given by
/// `normal_angle`, centered on `center`, with one fused inverse-mapped
/// bilinear resampling. Out-of-image samples replicate the border.
Patch extract_normalized_patch(const FaceImage& image, const Vec2& center,
                               double normal_angle, const PatchSpec& spec);

struct AugmentConfig {
    double p_gray = 0.0;
    double gray_scale_lo = 0.6;
    double gray_scale_hi = 1.4;
    double gray_shift = 0.1;

    double p_blur = 0.0;
    double blur_sigma_max = 2.0;

    double p_occlude = 0.0;
    double occlude_min_frac = 0.1;   // rectangle side, fraction of patch
    double occlude_max_frac = 0.632; // sqrt(0.4): caps area at 40%

    void validate() const;

    static AugmentConfig training_defaults() {
        AugmentConfig a;
        a.p_gray = 0.3;
        a.p_blur = 0.3;
        a.p_occlude = 0.15;
        return a;
    }
};

void fill_rect(Patch& patch, int x0, int y0, int x1, int y1, double value);
void gaussian_blur(Patch& patch, double sigma);

/// Apply gray jitter, blur, and rectangle occlusion, each with its
/// configured probability; result clamped to [0,1].
Patch augment(Patch patch, Rng& rng, const AugmentConfig& cfg);

} // namespace densemark
