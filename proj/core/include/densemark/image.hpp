#pragma once

#include <vector>

namespace densemark {

/// Grayscale face image, intensities in [0, 1], row-major.
///
/// reference_face_size is the alignment metadata: the side length of the
/// aligned-face frame this image lives in. It ties the patch-face ratio to
/// the pixel patch size (ratio * reference = patch side).
struct FaceImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;
    double reference_face_size = 1024.0;

    FaceImage() = default;
    FaceImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

    bool empty() const { return width <= 0 || height <= 0; }

    float& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }

    /// Edge-replicated integer access.
    float at_clamped(int x, int y) const;

    /// Edge-replicated bilinear sample at a fractional position.
    double bilinear(double x, double y) const;
};

} // namespace densemark
