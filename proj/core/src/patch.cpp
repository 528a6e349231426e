#include <densemark/patch.hpp>

#include <densemark/error.hpp>

#include <algorithm>
#include <cmath>

namespace densemark {

void PatchSpec::validate() const {
    if (size < 8 || size % 2 != 0)
        throw config_error("patch size must be even and >= 8, got " + std::to_string(size));
    if (patch_face_ratio <= 0.0)
        throw config_error("patch-face ratio must be positive");
}

void PatchSpec::validate_against(double reference_face_size) const {
    validate();
    double expected = patch_face_ratio * reference_face_size;
    if (std::abs(expected - size) > 1e-6)
        throw config_error("patch size " + std::to_string(size) + " != ratio * reference face size (" +
                           std::to_string(expected) + ")");
}

void AugmentConfig::validate() const {
    for (double p : {p_gray, p_blur, p_occlude})
        if (p < 0.0 || p > 1.0) throw config_error("augmentation probabilities must lie in [0,1]");
    if (blur_sigma_max < 0.0) throw config_error("blur sigma must be non-negative");
}

double generate_offset(Rng& rng, const PatchSpec& spec) {
    double bound = spec.offset_bound();
    return rng.uniform(-bound, bound);
}

Patch extract_normalized_patch(const FaceImage& image, const Vec2& center,
                               double normal_angle, const PatchSpec& spec) {
    if (image.empty()) throw contract_error("cannot extract a patch from an empty image");
    if (!finite(center)) throw contract_error("patch center must be finite");

    int s = spec.size;
    Patch patch;
    patch.size = s;
    patch.pixels.resize(static_cast<size_t>(s) * s);
    patch.center = center;
    patch.normal_angle = normal_angle;

    double c = std::cos(normal_angle), sn = std::sin(normal_angle);
    double half = (s - 1) / 2.0;
    for (int py = 0; py < s; ++py) {
        double ly = py - half;
        for (int px = 0; px < s; ++px) {
            double lx = px - half;
            double ix = center.x + lx * c - ly * sn;
            double iy = center.y + lx * sn + ly * c;
            patch.at(px, py) = image.bilinear(ix, iy);
        }
    }
    return patch;
}

void fill_rect(Patch& patch, int x0, int y0, int x1, int y1, double value) {
    x0 = std::clamp(x0, 0, patch.size - 1);
    y0 = std::clamp(y0, 0, patch.size - 1);
    x1 = std::clamp(x1, 0, patch.size - 1);
    y1 = std::clamp(y1, 0, patch.size - 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) patch.at(x, y) = value;
}

void gaussian_blur(Patch& patch, double sigma) {
    if (sigma <= 0.0) return;
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    int s = patch.size;
    std::vector<double> tmp(patch.pixels.size());
    auto clampi = [s](int v) { return std::clamp(v, 0, s - 1); };
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * patch.at(clampi(x + i), y);
            tmp[static_cast<size_t>(y) * s + x] = acc;
        }
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp[static_cast<size_t>(clampi(y + i)) * s + x];
            patch.at(x, y) = acc;
        }
}

Patch augment(Patch patch, Rng& rng, const AugmentConfig& cfg) {
    cfg.validate();
    int s = patch.size;

    if (rng.uniform() < cfg.p_gray) {
        double scale = rng.uniform(cfg.gray_scale_lo, cfg.gray_scale_hi);
        double shift = rng.uniform(-cfg.gray_shift, cfg.gray_shift);
        for (double& v : patch.pixels) v = v * scale + shift;
    }
    if (rng.uniform() < cfg.p_blur) {
        gaussian_blur(patch, rng.uniform(0.0, cfg.blur_sigma_max));
    }
    if (rng.uniform() < cfg.p_occlude) {
        int w = std::max(1, static_cast<int>(rng.uniform(cfg.occlude_min_frac, cfg.occlude_max_frac) * s));
        int h = std::max(1, static_cast<int>(rng.uniform(cfg.occlude_min_frac, cfg.occlude_max_frac) * s));
        int x0 = rng.uniform_int(0, s - w);
        int y0 = rng.uniform_int(0, s - h);
        fill_rect(patch, x0, y0, x0 + w - 1, y0 + h - 1, rng.uniform());
    }
    for (double& v : patch.pixels) v = std::clamp(v, 0.0, 1.0);
    return patch;
}

} // namespace densemark
