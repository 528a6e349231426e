#pragma once

#include <densemark/enrichment.hpp>
#include <densemark/image.hpp>
#include <densemark/metrics.hpp>
#include <densemark/rng.hpp>
#include <densemark/scheme.hpp>

#include <filesystem>
#include <vector>

namespace densemark {

/// Analytic contour backing one scheme component: an elliptical arc (full
/// boundary for closed components). The rendered image carries a smooth
/// intensity step across it, so the exact curve is known in closed form.
struct SceneContour {
    Vec2 center;
    double rx = 1.0, ry = 1.0;
    double rotation = 0.0;       // radians
    double phi0 = 0.0, phi1 = 0.0;  // annotated angular span (phi1 > phi0)
    bool closed = false;
    double contrast = 0.5;       // signed step height of the filled region
    double blur_sigma = 1.0;     // edge softness, px

    /// Point at local parameter s: closed maps [0, n) anchors across the full
    /// turn, open maps [0, n-1] across [phi0, phi1].
    Vec2 point_at_angle(double phi) const;
    Vec2 outward_normal_at_angle(double phi) const;
    double angle_of_local_param(double s, int anchor_count) const;

    /// First-order signed distance (negative inside).
    double signed_distance(const Vec2& p) const;
};

/// Pure geometry of a scene: everything eval needs, without pixels.
/// Round-trips through the oracle JSON file written next to each rendered
/// scene.
struct SceneGeometry {
    std::string scheme_id;
    int canvas = 512;
    double reference_face_size = 512.0;
    std::vector<SceneContour> contours;  // one per non-isolated component, in order

    LandmarkSet anchors(const ContourScheme& scheme) const;

    /// Exact dense ground truth for any density (counts match enrichment).
    std::vector<Vec2> oracle_points(const ContourScheme& scheme, int density) const;

    /// Dense polylines per component for point-to-curve metrics.
    std::vector<EdgeCurve> oracle_curves(const ContourScheme& scheme, double step = 0.25) const;

    /// curve index per oracle point (-1 for isolated), aligned with
    /// oracle_points at the same density.
    std::vector<int> curve_of_point(const ContourScheme& scheme, int density) const;
};

struct SceneConfig {
    int canvas = 512;
    double reference_face_size = 512.0;
    double base_lo = 0.25, base_hi = 0.45;
    double contrast_lo = 0.30, contrast_hi = 0.55;
    double blur_lo = 0.8, blur_hi = 2.2;
    double noise_lo = 0.005, noise_hi = 0.02;
    double margin = 48.0;  // keep contours this far from canvas borders
};

struct SyntheticScene {
    uint64_t seed = 0;
    SceneGeometry geometry;
    FaceImage image;
    LandmarkSet anchors;
};

/// Deterministic scene per (seed, config, scheme): one elliptical contour per
/// non-isolated component, placed on a horizontal row, rendered as smooth
/// steps plus Gaussian pixel noise. Anchors lie exactly on the analytic
/// contours. Throws Error{Config} for schemes with isolated components or
/// when the canvas cannot hold the layout.
SyntheticScene generate_scene(uint64_t seed, const SceneConfig& config,
                              const ContourScheme& scheme);

/// Oracle JSON round-trip for a scene's geometry.
void write_scene_oracle(const std::filesystem::path& path, const SceneGeometry& geometry);
SceneGeometry read_scene_oracle(const std::filesystem::path& path);

} // namespace densemark
