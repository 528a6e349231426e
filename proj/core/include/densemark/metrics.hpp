#pragma once

#include <densemark/geometry.hpp>
#include <densemark/scheme.hpp>

#include <span>
#include <string>
#include <vector>

namespace densemark {

/// Ground-truth edge as a dense polyline (arc step <= 0.25 px for metric
/// accuracy); `closed` adds the wrap segment.
struct EdgeCurve {
    std::vector<Vec2> pts;
    bool closed = false;
};

/// Exact minimum distance from p to the polyline (per-segment projection).
double point_to_polyline(const Vec2& p, const EdgeCurve& edge);

/// Mean L2 distance between paired points, pixels.
double mean_error(std::span<const Vec2> predicted, std::span<const Vec2> truth);

/// mean_error / d. d must be positive (inter-ocular distance by convention).
double nme_point(std::span<const Vec2> predicted, std::span<const Vec2> truth, double d);

/// Inter-ocular distance from the scheme's outer eye corner indices over the
/// ground-truth anchors. Throws Error{Annotation} when corners coincide and
/// Error{Config} when the scheme defines no corners.
double interocular_distance(std::span<const Vec2> truth_anchors, const ContourScheme& scheme);

/// Point-to-curve mean error, normalized by d. `curve_of_point[i]` selects
/// the ground-truth edge of landmark i, or -1 for isolated landmarks, which
/// fall back to the point-to-point term.
double nme_edge(std::span<const Vec2> predicted, std::span<const Vec2> truth,
                std::span<const EdgeCurve> curves, std::span<const int> curve_of_point,
                double d);

// ---------------------------------------------------------------------------
// Morphometric measures
// ---------------------------------------------------------------------------

enum class MeasureKind { Angle, PolygonArea, AreaRatio, Distance };

/// Configurable measure over landmark indices. Angle: {ray_end, apex,
/// ray_end}; PolygonArea / Distance: the participating indices; AreaRatio:
/// indices (numerator polygon) vs indices_b (denominator polygon).
struct MeasureDef {
    std::string name;
    MeasureKind kind = MeasureKind::Distance;
    std::vector<int> indices;
    std::vector<int> indices_b;
};

struct MeasureValue {
    std::string name;
    double value = 0.0;
    bool warning = false;  // e.g. self-intersecting polygon
    std::string note;
};

/// Evaluate measures on a landmark vector. Angles come back in degrees;
/// lengths are divided by unit_length, areas by unit_length squared, ratios
/// are dimensionless.
std::vector<MeasureValue> morphometrics(std::span<const Vec2> landmarks,
                                        std::span<const MeasureDef> defs,
                                        double unit_length);

/// Mean absolute percentage error; zero references are excluded (count
/// reported through `excluded` when given).
double mape(std::span<const double> predicted, std::span<const double> reference,
            int* excluded = nullptr);

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct EvalRow {
    std::string name;
    int count = 0;
    double me = 0.0;
    double nme_point = 0.0;
    double nme_edge = -1.0;  // -1 when no edge ground truth is available
};

struct EvalReport {
    double normalization_distance = 0.0;
    int sample_count = 0;  // evaluated annotation files
    std::vector<EvalRow> per_component;
    EvalRow overall;
    std::vector<MeasureValue> measures_predicted;
    std::vector<MeasureValue> measures_reference;
    double measures_mape = -1.0;

    std::string to_table() const;
};

} // namespace densemark
