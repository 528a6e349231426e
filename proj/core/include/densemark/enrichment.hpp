#pragma once

#include <densemark/curve.hpp>
#include <densemark/geometry.hpp>
#include <densemark/scheme.hpp>

#include <optional>
#include <string>
#include <vector>

namespace densemark {

/// Sparse annotation: one 2D point per scheme anchor.
struct LandmarkSet {
    std::string scheme_id;
    std::vector<Vec2> points;
};

enum class PointKind { Anchor, Interpolated };

struct EnrichedPoint {
    Vec2 p;
    double t = 0.0;            // soft index: anchor index + j / density
    double normal_angle = 0.0; // radians; NaN for isolated points
    PointKind kind = PointKind::Anchor;
    int component = 0;         // index into the scheme's component list
    int i = 0;                 // source anchor index (global)
    int j = 0;                 // subdivision slot, 0 = the anchor itself
    double confidence = 0.0;   // refinement confidence, 0 until refined

    bool has_normal() const { return !std::isnan(normal_angle); }
    Vec2 normal() const { return {std::cos(normal_angle), std::sin(normal_angle)}; }
};

struct EnrichedLandmarkSet {
    std::string scheme_id;
    int density = 1;
    std::vector<EnrichedPoint> points;

    std::vector<Vec2> coordinates() const;
};

/// Soft index of subdivision slot j under anchor i: i + j/D.
/// Requires 0 <= j < D (throws Error{Contract} otherwise).
double soft_index(int i, int j, int density);

/// Points a component contributes at density D:
///   open (n-1)*D + 1, closed n*D, isolated 1.
int enriched_component_count(const ComponentSpec& spec, int density);
int enriched_count(const ContourScheme& scheme, int density);

/// Fit a curve per non-isolated component of the annotation. Order matches
/// scheme.components. Isolated slots are left empty.
std::vector<std::optional<Curve>> fit_component_curves(
    const LandmarkSet& anchors, const ContourScheme& scheme,
    std::optional<FitKind> fit_override = std::nullopt);

/// Densify a sparse annotation: fit each component's contour and emit anchor
/// points plus D-1 interpolated points per anchor-to-anchor segment (closed
/// components also subdivide the wrap segment). Every output carries its
/// soft index and the contour's unit-normal angle; anchors are copied through
/// bit-exactly. Isolated points pass through with no normal.
EnrichedLandmarkSet initialize_enriched(
    const LandmarkSet& anchors, const ContourScheme& scheme, int density,
    std::optional<FitKind> fit_override = std::nullopt);

} // namespace densemark
