#pragma once

#include <string>
#include <vector>

namespace densemark {

enum class FitKind { Line, BSpline };

/// One semantic landmark group (face contour, an eye, a lip loop, ...) with
/// its inclusive anchor index range in the full landmark vector.
struct ComponentSpec {
    std::string name;
    int first = 0;
    int last = 0;
    bool closed = false;    // loop components wrap last -> first
    bool isolated = false;  // single point with no contour (pupils)
    FitKind fit = FitKind::BSpline;
    int degree = 3;

    int size() const { return last - first + 1; }
    bool contains(int index) const { return index >= first && index <= last; }
};

/// Declarative layout of a complete landmark set.
///
/// Scheme definitions ship as JSON data files (one per scheme); see
/// io.hpp::load_scheme and docs/formats.md.
struct ContourScheme {
    std::string scheme_id;
    std::vector<ComponentSpec> components;

    // Normalization landmarks. Outer eye corners define the inter-ocular
    // distance used by the normalized point/edge metrics; inner corners give
    // the unit length of the morphometric measures. -1 when not applicable.
    int outer_eye_right = -1;
    int outer_eye_left = -1;
    int inner_eye_right = -1;
    int inner_eye_left = -1;

    int total_points() const;

    /// Component owning the given anchor index, or nullptr.
    const ComponentSpec* component_of(int index) const;
    int component_index_of(int index) const;

    /// Throws Error{Config} unless the component ranges are disjoint, cover
    /// 0..n-1, and every per-component invariant holds.
    void validate() const;
};

} // namespace densemark
