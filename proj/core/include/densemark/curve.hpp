#pragma once

#include <densemark/geometry.hpp>
#include <densemark/scheme.hpp>

#include <span>
#include <vector>

namespace densemark {

enum class CurveKind { Polyline, BSpline };

/// Immutable parametric contour fitted through ordered anchor landmarks.
///
/// Anchors are parameterized uniformly by index: the i-th anchor sits at
/// u = i. Open curves are defined on [0, n-1]; closed curves are periodic
/// with period n (the segment [n-1, n] closes the loop back to anchor 0).
/// Interpolation is exact: eval(i) reproduces the i-th anchor to solver
/// precision (well under 1e-6 px).
///
/// Curves are value types, immutable after fitting, and safe to share
/// across threads.
class Curve {
public:
    /// Fit a curve through `anchors` following the component's fit kind.
    ///
    /// Line fits produce a polyline. Spline fits produce an interpolating
    /// b-spline: clamped with averaged knots for open components, periodic
    /// (uniform knots, cubic) for closed ones, so loops have no seam in
    /// value or derivative.
    ///
    /// Throws Error{Config} for too few anchors and Error{Geometry} when all
    /// anchors coincide.
    static Curve fit(std::span<const Vec2> anchors, const ComponentSpec& spec);

    Vec2 eval(double u) const;

    /// Tangent dC/du. Polylines use the segment direction; at an interior
    /// polyline vertex the two adjacent segment directions are averaged, at
    /// an open endpoint the single adjacent segment is used.
    /// Throws Error{Geometry} if the tangent is degenerate.
    Vec2 derivative(double u) const;

    /// Unit normal at u: the tangent rotated 90 degrees, with the sign chosen
    /// to point away from `orientation_hint`.
    Vec2 unit_normal(double u, const Vec2& orientation_hint) const;

    CurveKind kind() const { return kind_; }
    bool closed() const { return closed_; }
    int anchor_count() const { return n_anchors_; }
    int degree() const { return degree_; }
    double u_min() const { return 0.0; }
    double u_max() const { return closed_ ? n_anchors_ : n_anchors_ - 1; }

    const std::vector<Vec2>& control_points() const { return ctrl_; }
    const std::vector<double>& knots() const { return knots_; }

    /// Dense polyline sampling with approximately `step` pixels of arc
    /// between consecutive samples. Used by the edge metrics.
    std::vector<Vec2> densify(double step) const;

private:
    Curve() = default;

    double wrap_or_check(double u) const;
    Vec2 eval_bspline_open(double u) const;
    Vec2 deriv_bspline_open(double u) const;
    Vec2 eval_bspline_periodic(double u) const;
    Vec2 deriv_bspline_periodic(double u) const;

    CurveKind kind_ = CurveKind::Polyline;
    bool closed_ = false;
    int n_anchors_ = 0;
    int degree_ = 1;
    std::vector<Vec2> anchors_;   // polyline vertices (also kept for splines)
    std::vector<Vec2> ctrl_;      // b-spline control points
    std::vector<double> knots_;   // clamped knot vector (open splines only)
};

} // namespace densemark
