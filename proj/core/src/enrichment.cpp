#include <densemark/enrichment.hpp>

#include <densemark/error.hpp>

#include <cmath>
#include <limits>

namespace densemark {

std::vector<Vec2> EnrichedLandmarkSet::coordinates() const {
    std::vector<Vec2> out;
    out.reserve(points.size());
    for (const auto& q : points) out.push_back(q.p);
    return out;
}

double soft_index(int i, int j, int density) {
    if (density < 1) throw config_error("density must be >= 1");
    if (j < 0 || j >= density)
        throw contract_error("subdivision slot " + std::to_string(j) +
                             " outside [0, " + std::to_string(density) + ")");
    return i + static_cast<double>(j) / density;
}

int enriched_component_count(const ComponentSpec& spec, int density) {
    if (spec.isolated) return 1;
    if (spec.closed) return spec.size() * density;
    return (spec.size() - 1) * density + 1;
}

int enriched_count(const ContourScheme& scheme, int density) {
    if (density < 1) throw config_error("density must be >= 1");
    int n = 0;
    for (const auto& c : scheme.components) n += enriched_component_count(c, density);
    return n;
}

std::vector<std::optional<Curve>> fit_component_curves(
    const LandmarkSet& anchors, const ContourScheme& scheme,
    std::optional<FitKind> fit_override) {
    if (static_cast<int>(anchors.points.size()) != scheme.total_points())
        throw config_error("annotation has " + std::to_string(anchors.points.size()) +
                           " points, scheme '" + scheme.scheme_id + "' expects " +
                           std::to_string(scheme.total_points()));
    std::vector<std::optional<Curve>> curves(scheme.components.size());
    for (size_t k = 0; k < scheme.components.size(); ++k) {
        ComponentSpec spec = scheme.components[k];
        if (spec.isolated) continue;
        if (fit_override) spec.fit = *fit_override;
        std::span<const Vec2> pts(anchors.points.data() + spec.first, spec.size());
        curves[k] = Curve::fit(pts, spec);
    }
    return curves;
}

EnrichedLandmarkSet initialize_enriched(const LandmarkSet& anchors,
                                        const ContourScheme& scheme, int density,
                                        std::optional<FitKind> fit_override) {
    if (density < 1) throw config_error("density must be >= 1");
    scheme.validate();
    auto curves = fit_component_curves(anchors, scheme, fit_override);

    // Sign hints: closed components point away from their own centroid,
    // open ones away from the whole-annotation centroid.
    Vec2 face_centroid = centroid(anchors.points);

    EnrichedLandmarkSet out;
    out.scheme_id = scheme.scheme_id;
    out.density = density;
    out.points.reserve(enriched_count(scheme, density));

    for (size_t k = 0; k < scheme.components.size(); ++k) {
        const ComponentSpec& spec = scheme.components[k];
        if (spec.isolated) {
            EnrichedPoint q;
            q.p = anchors.points[spec.first];
            q.t = spec.first;
            q.normal_angle = std::numeric_limits<double>::quiet_NaN();
            q.kind = PointKind::Anchor;
            q.component = static_cast<int>(k);
            q.i = spec.first;
            q.j = 0;
            out.points.push_back(q);
            continue;
        }

        const Curve& curve = *curves[k];
        std::span<const Vec2> comp_pts(anchors.points.data() + spec.first, spec.size());
        Vec2 hint = spec.closed ? centroid(comp_pts) : face_centroid;

        int segments = spec.closed ? spec.size() : spec.size() - 1;
        auto emit = [&](int local_i, int j) {
            double u = local_i + static_cast<double>(j) / density;
            EnrichedPoint q;
            // The anchor itself is copied through so j=0 outputs match the
            // input bit for bit; the curve is only sampled between anchors.
            q.p = (j == 0) ? anchors.points[spec.first + local_i] : curve.eval(u);
            q.t = soft_index(spec.first + local_i, j, density);
            Vec2 n = curve.unit_normal(u, hint);
            q.normal_angle = std::atan2(n.y, n.x);
            q.kind = (j == 0) ? PointKind::Anchor : PointKind::Interpolated;
            q.component = static_cast<int>(k);
            q.i = spec.first + local_i;
            q.j = j;
            out.points.push_back(q);
        };

        for (int local_i = 0; local_i < segments; ++local_i)
            for (int j = 0; j < density; ++j) emit(local_i, j);
        if (!spec.closed) emit(spec.size() - 1, 0);
    }
    return out;
}

} // namespace densemark
