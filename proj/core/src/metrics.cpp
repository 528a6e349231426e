#include <densemark/metrics.hpp>

#include <densemark/error.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace densemark {

double point_to_polyline(const Vec2& p, const EdgeCurve& edge) {
    size_t n = edge.pts.size();
    if (n == 0) throw contract_error("point_to_polyline: empty edge");
    if (n == 1) return distance(p, edge.pts[0]);
    double best = std::numeric_limits<double>::infinity();
    size_t segs = edge.closed ? n : n - 1;
    for (size_t i = 0; i < segs; ++i) {
        const Vec2& a = edge.pts[i];
        const Vec2& b = edge.pts[(i + 1) % n];
        best = std::min(best, point_segment_dist_sq(p, a, b));
    }
    return std::sqrt(best);
}

double mean_error(std::span<const Vec2> predicted, std::span<const Vec2> truth) {
    if (predicted.size() != truth.size())
        throw contract_error("mean_error: length mismatch (" + std::to_string(predicted.size()) +
                             " vs " + std::to_string(truth.size()) + ")");
    if (predicted.empty()) throw contract_error("mean_error: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) acc += distance(predicted[i], truth[i]);
    return acc / static_cast<double>(predicted.size());
}

double nme_point(std::span<const Vec2> predicted, std::span<const Vec2> truth, double d) {
    if (d <= 0.0) throw annotation_error("normalization distance must be positive");
    return mean_error(predicted, truth) / d;
}

double interocular_distance(std::span<const Vec2> truth_anchors, const ContourScheme& scheme) {
    if (scheme.outer_eye_right < 0 || scheme.outer_eye_left < 0)
        throw config_error("scheme '" + scheme.scheme_id + "' defines no outer eye corners");
    if (scheme.outer_eye_right >= static_cast<int>(truth_anchors.size()) ||
        scheme.outer_eye_left >= static_cast<int>(truth_anchors.size()))
        throw contract_error("annotation shorter than the scheme's eye corner indices");
    double d = distance(truth_anchors[scheme.outer_eye_right], truth_anchors[scheme.outer_eye_left]);
    if (d <= 1e-12)
        throw annotation_error("coincident outer eye corners; cannot normalize");
    return d;
}

double nme_edge(std::span<const Vec2> predicted, std::span<const Vec2> truth,
                std::span<const EdgeCurve> curves, std::span<const int> curve_of_point,
                double d) {
    if (d <= 0.0) throw annotation_error("normalization distance must be positive");
    if (predicted.size() != truth.size() || predicted.size() != curve_of_point.size())
        throw contract_error("nme_edge: length mismatch");
    if (predicted.empty()) throw contract_error("nme_edge: empty input");
    double acc = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        int ci = curve_of_point[i];
        if (ci < 0) {
            acc += distance(predicted[i], truth[i]);
        } else {
            if (ci >= static_cast<int>(curves.size()))
                throw config_error("nme_edge: landmark " + std::to_string(i) +
                                   " references missing curve " + std::to_string(ci));
            acc += point_to_polyline(predicted[i], curves[ci]);
        }
    }
    return acc / (static_cast<double>(predicted.size()) * d);
}

// ---------------------------------------------------------------------------
// Morphometrics
// ---------------------------------------------------------------------------

namespace {

double polygon_signed_area(std::span<const Vec2> poly) {
    double acc = 0.0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return cross(q - p, r - p);
    };
    double o1 = orient(a, b, c), o2 = orient(a, b, d);
    double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

bool polygon_self_intersects(std::span<const Vec2> poly) {
    size_t n = poly.size();
    if (n < 4) return false;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent segments (shared endpoint)
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
                return true;
        }
    return false;
}

std::vector<Vec2> gather(std::span<const Vec2> landmarks, const std::vector<int>& idx) {
    std::vector<Vec2> out;
    out.reserve(idx.size());
    for (int i : idx) {
        if (i < 0 || i >= static_cast<int>(landmarks.size()))
            throw config_error("measure index " + std::to_string(i) + " out of range");
        out.push_back(landmarks[i]);
    }
    return out;
}

} // namespace

std::vector<MeasureValue> morphometrics(std::span<const Vec2> landmarks,
                                        std::span<const MeasureDef> defs,
                                        double unit_length) {
    if (unit_length <= 0.0) throw annotation_error("morphometrics: unit length must be positive");
    std::vector<MeasureValue> out;
    out.reserve(defs.size());
    for (const auto& def : defs) {
        MeasureValue mv;
        mv.name = def.name;
        switch (def.kind) {
        case MeasureKind::Angle: {
            if (def.indices.size() != 3)
                throw config_error("angle measure '" + def.name + "' needs 3 indices (end, apex, end)");
            auto pts = gather(landmarks, def.indices);
            Vec2 r1 = pts[0] - pts[1], r2 = pts[2] - pts[1];
            double n1 = norm(r1), n2 = norm(r2);
            if (n1 < 1e-12 || n2 < 1e-12) {
                mv.warning = true;
                mv.note = "degenerate rays";
                break;
            }
            double c = std::clamp(dot(r1, r2) / (n1 * n2), -1.0, 1.0);
            mv.value = std::acos(c) * 180.0 / 3.14159265358979323846;
            break;
        }
        case MeasureKind::PolygonArea: {
            auto poly = gather(landmarks, def.indices);
            if (poly.size() < 3) throw config_error("area measure '" + def.name + "' needs >= 3 indices");
            mv.value = std::abs(polygon_signed_area(poly)) / (unit_length * unit_length);
            if (polygon_self_intersects(poly)) {
                mv.warning = true;
                mv.note = "self-intersecting polygon";
            }
            break;
        }
        case MeasureKind::AreaRatio: {
            auto pa = gather(landmarks, def.indices);
            auto pb = gather(landmarks, def.indices_b);
            if (pa.size() < 3 || pb.size() < 3)
                throw config_error("ratio measure '" + def.name + "' needs two polygons");
            double hb = std::abs(polygon_signed_area(pb));
            if (hb < 1e-12) {
                mv.warning = true;
                mv.note = "degenerate denominator polygon";
                break;
            }
            mv.value = std::abs(polygon_signed_area(pa)) / hb;
            if (polygon_self_intersects(pa) || polygon_self_intersects(pb)) {
                mv.warning = true;
                mv.note = "self-intersecting polygon";
            }
            break;
        }
        case MeasureKind::Distance: {
            if (def.indices.size() != 2)
                throw config_error("distance measure '" + def.name + "' needs 2 indices");
            auto pts = gather(landmarks, def.indices);
            mv.value = distance(pts[0], pts[1]) / unit_length;
            break;
        }
        }
        out.push_back(std::move(mv));
    }
    return out;
}

double mape(std::span<const double> predicted, std::span<const double> reference, int* excluded) {
    if (predicted.size() != reference.size()) throw contract_error("mape: length mismatch");
    double acc = 0.0;
    int used = 0, skipped = 0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        if (reference[i] == 0.0) {
            ++skipped;
            continue;
        }
        acc += std::abs(predicted[i] - reference[i]) / std::abs(reference[i]);
        ++used;
    }
    if (excluded) *excluded = skipped;
    if (used == 0) throw contract_error("mape: all references are zero");
    return acc / used * 100.0;
}

std::string EvalReport::to_table() const {
    std::ostringstream os;
    os << std::fixed;
    os << "component                 count        ME   NME_point    NME_edge\n";
    auto row = [&os](const EvalRow& r) {
        os << std::left << std::setw(22) << r.name << std::right << std::setw(9) << r.count
           << std::setw(10) << std::setprecision(4) << r.me
           << std::setw(12) << std::setprecision(5) << r.nme_point;
        if (r.nme_edge >= 0.0)
            os << std::setw(12) << std::setprecision(5) << r.nme_edge;
        else
            os << std::setw(12) << "-";
        os << "\n";
    };
    for (const auto& r : per_component) row(r);
    row(overall);
    os << "normalization d = " << std::setprecision(3) << normalization_distance
       << " px over " << sample_count << " annotation(s)\n";
    if (measures_mape >= 0.0)
        os << "morphometric MAPE = " << std::setprecision(3) << measures_mape << " %\n";
    return os.str();
}

} // namespace densemark
