#include <densemark/synthetic.hpp>

#include <densemark/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace densemark {

using nlohmann::json;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
} // namespace

Vec2 SceneContour::point_at_angle(double phi) const {
    double cx = rx * std::cos(phi), cy = ry * std::sin(phi);
    double cr = std::cos(rotation), sr = std::sin(rotation);
    return {center.x + cx * cr - cy * sr, center.y + cx * sr + cy * cr};
}

Vec2 SceneContour::outward_normal_at_angle(double phi) const {
    // gradient of the implicit form, rotated back to image coordinates
    double gx = std::cos(phi) / rx, gy = std::sin(phi) / ry;
    double cr = std::cos(rotation), sr = std::sin(rotation);
    Vec2 g{gx * cr - gy * sr, gx * sr + gy * cr};
    return normalized(g);
}

double SceneContour::angle_of_local_param(double s, int anchor_count) const {
    if (closed) return phi0 + kTwoPi * s / anchor_count;
    return phi0 + (phi1 - phi0) * s / (anchor_count - 1);
}

double SceneContour::signed_distance(const Vec2& p) const {
    double cr = std::cos(rotation), sr = std::sin(rotation);
    double dx = p.x - center.x, dy = p.y - center.y;
    double X = dx * cr + dy * sr;
    double Y = -dx * sr + dy * cr;
    double rho = std::sqrt((X / rx) * (X / rx) + (Y / ry) * (Y / ry));
    double gx = X / (rx * rx), gy = Y / (ry * ry);
    double gn = std::sqrt(gx * gx + gy * gy);
    if (gn < 1e-12) return -std::min(rx, ry);  // at the center: deep inside
    return (rho - 1.0) * rho / gn;
}

LandmarkSet SceneGeometry::anchors(const ContourScheme& scheme) const {
    LandmarkSet set;
    set.scheme_id = scheme.scheme_id;
    set.points.resize(scheme.total_points());
    size_t ci = 0;
    for (const auto& comp : scheme.components) {
        if (comp.isolated)
            throw config_error("synthetic scenes do not support isolated components");
        const SceneContour& c = contours.at(ci++);
        for (int a = 0; a < comp.size(); ++a)
            set.points[comp.first + a] = c.point_at_angle(c.angle_of_local_param(a, comp.size()));
    }
    return set;
}

std::vector<Vec2> SceneGeometry::oracle_points(const ContourScheme& scheme, int density) const {
    std::vector<Vec2> pts;
    size_t ci = 0;
    for (const auto& comp : scheme.components) {
        const SceneContour& c = contours.at(ci++);
        int segments = comp.closed ? comp.size() : comp.size() - 1;
        for (int a = 0; a < segments; ++a)
            for (int j = 0; j < density; ++j) {
                double s = a + static_cast<double>(j) / density;
                pts.push_back(c.point_at_angle(c.angle_of_local_param(s, comp.size())));
            }
        if (!comp.closed)
            pts.push_back(c.point_at_angle(c.angle_of_local_param(comp.size() - 1, comp.size())));
    }
    return pts;
}

std::vector<EdgeCurve> SceneGeometry::oracle_curves(const ContourScheme& scheme,
                                                    double step) const {
    std::vector<EdgeCurve> curves;
    size_t ci = 0;
    for (const auto& comp : scheme.components) {
        const SceneContour& c = contours.at(ci++);
        double span = comp.closed ? kTwoPi : (c.phi1 - c.phi0);
        double arc_estimate = std::max(c.rx, c.ry) * std::abs(span);
        int count = std::max(8, static_cast<int>(std::ceil(arc_estimate / step)));
        EdgeCurve e;
        e.closed = comp.closed;
        e.pts.reserve(count);
        int last = comp.closed ? count - 1 : count;  // closed wraps via segment
        double smax = comp.closed ? comp.size() : comp.size() - 1;
        for (int i = 0; i < last; ++i) {
            double s = smax * i / (count - 1);
            e.pts.push_back(c.point_at_angle(c.angle_of_local_param(s, comp.size())));
        }
        curves.push_back(std::move(e));
    }
    return curves;
}

std::vector<int> SceneGeometry::curve_of_point(const ContourScheme& scheme, int density) const {
    std::vector<int> idx;
    int ci = 0;
    for (const auto& comp : scheme.components) {
        int count = enriched_component_count(comp, density);
        for (int i = 0; i < count; ++i) idx.push_back(comp.isolated ? -1 : ci);
        ++ci;
    }
    return idx;
}

SyntheticScene generate_scene(uint64_t seed, const SceneConfig& config,
                              const ContourScheme& scheme) {
    scheme.validate();
    int columns = 0;
    for (const auto& comp : scheme.components) {
        if (comp.isolated)
            throw config_error("synthetic scenes do not support isolated components");
        ++columns;
    }
    double col_width = static_cast<double>(config.canvas) / columns;
    double r_max = col_width / 2.0 - config.margin;
    if (r_max < 20.0)
        throw config_error("canvas too small for " + std::to_string(columns) + " components");

    Rng rng(Rng::derive(seed, 0x5CE11E));

    SyntheticScene scene;
    scene.seed = seed;
    scene.geometry.scheme_id = scheme.scheme_id;
    scene.geometry.canvas = config.canvas;
    scene.geometry.reference_face_size = config.reference_face_size;

    int col = 0;
    for (const auto& comp : scheme.components) {
        SceneContour c;
        double cx = col_width * (col + 0.5);
        c.center = {cx + rng.uniform(-0.05, 0.05) * col_width,
                    config.canvas * (0.5 + rng.uniform(-0.08, 0.08))};
        c.rx = rng.uniform(0.65 * r_max, r_max);
        c.ry = rng.uniform(0.65 * r_max, r_max);
        c.rotation = rng.uniform(0.0, kPi);
        c.closed = comp.closed;
        c.phi0 = rng.uniform(0.0, kTwoPi);
        c.phi1 = c.closed ? c.phi0 + kTwoPi
                          : c.phi0 + rng.uniform(0.75 * kPi, 1.25 * kPi);
        c.contrast = rng.uniform(config.contrast_lo, config.contrast_hi) *
                     (rng.uniform() < 0.5 ? -1.0 : 1.0);
        c.blur_sigma = rng.uniform(config.blur_lo, config.blur_hi);
        scene.geometry.contours.push_back(c);
        ++col;
    }

    double base = rng.uniform(config.base_lo, config.base_hi);
    double noise = rng.uniform(config.noise_lo, config.noise_hi);

    FaceImage img(config.canvas, config.canvas);
    img.reference_face_size = config.reference_face_size;
    for (int y = 0; y < config.canvas; ++y)
        for (int x = 0; x < config.canvas; ++x) {
            double v = base;
            Vec2 p{static_cast<double>(x), static_cast<double>(y)};
            for (const auto& c : scene.geometry.contours) {
                double d = c.signed_distance(p);
                // smooth step centered on the contour: erf profile so the
                // gradient magnitude peaks exactly on the curve
                double z = -d / (c.blur_sigma * 1.4142135623730951);
                v += c.contrast * 0.5 * (1.0 + std::erf(z));
            }
            v += rng.gaussian(0.0, noise);
            img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    scene.image = std::move(img);
    scene.anchors = scene.geometry.anchors(scheme);
    return scene;
}

void write_scene_oracle(const std::filesystem::path& path, const SceneGeometry& geometry) {
    json j;
    j["format"] = "densemark-scene-oracle";
    j["version"] = 1;
    j["scheme"] = geometry.scheme_id;
    j["canvas"] = geometry.canvas;
    j["reference_face_size"] = geometry.reference_face_size;
    json contours = json::array();
    for (const auto& c : geometry.contours) {
        json jc;
        jc["center"] = {c.center.x, c.center.y};
        jc["rx"] = c.rx;
        jc["ry"] = c.ry;
        jc["rotation"] = c.rotation;
        jc["phi0"] = c.phi0;
        jc["phi1"] = c.phi1;
        jc["closed"] = c.closed;
        jc["contrast"] = c.contrast;
        jc["blur_sigma"] = c.blur_sigma;
        contours.push_back(std::move(jc));
    }
    j["contours"] = std::move(contours);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw parse_error("cannot open " + path.string() + " for writing");
    os << j.dump(2) << "\n";
}

SceneGeometry read_scene_oracle(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("cannot open " + path.string());
    json j;
    try {
        is >> j;
        if (j.at("format").get<std::string>() != "densemark-scene-oracle")
            throw validation_error(path.string() + ": not a scene oracle file");
        SceneGeometry g;
        g.scheme_id = j.at("scheme").get<std::string>();
        g.canvas = j.at("canvas").get<int>();
        g.reference_face_size = j.at("reference_face_size").get<double>();
        for (const auto& jc : j.at("contours")) {
            SceneContour c;
            c.center = {jc.at("center").at(0).get<double>(), jc.at("center").at(1).get<double>()};
            c.rx = jc.at("rx").get<double>();
            c.ry = jc.at("ry").get<double>();
            c.rotation = jc.at("rotation").get<double>();
            c.phi0 = jc.at("phi0").get<double>();
            c.phi1 = jc.at("phi1").get<double>();
            c.closed = jc.at("closed").get<bool>();
            c.contrast = jc.at("contrast").get<double>();
            c.blur_sigma = jc.at("blur_sigma").get<double>();
            g.contours.push_back(c);
        }
        return g;
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
}

} // namespace densemark
