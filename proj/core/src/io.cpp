#include <densemark/io.hpp>

#include <densemark/error.hpp>

#include <json.hpp>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace densemark {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("cannot open " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw parse_error("cannot open " + path.string() + " for writing");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!os) throw parse_error("failed writing " + path.string());
}

// Shortest round-trip decimal form.
std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

struct LineReader {
    std::string_view text;
    size_t pos = 0;
    int line_no = 0;

    bool next(std::string_view& line) {
        if (pos >= text.size()) return false;
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;
        ++line_no;
        return true;
    }
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void pts_fail(int line, const std::string& msg) {
    throw parse_error("pts line " + std::to_string(line) + ": " + msg);
}

} // namespace

// ---------------------------------------------------------------------------
// pts annotations
// ---------------------------------------------------------------------------

PtsAnnotation parse_pts(std::string_view text) {
    LineReader rd{text};
    std::string_view line;

    auto next_content = [&](std::string_view& out) {
        while (rd.next(out)) {
            out = trim(out);
            if (!out.empty()) return true;
        }
        return false;
    };

    PtsAnnotation ann;
    if (!next_content(line) || !line.starts_with("version:"))
        pts_fail(rd.line_no, "expected 'version:' header");
    {
        auto v = trim(line.substr(8));
        auto res = std::from_chars(v.data(), v.data() + v.size(), ann.version);
        if (res.ec != std::errc{}) pts_fail(rd.line_no, "bad version number");
    }

    int n_points = -1;
    if (!next_content(line) || !line.starts_with("n_points:"))
        pts_fail(rd.line_no, "expected 'n_points:' header");
    {
        auto v = trim(line.substr(9));
        auto res = std::from_chars(v.data(), v.data() + v.size(), n_points);
        if (res.ec != std::errc{} || n_points < 1) pts_fail(rd.line_no, "bad n_points value");
    }

    if (!next_content(line) || line != "{") pts_fail(rd.line_no, "expected '{'");

    ann.points.reserve(n_points);
    bool closed = false;
    while (next_content(line)) {
        if (line == "}") {
            closed = true;
            break;
        }
        std::istringstream ls{std::string(line)};
        double x, y;
        if (!(ls >> x >> y)) pts_fail(rd.line_no, "expected 'x y' coordinate pair");
        std::string rest;
        if (ls >> rest) pts_fail(rd.line_no, "trailing content after coordinates");
        if (!std::isfinite(x) || !std::isfinite(y)) pts_fail(rd.line_no, "non-finite coordinate");
        ann.points.push_back({x, y});
    }
    if (!closed) pts_fail(rd.line_no, "missing closing '}'");
    if (static_cast<int>(ann.points.size()) != n_points)
        pts_fail(rd.line_no, "n_points says " + std::to_string(n_points) + " but found " +
                                 std::to_string(ann.points.size()));
    return ann;
}

std::string format_pts(const PtsAnnotation& ann) {
    std::ostringstream os;
    os << "version: " << ann.version << "\n";
    os << "n_points: " << ann.points.size() << "\n{\n";
    for (const auto& p : ann.points)
        os << format_double(p.x) << " " << format_double(p.y) << "\n";
    os << "}\n";
    return os.str();
}

PtsAnnotation load_pts(const std::filesystem::path& path) {
    try {
        return parse_pts(read_file(path));
    } catch (const Error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
}

void save_pts(const std::filesystem::path& path, const PtsAnnotation& ann) {
    write_file(path, format_pts(ann));
}

// ---------------------------------------------------------------------------
// Scheme files
// ---------------------------------------------------------------------------

ContourScheme parse_scheme_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw validation_error(origin + ": " + e.what());
    }
    try {
        ContourScheme scheme;
        scheme.scheme_id = j.at("scheme").get<std::string>();
        for (const auto& jc : j.at("components")) {
            ComponentSpec c;
            c.name = jc.at("name").get<std::string>();
            c.first = jc.at("range").at(0).get<int>();
            c.last = jc.at("range").at(1).get<int>();
            c.closed = jc.value("closed", false);
            c.isolated = jc.value("isolated", false);
            std::string fit = jc.value("fit", std::string("bspline"));
            if (fit == "line")
                c.fit = FitKind::Line;
            else if (fit == "bspline")
                c.fit = FitKind::BSpline;
            else
                throw validation_error(origin + ": component '" + c.name + "': unknown fit '" + fit + "'");
            c.degree = jc.value("degree", 3);
            scheme.components.push_back(std::move(c));
        }
        if (j.contains("outer_eye_corners")) {
            scheme.outer_eye_right = j["outer_eye_corners"].at(0).get<int>();
            scheme.outer_eye_left = j["outer_eye_corners"].at(1).get<int>();
        }
        if (j.contains("inner_eye_corners")) {
            scheme.inner_eye_right = j["inner_eye_corners"].at(0).get<int>();
            scheme.inner_eye_left = j["inner_eye_corners"].at(1).get<int>();
        }
        try {
            scheme.validate();
        } catch (const Error& e) {
            throw validation_error(origin + ": " + e.what());
        }
        return scheme;
    } catch (const json::exception& e) {
        throw validation_error(origin + ": " + e.what());
    }
}

ContourScheme load_scheme(const std::filesystem::path& path) {
    return parse_scheme_json(read_file(path), path.string());
}

std::filesystem::path resolve_scheme_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    fs::path direct(name_or_path);
    if (fs::exists(direct)) return direct;

    std::vector<fs::path> roots;
    if (const char* env = std::getenv("DENSEMARK_DATA_ROOT")) roots.emplace_back(env);
#ifdef DENSEMARK_INSTALL_DATADIR
    roots.emplace_back(DENSEMARK_INSTALL_DATADIR);
#endif
    for (const auto& root : roots) {
        fs::path candidate = root / "schemes" / (name_or_path + ".json");
        if (fs::exists(candidate)) return candidate;
    }
    throw usage_error("cannot resolve scheme '" + name_or_path +
                      "' (not a file, not under $DENSEMARK_DATA_ROOT/schemes)");
}

// ---------------------------------------------------------------------------
// Enriched landmark files
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kEnrichedFormat = "densemark-enriched";
constexpr int kEnrichedVersion = 1;
} // namespace

void write_enriched(const std::filesystem::path& path, const EnrichedLandmarkSet& set) {
    json j;
    j["format"] = kEnrichedFormat;
    j["version"] = kEnrichedVersion;
    j["scheme"] = set.scheme_id;
    j["density"] = set.density;
    json pts = json::array();
    for (const auto& q : set.points) {
        json jp;
        jp["x"] = q.p.x;
        jp["y"] = q.p.y;
        jp["t"] = q.t;
        jp["kind"] = q.kind == PointKind::Anchor ? "anchor" : "interpolated";
        jp["component"] = q.component;
        jp["confidence"] = q.confidence;
        pts.push_back(std::move(jp));
    }
    j["points"] = std::move(pts);
    write_file(path, j.dump(2) + "\n");
}

EnrichedLandmarkSet read_enriched(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kEnrichedFormat)
            throw validation_error(path.string() + ": not an enriched landmark file");
        if (j.at("version").get<int>() != kEnrichedVersion)
            throw validation_error(path.string() + ": unsupported version");
        EnrichedLandmarkSet set;
        set.scheme_id = j.at("scheme").get<std::string>();
        set.density = j.at("density").get<int>();
        if (set.density < 1) throw validation_error(path.string() + ": density must be >= 1");
        for (const auto& jp : j.at("points")) {
            EnrichedPoint q;
            q.p.x = jp.at("x").get<double>();
            q.p.y = jp.at("y").get<double>();
            q.t = jp.at("t").get<double>();
            std::string kind = jp.at("kind").get<std::string>();
            if (kind == "anchor")
                q.kind = PointKind::Anchor;
            else if (kind == "interpolated")
                q.kind = PointKind::Interpolated;
            else
                throw validation_error(path.string() + ": unknown point kind '" + kind + "'");
            q.component = jp.at("component").get<int>();
            q.confidence = jp.value("confidence", 0.0);
            q.normal_angle = std::numeric_limits<double>::quiet_NaN();
            q.i = static_cast<int>(std::floor(q.t));
            q.j = static_cast<int>(std::lround((q.t - q.i) * set.density));
            set.points.push_back(q);
        }
        return set;
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
}

void validate_enriched(const EnrichedLandmarkSet& set, const ContourScheme& scheme) {
    if (set.scheme_id != scheme.scheme_id)
        throw validation_error("enriched set targets scheme '" + set.scheme_id +
                               "', expected '" + scheme.scheme_id + "'");
    int expected = enriched_count(scheme, set.density);
    if (static_cast<int>(set.points.size()) != expected)
        throw validation_error("enriched set has " + std::to_string(set.points.size()) +
                               " points, scheme expects " + std::to_string(expected) +
                               " at density " + std::to_string(set.density));
}

// ---------------------------------------------------------------------------
// Measure definitions
// ---------------------------------------------------------------------------

std::vector<MeasureDef> load_measures(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    std::vector<MeasureDef> defs;
    try {
        for (const auto& jm : j.at("measures")) {
            MeasureDef d;
            d.name = jm.at("name").get<std::string>();
            std::string kind = jm.at("kind").get<std::string>();
            if (kind == "angle")
                d.kind = MeasureKind::Angle;
            else if (kind == "area")
                d.kind = MeasureKind::PolygonArea;
            else if (kind == "area_ratio")
                d.kind = MeasureKind::AreaRatio;
            else if (kind == "distance")
                d.kind = MeasureKind::Distance;
            else
                throw validation_error(path.string() + ": unknown measure kind '" + kind + "'");
            d.indices = jm.at("indices").get<std::vector<int>>();
            if (jm.contains("indices_b")) d.indices_b = jm["indices_b"].get<std::vector<int>>();
            defs.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    return defs;
}

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

namespace {

FaceImage decode_pgm(const std::string& data, const std::string& origin) {
    std::istringstream is(data);
    std::string magic;
    is >> magic;
    bool ascii = magic == "P2";
    if (magic != "P5" && magic != "P2") throw parse_error(origin + ": not a PGM file");

    auto next_token = [&is, &origin]() {
        std::string tok;
        while (is >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(is, rest);
                continue;
            }
            return tok;
        }
        throw parse_error(origin + ": truncated PGM header");
    };

    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw parse_error(origin + ": bad PGM dimensions");

    FaceImage img(w, h);
    size_t count = static_cast<size_t>(w) * h;
    if (ascii) {
        for (size_t i = 0; i < count; ++i) {
            long v = std::stol(next_token());
            img.pixels[i] = static_cast<float>(v) / maxval;
        }
    } else {
        is.get();  // single whitespace after maxval
        int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes);
        is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!is) throw parse_error(origin + ": truncated PGM pixel data");
        for (size_t i = 0; i < count; ++i) {
            unsigned v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
            img.pixels[i] = static_cast<float>(v) / maxval;
        }
    }
    return img;
}

FaceImage decode_png(const std::filesystem::path& path) {
    FILE* fp = std::fopen(path.string().c_str(), "rb");
    if (!fp) throw parse_error("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw parse_error("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw parse_error(path.string() + ": PNG decode failed");
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int channels = png_get_channels(png, info);
    std::vector<unsigned char> row(static_cast<size_t>(w) * channels);
    FaceImage img(static_cast<int>(w), static_cast<int>(h));
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            float v;
            if (channels >= 3) {
                // fixed luma weights at ingestion
                v = (0.299f * row[x * channels] + 0.587f * row[x * channels + 1] +
                     0.114f * row[x * channels + 2]) / 255.0f;
            } else {
                v = row[x * channels] / 255.0f;
            }
            img.at(static_cast<int>(x), static_cast<int>(y)) = v;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

} // namespace

FaceImage load_image(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".pgm") return decode_pgm(read_file(path), path.string());
    if (ext == ".png") return decode_png(path);
    throw usage_error("unsupported image format '" + ext + "' (use .pgm or .png)");
}

void save_pgm(const std::filesystem::path& path, const FaceImage& image) {
    std::ostringstream os;
    os << "P5\n" << image.width << " " << image.height << "\n255\n";
    std::string header = os.str();
    std::string data = header;
    data.reserve(header.size() + image.pixels.size());
    for (float v : image.pixels) {
        int b = static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
        data.push_back(static_cast<char>(static_cast<unsigned char>(b)));
    }
    write_file(path, data);
}

void save_png(const std::filesystem::path& path, const FaceImage& image) {
    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw parse_error("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw parse_error("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw parse_error(path.string() + ": PNG encode failed");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<unsigned char> row(image.width);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x)
            row[x] = static_cast<unsigned char>(
                std::lround(std::clamp(image.at(x, y), 0.0f, 1.0f) * 255.0f));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void save_image(const std::filesystem::path& path, const FaceImage& image) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png")
        save_png(path, image);
    else
        save_pgm(path, image);
}

} // namespace densemark
