#pragma once

#include <densemark/enrichment.hpp>
#include <densemark/image.hpp>
#include <densemark/metrics.hpp>
#include <densemark/scheme.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace densemark {

/// Standard landmark text annotation ("version:", "n_points:", braces block).
struct PtsAnnotation {
    int version = 1;
    std::vector<Vec2> points;
};

/// Parse the text format; throws Error{Parse} with a line number on
/// malformed input or a count mismatch. Coordinates are kept verbatim
/// (0-based pixel positions; the format itself is index-free).
PtsAnnotation parse_pts(std::string_view text);
std::string format_pts(const PtsAnnotation& ann);
PtsAnnotation load_pts(const std::filesystem::path& path);
void save_pts(const std::filesystem::path& path, const PtsAnnotation& ann);

/// Scheme data files (JSON, one per scheme); validates on load.
ContourScheme load_scheme(const std::filesystem::path& path);
ContourScheme parse_scheme_json(const std::string& text, const std::string& origin = "<scheme>");

/// Resolve a scheme argument: an existing path wins; otherwise NAME.json is
/// looked up under $DENSEMARK_DATA_ROOT/schemes and the installed data dir.
std::filesystem::path resolve_scheme_path(const std::string& name_or_path);

/// Dense landmark files (JSON): {format, version, scheme, density, points}.
void write_enriched(const std::filesystem::path& path, const EnrichedLandmarkSet& set);
EnrichedLandmarkSet read_enriched(const std::filesystem::path& path);

/// Validation against a scheme: point count must equal enriched_count.
void validate_enriched(const EnrichedLandmarkSet& set, const ContourScheme& scheme);

/// Morphometric measure definitions (JSON list).
std::vector<MeasureDef> load_measures(const std::filesystem::path& path);

/// Grayscale image IO. PNG and PGM are picked by extension; color PNG is
/// reduced with the fixed luma weights (0.299, 0.587, 0.114).
FaceImage load_image(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const FaceImage& image);
void save_png(const std::filesystem::path& path, const FaceImage& image);
void save_image(const std::filesystem::path& path, const FaceImage& image);

} // namespace densemark
