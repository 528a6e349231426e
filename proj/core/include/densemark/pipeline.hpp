#pragma once

#include <densemark/io.hpp>
#include <densemark/metrics.hpp>
#include <densemark/regressor.hpp>
#include <densemark/synthetic.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace densemark {

enum class PlugMode { Train, Test, TrainAndTest };

/// Network naming convention: "<Baseline>-FE<D>" with a "_test" /
/// "_train+test" suffix for the non-default plug stages (the train stage is
/// implied and omitted).
std::string make_run_label(const std::string& baseline, int density, PlugMode mode);

// Each cmd_* returns a process exit code (0 on success), prints diagnostics
// to stderr only, and writes data to files/stdout. They are the CLI
// subcommand bodies, callable in-process for tests.

struct SynthOptions {
    std::filesystem::path out_dir;
    std::string scheme = "synth-16";  // name or path
    uint64_t seed = 1;
    int count = 20;
    SceneConfig scene;
};
int cmd_synth(const SynthOptions& opt);

struct TrainOptions {
    std::filesystem::path data_dir;  // scenes or any images + .pts corpus
    std::string scheme = "synth-16";
    std::filesystem::path out_model;
    int patch_size = 64;
    TrainingConfig training;
    bool quiet = false;
};
int cmd_train(const TrainOptions& opt);

struct PreprocessOptions {
    std::filesystem::path data_dir;  // images + ground-truth .pts
    std::filesystem::path model_path;
    std::filesystem::path out_dir;
    std::string scheme;
    int density = 5;
    std::optional<FitKind> fit_override;
    std::string baseline_name = "Baseline";
    int threads = 0;
};
int cmd_preprocess(const PreprocessOptions& opt);

struct EnrichOptions {
    std::filesystem::path image_path;
    std::filesystem::path pts_path;  // predicted sparse landmarks
    std::filesystem::path model_path;
    std::filesystem::path out_json;
    std::filesystem::path overlay_path;  // optional ("" = skip)
    std::string scheme;
    int density = 5;
    std::optional<FitKind> fit_override;
    std::string baseline_name = "Baseline";
};
int cmd_enrich(const EnrichOptions& opt);

struct EvalOptions {
    std::filesystem::path pred;   // enriched JSON file or directory
    std::filesystem::path truth;  // scene oracle dir/file, or enriched JSON dir/file
    std::string scheme;
    std::filesystem::path json_out;   // optional machine-readable report
    std::filesystem::path measures;   // optional morphometric definitions
    double unit_distance = 0.0;       // optional override for d
    bool quiet = false;
};
int cmd_eval(const EvalOptions& opt, EvalReport* report_out = nullptr);

struct ScoreOptions {
    std::filesystem::path patches_dir;  // PGM/PNG patch dump
    std::filesystem::path model_path;   // CDF source (or fit on the dump)
    bool fit_on_dump = false;
    std::filesystem::path json_out;
};
int cmd_score(const ScoreOptions& opt);

// Shared helpers (exposed for tests).

/// Sorted list of files under dir with the given extension.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir,
                                              const std::string& extension);

/// Anchor point of an enriched set by original (sparse) index.
const EnrichedPoint* find_anchor(const EnrichedLandmarkSet& set, int anchor_index);

/// Landmark overlay for visual inspection; same dimensions as the input.
FaceImage draw_overlay(const FaceImage& image, std::span<const EnrichedPoint> points);

} // namespace densemark
