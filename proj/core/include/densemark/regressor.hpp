#pragma once

#include <densemark/enrichment.hpp>
#include <densemark/net.hpp>
#include <densemark/patch.hpp>
#include <densemark/quality.hpp>
#include <densemark/scheme.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace densemark {

struct TrainingConfig {
    int epochs = 25;
    int batch_size = 32;
    double learning_rate = 1e-3;
    std::vector<double> decay_epoch_fractions = {0.5, 0.75, 0.9};
    double decay_factor = 0.1;
    uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
    double holdout_fraction = 0.0;
    AugmentConfig augment = AugmentConfig::training_defaults();
    int net_k = 2;
    double tau = 1.0;

    void validate() const;
    std::string canonical_string() const;  // hashed into the model artifact
};

/// One training scene/face: image plus its sparse ground-truth annotation.
struct TrainItem {
    FaceImage image;
    LandmarkSet anchors;
};

struct TrainingStats {
    std::vector<double> epoch_loss;      // mean weighted loss per epoch
    double holdout_offset_me = -1.0;     // mean |regressed - target|, px; -1 if no holdout
    int train_count = 0;
    int holdout_count = 0;
};

/// Trained offset-refinement model: the regression network plus the quality
/// CDF fitted on its training corpus and the patch geometry it expects.
/// Immutable after training; safe to share for parallel inference.
class OffsetRegressor {
public:
    OffsetRegressor() = default;
    OffsetRegressor(OffsetNet net, QualityModel quality, PatchSpec patch_spec,
                    std::string scheme_id, uint64_t seed, std::string config_hash);

    /// Regressed offset (pixels along the patch x-axis / landmark normal)
    /// and, via out param, the heatmap row.
    double regress(const Patch& patch, double t, std::vector<double>* heatmap = nullptr) const;

    /// Quality confidence of a patch under the training-corpus CDF.
    double confidence(const Patch& patch) const;

    /// Move every non-isolated point along its normal by confidence * offset;
    /// records the confidence per point. Zero-confidence points come back
    /// bit-identical.
    EnrichedLandmarkSet refine(const EnrichedLandmarkSet& enriched, const FaceImage& image,
                               int threads = 0) const;

    const OffsetNet& net() const { return net_; }
    const QualityModel& quality() const { return quality_; }
    const PatchSpec& patch_spec() const { return patch_spec_; }
    const std::string& scheme_id() const { return scheme_id_; }
    uint64_t seed() const { return seed_; }
    const std::string& config_hash() const { return config_hash_; }

    /// Versioned binary container; round-trips bit-exactly.
    void save(const std::filesystem::path& path) const;
    static OffsetRegressor load(const std::filesystem::path& path);

private:
    OffsetNet net_;
    QualityModel quality_;
    PatchSpec patch_spec_;
    std::string scheme_id_;
    uint64_t seed_ = 0;
    std::string config_hash_;
};

/// Weakly-supervised training: per anchor landmark, displace the patch
/// center by a random offset drawn within the patch bound, extract the
/// normal-aligned patch, augment, weight by the quality score, and regress
/// the displacement back to the anchor. Deterministic per seed (including
/// under threads). Throws Error{Training} if the loss turns non-finite.
OffsetRegressor train_offset_regressor(const std::vector<TrainItem>& corpus,
                                       const ContourScheme& scheme,
                                       const PatchSpec& patch_spec,
                                       const TrainingConfig& config,
                                       TrainingStats* stats = nullptr);

/// Mean |regressed offset - target| in pixels over freshly drawn offsets on
/// the given items; the patch-level verification metric.
double evaluate_offset_me(const OffsetRegressor& model, const std::vector<TrainItem>& items,
                          const ContourScheme& scheme, uint64_t seed, int draws_per_anchor = 1);

} // namespace densemark
