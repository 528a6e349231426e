#pragma once

#include <densemark/patch.hpp>
#include <densemark/rng.hpp>

#include <span>
#include <vector>

namespace densemark {

/// Channel layout contract of the index-embedding stage: the encoder emits
/// m = k * n feature channels, n being the scheme's anchor count, so each of
/// the k blocks holds one channel per anchor index.
struct IndexEmbeddingSpec {
    int m = 0;
    int n = 0;

    int k() const { return m / n; }
    /// Throws Error{Config} unless m is a positive multiple of n.
    void validate() const;
};

/// Blend feature channels by the soft index t: within each block of n
/// channels, mixes channel floor(t) and its successor (wrapping n-1 -> 0)
/// with weights (1 - frac, frac). Input is m x h x w flat row-major; output
/// k x h x w. Exact identity at integer t, exactly linear in between.
std::vector<double> index_embed(std::span<const double> f_in, int h, int w,
                                double t, const IndexEmbeddingSpec& spec);

/// Differentiable sub-pixel localization: expectation of position under
/// softmax(tau * heatmap), measured from the row center (W-1)/2. Output
/// magnitude is bounded by (W-1)/2.
double soft_argmax(std::span<const double> heatmap, double tau = 1.0);

double smooth_l1(double a, double b);
double smooth_l1_grad(double a, double b);  // d/da

/// Quality-weighted batch loss: mean of weight_i * smooth_l1(o_i, target_i).
double weighted_smooth_l1_loss(std::span<const double> regressed,
                               std::span<const double> target,
                               std::span<const double> weights);

struct NetConfig {
    int patch_size = 64;  // input side; also the heatmap width
    int n_anchors = 68;   // channel base (anchor count of the scheme)
    int k = 2;            // embedding blocks; encoder output has k*n channels
    double tau = 1.0;     // soft-argmax temperature

    int m() const { return k * n_anchors; }
    int feat_side() const { return patch_size / 8; }
    void validate() const;
};

/// Compact offset-regression network:
///   3x3 stride-2 conv stages with channels (n, 2n, k*n) + ReLU,
///   index embedding down to k channels,
///   column collapse (mean over y),
///   fully connected head emitting a 1 x patch_size heatmap,
///   soft-argmax to a scalar pixel offset.
///
/// All parameters live in one flat vector so the optimizer and the finite
/// difference checks can treat the model uniformly. Forward is const and
/// deterministic; per-thread scratch goes in a Workspace.
class OffsetNet {
public:
    struct Workspace {
        std::vector<double> x0;          // 1 x s x s input copy
        std::vector<double> z1, a1;      // conv1 pre/post activation
        std::vector<double> z2, a2;
        std::vector<double> z3, a3;
        std::vector<double> emb;         // k x f x f
        std::vector<double> col;         // k x f
        std::vector<double> heat;        // W logits
        std::vector<double> prob;        // softmax(tau * heat)
        double offset = 0.0;
        // backward scratch
        std::vector<double> d3, d2, d1, demb;
    };

    OffsetNet() = default;
    explicit OffsetNet(const NetConfig& cfg);

    /// He-normal convolution weights, zero biases, zero head: a fresh model
    /// outputs offset 0 (uniform heatmap) for every input.
    void init_params(Rng& rng);

    Workspace make_workspace() const;

    /// Regressed offset in pixels; fills the workspace with every
    /// intermediate needed by backward. `t` is the soft index.
    double forward(std::span<const double> patch_pixels, double t, Workspace& ws) const;

    /// Accumulates dLoss/dparams into `grad` (same layout as params()),
    /// given dLoss/doffset and the workspace of the matching forward call.
    void backward(double d_offset, double t, Workspace& ws, std::span<double> grad) const;

    const NetConfig& config() const { return cfg_; }
    size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

private:
    struct Layout {
        size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, w3 = 0, b3 = 0, fw = 0, fb = 0, total = 0;
    };
    static Layout layout_for(const NetConfig& cfg);

    NetConfig cfg_;
    Layout off_;
    std::vector<double> params_;
};

/// Adam with bias correction; lr is adjustable between steps for schedules.
class AdamOptimizer {
public:
    AdamOptimizer(size_t param_count, double lr);

    void set_learning_rate(double lr) { lr_ = lr; }
    double learning_rate() const { return lr_; }
    void step(std::span<double> params, std::span<const double> grad);

private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long step_count_ = 0;
    std::vector<double> m_, v_;
};

} // namespace densemark
