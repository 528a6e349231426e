#include <densemark/regressor.hpp>

#include <densemark/error.hpp>
#include <densemark/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace densemark {

namespace {

constexpr char kMagic[4] = {'D', 'M', 'K', 'M'};
constexpr uint32_t kArtifactVersion = 1;

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

// Normal-aligned training site: one record per non-isolated anchor.
struct AnchorSite {
    int item = 0;
    int anchor_index = 0;
    Vec2 point;
    double normal_angle = 0.0;
    double t = 0.0;
};

std::vector<AnchorSite> collect_sites(const std::vector<TrainItem>& corpus,
                                      const ContourScheme& scheme, int first_item,
                                      int last_item) {
    std::vector<AnchorSite> sites;
    for (int it = first_item; it < last_item; ++it) {
        EnrichedLandmarkSet base = initialize_enriched(corpus[it].anchors, scheme, 1);
        for (const auto& q : base.points) {
            if (!q.has_normal()) continue;  // isolated points are never refined
            sites.push_back({it, q.i, q.p, q.normal_angle, q.t});
        }
    }
    return sites;
}

struct PreparedSample {
    Patch patch;
    double target = 0.0;  // displacement back to the anchor: -drawn offset
    double weight = 0.0;  // normalized quality score
};

PreparedSample prepare_sample(const TrainItem& item, const AnchorSite& site,
                              const PatchSpec& ps, const AugmentConfig& aug,
                              const QualityModel& quality, Rng& rng) {
    double drawn = generate_offset(rng, ps);
    Vec2 n{std::cos(site.normal_angle), std::sin(site.normal_angle)};
    Vec2 center = site.point + n * drawn;
    Patch p = extract_normalized_patch(item.image, center, site.normal_angle, ps);
    p.t = site.t;
    p = augment(std::move(p), rng, aug);
    PreparedSample out;
    out.target = -drawn;
    out.weight = quality.normalize(patch_raw_score(p));
    out.patch = std::move(p);
    return out;
}

} // namespace

void TrainingConfig::validate() const {
    if (epochs < 1) throw config_error("training needs at least one epoch");
    if (batch_size < 1) throw config_error("batch size must be >= 1");
    if (learning_rate <= 0.0) throw config_error("learning rate must be positive");
    if (decay_factor <= 0.0) throw config_error("decay factor must be positive");
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
        throw config_error("holdout fraction must lie in [0, 1)");
    if (net_k < 1) throw config_error("net_k must be >= 1");
    augment.validate();
}

std::string TrainingConfig::canonical_string() const {
    std::ostringstream os;
    os << "epochs=" << epochs << ";batch=" << batch_size << ";lr=" << learning_rate
       << ";decay_factor=" << decay_factor << ";decays=";
    for (double f : decay_epoch_fractions) os << f << ",";
    os << ";seed=" << seed << ";holdout=" << holdout_fraction << ";k=" << net_k
       << ";tau=" << tau << ";aug=" << augment.p_gray << "," << augment.p_blur << ","
       << augment.p_occlude;
    return os.str();
}

OffsetRegressor::OffsetRegressor(OffsetNet net, QualityModel quality, PatchSpec patch_spec,
                                 std::string scheme_id, uint64_t seed, std::string config_hash)
    : net_(std::move(net)), quality_(std::move(quality)), patch_spec_(patch_spec),
      scheme_id_(std::move(scheme_id)), seed_(seed), config_hash_(std::move(config_hash)) {}

double OffsetRegressor::regress(const Patch& patch, double t,
                                std::vector<double>* heatmap) const {
    auto ws = net_.make_workspace();
    double o = net_.forward(patch.pixels, t, ws);
    if (heatmap) *heatmap = ws.heat;
    return o;
}

double OffsetRegressor::confidence(const Patch& patch) const {
    return quality_.normalize(patch_raw_score(patch));
}

EnrichedLandmarkSet OffsetRegressor::refine(const EnrichedLandmarkSet& enriched,
                                            const FaceImage& image, int threads) const {
    EnrichedLandmarkSet out = enriched;
    int count = static_cast<int>(out.points.size());
    parallel_chunks(count, effective_threads(threads), [&](int, int begin, int end) {
        auto ws = net_.make_workspace();
        for (int idx = begin; idx < end; ++idx) {
            EnrichedPoint& q = out.points[idx];
            if (!q.has_normal()) continue;
            Patch p = extract_normalized_patch(image, q.p, q.normal_angle, patch_spec_);
            double sbar = quality_.normalize(patch_raw_score(p));
            double o = net_.forward(p.pixels, q.t, ws);
            q.p += q.normal() * (sbar * o);
            q.confidence = sbar;
        }
    });
    return out;
}

OffsetRegressor train_offset_regressor(const std::vector<TrainItem>& corpus,
                                       const ContourScheme& scheme,
                                       const PatchSpec& patch_spec,
                                       const TrainingConfig& config,
                                       TrainingStats* stats) {
    config.validate();
    patch_spec.validate();
    scheme.validate();
    if (corpus.empty()) throw config_error("training corpus is empty");
    for (const auto& item : corpus) patch_spec.validate_against(item.image.reference_face_size);

    int n_items = static_cast<int>(corpus.size());
    int holdout = static_cast<int>(std::lround(config.holdout_fraction * n_items));
    holdout = std::min(holdout, n_items - 1);
    int n_train = n_items - holdout;

    std::vector<AnchorSite> sites = collect_sites(corpus, scheme, 0, n_train);
    if (sites.empty()) throw config_error("no trainable (non-isolated) anchors in corpus");

    // Quality CDF over the training corpus: undistorted, unaugmented anchor
    // patches, in deterministic site order.
    std::vector<double> corpus_scores(sites.size());
    {
        int count = static_cast<int>(sites.size());
        parallel_chunks(count, effective_threads(config.threads), [&](int, int begin, int end) {
            for (int i = begin; i < end; ++i) {
                const AnchorSite& s = sites[i];
                Patch p = extract_normalized_patch(corpus[s.item].image, s.point,
                                                   s.normal_angle, patch_spec);
                corpus_scores[i] = patch_raw_score(p);
            }
        });
    }
    QualityModel quality = QualityModel::fit(corpus_scores);

    NetConfig ncfg;
    ncfg.patch_size = patch_spec.size;
    ncfg.n_anchors = scheme.total_points();
    ncfg.k = config.net_k;
    ncfg.tau = config.tau;
    OffsetNet net(ncfg);
    {
        Rng init_rng(Rng::derive(config.seed, 0x1111));
        net.init_params(init_rng);
    }

    size_t n_params = net.param_count();
    AdamOptimizer adam(n_params, config.learning_rate);

    std::vector<int> order(sites.size());
    std::iota(order.begin(), order.end(), 0);

    int threads = effective_threads(config.threads);
    int B = config.batch_size;
    // One gradient buffer per batch slot, reduced in sample order, so the
    // result is byte-stable for any thread count.
    std::vector<std::vector<double>> sample_grads(B, std::vector<double>(n_params));
    std::vector<double> sample_loss(B);
    std::vector<double> grad(n_params);
    std::vector<OffsetNet::Workspace> workspaces(threads);
    for (auto& ws : workspaces) ws = net.make_workspace();

    TrainingStats local_stats;
    local_stats.train_count = n_train;
    local_stats.holdout_count = holdout;

    std::vector<int> decay_epochs;
    for (double f : config.decay_epoch_fractions)
        decay_epochs.push_back(static_cast<int>(std::floor(f * config.epochs)));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        int decays = static_cast<int>(std::count_if(decay_epochs.begin(), decay_epochs.end(),
                                                    [&](int d) { return epoch >= d; }));
        adam.set_learning_rate(config.learning_rate * std::pow(config.decay_factor, decays));

        Rng shuffle_rng(Rng::derive(config.seed, 0x5E0F, epoch));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

        double epoch_loss = 0.0;
        int seen = 0;
        for (size_t batch_begin = 0; batch_begin < order.size(); batch_begin += B) {
            int bsz = static_cast<int>(std::min<size_t>(B, order.size() - batch_begin));
            parallel_chunks(bsz, threads, [&](int chunk, int begin, int end) {
                OffsetNet::Workspace& ws = workspaces[chunk];
                for (int s = begin; s < end; ++s) {
                    const AnchorSite& site = sites[order[batch_begin + s]];
                    Rng rng(Rng::derive(config.seed, static_cast<uint64_t>(epoch) + 1,
                                        static_cast<uint64_t>(site.item) + 1,
                                        static_cast<uint64_t>(site.anchor_index) + 1));
                    PreparedSample sample = prepare_sample(corpus[site.item], site, patch_spec,
                                                           config.augment, quality, rng);
                    double o = net.forward(sample.patch.pixels, sample.patch.t, ws);
                    sample_loss[s] = sample.weight * smooth_l1(o, sample.target);
                    double d_o = sample.weight * smooth_l1_grad(o, sample.target) / bsz;
                    std::fill(sample_grads[s].begin(), sample_grads[s].end(), 0.0);
                    net.backward(d_o, sample.patch.t, ws, sample_grads[s]);
                }
            });
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (int s = 0; s < bsz; ++s) {
                batch_loss += sample_loss[s];
                const auto& g = sample_grads[s];
                for (size_t i = 0; i < n_params; ++i) grad[i] += g[i];
            }
            batch_loss /= bsz;
            if (!std::isfinite(batch_loss))
                throw training_error("loss diverged at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batch_begin / B) +
                                     " (lr=" + std::to_string(adam.learning_rate()) + ")");
            adam.step(net.params(), grad);
            epoch_loss += batch_loss * bsz;
            seen += bsz;
        }
        local_stats.epoch_loss.push_back(epoch_loss / seen);
    }

    OffsetRegressor model(std::move(net), std::move(quality), patch_spec, scheme.scheme_id,
                          config.seed, hex64(fnv1a64(config.canonical_string())));

    if (holdout > 0) {
        std::vector<TrainItem> held(corpus.begin() + n_train, corpus.end());
        local_stats.holdout_offset_me =
            evaluate_offset_me(model, held, scheme, Rng::derive(config.seed, 0xE7A1));
    }
    if (stats) *stats = local_stats;
    return model;
}

double evaluate_offset_me(const OffsetRegressor& model, const std::vector<TrainItem>& items,
                          const ContourScheme& scheme, uint64_t seed, int draws_per_anchor) {
    if (items.empty()) throw config_error("evaluate_offset_me: no items");
    std::vector<AnchorSite> sites = collect_sites(items, scheme, 0, static_cast<int>(items.size()));
    auto ws = model.net().make_workspace();
    const PatchSpec& ps = model.patch_spec();
    double total = 0.0;
    long count = 0;
    for (size_t si = 0; si < sites.size(); ++si) {
        const AnchorSite& site = sites[si];
        for (int d = 0; d < draws_per_anchor; ++d) {
            Rng rng(Rng::derive(seed, si + 1, d + 1));
            double drawn = generate_offset(rng, ps);
            Vec2 n{std::cos(site.normal_angle), std::sin(site.normal_angle)};
            Patch p = extract_normalized_patch(items[site.item].image, site.point + n * drawn,
                                               site.normal_angle, ps);
            double o = model.net().forward(p.pixels, site.t, ws);
            total += std::abs(o - (-drawn));
            ++count;
        }
    }
    return total / count;
}

// ---------------------------------------------------------------------------
// Binary model artifact
// ---------------------------------------------------------------------------

namespace {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw parse_error("model artifact truncated");
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<uint32_t>(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    uint32_t len = read_pod<uint32_t>(is);
    if (len > (1u << 20)) throw parse_error("model artifact: implausible string length");
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw parse_error("model artifact truncated");
    return s;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    write_pod<uint64_t>(os, static_cast<uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& is) {
    uint64_t n = read_pod<uint64_t>(is);
    if (n > (1ull << 28)) throw parse_error("model artifact: implausible tensor size");
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw parse_error("model artifact truncated");
    return v;
}

} // namespace

void OffsetRegressor::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw parse_error("cannot open " + path.string() + " for writing");
    os.write(kMagic, 4);
    write_pod<uint32_t>(os, kArtifactVersion);
    write_string(os, scheme_id_);
    write_pod<int32_t>(os, patch_spec_.size);
    write_pod<double>(os, patch_spec_.patch_face_ratio);
    const NetConfig& c = net_.config();
    write_pod<int32_t>(os, c.patch_size);
    write_pod<int32_t>(os, c.n_anchors);
    write_pod<int32_t>(os, c.k);
    write_pod<double>(os, c.tau);
    write_doubles(os, net_.params());
    write_doubles(os, quality_.scores());
    write_pod<uint64_t>(os, seed_);
    write_string(os, config_hash_);
    if (!os) throw parse_error("failed writing model artifact " + path.string());
}

OffsetRegressor OffsetRegressor::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("cannot open model artifact " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw parse_error(path.string() + ": not a model artifact");
    uint32_t version = read_pod<uint32_t>(is);
    if (version != kArtifactVersion)
        throw parse_error(path.string() + ": unsupported artifact version " + std::to_string(version));

    std::string scheme_id = read_string(is);
    PatchSpec ps;
    ps.size = read_pod<int32_t>(is);
    ps.patch_face_ratio = read_pod<double>(is);
    NetConfig c;
    c.patch_size = read_pod<int32_t>(is);
    c.n_anchors = read_pod<int32_t>(is);
    c.k = read_pod<int32_t>(is);
    c.tau = read_pod<double>(is);
    OffsetNet net(c);
    std::vector<double> params = read_doubles(is);
    if (params.size() != net.param_count())
        throw parse_error(path.string() + ": parameter tensor size mismatch");
    net.params() = std::move(params);
    std::vector<double> scores = read_doubles(is);
    uint64_t seed = read_pod<uint64_t>(is);
    std::string hash = read_string(is);
    return OffsetRegressor(std::move(net), QualityModel::fit(std::move(scores)), ps,
                           std::move(scheme_id), seed, std::move(hash));
}

} // namespace densemark
