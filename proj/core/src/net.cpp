#include <densemark/net.hpp>

#include <densemark/error.hpp>

#include <algorithm>
#include <cmath>

namespace densemark {

void IndexEmbeddingSpec::validate() const {
    if (n < 1 || m < 1 || m % n != 0)
        throw config_error("index embedding needs m to be a positive multiple of n (m=" +
                           std::to_string(m) + ", n=" + std::to_string(n) + ")");
}

namespace {

// Wrap the soft index into [0, n) and split it into base channel + fraction.
inline void split_index(double t, int n, int& i0, double& frac) {
    double tw = std::fmod(t, static_cast<double>(n));
    if (tw < 0.0) tw += n;
    if (tw >= n) tw = 0.0;  // fmod edge at exactly n
    i0 = static_cast<int>(std::floor(tw));
    frac = tw - i0;
}

} // namespace

std::vector<double> index_embed(std::span<const double> f_in, int h, int w,
                                double t, const IndexEmbeddingSpec& spec) {
    spec.validate();
    size_t plane = static_cast<size_t>(h) * w;
    if (f_in.size() != plane * spec.m)
        throw contract_error("index_embed: input size does not match m*h*w");

    int i0;
    double frac;
    split_index(t, spec.n, i0, frac);
    int i1 = (i0 + 1) % spec.n;

    int k = spec.k();
    std::vector<double> out(plane * k);
    for (int b = 0; b < k; ++b) {
        const double* c0 = f_in.data() + (static_cast<size_t>(b) * spec.n + i0) * plane;
        double* dst = out.data() + static_cast<size_t>(b) * plane;
        if (frac == 0.0) {
            std::copy(c0, c0 + plane, dst);
        } else {
            const double* c1 = f_in.data() + (static_cast<size_t>(b) * spec.n + i1) * plane;
            double w0 = 1.0 - frac;
            for (size_t i = 0; i < plane; ++i) dst[i] = w0 * c0[i] + frac * c1[i];
        }
    }
    return out;
}

double soft_argmax(std::span<const double> heatmap, double tau) {
    int w = static_cast<int>(heatmap.size());
    if (w == 0) throw contract_error("soft_argmax: empty heatmap");
    double hmax = heatmap[0];
    for (double v : heatmap) {
        if (!std::isfinite(v)) throw contract_error("soft_argmax: non-finite heatmap entry");
        hmax = std::max(hmax, v);
    }
    double z = 0.0, acc = 0.0;
    double center = (w - 1) / 2.0;
    for (int x = 0; x < w; ++x) {
        double e = std::exp(tau * (heatmap[x] - hmax));
        z += e;
        acc += e * (x - center);
    }
    return acc / z;
}

double smooth_l1(double a, double b) {
    double e = a - b;
    double ae = std::abs(e);
    return ae < 1.0 ? 0.5 * e * e : ae - 0.5;
}

double smooth_l1_grad(double a, double b) {
    double e = a - b;
    if (e > 1.0) return 1.0;
    if (e < -1.0) return -1.0;
    return e;
}

double weighted_smooth_l1_loss(std::span<const double> regressed,
                               std::span<const double> target,
                               std::span<const double> weights) {
    if (regressed.size() != target.size() || regressed.size() != weights.size())
        throw contract_error("loss: batch length mismatch");
    if (regressed.empty()) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < regressed.size(); ++i)
        acc += weights[i] * smooth_l1(regressed[i], target[i]);
    return acc / static_cast<double>(regressed.size());
}

void NetConfig::validate() const {
    if (patch_size < 8 || patch_size % 8 != 0)
        throw config_error("net patch size must be a positive multiple of 8");
    if (n_anchors < 1 || k < 1) throw config_error("net needs n_anchors >= 1 and k >= 1");
    if (tau <= 0.0) throw config_error("soft-argmax temperature must be positive");
    IndexEmbeddingSpec{m(), n_anchors}.validate();
}

// ---------------------------------------------------------------------------
// Convolution helpers (3x3, stride 2, zero padding 1)
// ---------------------------------------------------------------------------

namespace {

void conv3x3_s2_forward(const double* in, int in_c, int in_s,
                        const double* w, const double* b,
                        double* out, int out_c) {
    int out_s = in_s / 2;
    size_t in_plane = static_cast<size_t>(in_s) * in_s;
    size_t out_plane = static_cast<size_t>(out_s) * out_s;
    for (int oc = 0; oc < out_c; ++oc) {
        const double* wk = w + static_cast<size_t>(oc) * in_c * 9;
        double* op = out + oc * out_plane;
        for (int oy = 0; oy < out_s; ++oy)
            for (int ox = 0; ox < out_s; ++ox) {
                double acc = b[oc];
                for (int ic = 0; ic < in_c; ++ic) {
                    const double* ip = in + ic * in_plane;
                    const double* wc = wk + ic * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        int iy = 2 * oy + ky - 1;
                        if (iy < 0 || iy >= in_s) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int ix = 2 * ox + kx - 1;
                            if (ix < 0 || ix >= in_s) continue;
                            acc += wc[ky * 3 + kx] * ip[static_cast<size_t>(iy) * in_s + ix];
                        }
                    }
                }
                op[static_cast<size_t>(oy) * out_s + ox] = acc;
            }
    }
}

// dL/dout -> (grad w, grad b, grad in). `din` may be null for the first layer.
void conv3x3_s2_backward(const double* in, int in_c, int in_s,
                         const double* w, int out_c,
                         const double* dout,
                         double* gw, double* gb, double* din) {
    int out_s = in_s / 2;
    size_t in_plane = static_cast<size_t>(in_s) * in_s;
    size_t out_plane = static_cast<size_t>(out_s) * out_s;
    if (din) std::fill(din, din + static_cast<size_t>(in_c) * in_plane, 0.0);
    for (int oc = 0; oc < out_c; ++oc) {
        const double* dop = dout + oc * out_plane;
        const double* wk = w + static_cast<size_t>(oc) * in_c * 9;
        double* gwk = gw + static_cast<size_t>(oc) * in_c * 9;
        for (int oy = 0; oy < out_s; ++oy)
            for (int ox = 0; ox < out_s; ++ox) {
                double g = dop[static_cast<size_t>(oy) * out_s + ox];
                if (g == 0.0) continue;
                gb[oc] += g;
                for (int ic = 0; ic < in_c; ++ic) {
                    const double* ip = in + ic * in_plane;
                    double* dip = din ? din + ic * in_plane : nullptr;
                    const double* wc = wk + ic * 9;
                    double* gwc = gwk + ic * 9;
                    for (int ky = 0; ky < 3; ++ky) {
                        int iy = 2 * oy + ky - 1;
                        if (iy < 0 || iy >= in_s) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            int ix = 2 * ox + kx - 1;
                            if (ix < 0 || ix >= in_s) continue;
                            size_t ii = static_cast<size_t>(iy) * in_s + ix;
                            gwc[ky * 3 + kx] += g * ip[ii];
                            if (dip) dip[ii] += g * wc[ky * 3 + kx];
                        }
                    }
                }
            }
    }
}

inline void relu_forward(const std::vector<double>& z, std::vector<double>& a) {
    a.resize(z.size());
    for (size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

inline void relu_backward(const std::vector<double>& z, std::vector<double>& d) {
    for (size_t i = 0; i < z.size(); ++i)
        if (z[i] <= 0.0) d[i] = 0.0;
}

} // namespace

// ---------------------------------------------------------------------------
// OffsetNet
// ---------------------------------------------------------------------------

OffsetNet::Layout OffsetNet::layout_for(const NetConfig& cfg) {
    int n = cfg.n_anchors, m = cfg.m(), w = cfg.patch_size, f = cfg.feat_side();
    Layout L;
    L.w1 = 0;
    L.b1 = L.w1 + static_cast<size_t>(n) * 1 * 9;
    L.w2 = L.b1 + n;
    L.b2 = L.w2 + static_cast<size_t>(2 * n) * n * 9;
    L.w3 = L.b2 + 2 * n;
    L.b3 = L.w3 + static_cast<size_t>(m) * 2 * n * 9;
    L.fw = L.b3 + m;
    L.fb = L.fw + static_cast<size_t>(w) * cfg.k * f;
    L.total = L.fb + w;
    return L;
}

OffsetNet::OffsetNet(const NetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    off_ = layout_for(cfg_);
    params_.assign(off_.total, 0.0);
}

void OffsetNet::init_params(Rng& rng) {
    auto he_fill = [&](size_t begin, size_t count, int fan_in) {
        double sd = std::sqrt(2.0 / fan_in);
        for (size_t i = 0; i < count; ++i) params_[begin + i] = rng.gaussian(0.0, sd);
    };
    int n = cfg_.n_anchors, m = cfg_.m();
    he_fill(off_.w1, off_.b1 - off_.w1, 9);
    he_fill(off_.w2, off_.b2 - off_.w2, 9 * n);
    he_fill(off_.w3, off_.b3 - off_.w3, 9 * 2 * n);
    // head stays zero: a fresh model emits a flat heatmap and offset 0
    (void)m;
}

OffsetNet::Workspace OffsetNet::make_workspace() const {
    Workspace ws;
    int s = cfg_.patch_size, n = cfg_.n_anchors, m = cfg_.m(), f = cfg_.feat_side();
    auto sz = [](int c, int side) { return static_cast<size_t>(c) * side * side; };
    ws.x0.resize(sz(1, s));
    ws.z1.resize(sz(n, s / 2));
    ws.a1.resize(sz(n, s / 2));
    ws.z2.resize(sz(2 * n, s / 4));
    ws.a2.resize(sz(2 * n, s / 4));
    ws.z3.resize(sz(m, f));
    ws.a3.resize(sz(m, f));
    ws.emb.resize(sz(cfg_.k, f));
    ws.col.resize(static_cast<size_t>(cfg_.k) * f);
    ws.heat.resize(s);
    ws.prob.resize(s);
    ws.d1.resize(ws.z1.size());
    ws.d2.resize(ws.z2.size());
    ws.d3.resize(ws.z3.size());
    ws.demb.resize(ws.emb.size());
    return ws;
}

double OffsetNet::forward(std::span<const double> patch_pixels, double t,
                          Workspace& ws) const {
    int s = cfg_.patch_size, n = cfg_.n_anchors, m = cfg_.m(), f = cfg_.feat_side();
    if (patch_pixels.size() != static_cast<size_t>(s) * s)
        throw contract_error("forward: patch does not match the configured size");

    std::copy(patch_pixels.begin(), patch_pixels.end(), ws.x0.begin());
    const double* P = params_.data();

    conv3x3_s2_forward(ws.x0.data(), 1, s, P + off_.w1, P + off_.b1, ws.z1.data(), n);
    relu_forward(ws.z1, ws.a1);
    conv3x3_s2_forward(ws.a1.data(), n, s / 2, P + off_.w2, P + off_.b2, ws.z2.data(), 2 * n);
    relu_forward(ws.z2, ws.a2);
    conv3x3_s2_forward(ws.a2.data(), 2 * n, s / 4, P + off_.w3, P + off_.b3, ws.z3.data(), m);
    relu_forward(ws.z3, ws.a3);

    // index embedding
    int i0;
    double frac;
    split_index(t, n, i0, frac);
    int i1 = (i0 + 1) % n;
    size_t plane = static_cast<size_t>(f) * f;
    for (int b = 0; b < cfg_.k; ++b) {
        const double* c0 = ws.a3.data() + (static_cast<size_t>(b) * n + i0) * plane;
        const double* c1 = ws.a3.data() + (static_cast<size_t>(b) * n + i1) * plane;
        double* dst = ws.emb.data() + b * plane;
        if (frac == 0.0)
            std::copy(c0, c0 + plane, dst);
        else
            for (size_t i = 0; i < plane; ++i) dst[i] = (1.0 - frac) * c0[i] + frac * c1[i];
    }

    // column collapse: mean over rows
    for (int b = 0; b < cfg_.k; ++b)
        for (int x = 0; x < f; ++x) {
            double acc = 0.0;
            for (int y = 0; y < f; ++y) acc += ws.emb[b * plane + static_cast<size_t>(y) * f + x];
            ws.col[static_cast<size_t>(b) * f + x] = acc / f;
        }

    // fully connected head -> heatmap logits
    int in_dim = cfg_.k * f;
    const double* fw = P + off_.fw;
    const double* fb = P + off_.fb;
    for (int x = 0; x < s; ++x) {
        double acc = fb[x];
        const double* row = fw + static_cast<size_t>(x) * in_dim;
        for (int i = 0; i < in_dim; ++i) acc += row[i] * ws.col[i];
        ws.heat[x] = acc;
    }

    // softmax + expectation
    double hmax = *std::max_element(ws.heat.begin(), ws.heat.end());
    double z = 0.0;
    for (int x = 0; x < s; ++x) {
        ws.prob[x] = std::exp(cfg_.tau * (ws.heat[x] - hmax));
        z += ws.prob[x];
    }
    double center = (s - 1) / 2.0;
    double o = 0.0;
    for (int x = 0; x < s; ++x) {
        ws.prob[x] /= z;
        o += ws.prob[x] * (x - center);
    }
    ws.offset = o;
    return o;
}

void OffsetNet::backward(double d_offset, double t, Workspace& ws,
                         std::span<double> grad) const {
    int s = cfg_.patch_size, n = cfg_.n_anchors, m = cfg_.m(), f = cfg_.feat_side();
    if (grad.size() != params_.size()) throw contract_error("backward: grad size mismatch");
    const double* P = params_.data();
    double* G = grad.data();

    // soft-argmax: dO/dheat_x = tau * p_x * ((x - center) - O)
    double center = (s - 1) / 2.0;
    std::vector<double> dheat(s);
    for (int x = 0; x < s; ++x)
        dheat[x] = d_offset * cfg_.tau * ws.prob[x] * ((x - center) - ws.offset);

    // head
    int in_dim = cfg_.k * f;
    std::vector<double> dcol(in_dim, 0.0);
    for (int x = 0; x < s; ++x) {
        double g = dheat[x];
        G[off_.fb + x] += g;
        const double* row = P + off_.fw + static_cast<size_t>(x) * in_dim;
        double* grow = G + off_.fw + static_cast<size_t>(x) * in_dim;
        for (int i = 0; i < in_dim; ++i) {
            grow[i] += g * ws.col[i];
            dcol[i] += g * row[i];
        }
    }

    // collapse
    size_t plane = static_cast<size_t>(f) * f;
    for (int b = 0; b < cfg_.k; ++b)
        for (int x = 0; x < f; ++x) {
            double g = dcol[static_cast<size_t>(b) * f + x] / f;
            for (int y = 0; y < f; ++y) ws.demb[b * plane + static_cast<size_t>(y) * f + x] = g;
        }

    // embedding -> encoder activations
    int i0;
    double frac;
    split_index(t, n, i0, frac);
    int i1 = (i0 + 1) % n;
    std::fill(ws.d3.begin(), ws.d3.end(), 0.0);
    for (int b = 0; b < cfg_.k; ++b) {
        double* d0 = ws.d3.data() + (static_cast<size_t>(b) * n + i0) * plane;
        double* d1 = ws.d3.data() + (static_cast<size_t>(b) * n + i1) * plane;
        const double* src = ws.demb.data() + b * plane;
        if (frac == 0.0)
            for (size_t i = 0; i < plane; ++i) d0[i] += src[i];
        else
            for (size_t i = 0; i < plane; ++i) {
                d0[i] += (1.0 - frac) * src[i];
                d1[i] += frac * src[i];
            }
    }

    relu_backward(ws.z3, ws.d3);
    conv3x3_s2_backward(ws.a2.data(), 2 * n, s / 4, P + off_.w3, m, ws.d3.data(),
                        G + off_.w3, G + off_.b3, ws.d2.data());
    relu_backward(ws.z2, ws.d2);
    conv3x3_s2_backward(ws.a1.data(), n, s / 2, P + off_.w2, 2 * n, ws.d2.data(),
                        G + off_.w2, G + off_.b2, ws.d1.data());
    relu_backward(ws.z1, ws.d1);
    conv3x3_s2_backward(ws.x0.data(), 1, s, P + off_.w1, n, ws.d1.data(),
                        G + off_.w1, G + off_.b1, nullptr);
}

AdamOptimizer::AdamOptimizer(size_t param_count, double lr)
    : lr_(lr), m_(param_count, 0.0), v_(param_count, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw contract_error("optimizer: parameter count mismatch");
    ++step_count_;
    double bc1 = 1.0 - std::pow(beta1_, step_count_);
    double bc2 = 1.0 - std::pow(beta2_, step_count_);
    for (size_t i = 0; i < m_.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        double mhat = m_[i] / bc1;
        double vhat = v_[i] / bc2;
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

} // namespace densemark
