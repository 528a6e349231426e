#include <densemark/curve.hpp>

#include <densemark/error.hpp>

#include <algorithm>
#include <cmath>

namespace densemark {

namespace {

constexpr double kDomainEps = 1e-9;
constexpr double kDegenerateSq = 1e-24;

// Dense Gaussian elimination with partial pivoting, two right-hand sides.
// Collocation systems here are tiny (n <= ~40), banded structure not worth
// exploiting.
void solve_dense2(std::vector<double> a, int n, std::vector<double> bx,
                  std::vector<double> by, std::vector<Vec2>& out) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::abs(a[r * n + col]);
            if (v > best) { best = v; piv = r; }
        }
        if (best < 1e-14)
            throw geometry_error("singular interpolation system (degenerate anchors?)");
        if (piv != col) {
            for (int c = col; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(bx[piv], bx[col]);
            std::swap(by[piv], by[col]);
        }
        double inv = 1.0 / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            bx[r] -= f * bx[col];
            by[r] -= f * by[col];
        }
    }
    out.assign(n, Vec2{});
    for (int r = n - 1; r >= 0; --r) {
        double sx = bx[r], sy = by[r];
        for (int c = r + 1; c < n; ++c) {
            sx -= a[r * n + c] * out[c].x;
            sy -= a[r * n + c] * out[c].y;
        }
        out[r].x = sx / a[r * n + r];
        out[r].y = sy / a[r * n + r];
    }
}

// Knot span index (NURBS-book FindSpan); nctrl control points, degree d.
int find_span(double u, int nctrl, int d, const std::vector<double>& t) {
    int hi = nctrl;  // t[hi] is the start of the last (degenerate) run
    if (u >= t[hi]) return hi - 1;
    if (u <= t[d]) return d;
    int lo = d;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (u < t[mid]) hi = mid; else lo = mid;
    }
    return lo;
}

// Nonzero basis functions N_{span-d..span} at u (NURBS-book A2.2).
void basis_funs(int span, double u, int d, const std::vector<double>& t,
                double* bf) {
    double left[8], right[8];  // degree capped well below 8 by scheme validation
    bf[0] = 1.0;
    for (int j = 1; j <= d; ++j) {
        left[j] = u - t[span + 1 - j];
        right[j] = t[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            double tmp = bf[r] / (right[r + 1] + left[j - r]);
            bf[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        bf[j] = saved;
    }
}

// Basis functions and their first derivatives (A2.3 restricted to order 1).
void basis_funs_d1(int span, double u, int d, const std::vector<double>& t,
                   double* bf, double* dbf) {
    double ndu[8][8], left[8], right[8];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= d; ++j) {
        left[j] = u - t[span + 1 - j];
        right[j] = t[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            double tmp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= d; ++j) bf[j] = ndu[j][d];
    for (int r = 0; r <= d; ++r) {
        double sum = 0.0;
        if (r >= 1) sum += ndu[r - 1][d - 1] / ndu[d][r - 1];
        if (r <= d - 1) sum -= ndu[r][d - 1] / ndu[d][r];
        dbf[r] = static_cast<double>(d) * sum;
    }
}

// Uniform cubic b-spline segment basis on s in [0,1).
inline void periodic_basis(double s, double* b) {
    double s2 = s * s, s3 = s2 * s;
    b[0] = (1.0 - 3.0 * s + 3.0 * s2 - s3) / 6.0;
    b[1] = (3.0 * s3 - 6.0 * s2 + 4.0) / 6.0;
    b[2] = (-3.0 * s3 + 3.0 * s2 + 3.0 * s + 1.0) / 6.0;
    b[3] = s3 / 6.0;
}

inline void periodic_basis_d1(double s, double* db) {
    double s2 = s * s;
    db[0] = (-3.0 + 6.0 * s - 3.0 * s2) / 6.0;
    db[1] = (9.0 * s2 - 12.0 * s) / 6.0;
    db[2] = (-9.0 * s2 + 6.0 * s + 3.0) / 6.0;
    db[3] = 3.0 * s2 / 6.0;
}

bool all_coincident(std::span<const Vec2> pts) {
    for (size_t i = 1; i < pts.size(); ++i)
        if (norm_sq(pts[i] - pts[0]) > kDegenerateSq) return false;
    return true;
}

} // namespace

Curve Curve::fit(std::span<const Vec2> anchors, const ComponentSpec& spec) {
    int n = static_cast<int>(anchors.size());
    if (n < 2)
        throw config_error("component '" + spec.name + "': need at least 2 anchors to fit a curve");
    for (const auto& p : anchors)
        if (!finite(p))
            throw config_error("component '" + spec.name + "': non-finite anchor coordinates");
    if (all_coincident(anchors))
        throw geometry_error("component '" + spec.name + "': all anchors coincide");

    Curve c;
    c.closed_ = spec.closed;
    c.n_anchors_ = n;
    c.anchors_.assign(anchors.begin(), anchors.end());

    if (spec.fit == FitKind::Line) {
        c.kind_ = CurveKind::Polyline;
        c.degree_ = 1;
        return c;
    }

    c.kind_ = CurveKind::BSpline;
    c.degree_ = spec.degree;
    if (n < spec.degree + 1)
        throw config_error("component '" + spec.name + "': spline of degree " +
                           std::to_string(spec.degree) + " needs at least " +
                           std::to_string(spec.degree + 1) + " anchors, got " + std::to_string(n));

    if (spec.closed) {
        if (spec.degree != 3)
            throw config_error("component '" + spec.name + "': closed spline fits are cubic only");
        // Interpolating periodic cubic: cyclic system C(i) = anchor_i with
        // the uniform stencil (q_{i-1} + 4 q_i + q_{i+1}) / 6.
        std::vector<double> a(static_cast<size_t>(n) * n, 0.0), bx(n), by(n);
        for (int i = 0; i < n; ++i) {
            a[i * n + ((i + n - 1) % n)] += 1.0 / 6.0;
            a[i * n + i] += 4.0 / 6.0;
            a[i * n + ((i + 1) % n)] += 1.0 / 6.0;
            bx[i] = anchors[i].x;
            by[i] = anchors[i].y;
        }
        solve_dense2(std::move(a), n, std::move(bx), std::move(by), c.ctrl_);
        return c;
    }

    // Open: clamped knot vector with averaged interior knots; n control
    // points, collocation at u_i = i.
    int d = spec.degree;
    c.knots_.assign(n + d + 1, 0.0);
    for (int j = 0; j <= d; ++j) {
        c.knots_[j] = 0.0;
        c.knots_[n + j] = static_cast<double>(n - 1);
    }
    for (int j = 1; j <= n - d - 1; ++j) {
        double s = 0.0;
        for (int r = j; r < j + d; ++r) s += r;
        c.knots_[d + j] = s / d;
    }

    std::vector<double> a(static_cast<size_t>(n) * n, 0.0), bx(n), by(n);
    double bf[8];
    for (int i = 0; i < n; ++i) {
        double u = static_cast<double>(i);
        int span = find_span(u, n, d, c.knots_);
        basis_funs(span, u, d, c.knots_, bf);
        for (int r = 0; r <= d; ++r) a[i * n + (span - d + r)] = bf[r];
        bx[i] = anchors[i].x;
        by[i] = anchors[i].y;
    }
    solve_dense2(std::move(a), n, std::move(bx), std::move(by), c.ctrl_);
    return c;
}

double Curve::wrap_or_check(double u) const {
    if (closed_) {
        double period = static_cast<double>(n_anchors_);
        u = std::fmod(u, period);
        if (u < 0.0) u += period;
        return u;
    }
    double lo = u_min(), hi = u_max();
    if (u < lo - kDomainEps || u > hi + kDomainEps)
        throw domain_error("curve parameter " + std::to_string(u) + " outside [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return std::clamp(u, lo, hi);
}

Vec2 Curve::eval(double u) const {
    u = wrap_or_check(u);
    if (kind_ == CurveKind::Polyline) {
        int n = n_anchors_;
        int i = static_cast<int>(std::floor(u));
        if (closed_) {
            if (i >= n) i = n - 1;
            double s = u - i;
            return anchors_[i] + (anchors_[(i + 1) % n] - anchors_[i]) * s;
        }
        i = std::clamp(i, 0, n - 2);
        double s = u - i;
        return anchors_[i] + (anchors_[i + 1] - anchors_[i]) * s;
    }
    return closed_ ? eval_bspline_periodic(u) : eval_bspline_open(u);
}

Vec2 Curve::eval_bspline_open(double u) const {
    int n = static_cast<int>(ctrl_.size());
    int span = find_span(u, n, degree_, knots_);
    double bf[8];
    basis_funs(span, u, degree_, knots_, bf);
    Vec2 p;
    for (int r = 0; r <= degree_; ++r) p += ctrl_[span - degree_ + r] * bf[r];
    return p;
}

Vec2 Curve::eval_bspline_periodic(double u) const {
    int n = n_anchors_;
    int i = static_cast<int>(std::floor(u));
    if (i >= n) i = n - 1;
    double b[4];
    periodic_basis(u - i, b);
    return ctrl_[(i + n - 1) % n] * b[0] + ctrl_[i] * b[1] +
           ctrl_[(i + 1) % n] * b[2] + ctrl_[(i + 2) % n] * b[3];
}

Vec2 Curve::derivative(double u) const {
    u = wrap_or_check(u);
    Vec2 d;
    if (kind_ == CurveKind::Polyline) {
        int n = n_anchors_;
        double nearest = std::round(u);
        bool at_vertex = std::abs(u - nearest) < kDomainEps &&
                         nearest >= 0.0 && nearest <= (closed_ ? n : n - 1);
        if (at_vertex) {
            int i = static_cast<int>(nearest) % n;
            auto seg = [&](int a, int b) { return anchors_[b % n] - anchors_[a % n]; };
            if (closed_ || (i > 0 && i < n - 1)) {
                Vec2 prev = seg((i + n - 1) % n, (i + n - 1) % n + 1);
                Vec2 next = seg(i, i + 1);
                if (norm_sq(prev) < kDegenerateSq || norm_sq(next) < kDegenerateSq)
                    throw geometry_error("degenerate polyline segment at vertex " + std::to_string(i));
                d = normalized(prev) + normalized(next);
            } else {
                d = (i == 0) ? seg(0, 1) : seg(n - 2, n - 1);
            }
        } else {
            int i = static_cast<int>(std::floor(u));
            if (closed_) i %= n; else i = std::clamp(i, 0, n - 2);
            d = anchors_[(i + 1) % n] - anchors_[i];
        }
    } else {
        d = closed_ ? deriv_bspline_periodic(u) : deriv_bspline_open(u);
    }
    if (norm_sq(d) < kDegenerateSq)
        throw geometry_error("zero-length tangent at u=" + std::to_string(u));
    return d;
}

Vec2 Curve::deriv_bspline_open(double u) const {
    int n = static_cast<int>(ctrl_.size());
    int span = find_span(u, n, degree_, knots_);
    double bf[8], dbf[8];
    basis_funs_d1(span, u, degree_, knots_, bf, dbf);
    Vec2 d;
    for (int r = 0; r <= degree_; ++r) d += ctrl_[span - degree_ + r] * dbf[r];
    return d;
}

Vec2 Curve::deriv_bspline_periodic(double u) const {
    int n = n_anchors_;
    int i = static_cast<int>(std::floor(u));
    if (i >= n) i = n - 1;
    double db[4];
    periodic_basis_d1(u - i, db);
    return ctrl_[(i + n - 1) % n] * db[0] + ctrl_[i] * db[1] +
           ctrl_[(i + 1) % n] * db[2] + ctrl_[(i + 2) % n] * db[3];
}

Vec2 Curve::unit_normal(double u, const Vec2& orientation_hint) const {
    Vec2 t = derivative(u);
    Vec2 n = normalized(perp(t));
    Vec2 outward = eval(u) - orientation_hint;
    if (dot(n, outward) < 0.0) n = n * -1.0;
    return n;
}

std::vector<Vec2> Curve::densify(double step) const {
    if (step <= 0.0) throw contract_error("densify step must be positive");
    double lo = u_min(), hi = u_max();
    // Coarse pass bounds the parametric speed, then sample so that no gap
    // exceeds `step` pixels of arc.
    int coarse = std::max(16, n_anchors_ * 8);
    double max_speed = 0.0;
    for (int i = 0; i <= coarse; ++i) {
        double u = lo + (hi - lo) * i / coarse;
        if (closed_ && i == coarse) u = hi - 1e-9;
        Vec2 d;
        try {
            d = derivative(u);
        } catch (const Error&) {
            continue;  // isolated degenerate tangent; speed bound from neighbors
        }
        max_speed = std::max(max_speed, norm(d));
    }
    if (max_speed <= 0.0) max_speed = 1.0;
    int count = std::max(2, static_cast<int>(std::ceil((hi - lo) * max_speed / step)) + 1);
    std::vector<Vec2> pts;
    pts.reserve(count);
    int last = closed_ ? count - 1 : count;  // periodic: endpoint duplicates start
    for (int i = 0; i < last; ++i)
        pts.push_back(eval(lo + (hi - lo) * i / (count - 1)));
    return pts;
}

} // namespace densemark
