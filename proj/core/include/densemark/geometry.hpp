#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace densemark {

/// 2D point/vector in pixel coordinates (x right, y down).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm_sq(const Vec2& v) { return v.x * v.x + v.y * v.y; }
inline double norm(const Vec2& v) { return std::sqrt(norm_sq(v)); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// Counter-clockwise 90-degree rotation in math coordinates; with y pointing
/// down this appears as a clockwise turn on screen.
inline Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

inline Vec2 normalized(const Vec2& v) {
    double n = norm(v);
    return {v.x / n, v.y / n};
}

inline bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

inline Vec2 centroid(std::span<const Vec2> pts) {
    Vec2 c;
    for (const auto& p : pts) c += p;
    return pts.empty() ? c : c / static_cast<double>(pts.size());
}

/// Exact squared distance from p to segment [a, b].
inline double point_segment_dist_sq(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = norm_sq(ab);
    if (len2 <= 0.0) return norm_sq(p - a);
    double s = dot(p - a, ab) / len2;
    if (s < 0.0) s = 0.0;
    if (s > 1.0) s = 1.0;
    return norm_sq(p - (a + ab * s));
}

} // namespace densemark
