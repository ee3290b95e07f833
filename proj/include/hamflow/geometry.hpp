#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace hamflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {x * c, y * c}; }
    Vec2 operator/(double c) const { return {x / c, y / c}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }

    // counterclockwise rotation by pi/2
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double c, Vec2 v) { return v * c; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline Vec2 normalized(Vec2 v) {
    double n = v.norm();
    return n > 0.0 ? v / n : Vec2{0.0, 0.0};
}

// Proper intersection test for closed segments [p1,p2] and [q1,q2],
// including touching endpoints.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    Vec2 r = p2 - p1;
    Vec2 s = q2 - q1;
    double rxs = cross(r, s);
    Vec2 qp = q1 - p1;
    if (rxs == 0.0) {
        if (cross(qp, r) != 0.0) return false; // parallel, non-collinear
        // collinear: check 1-D overlap
        double rr = dot(r, r);
        if (rr == 0.0) {
            if (dot(s, s) == 0.0) return p1.x == q1.x && p1.y == q1.y;
            double u0 = dot(p1 - q1, s) / dot(s, s);
            return u0 >= 0.0 && u0 <= 1.0;
        }
        double t0 = dot(qp, r) / rr;
        double t1 = t0 + dot(s, r) / rr;
        if (t0 > t1) std::swap(t0, t1);
        return t0 <= 1.0 && t1 >= 0.0;
    }
    double t = cross(qp, s) / rxs;
    double u = cross(qp, r) / rxs;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

// Intersection parameter of ray p + t*d, t in (0, tmax], with segment [q1,q2].
inline std::optional<double> ray_segment_hit(Vec2 p, Vec2 d, double tmax,
                                             Vec2 q1, Vec2 q2) {
    Vec2 s = q2 - q1;
    double dxs = cross(d, s);
    if (dxs == 0.0) return std::nullopt; // parallel; grazing hits are ignored
    Vec2 qp = q1 - p;
    double t = cross(qp, s) / dxs;
    double u = cross(qp, d) / dxs;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    if (t <= 0.0 || t > tmax) return std::nullopt;
    return t;
}

// Squared distance from point to closed segment, plus the foot parameter.
inline double point_segment_dist2(Vec2 p, Vec2 a, Vec2 b, double* t_out = nullptr) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    Vec2 foot = a + ab * t;
    if (t_out) *t_out = t;
    return (p - foot).norm2();
}

// Signed area of a closed polygon (positive = counterclockwise).
inline double polygon_signed_area(const std::vector<Vec2>& pts) {
    double a = 0.0;
    size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        Vec2 p = pts[i];
        Vec2 q = pts[(i + 1) % n];
        a += cross(p, q);
    }
    return 0.5 * a;
}

// Even-odd crossing rule on a closed polygon.
inline bool point_in_polygon(const std::vector<Vec2>& pts, Vec2 q) {
    bool inside = false;
    size_t n = pts.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        Vec2 a = pts[i];
        Vec2 b = pts[j];
        if ((a.y > q.y) != (b.y > q.y)) {
            double xc = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (q.x < xc) inside = !inside;
        }
    }
    return inside;
}

inline double polyline_min_dist2(const std::vector<Vec2>& pts, Vec2 q) {
    double best = std::numeric_limits<double>::max();
    size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        best = std::min(best, point_segment_dist2(q, pts[i], pts[(i + 1) % n]));
    }
    return best;
}

// Scanline rasterization of a polygon interior (even-odd rule) over a square
// grid: calls visit(i, j) for every cell of an n x n grid over
// [-extent, extent]^2 whose center lies inside.
template <typename Visit>
void polygon_fill_cells(const std::vector<Vec2>& poly, int n, double extent, Visit&& visit) {
    size_t m = poly.size();
    double cell = 2.0 * extent / n;
    std::vector<double> xs;
    for (int j = 0; j < n; ++j) {
        double y = -extent + (j + 0.5) * cell;
        xs.clear();
        for (size_t i = 0; i < m; ++i) {
            Vec2 a = poly[i];
            Vec2 b = poly[(i + 1) % m];
            if ((a.y > y) != (b.y > y)) {
                xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
            }
        }
        if (xs.empty()) continue;
        std::sort(xs.begin(), xs.end());
        for (size_t k = 0; k + 1 < xs.size(); k += 2) {
            int i0 = static_cast<int>(std::ceil((xs[k] + extent) / cell - 0.5));
            int i1 = static_cast<int>(std::floor((xs[k + 1] + extent) / cell - 0.5));
            i0 = std::max(i0, 0);
            i1 = std::min(i1, n - 1);
            for (int i = i0; i <= i1; ++i) visit(i, j);
        }
    }
}

} // namespace hamflow
