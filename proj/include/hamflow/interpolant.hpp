#pragma once

#include <algorithm>
#include <vector>

#include "hamflow/cycle.hpp"
#include "hamflow/errors.hpp"
#include "hamflow/geometry.hpp"

namespace hamflow {

/// Disjoint union of parameter intervals on a cyclic domain [0, L)*.
struct CyclicIntervals {
    double domain = 0.0;
    std::vector<std::pair<double, double>> parts; // normalized: sorted, disjoint, inside [0, L)

    double measure() const {
        double m = 0.0;
        for (auto& p : parts) m += p.second - p.first;
        return m;
    }

    bool contains(double s) const {
        s = std::fmod(s, domain);
        if (s < 0.0) s += domain;
        for (auto& p : parts)
            if (s >= p.first && s <= p.second) return true;
        return false;
    }

    void add(double lo, double hi) {
        if (hi <= lo) return;
        if (hi - lo >= domain) {
            raw_.emplace_back(0.0, domain);
            return;
        }
        lo = std::fmod(lo, domain);
        if (lo < 0.0) lo += domain;
        hi = lo + (hi - lo > domain ? domain : hi - lo);
        if (hi <= domain) {
            raw_.emplace_back(lo, hi);
        } else {
            raw_.emplace_back(lo, domain);
            raw_.emplace_back(0.0, hi - domain);
        }
    }

    void normalize() {
        for (auto& p : parts) raw_.push_back(p);
        parts.clear();
        if (raw_.empty()) return;
        std::sort(raw_.begin(), raw_.end());
        for (auto& p : raw_) {
            if (!parts.empty() && p.first <= parts.back().second) {
                parts.back().second = std::max(parts.back().second, p.second);
            } else {
                parts.push_back(p);
            }
        }
        // merge across the wrap point
        if (parts.size() > 1 && parts.front().first <= 0.0 &&
            parts.back().second >= domain) {
            // keep as two normalized pieces; cyclic queries handle it
        }
        raw_.clear();
    }

private:
    std::vector<std::pair<double, double>> raw_;
};

/// Piecewise-affine interpolating polygon of a cycle plus the monotone
/// reparametrization between the curve's arc length and the polygon's.
struct PolylineReparam {
    Cycle source;                  // the interpolated curve
    std::vector<size_t> knot_idx;  // source vertex indices of the knots
    std::vector<double> knots_s;   // knot arc positions, knots_s[0] == 0
    std::vector<Vec2> verts;       // gamma(s_i)
    std::vector<Vec2> dirs;        // e_i: unit chord directions (segment i runs knot i -> i+1)
    std::vector<double> chord_cum; // polygon arc position of each knot
    double l_K = 0.0;              // total polygon length

    size_t segments() const { return verts.size(); }

    double seg_source_len(size_t i) const {
        double lo = knots_s[i];
        double hi = i + 1 < knots_s.size() ? knots_s[i + 1] : source.length;
        return hi - lo;
    }

    double seg_chord_len(size_t i) const {
        double lo = chord_cum[i];
        double hi = i + 1 < chord_cum.size() ? chord_cum[i + 1] : l_K;
        return hi - lo;
    }

    size_t segment_of_s(double s) const {
        s = source.wrap(s);
        size_t k = std::upper_bound(knots_s.begin(), knots_s.end(), s) - knots_s.begin();
        return k == 0 ? 0 : k - 1;
    }

    // y~_K: monotone piecewise-linear map [0, l_gamma] -> [0, l_K]
    double y_of_s(double s) const {
        if (s >= source.length) return l_K + (s - source.length);
        size_t i = segment_of_s(s);
        double t = (s - knots_s[i]) / seg_source_len(i);
        return chord_cum[i] + t * seg_chord_len(i);
    }

    double s_of_y(double y) const {
        if (y >= l_K) return source.length + (y - l_K);
        size_t i = std::upper_bound(chord_cum.begin(), chord_cum.end(), y) - chord_cum.begin();
        i = i == 0 ? 0 : i - 1;
        double t = (y - chord_cum[i]) / seg_chord_len(i);
        return knots_s[i] + t * seg_source_len(i);
    }

    Vec2 polygon_pos_y(double y) const {
        y = std::fmod(y, l_K);
        if (y < 0.0) y += l_K;
        size_t i = std::upper_bound(chord_cum.begin(), chord_cum.end(), y) - chord_cum.begin();
        i = i == 0 ? 0 : i - 1;
        return verts[i] + dirs[i] * (y - chord_cum[i]);
    }
};

namespace detail {

inline bool polygon_simple(const std::vector<Vec2>& v) {
    size_t n = v.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        Vec2 a1 = v[i], a2 = v[(i + 1) % n];
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue; // adjacent share a vertex
            if (segments_intersect(a1, a2, v[j], v[(j + 1) % n])) return false;
        }
    }
    return true;
}

} // namespace detail

/// Piecewise-affine interpolating polygon with per-segment interior turn mass
/// at most 1/sqrt(5) and mesh width at most 2*level_gap. Knots land on curve
/// samples; a tangent jump larger than the budget forces a knot at the corner.
inline PolylineReparam affine_interpolant(const Cycle& cycle, double level_gap) {
    if (!(level_gap > 0.0)) throw ConfigError("level_gap must be positive");
    const double budget = 1.0 / std::sqrt(5.0);
    size_t M = cycle.pts.size();

    std::vector<double> atom(M);
    for (size_t k = 0; k < M; ++k)
        atom[k] = (cycle.tangents[k] - cycle.tangents[(k + M - 1) % M]).norm();

    double cap = 2.0 * level_gap;
    for (int attempt = 0; attempt < 9; ++attempt) {
        std::vector<size_t> knots{0};
        double cum_turn = 0.0; // turn mass on (last_knot, current_end]
        size_t seg_start = 0;
        for (size_t k = 1; k <= M; ++k) {
            double s_k = k == M ? cycle.length : cycle.cum[k];
            double add = k == M ? 0.0 : atom[k];
            bool over_turn = cum_turn + add > budget;
            bool over_len = s_k - cycle.cum[seg_start] > cap * (1.0 + 1e-12);
            if (!over_turn && !over_len) {
                cum_turn += add;
                continue;
            }
            size_t knot;
            if (over_turn && add > budget) {
                knot = k; // corner sharper than the budget: break at the corner
            } else {
                knot = k - 1;
                if (knot == seg_start) knot = k; // single sample step: resolution floor
            }
            if (knot == M) break; // wrapped to the starting knot
            knots.push_back(knot);
            seg_start = knot;
            cum_turn = knot == k ? 0.0 : add;
        }

        PolylineReparam rep;
        rep.source = cycle;
        rep.knot_idx = knots;
        rep.knots_s.reserve(knots.size());
        rep.verts.reserve(knots.size());
        for (size_t idx : knots) {
            rep.knots_s.push_back(cycle.cum[idx]);
            rep.verts.push_back(cycle.pts[idx]);
        }
        size_t K = rep.verts.size();
        rep.dirs.resize(K);
        rep.chord_cum.resize(K);
        double acc = 0.0;
        bool degenerate = false;
        for (size_t i = 0; i < K; ++i) {
            rep.chord_cum[i] = acc;
            Vec2 d = rep.verts[(i + 1) % K] - rep.verts[i];
            double len = d.norm();
            if (len <= 0.0) degenerate = true;
            rep.dirs[i] = normalized(d);
            acc += len;
        }
        rep.l_K = acc;

        if (!degenerate && K >= 3 && detail::polygon_simple(rep.verts)) return rep;
        cap *= 0.5; // refine and retry, per the L*delta/4 simplicity argument
        if (cap < 2.0 * cycle.ds()) break;
    }
    throw TurnBudgetImpossible(
        "no simple interpolating polygon within the turn budget at sample resolution");
}

/// Parameter set where the half-length-a normal segment of the curve meets the
/// normal segment of another parameter. Normals are the (smoothed) per-sample
/// curve normals; the result is reported as maximal cyclic intervals on the
/// source parametrization.
inline CyclicIntervals overlap_bad_set(const PolylineReparam& rep, double a) {
    if (!(a > 0.0)) throw ConfigError("half-width must be positive");
    const Cycle& c = rep.source;
    size_t M = c.pts.size();

    std::vector<Vec2> normal(M);
    for (size_t k = 0; k < M; ++k) {
        Vec2 t = normalized(c.tangents[(k + M - 1) % M] + c.tangents[k]);
        if (t.norm2() == 0.0) t = c.tangents[k];
        normal[k] = t.perp();
    }

    // spatial hash: two normal segments can only meet if their base points are
    // within 2a of each other
    double cell = std::max(2.0 * a, 4.0 * c.ds());
    double R = 0.0;
    for (const Vec2& p : c.pts) R = std::max(R, std::max(std::abs(p.x), std::abs(p.y)));
    R += 2.0 * a + cell;
    int grid_n = std::max(1, static_cast<int>(std::ceil(2.0 * R / cell)));
    auto cell_of = [&](Vec2 p) {
        int i = std::clamp(static_cast<int>((p.x + R) / cell), 0, grid_n - 1);
        int j = std::clamp(static_cast<int>((p.y + R) / cell), 0, grid_n - 1);
        return static_cast<size_t>(j) * grid_n + i;
    };
    std::vector<std::vector<uint32_t>> buckets(static_cast<size_t>(grid_n) * grid_n);
    for (size_t k = 0; k < M; ++k) buckets[cell_of(c.pts[k])].push_back(static_cast<uint32_t>(k));

    std::vector<uint8_t> bad(M, 0);
    double lim2 = 4.0 * a * a;
    for (size_t k = 0; k < M; ++k) {
        Vec2 p = c.pts[k];
        Vec2 n1 = normal[k] * a;
        int ci = std::clamp(static_cast<int>((p.x + R) / cell), 0, grid_n - 1);
        int cj = std::clamp(static_cast<int>((p.y + R) / cell), 0, grid_n - 1);
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                int i2 = ci + di, j2 = cj + dj;
                if (i2 < 0 || j2 < 0 || i2 >= grid_n || j2 >= grid_n) continue;
                for (uint32_t m : buckets[static_cast<size_t>(j2) * grid_n + i2]) {
                    if (m == k) continue;
                    if (bad[k] && bad[m]) continue;
                    Vec2 q = c.pts[m];
                    if ((p - q).norm2() > lim2) continue;
                    Vec2 n2 = normal[m] * a;
                    if (segments_intersect(p - n1, p + n1, q - n2, q + n2)) {
                        bad[k] = 1;
                        bad[m] = 1;
                    }
                }
            }
    }

    CyclicIntervals out;
    out.domain = c.length;
    double half = 0.5 * c.ds();
    size_t k = 0;
    while (k < M) {
        if (!bad[k]) {
            ++k;
            continue;
        }
        size_t start = k;
        while (k < M && bad[k]) ++k;
        out.add(c.cum[start] - half, (k < M ? c.cum[k - 1] : c.cum[M - 1]) + half);
    }
    // join a run that wraps around the seam
    if (!out.parts.empty() && bad[0] && bad[M - 1]) {
        // pieces already touch 0 and L after add(); normalize merges them
    }
    out.normalize();
    return out;
}

} // namespace hamflow
