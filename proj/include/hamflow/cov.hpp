#pragma once

#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <vector>

#include "hamflow/cycle.hpp"
#include "hamflow/errors.hpp"
#include "hamflow/field.hpp"
#include "hamflow/flow.hpp"
#include "hamflow/interpolant.hpp"

namespace hamflow {

/// One interval pair of the change of variables: the map s -> X12(s) restricted
/// to [s1_lo, s1_hi], where both curves are graphs over the direction e.
struct CovInterval {
    double s1_lo = 0.0, s1_hi = 0.0;
    double s2_lo = 0.0, s2_hi = 0.0; // unwrapped: s2_hi >= s2_lo, s2_lo in [0, l2)
    Vec2 e, n;
    std::vector<double> s1; // increasing sample parameters on gamma1
    std::vector<double> s2; // unwrapped image parameters on gamma2
    std::vector<double> d;  // normal distances, all > 0

    double x12(double s) const {
        size_t k = std::upper_bound(s1.begin(), s1.end(), s) - s1.begin();
        if (k == 0) return s2.front();
        if (k >= s1.size()) return s2.back();
        double t = (s - s1[k - 1]) / (s1[k] - s1[k - 1]);
        return s2[k - 1] + t * (s2[k] - s2[k - 1]);
    }
    double sup_d() const {
        double m = 0.0;
        for (double v : d) m = std::max(m, v);
        return m;
    }
};

/// Change of variables between two nested admissible cycles (Jordan annulus).
struct CovMap {
    Cycle c1, c2;
    double h1 = 0.0, h2 = 0.0;
    bool c1_inside = false; // Int(c1) subset of Int(c2)
    int sign_case = 0;      // 0 = base, 1..3 per the orientation dispatch table
    double c_S = 0.0;       // shared measured speed floor
    double delta_h = 0.0;
    double reach = 0.0; // normal shooting cutoff sqrt(5)*|dh|/c_S
    bool n_overflow = false;
    std::vector<CovInterval> intervals;

    double good_measure() const {
        double m = 0.0;
        for (auto& iv : intervals) m += iv.s1_hi - iv.s1_lo;
        return m;
    }
    double image_measure() const {
        double m = 0.0;
        for (auto& iv : intervals) m += iv.s2_hi - iv.s2_lo;
        return m;
    }
    bool in_good_set(double s) const {
        s = c1.wrap(s);
        for (auto& iv : intervals)
            if (s >= iv.s1_lo && s <= iv.s1_hi) return true;
        return false;
    }
    // X12 on D1 (wrapped into [0, l2)); throws outside the good set
    double x12(double s) const {
        s = c1.wrap(s);
        for (auto& iv : intervals)
            if (s >= iv.s1_lo && s <= iv.s1_hi) return c2.wrap(iv.x12(s));
        throw EmptyGoodSet("parameter outside the good set D1");
    }
    double sup_d() const {
        double m = 0.0;
        for (auto& iv : intervals) m = std::max(m, iv.sup_d());
        return m;
    }
    std::vector<Vec2> outer_polygon() const { return c1_inside ? c2.pts : c1.pts; }
    std::vector<Vec2> inner_polygon() const { return c1_inside ? c1.pts : c2.pts; }
};

namespace detail {

// bbox bucket grid over polyline segments for short-ray queries
class SegmentGrid {
public:
    SegmentGrid(const std::vector<Vec2>& pts, double cell) : pts_(pts), cell_(cell) {
        lo_ = pts[0];
        Vec2 hi = pts[0];
        for (const Vec2& p : pts) {
            lo_.x = std::min(lo_.x, p.x);
            lo_.y = std::min(lo_.y, p.y);
            hi.x = std::max(hi.x, p.x);
            hi.y = std::max(hi.y, p.y);
        }
        lo_ -= Vec2{cell_, cell_};
        nx_ = std::max(1, static_cast<int>((hi.x - lo_.x) / cell_) + 3);
        ny_ = std::max(1, static_cast<int>((hi.y - lo_.y) / cell_) + 3);
        buckets_.resize(static_cast<size_t>(nx_) * ny_);
        size_t n = pts.size();
        for (size_t k = 0; k < n; ++k) {
            Vec2 a = pts[k], b = pts[(k + 1) % n];
            int i0 = xi(std::min(a.x, b.x)), i1 = xi(std::max(a.x, b.x));
            int j0 = yi(std::min(a.y, b.y)), j1 = yi(std::max(a.y, b.y));
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i)
                    buckets_[static_cast<size_t>(j) * nx_ + i].push_back(static_cast<uint32_t>(k));
        }
    }

    // first hit of ray p + t*dir, t in (t_min, t_max], over the polyline;
    // returns segment index, sets t and the segment coordinate u
    int first_hit(Vec2 p, Vec2 dir, double t_min, double t_max, double& t_out,
                  double& u_out, int skip_lo = -1, int skip_hi = -1) const {
        Vec2 q = p + dir * t_max;
        int i0 = xi(std::min(p.x, q.x)), i1 = xi(std::max(p.x, q.x));
        int j0 = yi(std::min(p.y, q.y)), j1 = yi(std::max(p.y, q.y));
        double best_t = std::numeric_limits<double>::max();
        int best = -1;
        double best_u = 0.0;
        size_t n = pts_.size();
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                for (uint32_t k : buckets_[static_cast<size_t>(j) * nx_ + i]) {
                    if (skip_lo >= 0) {
                        int kk = static_cast<int>(k);
                        int m = static_cast<int>(n);
                        int rel = ((kk - skip_lo) % m + m) % m;
                        int width = ((skip_hi - skip_lo) % m + m) % m;
                        if (rel <= width) continue;
                    }
                    Vec2 a = pts_[k], b = pts_[(k + 1) % n];
                    Vec2 s = b - a;
                    double dxs = cross(dir, s);
                    if (dxs == 0.0) continue;
                    Vec2 qp = a - p;
                    double t = cross(qp, s) / dxs;
                    double u = cross(qp, dir) / dxs;
                    if (u < 0.0 || u > 1.0 || t <= t_min || t > t_max) continue;
                    if (t < best_t) {
                        best_t = t;
                        best = static_cast<int>(k);
                        best_u = u;
                    }
                }
        if (best >= 0) {
            t_out = best_t;
            u_out = best_u;
        }
        return best;
    }

private:
    int xi(double x) const { return std::clamp(static_cast<int>((x - lo_.x) / cell_), 0, nx_ - 1); }
    int yi(double y) const { return std::clamp(static_cast<int>((y - lo_.y) / cell_), 0, ny_ - 1); }
    const std::vector<Vec2>& pts_;
    double cell_;
    Vec2 lo_;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<uint32_t>> buckets_;
};

// closed boundary polyline of a ribbon strip (near arc, far arc, end caps)
inline std::vector<Vec2> ribbon_boundary(const Cycle& c1, const Cycle& c2, const CovInterval& iv) {
    std::vector<Vec2> b;
    b.reserve(2 * iv.s1.size() + 2);
    for (double s : iv.s1) b.push_back(c1.pos(s));
    for (size_t k = iv.s2.size(); k-- > 0;) b.push_back(c2.pos(c2.wrap(iv.s2[k])));
    return b;
}

inline bool polylines_cross(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    for (size_t i = 0; i + 1 < a.size(); ++i) {
        for (size_t j = 0; j + 1 < b.size(); ++j) {
            if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
        }
    }
    return false;
}

} // namespace detail

struct CovOptions {
    int max_intervals = 64;
    int min_component_samples = 3;
    // Tangent alignment required to merge interpolant segments into one
    // interval run. cos(0.5) caps the per-run turn near 1 rad, which keeps the
    // interval count small while the forward and reverse frames stay close
    // enough for the roundtrip identity.
    double run_alignment = 0.877582561890373; // cos(1/2)
};

/// Builds the Prop.-style change of variables from gamma1 onto gamma2:
/// affine-interpolant runs, overlap-bad-set removal, per-run normal shooting,
/// tangent-alignment restriction, and exact ribbon-disjointness trimming.
inline CovMap build_cov(const HamiltonianField& field, const Cycle& gamma1, const Cycle& gamma2,
                        const CovOptions& opt = {}) {
    CovMap map;
    map.c1 = gamma1;
    map.c2 = gamma2;
    if (map.c1.speeds.empty()) map.c1.attach_speeds(field);
    if (map.c2.speeds.empty()) map.c2.attach_speeds(field);
    map.h1 = gamma1.level;
    map.h2 = gamma2.level;
    if (map.h1 == map.h2) throw NotNested("equal levels cannot be nested");

    int deg1 = degree(map.c1);
    int deg2 = degree(map.c2);
    if (deg1 != deg2) throw OrientationMismatch("cycle degrees differ");

    bool c1_in_c2 = point_in_polygon(map.c2.pts, map.c1.pts[0]);
    bool c2_in_c1 = point_in_polygon(map.c1.pts, map.c2.pts[0]);
    if (c1_in_c2 == c2_in_c1) throw NotNested("neither interior contains the other");
    map.c1_inside = c1_in_c2;

    // orientation/sign dispatch: which side of gamma1 faces gamma2
    double n_sign;
    if (map.h1 > map.h2 && map.c1_inside && deg1 == -1) {
        map.sign_case = 0;
        n_sign = 1.0;
    } else if (map.h1 > map.h2 && !map.c1_inside && deg1 == 1) {
        map.sign_case = 1;
        n_sign = 1.0;
    } else if (map.h1 < map.h2 && !map.c1_inside && deg1 == -1) {
        map.sign_case = 2;
        n_sign = -1.0;
    } else if (map.h1 < map.h2 && map.c1_inside && deg1 == 1) {
        map.sign_case = 3;
        n_sign = -1.0;
    } else {
        throw OrientationMismatch("level order, nesting and degree match no sign case");
    }

    map.c_S = std::min(map.c1.min_speed(), map.c2.min_speed());
    if (map.c_S <= 0.0) throw OrientationMismatch("cycle carries zero speed samples");
    map.delta_h = std::abs(map.h1 - map.h2);
    map.reach = std::sqrt(5.0) / map.c_S * map.delta_h;
    double bar_a = map.reach + map.delta_h;

    const Cycle& c1 = map.c1;
    const Cycle& c2 = map.c2;
    size_t M = c1.pts.size();

    PolylineReparam interp = affine_interpolant(c1, map.delta_h);
    CyclicIntervals bad = overlap_bad_set(interp, bar_a);

    // ---- merge interpolant segments into maximal straight runs ------------
    const double align_floor = std::sqrt(2.0) / 2.0;
    size_t K = interp.segments();
    std::vector<size_t> run_of_knot_seg(K, 0);
    std::vector<Vec2> run_dir;
    {
        size_t start = 0;
        while (start < K) {
            size_t end = start; // inclusive segment range [start, end]
            Vec2 dir = interp.dirs[start];
            while (end + 1 < K) {
                size_t lo_idx = interp.knot_idx[start];
                size_t hi_idx = end + 2 < K ? interp.knot_idx[end + 2] : M;
                Vec2 chord = c1.pos(end + 2 < K ? c1.cum[interp.knot_idx[end + 2]] : c1.length) -
                             c1.pts[lo_idx];
                Vec2 cand = normalized(chord);
                bool ok = cand.norm2() > 0.0;
                for (size_t k = lo_idx; ok && k < hi_idx; ++k)
                    if (dot(c1.tangents[k % M], cand) < opt.run_alignment) ok = false;
                if (!ok) break;
                ++end;
                dir = cand;
            }
            size_t run_id = run_dir.size();
            run_dir.push_back(dir);
            for (size_t s = start; s <= end; ++s) run_of_knot_seg[s] = run_id;
            start = end + 1;
        }
    }

    // ---- shoot per-run normals from every good sample ---------------------
    double grid_cell = std::max(map.reach, 4.0 * c1.ds());
    detail::SegmentGrid grid2(c2.pts, grid_cell);
    detail::SegmentGrid grid1(c1.pts, grid_cell);

    double h_lo = std::min(map.h1, map.h2);
    double h_hi = std::max(map.h1, map.h2);

    struct Hit {
        bool good = false;
        double s2 = 0.0;
        double d = 0.0;
        double align2 = 0.0;
        size_t run = 0;
    };
    std::vector<Hit> hits(M);

    for (size_t k = 0; k < M; ++k) {
        double s = c1.cum[k];
        if (bad.contains(s)) continue;
        size_t seg = interp.segment_of_s(s);
        size_t run = run_of_knot_seg[seg];
        Vec2 e = run_dir[run];
        Vec2 n = e.perp() * n_sign;
        if (dot(c1.tangents[k], e) < align_floor) continue;

        Vec2 p = c1.pts[k];
        double t2 = 0.0, u2 = 0.0;
        int seg2 = grid2.first_hit(p, n, 1e-12, map.reach, t2, u2);
        if (seg2 < 0) continue; // B1: no hit within reach
        // the ray must not cross gamma1 itself first (folded geometry)
        double t1 = 0.0, u1 = 0.0;
        int self = grid1.first_hit(p, n, 1e-9 * map.reach, t2, t1, u1,
                                   static_cast<int>((k + M - 3) % M), static_cast<int>((k + 2) % M));
        if (self >= 0 && t1 < t2) continue;
        // stay inside the annulus: H strictly between the two levels (B2 guard)
        bool inside_A = true;
        for (int pr = 1; pr <= 8 && inside_A; ++pr) {
            double v = field.value(p + n * (t2 * pr / 9.0));
            if (!(v > h_lo && v < h_hi)) inside_A = false;
        }
        if (!inside_A) continue;

        size_t sidx = static_cast<size_t>(seg2);
        double seg_len = (sidx + 1 < c2.pts.size() ? c2.cum[sidx + 1] : c2.length) - c2.cum[sidx];
        double s2 = c2.cum[sidx] + u2 * seg_len;
        double align2 = dot(c2.tangents[sidx], e);
        if (align2 < align_floor) continue; // D3 restriction

        hits[k] = {true, s2, t2, align2, run};
    }

    // ---- connected components within runs, monotone in s2 -----------------
    const double comp_align = 4.0 / (3.0 * std::sqrt(3.0));
    std::vector<CovInterval> raw;
    {
        size_t k = 0;
        while (k < M) {
            if (!hits[k].good) {
                ++k;
                continue;
            }
            size_t start = k;
            size_t run = hits[k].run;
            double l2 = c2.length;
            std::vector<double> xs{c2.wrap(hits[k].s2)};
            size_t end = k;
            while (end + 1 < M && hits[end + 1].good && hits[end + 1].run == run) {
                double prev = xs.back();
                double nxt_w = c2.wrap(hits[end + 1].s2);
                double delta = nxt_w - std::fmod(prev, l2);
                if (delta < 0.0) delta += l2;
                if (delta > 0.25 * l2) break; // defensive: split on an order violation
                xs.push_back(prev + delta);
                ++end;
            }
            if (end - start + 1 >= static_cast<size_t>(opt.min_component_samples)) {
                CovInterval iv;
                iv.e = run_dir[run];
                iv.n = iv.e.perp() * n_sign;
                double max_align = 0.0;
                for (size_t j = start; j <= end; ++j) {
                    iv.s1.push_back(c1.cum[j]);
                    iv.d.push_back(hits[j].d);
                    max_align = std::max(max_align, hits[j].align2);
                }
                iv.s2 = xs;
                if (max_align >= comp_align) raw.push_back(std::move(iv));
            }
            k = end + 1;
        }
    }
    if (raw.empty()) throw EmptyGoodSet("no interval survives the restriction steps");

    // ---- trim interval ends until the ribbons are exactly disjoint --------
    auto finalize = [&](CovInterval& iv) {
        iv.s1_lo = iv.s1.front();
        iv.s1_hi = iv.s1.back();
        iv.s2_lo = c2.wrap(iv.s2.front());
        double shift = iv.s2_lo - iv.s2.front();
        for (double& v : iv.s2) v += shift;
        iv.s2_hi = iv.s2.back();
    };
    for (auto& iv : raw) finalize(iv);

    size_t nraw = raw.size();
    std::vector<uint8_t> alive(nraw, 1);
    auto shrink = [&](CovInterval& iv, bool front) {
        if (front) {
            iv.s1.erase(iv.s1.begin());
            iv.s2.erase(iv.s2.begin());
            iv.d.erase(iv.d.begin());
        } else {
            iv.s1.pop_back();
            iv.s2.pop_back();
            iv.d.pop_back();
        }
        if (iv.s1.size() >= 2) finalize(iv);
    };
    auto facing_front = [&](const CovInterval& x, const CovInterval& y) {
        // which end of x faces interval y: compare end-point distances
        Vec2 xf = c1.pos(x.s1_lo), xb = c1.pos(x.s1_hi);
        Vec2 yf = c1.pos(y.s1_lo), yb = c1.pos(y.s1_hi);
        double front_gap = std::min((xf - yf).norm2(), (xf - yb).norm2());
        double back_gap = std::min((xb - yf).norm2(), (xb - yb).norm2());
        return front_gap < back_gap;
    };
    for (size_t rounds = 0; rounds < 64; ++rounds) {
        bool any = false;
        for (size_t a = 0; a < nraw; ++a) {
            if (!alive[a]) continue;
            for (size_t b = a + 1; b < nraw; ++b) {
                if (!alive[b]) continue;
                auto ba = detail::ribbon_boundary(c1, c2, raw[a]);
                auto bb = detail::ribbon_boundary(c1, c2, raw[b]);
                int guard = 0;
                while (alive[a] && alive[b] && detail::polylines_cross(ba, bb)) {
                    any = true;
                    shrink(raw[a], facing_front(raw[a], raw[b]));
                    shrink(raw[b], facing_front(raw[b], raw[a]));
                    if (raw[a].s1.size() < static_cast<size_t>(opt.min_component_samples))
                        alive[a] = 0;
                    if (raw[b].s1.size() < static_cast<size_t>(opt.min_component_samples))
                        alive[b] = 0;
                    if (alive[a]) ba = detail::ribbon_boundary(c1, c2, raw[a]);
                    if (alive[b]) bb = detail::ribbon_boundary(c1, c2, raw[b]);
                    if (++guard > 512) {
                        alive[b] = 0;
                        break;
                    }
                }
            }
        }
        if (!any) break;
    }
    for (size_t a = 0; a < nraw; ++a)
        if (alive[a]) map.intervals.push_back(std::move(raw[a]));
    if (map.intervals.empty()) throw EmptyGoodSet("ribbon trimming exhausted every interval");

    if (map.intervals.size() > static_cast<size_t>(opt.max_intervals)) {
        std::stable_sort(map.intervals.begin(), map.intervals.end(),
                         [](const CovInterval& x, const CovInterval& y) {
                             return x.s1_hi - x.s1_lo > y.s1_hi - y.s1_lo;
                         });
        map.intervals.resize(opt.max_intervals);
        map.n_overflow = true;
    }
    std::stable_sort(map.intervals.begin(), map.intervals.end(),
                     [](const CovInterval& x, const CovInterval& y) { return x.s1_lo < y.s1_lo; });
    return map;
}

// ---------------------------------------------------------------------------
// verification report

struct CovReport {
    double delta_h = 0.0;
    double tv_A = 0.0;
    double sup_d = 0.0;
    double bound_sup_d = 0.0;
    bool sup_ok = false;
    bool monotone_ok = false;
    bool ribbons_disjoint = false;
    double leftover1 = 0.0, leftover2 = 0.0;
    double combined_constant = 0.0; // leftover1 / (delta_h + tv_A)
    int n_intervals = 0;
    bool pass() const { return sup_ok && monotone_ok && ribbons_disjoint; }
};

inline CovReport verify_cov(const CovMap& map, const HamiltonianField& field,
                            double slack = 0.05, int tv_resolution = 2048) {
    CovReport rep;
    rep.delta_h = map.delta_h;
    rep.n_intervals = static_cast<int>(map.intervals.size());
    rep.tv_A = tv_measure(field, RegionSpec::between(map.outer_polygon(), map.inner_polygon()),
                          tv_resolution);

    rep.sup_d = map.sup_d();
    rep.bound_sup_d = 2.0 * std::sqrt(2.0) / map.c_S * map.delta_h;
    rep.sup_ok = rep.sup_d <= rep.bound_sup_d * (1.0 + slack);

    // cyclic monotonicity: within intervals and across the interval order
    rep.monotone_ok = true;
    for (const auto& iv : map.intervals) {
        for (size_t k = 1; k < iv.s1.size(); ++k)
            if (iv.s1[k] <= iv.s1[k - 1] || iv.s2[k] <= iv.s2[k - 1]) rep.monotone_ok = false;
    }
    if (map.intervals.size() > 1) {
        double l2 = map.c2.length;
        double total = 0.0;
        for (size_t j = 0; j < map.intervals.size(); ++j) {
            const auto& cur = map.intervals[j];
            const auto& nxt = map.intervals[(j + 1) % map.intervals.size()];
            double gap = map.c2.wrap(nxt.s2_lo) - map.c2.wrap(cur.s2_hi);
            if (gap < 0.0) gap += l2;
            total += gap + (cur.s2_hi - cur.s2_lo);
        }
        // one full revolution when the interval images sit in cyclic order
        if (std::abs(total - l2) > 1e-6 * l2) rep.monotone_ok = false;
    }

    rep.ribbons_disjoint = true;
    for (size_t a = 0; a < map.intervals.size() && rep.ribbons_disjoint; ++a) {
        auto ba = detail::ribbon_boundary(map.c1, map.c2, map.intervals[a]);
        for (size_t b = a + 1; b < map.intervals.size(); ++b) {
            auto bb = detail::ribbon_boundary(map.c1, map.c2, map.intervals[b]);
            if (detail::polylines_cross(ba, bb)) {
                rep.ribbons_disjoint = false;
                break;
            }
        }
    }

    rep.leftover1 = map.c1.length - map.good_measure();
    rep.leftover2 = map.c2.length - map.image_measure();
    rep.combined_constant = rep.leftover1 / (rep.delta_h + rep.tv_A);
    return rep;
}

/// Nonnegative least-squares fit of leftover ~ c1*dh + c2*tv over a sweep.
inline std::pair<double, double> fit_cov_constants(const std::vector<CovReport>& reports) {
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (const auto& r : reports) {
        a11 += r.delta_h * r.delta_h;
        a12 += r.delta_h * r.tv_A;
        a22 += r.tv_A * r.tv_A;
        b1 += r.delta_h * r.leftover1;
        b2 += r.tv_A * r.leftover1;
    }
    double det = a11 * a22 - a12 * a12;
    double c1 = 0.0, c2 = 0.0;
    if (det > 1e-30) {
        c1 = (b1 * a22 - b2 * a12) / det;
        c2 = (b2 * a11 - b1 * a12) / det;
    }
    if (c1 < 0.0) {
        c1 = 0.0;
        c2 = a22 > 0.0 ? std::max(0.0, b2 / a22) : 0.0;
    } else if (c2 < 0.0) {
        c2 = 0.0;
        c1 = a11 > 0.0 ? std::max(0.0, b1 / a11) : 0.0;
    }
    return {c1, c2};
}

// ---------------------------------------------------------------------------
// Lemma-style quantitative checks on a built map

struct PeriodGapReport {
    double t1_restricted = 0.0;
    double t2_restricted = 0.0;
    double gap = 0.0;
    double bound = 0.0;
    bool pass = false;
};

/// |T(gamma1|F1) - T(gamma2|X12(F1))| against |Db|(A)/c_S^2. With no F1 given
/// the check runs on the whole good set D1; an explicitly empty F1 is the
/// empty restriction (gap 0).
inline PeriodGapReport period_gap(const HamiltonianField& field, const CovMap& map,
                                  std::optional<std::vector<std::pair<double, double>>> F1_in =
                                      std::nullopt,
                                  double slack = 0.05, int tv_resolution = 2048) {
    TravelTableOptions topt;
    TravelTable t1 = build_travel_table(field, map.c1, topt);
    TravelTable t2 = build_travel_table(field, map.c2, topt);

    PeriodGapReport rep;
    std::vector<std::pair<double, double>> F1;
    if (F1_in.has_value()) {
        F1 = *F1_in;
    } else {
        for (const auto& iv : map.intervals) F1.push_back({iv.s1_lo, iv.s1_hi});
    }

    for (auto [lo, hi] : F1) {
        if (hi <= lo) continue;
        if (!map.in_good_set(lo) || !map.in_good_set(hi))
            throw EmptyGoodSet("F1 piece leaves the good set D1");
        rep.t1_restricted += travel_time(t1, lo, hi);
        double ilo = map.x12(lo);
        double ihi = map.x12(hi);
        rep.t2_restricted += travel_time(t2, ilo, ihi);
    }
    rep.gap = std::abs(rep.t1_restricted - rep.t2_restricted);
    double tv = tv_measure(field, RegionSpec::between(map.outer_polygon(), map.inner_polygon()),
                           tv_resolution);
    rep.bound = tv / (map.c_S * map.c_S);
    rep.pass = rep.gap <= rep.bound * (1.0 + slack);
    return rep;
}

struct TwoPointGapReport {
    std::vector<double> times;
    std::vector<double> gaps;
    double initial_gap = 0.0;
    double fit_alpha = 0.0;
    double fit_beta = 0.0;
    double fit_r2 = 0.0;
    double predictor = 0.0; // (|dh| + |Db|(A)) / T(gamma1)
    bool envelope_ok = false;
};

inline TwoPointGapReport two_point_gap_check(const HamiltonianField& field, const CovMap& map,
                                             double s1, double s2,
                                             const std::vector<double>& times,
                                             double envelope_slack = 0.10,
                                             int tv_resolution = 2048) {
    TravelTableOptions topt;
    TravelTable t1 = build_travel_table(field, map.c1, topt);
    TravelTable t2 = build_travel_table(field, map.c2, topt);

    TwoPointGapReport rep;
    rep.times = times;
    rep.initial_gap = dist(map.c1.pos(s1), map.c2.pos(s2));
    for (double t : times) {
        Vec2 a = map.c1.pos(advance_on_cycle(t1, s1, t));
        Vec2 b = map.c2.pos(advance_on_cycle(t2, s2, t));
        rep.gaps.push_back(dist(a, b));
    }
    double max_res = 0.0;
    detail::affine_fit(times, rep.gaps, rep.fit_alpha, rep.fit_beta, rep.fit_r2, max_res);
    double scale = *std::max_element(rep.gaps.begin(), rep.gaps.end());
    rep.envelope_ok = max_res <= envelope_slack * std::max(scale, 1e-12);
    double tv = tv_measure(field, RegionSpec::between(map.outer_polygon(), map.inner_polygon()),
                           tv_resolution);
    rep.predictor = (map.delta_h + tv) / period(t1);
    return rep;
}

// ---------------------------------------------------------------------------
// slicing inequality (BV slicing through a graph strip)

struct Frame {
    Vec2 origin;
    Vec2 e;
    Vec2 n;
};

/// Scalar slicing check: lhs = int_D |g(top) - g(bottom)| dx1 against
/// rhs = int_E |grad g| (finite differences), E the strip between the graphs.
inline std::pair<double, double> slicing_bound_scalar(
    const std::vector<std::pair<double, double>>& D, const std::function<double(double)>& f1,
    const std::function<double(double)>& f2, const std::function<double(Vec2)>& g,
    const Frame& frame, int quad = 512) {
    auto at = [&](double x1, double x2) { return frame.origin + frame.e * x1 + frame.n * x2; };
    double lhs = 0.0, rhs = 0.0;
    for (auto [lo, hi] : D) {
        if (hi <= lo) continue;
        double dx = (hi - lo) / quad;
        for (int i = 0; i < quad; ++i) {
            double x1 = lo + (i + 0.5) * dx;
            double lo2 = f1(x1), hi2 = f2(x1);
            if (lo2 > hi2) throw GraphOrderViolated("f1 exceeds f2 on D");
            lhs += std::abs(g(at(x1, hi2)) - g(at(x1, lo2))) * dx;
            int m2 = 64;
            double dy = (hi2 - lo2) / m2;
            if (dy <= 0.0) continue;
            double fd = 0.5 * std::min(dx, dy);
            for (int j = 0; j < m2; ++j) {
                double x2 = lo2 + (j + 0.5) * dy;
                Vec2 p = at(x1, x2);
                double gx = (g(p + frame.e * fd) - g(p - frame.e * fd)) / (2.0 * fd);
                double gy = (g(p + frame.n * fd) - g(p - frame.n * fd)) / (2.0 * fd);
                rhs += std::sqrt(gx * gx + gy * gy) * dx * dy;
            }
        }
    }
    return {lhs, rhs};
}

/// Field version: g runs over both components of b in the frame; the right
/// side is the TV mass of the strip, which dominates each component.
inline std::pair<double, double> slicing_bound(const std::vector<std::pair<double, double>>& D,
                                               const std::function<double(double)>& f1,
                                               const std::function<double(double)>& f2,
                                               const HamiltonianField& field, const Frame& frame,
                                               int quad = 512) {
    double lhs = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
        auto g = [&](Vec2 p) {
            Vec2 b = field.velocity(p);
            return comp == 0 ? dot(b, frame.e) : dot(b, frame.n);
        };
        double part = 0.0;
        for (auto [lo, hi] : D) {
            if (hi <= lo) continue;
            double dx = (hi - lo) / quad;
            for (int i = 0; i < quad; ++i) {
                double x1 = lo + (i + 0.5) * dx;
                double lo2 = f1(x1), hi2 = f2(x1);
                if (lo2 > hi2) throw GraphOrderViolated("f1 exceeds f2 on D");
                Vec2 top = frame.origin + frame.e * x1 + frame.n * hi2;
                Vec2 bot = frame.origin + frame.e * x1 + frame.n * lo2;
                part += std::abs(g(top) - g(bot)) * dx;
            }
        }
        lhs = std::max(lhs, part);
    }
    // strip polygon for the TV quadrature
    std::vector<Vec2> poly;
    double lo = D.front().first, hi = D.back().second;
    int m = 256;
    for (int i = 0; i <= m; ++i) {
        double x1 = lo + (hi - lo) * i / m;
        poly.push_back(frame.origin + frame.e * x1 + frame.n * f1(x1));
    }
    for (int i = m; i >= 0; --i) {
        double x1 = lo + (hi - lo) * i / m;
        poly.push_back(frame.origin + frame.e * x1 + frame.n * f2(x1));
    }
    double rhs = tv_measure(field, RegionSpec::between(poly), 2048);
    return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// folding inequality: TV mass inside a cycle versus its length

struct FoldingReport {
    double tv_interior = 0.0;
    double length = 0.0;
    double ratio = 0.0;
    double c_fit = 0.0;
    bool pass = false;
};

inline FoldingReport folding_check(const Cycle& cycle, const HamiltonianField& field,
                                   double c_fit = 0.0, int tv_resolution = 2048) {
    FoldingReport rep;
    rep.tv_interior = tv_measure(field, RegionSpec::between(cycle.pts), tv_resolution);
    rep.length = cycle.length;
    rep.ratio = rep.tv_interior / rep.length;
    rep.c_fit = c_fit;
    rep.pass = rep.ratio >= c_fit;
    return rep;
}

// ---------------------------------------------------------------------------
// CSV summary (columns: j, s1_lo, s1_hi, s2_lo, s2_hi, e_x, e_y, sup_d)

inline void save_cov_csv(const CovMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "j,s1_lo,s1_hi,s2_lo,s2_hi,e_x,e_y,sup_d\n" << std::setprecision(12);
    for (size_t j = 0; j < map.intervals.size(); ++j) {
        const auto& iv = map.intervals[j];
        out << j << ',' << iv.s1_lo << ',' << iv.s1_hi << ',' << iv.s2_lo << ',' << iv.s2_hi
            << ',' << iv.e.x << ',' << iv.e.y << ',' << iv.sup_d() << '\n';
    }
}

} // namespace hamflow
