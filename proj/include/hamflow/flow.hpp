#pragma once

#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <vector>

#include "hamflow/cycle.hpp"
#include "hamflow/errors.hpp"
#include "hamflow/field.hpp"

namespace hamflow {

/// Cumulative time-of-travel table along a cycle: tau(s) = int_0^s ds'/|b|.
/// Nodes are uniform in arc length; the node count is Richardson-refined until
/// the period stabilizes.
struct TravelTable {
    std::shared_ptr<const Cycle> cycle;
    std::vector<double> tau; // tau[k] at s = k * l / nodes, k = 0..nodes
    double period = 0.0;
    double c_S = 0.0;       // min sampled speed along the cycle
    double sup_speed = 0.0; // field-wide sup |b|

    size_t nodes() const { return tau.size() - 1; }
    double node_ds() const { return cycle->length / static_cast<double>(nodes()); }

    double tau_at(double s) const {
        s = cycle->wrap(s);
        double x = s / node_ds();
        size_t k = std::min(nodes() - 1, static_cast<size_t>(x));
        double t = x - static_cast<double>(k);
        return tau[k] + t * (tau[k + 1] - tau[k]);
    }

    // inverse of tau by binary search + local linear interpolation
    double s_of_tau(double t) const {
        t = std::fmod(t, period);
        if (t < 0.0) t += period;
        size_t lo = std::upper_bound(tau.begin(), tau.end(), t) - tau.begin();
        size_t k = lo == 0 ? 0 : lo - 1;
        if (k >= nodes()) k = nodes() - 1;
        double dt = tau[k + 1] - tau[k];
        double frac = dt > 0.0 ? (t - tau[k]) / dt : 0.0;
        return (static_cast<double>(k) + frac) * node_ds();
    }
};

struct TravelTableOptions {
    double rel_tol = 1e-8;
    int max_nodes = 1 << 16;
    int min_nodes = 1 << 8;
    bool project_nodes = true; // pin quadrature nodes onto the exact level set
};

namespace detail {
// One Newton step toward the level set {H = h} along grad H.
inline Vec2 project_to_level(const HamiltonianField& f, Vec2 p, double h, double max_step) {
    Vec2 b = f.velocity(p);
    double n2 = b.norm2();
    if (n2 <= 0.0) return p;
    Vec2 grad{b.y, -b.x};
    Vec2 d = grad * ((f.value(p) - h) / n2);
    double dn = d.norm();
    if (dn > max_step) d = d * (max_step / dn);
    return p - d;
}
} // namespace detail

inline TravelTable build_travel_table(const HamiltonianField& field, const Cycle& cycle,
                                      const TravelTableOptions& opt = {}) {
    TravelTable tt;
    tt.cycle = std::make_shared<Cycle>(cycle);
    tt.sup_speed = field.sup_speed();
    tt.c_S = cycle.speeds.empty() ? 0.0 : cycle.min_speed();

    double step_cap = 4.0 * cycle.ds();
    int n = opt.min_nodes;
    double prev_period = -1.0;
    std::vector<double> inv_speed;
    for (;;) {
        inv_speed.assign(static_cast<size_t>(n) + 1, 0.0);
        double ds = cycle.length / n;
        for (int k = 0; k <= n; ++k) {
            Vec2 p = cycle.pos(k * ds);
            if (opt.project_nodes)
                p = detail::project_to_level(field, p, cycle.level, step_cap);
            inv_speed[k] = 1.0 / field.speed(p);
        }
        tt.tau.assign(static_cast<size_t>(n) + 1, 0.0);
        for (int k = 0; k < n; ++k)
            tt.tau[k + 1] = tt.tau[k] + 0.5 * (inv_speed[k] + inv_speed[k + 1]) * ds;
        tt.period = tt.tau[n];
        if (prev_period > 0.0 &&
            std::abs(tt.period - prev_period) <= opt.rel_tol * tt.period)
            break;
        if (2 * n > opt.max_nodes) break;
        prev_period = tt.period;
        n *= 2;
    }
    return tt;
}

/// Time to travel the forward cyclic interval [s0, s1]; in [0, T).
inline double travel_time(const TravelTable& tt, double s0, double s1) {
    double d = tt.tau_at(s1) - tt.tau_at(s0);
    if (d < 0.0) d += tt.period;
    return d;
}

inline double period(const TravelTable& tt) { return tt.period; }

/// Arc position after flowing for time t (any sign) from arc position s.
inline double advance_on_cycle(const TravelTable& tt, double s, double t) {
    return tt.s_of_tau(tt.tau_at(s) + t);
}

struct FlowOptions {
    int resolution = 512;
    TravelTableOptions table;
};

/// The regular Lagrangian flow X(t, x), computed exactly along the level-set
/// cycle through x. Points below the degeneracy floor are stationary.
inline Vec2 flow(const HamiltonianField& field, Vec2 x, double t,
                 const FlowOptions& opt = {}) {
    if (field.speed(x) < field.degeneracy_floor()) return x;
    ExtractOptions eopt;
    eopt.resolution = opt.resolution;
    double s = 0.0;
    Cycle c = extract_cycle_through(field, x, eopt, &s);
    TravelTable tt = build_travel_table(field, c, opt.table);
    Vec2 y = c.pos(advance_on_cycle(tt, s, t));
    double h = field.value(x);
    y = detail::project_to_level(field, y, h, 4.0 * c.ds());
    return detail::project_to_level(field, y, h, 4.0 * c.ds());
}

// ---------------------------------------------------------------------------
// Lemma-style two-point gap report on a single cycle

struct SameCycleGapReport {
    std::vector<double> times;
    std::vector<double> gaps;
    double initial_gap = 0.0;
    double max_gap = 0.0;
    double bound = 0.0; // (sup|b|^2 / c_S) * L * initial gap
    bool pass = false;
};

inline SameCycleGapReport same_cycle_gap_report(const TravelTable& tt, double s1, double s2,
                                                const std::vector<double>& times,
                                                double slack = 0.05) {
    if (tt.cycle->wrap(s1) == tt.cycle->wrap(s2))
        throw ConfigError("same_cycle_gap_report needs two distinct arc positions");
    const Cycle& c = *tt.cycle;
    SameCycleGapReport rep;
    rep.times = times;
    rep.initial_gap = dist(c.pos(s1), c.pos(s2));
    double L = inverse_lipschitz(c);
    // The unit-speed curve is 1-Lipschitz, so the displacement chain gives
    // max(1, sup|b|) * (sup|b| / c_S) * L; for sup|b| >= 1 this is the usual
    // sup^2/c_S form.
    rep.bound = std::max(1.0, tt.sup_speed) * tt.sup_speed / tt.c_S * L * rep.initial_gap;
    for (double t : times) {
        double g = dist(c.pos(advance_on_cycle(tt, s1, t)), c.pos(advance_on_cycle(tt, s2, t)));
        rep.gaps.push_back(g);
        rep.max_gap = std::max(rep.max_gap, g);
    }
    rep.pass = rep.max_gap <= rep.bound * (1.0 + slack);
    return rep;
}

// ---------------------------------------------------------------------------
// Lusin-Lipschitz profile of the flow map

struct SampleSpec {
    int count = 1000;
    uint64_t seed = 42;
    int resolution = 512;
    // optional admissibility screen applied per sampled level (0 = off)
    double threshold_M = 0.0;
    double threshold_L = 0.0;
};

struct LipschitzProfile {
    double eps_budget = 0.0;
    std::vector<double> times;
    std::vector<double> c_est;  // max pair ratio per time
    int pairs_retained = 0;
    int samples_discarded = 0;
    double discarded_area = 0.0;
    // affine fit c_est ~ a + c t
    double fit_a = 0.0;
    double fit_c = 0.0;
    double fit_r2 = 1.0;
    double fit_max_residual = 0.0;
};

namespace detail {

inline double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Vec2 sample_disk(std::mt19937_64& rng, double radius) {
    for (;;) {
        double x = 2.0 * unit_double(rng) - 1.0;
        double y = 2.0 * unit_double(rng) - 1.0;
        if (x * x + y * y < 1.0) return {x * radius, y * radius};
    }
}

inline void affine_fit(const std::vector<double>& ts, const std::vector<double>& ys,
                       double& a, double& c, double& r2, double& max_res) {
    size_t n = ts.size();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (size_t i = 0; i < n; ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    double det = n * stt - st * st;
    if (det == 0.0) {
        a = sy / n;
        c = 0.0;
    } else {
        c = (n * sty - st * sy) / det;
        a = (sy - c * st) / n;
    }
    double ss_res = 0.0, ss_tot = 0.0, mean = sy / n;
    max_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = ys[i] - (a + c * ts[i]);
        ss_res += r * r;
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
        max_res = std::max(max_res, std::abs(r));
    }
    r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
}

// Core of the profiler: max pair ratio per time under an arbitrary flow map
// (FlowFn: point index -> positions at every requested time). The production
// path binds the cycle flow; tests can inject closed-form maps.
template <typename FlowFn>
LipschitzProfile profile_pairs(const std::vector<Vec2>& pts,
                               const std::vector<std::pair<int, int>>& pairs,
                               FlowFn&& flow_of, const std::vector<double>& times) {
    LipschitzProfile prof;
    prof.times = times;
    prof.pairs_retained = static_cast<int>(pairs.size());
    std::vector<std::vector<Vec2>> traj(pts.size());
    std::vector<uint8_t> have(pts.size(), 0);
    prof.c_est.assign(times.size(), 0.0);
    for (auto [i, j] : pairs) {
        if (!have[i]) {
            traj[i] = flow_of(static_cast<size_t>(i));
            have[i] = 1;
        }
        if (!have[j]) {
            traj[j] = flow_of(static_cast<size_t>(j));
            have[j] = 1;
        }
        double gap0 = dist(pts[i], pts[j]);
        if (gap0 <= 0.0) continue;
        for (size_t k = 0; k < times.size(); ++k) {
            double r = dist(traj[i][k], traj[j][k]) / gap0;
            prof.c_est[k] = std::max(prof.c_est[k], r);
        }
    }
    affine_fit(times, prof.c_est, prof.fit_a, prof.fit_c, prof.fit_r2, prof.fit_max_residual);
    return prof;
}

} // namespace detail

/// Evolves nearest-neighbor sample pairs through the requested times after
/// discarding an eps-area budget of the worst points (slowest speeds first,
/// then admissibility failures), and fits the growth of the max ratio.
inline LipschitzProfile lusin_lipschitz_profile(const HamiltonianField& field, double eps,
                                                const SampleSpec& spec,
                                                const std::vector<double>& times) {
    if (!(eps > 0.0)) throw ConfigError("eps budget must be positive");
    std::mt19937_64 rng(spec.seed);
    double R = field.support_radius();
    int N = spec.count;
    std::vector<Vec2> pts(N);
    for (auto& p : pts) p = detail::sample_disk(rng, R);

    double area_per_sample = M_PI * R * R / N;
    double floor = field.degeneracy_floor();

    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) order[i] = i;
    std::vector<double> speed(N);
    for (int i = 0; i < N; ++i) speed[i] = field.speed(pts[i]);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return speed[a] < speed[b]; });

    int budget = static_cast<int>(eps / area_per_sample);
    int mandatory = 0;
    for (int i = 0; i < N; ++i)
        if (speed[i] < floor) ++mandatory;
    if (mandatory > budget)
        throw BudgetTooSmall("eps budget below the area of near-degenerate samples");

    std::vector<uint8_t> discard(N, 0);
    for (int k = 0; k < std::min(budget, N); ++k) discard[order[k]] = 1;

    ExtractOptions eopt;
    eopt.resolution = spec.resolution;
    TravelTableOptions topt;
    topt.rel_tol = 1e-7;
    topt.max_nodes = 1 << 13;

    std::vector<TravelTable> tables(N);
    std::vector<double> s0(N, 0.0);
    std::vector<uint8_t> ok(N, 0);
    for (int i = 0; i < N; ++i) {
        if (discard[i]) continue;
        try {
            Cycle c = extract_cycle_through(field, pts[i], eopt, &s0[i]);
            if (spec.threshold_M > 0.0 && turn(c) > spec.threshold_M) throw CuspDetected("turn");
            if (spec.threshold_L > 0.0 && inverse_lipschitz(c) > spec.threshold_L)
                throw CuspDetected("L");
            tables[i] = build_travel_table(field, c, topt);
            ok[i] = 1;
        } catch (const Error&) {
            discard[i] = 1; // inadmissible level: must fit in the budget
        }
    }
    int discarded = 0;
    for (int i = 0; i < N; ++i)
        if (discard[i]) ++discarded;
    if (discarded > budget)
        throw BudgetTooSmall("eps budget cannot absorb all inadmissible samples");

    std::vector<int> retained;
    for (int i = 0; i < N; ++i)
        if (!discard[i]) retained.push_back(i);
    if (retained.size() < 2) throw BudgetTooSmall("fewer than two samples retained");

    // nearest retained neighbor per retained point
    std::vector<std::pair<int, int>> pairs;
    for (size_t a = 0; a < retained.size(); ++a) {
        double best = std::numeric_limits<double>::max();
        int bj = -1;
        for (size_t b = 0; b < retained.size(); ++b) {
            if (a == b) continue;
            double d = (pts[retained[a]] - pts[retained[b]]).norm2();
            if (d < best) {
                best = d;
                bj = retained[b];
            }
        }
        int i = retained[a];
        if (bj >= 0 && i < bj) pairs.emplace_back(i, bj);
        else if (bj >= 0) pairs.emplace_back(bj, i);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    auto flow_of = [&](size_t i) {
        std::vector<Vec2> out(times.size());
        for (size_t k = 0; k < times.size(); ++k) {
            if (!ok[i]) {
                out[k] = pts[i];
            } else {
                const TravelTable& tt = tables[i];
                out[k] = tt.cycle->pos(advance_on_cycle(tt, s0[i], times[k]));
            }
        }
        return out;
    };
    LipschitzProfile prof = detail::profile_pairs(pts, pairs, flow_of, times);
    prof.eps_budget = eps;
    prof.samples_discarded = discarded;
    prof.discarded_area = discarded * area_per_sample;
    return prof;
}

inline void save_profile_csv(const LipschitzProfile& prof, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "t,C_est,pairs_retained\n" << std::setprecision(12);
    for (size_t k = 0; k < prof.times.size(); ++k)
        out << prof.times[k] << ',' << prof.c_est[k] << ',' << prof.pairs_retained << '\n';
}

} // namespace hamflow
