#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hamflow/errors.hpp"
#include "hamflow/field.hpp"
#include "hamflow/geometry.hpp"

namespace hamflow {

/// A closed simple level-set curve resampled to (near) uniform arc length.
/// Vertices are oriented along the flow direction of the generating field.
struct Cycle {
    double level = 0.0;
    std::vector<Vec2> pts;      // cyclic vertex ring (pts.front() is s = 0)
    std::vector<double> cum;    // arc position of each vertex, cum[0] = 0
    double length = 0.0;
    std::vector<Vec2> tangents; // unit chord tangent on [cum[k], cum[k+1])
    std::vector<double> speeds; // |b| at pts[k]

    size_t size() const { return pts.size(); }
    double ds() const { return length / static_cast<double>(pts.size()); }

    double wrap(double s) const {
        s = std::fmod(s, length);
        return s < 0.0 ? s + length : s;
    }

    // forward cyclic distance s0 -> s1
    double arc_forward(double s0, double s1) const {
        double d = wrap(s1) - wrap(s0);
        return d < 0.0 ? d + length : d;
    }

    // shortest cyclic distance
    double arc_dist(double s0, double s1) const {
        double d = arc_forward(s0, s1);
        return std::min(d, length - d);
    }

    size_t seg_index(double s) const {
        s = wrap(s);
        size_t k = std::min(pts.size() - 1,
                            static_cast<size_t>(s / ds()));
        while (k > 0 && cum[k] > s) --k;
        while (k + 1 < pts.size() && cum[k + 1] <= s) ++k;
        return k;
    }

    Vec2 pos(double s) const {
        s = wrap(s);
        size_t k = seg_index(s);
        size_t k1 = (k + 1) % pts.size();
        double s0 = cum[k];
        double s1 = k1 == 0 ? length : cum[k1];
        double t = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
        return pts[k] + (pts[k1] - pts[k]) * t;
    }

    Vec2 tangent_at(double s) const { return tangents[seg_index(s)]; }

    void attach_speeds(const HamiltonianField& f) {
        speeds.resize(pts.size());
        for (size_t k = 0; k < pts.size(); ++k) speeds[k] = f.speed(pts[k]);
    }

    double min_speed() const {
        double m = std::numeric_limits<double>::max();
        for (double v : speeds) m = std::min(m, v);
        return m;
    }

    // Test/IO helper: build a cycle directly from a vertex ring.
    static Cycle from_polygon(std::vector<Vec2> ring, double level = 0.0) {
        Cycle c;
        c.level = level;
        c.pts = std::move(ring);
        c.finalize();
        return c;
    }

    void finalize() {
        size_t m = pts.size();
        cum.resize(m);
        tangents.resize(m);
        double s = 0.0;
        for (size_t k = 0; k < m; ++k) {
            cum[k] = s;
            Vec2 d = pts[(k + 1) % m] - pts[k];
            s += d.norm();
            tangents[k] = normalized(d);
        }
        length = s;
    }
};

inline Cycle reverse(const Cycle& c) {
    std::vector<Vec2> ring;
    ring.reserve(c.pts.size());
    ring.push_back(c.pts[0]);
    for (size_t k = c.pts.size(); k-- > 1;) ring.push_back(c.pts[k]);
    Cycle r = Cycle::from_polygon(std::move(ring), c.level);
    if (!c.speeds.empty()) {
        r.speeds.resize(c.speeds.size());
        r.speeds[0] = c.speeds[0];
        for (size_t k = 1; k < c.speeds.size(); ++k)
            r.speeds[k] = c.speeds[c.speeds.size() - k];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Curve geometry

/// Cyclic total variation of the discrete unit tangent (integral curvature).
inline double turn(const Cycle& c) {
    double t = 0.0;
    size_t m = c.tangents.size();
    for (size_t k = 0; k < m; ++k)
        t += (c.tangents[(k + 1) % m] - c.tangents[k]).norm();
    return t;
}

/// Atomic measure on [0, L]* (positions sorted, masses nonnegative).
struct DiscreteMeasure {
    double domain_length = 1.0;
    std::vector<std::pair<double, double>> atoms;

    double total() const {
        double t = 0.0;
        for (auto& a : atoms) t += a.second;
        return t;
    }
    void sort() {
        std::sort(atoms.begin(), atoms.end());
    }
};

/// Tangent-jump measure of the cycle: an atom |t_k - t_{k-1}| at each vertex.
inline DiscreteMeasure turn_measure(const Cycle& c) {
    DiscreteMeasure mu;
    mu.domain_length = c.length;
    size_t m = c.tangents.size();
    mu.atoms.reserve(m);
    for (size_t k = 0; k < m; ++k) {
        double a = (c.tangents[k] - c.tangents[(k + m - 1) % m]).norm();
        if (a > 0.0) mu.atoms.emplace_back(c.cum[k], a);
    }
    return mu;
}

/// Max mass of a cyclic closed window of length 2*half_width.
inline double window_mass(const DiscreteMeasure& mu, double half_width) {
    if (mu.atoms.empty()) return 0.0;
    double w = 2.0 * half_width;
    if (w >= mu.domain_length) return mu.total();
    size_t n = mu.atoms.size();
    std::vector<double> pos(2 * n);
    std::vector<double> pre(2 * n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        pos[i] = mu.atoms[i].first;
        pos[n + i] = mu.atoms[i].first + mu.domain_length;
    }
    for (size_t i = 0; i < 2 * n; ++i)
        pre[i + 1] = pre[i] + mu.atoms[i % n].second;
    double best = 0.0;
    size_t j = 0;
    for (size_t i = 0; i < n; ++i) {
        if (j < i) j = i;
        while (j + 1 < 2 * n && pos[j + 1] <= pos[i] + w) ++j;
        best = std::max(best, pre[j + 1] - pre[i]);
    }
    return best;
}

inline int degree(const Cycle& c) {
    double a = polygon_signed_area(c.pts);
    double scale = std::max(1e-30, c.length * c.length);
    if (std::abs(a) < 1e-12 * scale) throw ZeroArea("degenerate polygon");
    return a > 0.0 ? 1 : -1;
}

inline bool interior_contains(const Cycle& c, Vec2 x, double boundary_tol = 0.0) {
    if (boundary_tol > 0.0 &&
        polyline_min_dist2(c.pts, x) < boundary_tol * boundary_tol)
        throw OnBoundary("query point lies on the curve");
    return point_in_polygon(c.pts, x);
}

namespace detail {
inline void cusp_guard(const Cycle& c, double eps = 0.05) {
    DiscreteMeasure mu = turn_measure(c);
    for (int k = 3; k <= 11; ++k) {
        double delta = c.length / static_cast<double>(1 << k);
        if (window_mass(mu, delta) < 2.0 - eps) return;
    }
    throw CuspDetected("tangent collapses in every tested window");
}
} // namespace detail

/// Lipschitz constant of the curve inverse, measured as the worst cyclic
/// arc / chord ratio over a decimated all-pairs scan plus local refinement.
inline double inverse_lipschitz(const Cycle& c) {
    detail::cusp_guard(c);
    size_t m = c.pts.size();
    size_t stride = std::max<size_t>(1, m / 512);
    double best = 1.0;
    size_t bi = 0, bj = 0;
    auto ratio = [&](size_t i, size_t j) {
        double chord = dist(c.pts[i], c.pts[j]);
        if (chord < 1e-15 * c.length) return 0.0;
        return c.arc_dist(c.cum[i], c.cum[j]) / chord;
    };
    for (size_t i = 0; i < m; i += stride)
        for (size_t j = i + stride; j < m; j += stride) {
            double r = ratio(i, j);
            if (r > best) {
                best = r;
                bi = i;
                bj = j;
            }
        }
    if (stride > 1) {
        for (size_t i = bi >= stride ? bi - stride : 0; i <= std::min(m - 1, bi + stride); ++i)
            for (size_t j = bj >= stride ? bj - stride : 0; j <= std::min(m - 1, bj + stride); ++j) {
                if (i == j) continue;
                best = std::max(best, ratio(i, j));
            }
    }
    return best;
}

struct AdmissibilityThresholds {
    double c_S = 0.0; // speed floor
    double M = 0.0;   // turn bound
    double L = 0.0;   // inverse-Lipschitz bound
};

struct AdmissibilityCert {
    double measured_c_S = 0.0;
    double measured_turn = 0.0;
    double measured_L = 0.0;
    AdmissibilityThresholds thresholds;
    bool pass_speed = false;
    bool pass_turn = false;
    bool pass_L = false;
    bool pass() const { return pass_speed && pass_turn && pass_L; }
};

inline AdmissibilityCert certify_admissible(const Cycle& cycle, const HamiltonianField& field,
                                            AdmissibilityThresholds th) {
    Cycle c = cycle;
    if (c.speeds.empty()) c.attach_speeds(field);
    AdmissibilityCert cert;
    cert.thresholds = th;
    cert.measured_c_S = c.min_speed();
    cert.measured_turn = turn(c);
    cert.measured_L = inverse_lipschitz(c);
    cert.pass_speed = cert.measured_c_S >= th.c_S;
    cert.pass_turn = cert.measured_turn <= th.M;
    cert.pass_L = cert.measured_L <= th.L;
    return cert;
}

// ---------------------------------------------------------------------------
// Level-set extraction: seeded marching-squares tracing on an implicit grid.

struct ExtractOptions {
    int resolution = 512;      // cells per side over [-R, R]^2
    bool refine = true;        // sharpen crossings & vertices onto the exact level
    double floor_scale = 1e-3; // degeneracy floor = floor_scale * sup_speed
    double target_spacing = 0.0; // 0 = min(cell/2, length/256)
    int min_samples = 64;
};

namespace detail {

struct Edge {
    int orient; // 0 horizontal (nodes (i,j)-(i+1,j)), 1 vertical ((i,j)-(i,j+1))
    int i, j;
    bool operator==(const Edge& o) const {
        return orient == o.orient && i == o.i && j == o.j;
    }
};

class ContourTracer {
public:
    ContourTracer(const HamiltonianField& f, double h, int m, const double* nodes = nullptr)
        : f_(f), h_(h), m_(m), R_(f.support_radius()), cell_(2.0 * f.support_radius() / m),
          nodes_(nodes) {}

    double node_value(int i, int j) const {
        if (nodes_) return nodes_[static_cast<size_t>(j) * (m_ + 1) + i];
        return f_.value(node_pos(i, j));
    }
    Vec2 node_pos(int i, int j) const { return {-R_ + i * cell_, -R_ + j * cell_}; }
    bool above(int i, int j) const { return node_value(i, j) > h_; }
    int cells() const { return m_; }
    double cell_size() const { return cell_; }

    bool edge_crosses(const Edge& e) const {
        if (e.orient == 0) return above(e.i, e.j) != above(e.i + 1, e.j);
        return above(e.i, e.j) != above(e.i, e.j + 1);
    }

    Vec2 crossing_point(const Edge& e, bool refine) const {
        Vec2 a, b;
        double va, vb;
        if (e.orient == 0) {
            a = node_pos(e.i, e.j);
            b = node_pos(e.i + 1, e.j);
            va = node_value(e.i, e.j);
            vb = node_value(e.i + 1, e.j);
        } else {
            a = node_pos(e.i, e.j);
            b = node_pos(e.i, e.j + 1);
            va = node_value(e.i, e.j);
            vb = node_value(e.i, e.j + 1);
        }
        double t = (h_ - va) / (vb - va);
        t = std::clamp(t, 0.0, 1.0);
        if (refine && !f_.is_grid()) {
            // secant with a bisection safeguard on g(t) = H(a + t(b-a)) - h;
            // along grid-field edges bilinear H is already linear, so skip there
            double lo = 0.0, hi = 1.0;
            double glo = va - h_, ghi = vb - h_;
            if (glo > ghi) {
                std::swap(lo, hi);
                std::swap(glo, ghi);
            }
            double tc = t;
            double gc = f_.value(a + (b - a) * tc) - h_;
            for (int it = 0; it < 12 && std::abs(gc) > 0.0; ++it) {
                if (gc < 0.0) {
                    lo = tc;
                    glo = gc;
                } else {
                    hi = tc;
                    ghi = gc;
                }
                double tn = (ghi != glo) ? lo - glo * (hi - lo) / (ghi - glo)
                                         : 0.5 * (lo + hi);
                double lo2 = std::min(lo, hi), hi2 = std::max(lo, hi);
                if (!(tn > lo2 && tn < hi2)) tn = 0.5 * (lo + hi);
                if (std::abs(tn - tc) < 1e-12) break;
                tc = tn;
                gc = f_.value(a + (b - a) * tc) - h_;
            }
            t = tc;
        }
        return a + (b - a) * t;
    }

    // Cell edge layout: bottom/right/top/left.
    static Edge cell_edge(int ci, int cj, int side) {
        switch (side) {
        case 0: return {0, ci, cj};         // bottom
        case 1: return {1, ci + 1, cj};     // right
        case 2: return {0, ci, cj + 1};     // top
        default: return {1, ci, cj};        // left
        }
    }

    // Exit edge of the contour through cell (ci,cj) entered via `entry`.
    // Saddle cells are disambiguated by the cell-center value of H.
    bool find_exit(int ci, int cj, const Edge& entry, Edge& exit) const {
        bool a0 = above(ci, cj), a1 = above(ci + 1, cj);
        bool a2 = above(ci + 1, cj + 1), a3 = above(ci, cj + 1);
        bool crosses[4] = {a0 != a1, a1 != a2, a3 != a2, a0 != a3};
        int entry_side = -1;
        int count = 0;
        for (int s = 0; s < 4; ++s) {
            if (!crosses[s]) continue;
            ++count;
            if (cell_edge(ci, cj, s) == entry) entry_side = s;
        }
        if (entry_side < 0 || count < 2) return false;
        if (count == 2) {
            for (int s = 0; s < 4; ++s)
                if (crosses[s] && s != entry_side) {
                    exit = cell_edge(ci, cj, s);
                    return true;
                }
            return false;
        }
        // ambiguous saddle: all four edges cross
        Vec2 center = node_pos(ci, cj) + Vec2{0.5 * cell_, 0.5 * cell_};
        bool ca = f_.value(center) > h_;
        int partner;
        if (a0 == ca) {
            // pairs {bottom,right}, {top,left}
            partner = (entry_side == 0) ? 1 : (entry_side == 1) ? 0 : (entry_side == 2) ? 3 : 2;
        } else {
            // pairs {bottom,left}, {top,right}
            partner = (entry_side == 0) ? 3 : (entry_side == 3) ? 0 : (entry_side == 2) ? 1 : 2;
        }
        exit = cell_edge(ci, cj, partner);
        return true;
    }

    // Trace the closed contour that crosses `start`, walking first into the
    // cell (start_ci, start_cj). Returns false if the contour leaves the grid
    // or fails to close.
    bool trace(const Edge& start, int start_ci, int start_cj,
               std::vector<Vec2>& points, std::vector<Edge>* edges, bool refine) const {
        points.clear();
        if (edges) edges->clear();
        Edge cur = start;
        int ci = start_ci, cj = start_cj;
        long max_steps = 2L * m_ * (m_ + 1) + 8;
        points.push_back(crossing_point(cur, refine));
        if (edges) edges->push_back(cur);
        for (long step = 0; step < max_steps; ++step) {
            Edge exit;
            if (!find_exit(ci, cj, cur, exit)) return false;
            if (exit == start) return true; // closed
            points.push_back(crossing_point(exit, refine));
            if (edges) edges->push_back(exit);
            // move to the neighbor cell across `exit`
            if (exit.orient == 0) {
                cj = (exit.j == cj) ? cj - 1 : cj + 1;
            } else {
                ci = (exit.i == ci) ? ci - 1 : ci + 1;
            }
            if (ci < 0 || cj < 0 || ci >= m_ || cj >= m_) return false; // open contour
            cur = exit;
        }
        return false;
    }

private:
    const HamiltonianField& f_;
    double h_;
    int m_;
    double R_;
    double cell_;
    const double* nodes_;
};

inline std::vector<Vec2> dedupe_ring(std::vector<Vec2> raw, double tol) {
    std::vector<Vec2> out;
    out.reserve(raw.size());
    for (const Vec2& p : raw) {
        if (out.empty() || dist(out.back(), p) > tol) out.push_back(p);
    }
    while (out.size() > 1 && dist(out.front(), out.back()) <= tol) out.pop_back();
    return out;
}

// Resample a closed raw polyline to uniform spacing; optionally pin vertices
// back onto the exact level set with a couple of Newton steps.
inline Cycle build_cycle(const HamiltonianField& f, double h, std::vector<Vec2> raw,
                         const ExtractOptions& opt) {
    double cell = 2.0 * f.support_radius() / opt.resolution;
    raw = dedupe_ring(std::move(raw), 1e-9 * cell);
    if (raw.size() < 4) throw DegenerateLevel("contour collapsed during resampling");

    double l = 0.0;
    for (size_t k = 0; k < raw.size(); ++k)
        l += dist(raw[k], raw[(k + 1) % raw.size()]);
    double spacing = opt.target_spacing > 0.0 ? opt.target_spacing
                                              : std::min(0.5 * cell, l / 256.0);
    size_t M = std::max<size_t>(opt.min_samples,
                                static_cast<size_t>(std::llround(l / spacing)));

    std::vector<Vec2> pts(M);
    size_t seg = 0;
    double seg_start = 0.0;
    double seg_len = dist(raw[0], raw[1 % raw.size()]);
    for (size_t k = 0; k < M; ++k) {
        double target = l * static_cast<double>(k) / static_cast<double>(M);
        while (target > seg_start + seg_len && seg + 1 < raw.size()) {
            seg_start += seg_len;
            ++seg;
            seg_len = dist(raw[seg], raw[(seg + 1) % raw.size()]);
        }
        double t = seg_len > 0.0 ? (target - seg_start) / seg_len : 0.0;
        pts[k] = raw[seg] + (raw[(seg + 1) % raw.size()] - raw[seg]) * std::clamp(t, 0.0, 1.0);
    }

    if (opt.refine) {
        double floor = opt.floor_scale * f.sup_speed();
        for (Vec2& q : pts) {
            for (int it = 0; it < 2; ++it) {
                Vec2 b = f.velocity(q);
                double n2 = b.norm2();
                if (n2 < 0.25 * floor * floor) break;
                Vec2 grad{b.y, -b.x}; // b = perp(grad H)
                double step = (f.value(q) - h) / n2;
                Vec2 d = grad * step;
                double dn = d.norm();
                if (dn > 0.5 * cell) d = d * (0.5 * cell / dn);
                q -= d;
            }
        }
    }

    Cycle c = Cycle::from_polygon(std::move(pts), h);
    c.attach_speeds(f);

    // orient along the flow of b
    double align = 0.0;
    for (size_t k = 0; k < c.pts.size(); ++k)
        align += dot(c.tangents[k], f.velocity(c.pts[k]));
    if (align < 0.0) c = reverse(c);
    return c;
}

} // namespace detail

/// All closed contour components of {H = h}, each resampled to unit speed and
/// oriented along b; ordered by descending length. Throws DegenerateLevel when
/// the contour touches speeds below the degeneracy floor, NoCycles when the
/// level set has no closed component.
inline std::vector<Cycle> extract_cycles(const HamiltonianField& field, double h,
                                         const ExtractOptions& opt) {
    if (opt.resolution < 64) throw ConfigError("extraction resolution must be >= 64");
    int m = opt.resolution;
    double R = field.support_radius();
    double cell = 2.0 * R / m;
    std::vector<double> nodes(static_cast<size_t>(m + 1) * (m + 1));
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= m; ++i)
            nodes[static_cast<size_t>(j) * (m + 1) + i] = field.value({-R + i * cell, -R + j * cell});

    detail::ContourTracer tracer(field, h, m, nodes.data());
    std::vector<uint8_t> seen(static_cast<size_t>(m) * (m + 1), 0); // horizontal edges
    auto hidx = [m](int i, int j) { return static_cast<size_t>(j) * m + i; };

    double floor = opt.floor_scale * field.sup_speed();
    bool any_crossing = false;
    std::vector<Cycle> cycles;
    std::vector<Vec2> points;
    std::vector<detail::Edge> edges;

    for (int j = 0; j <= m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (seen[hidx(i, j)]) continue;
            detail::Edge e{0, i, j};
            if (!tracer.edge_crosses(e)) continue;
            any_crossing = true;
            int ci = i, cj = j < m ? j : j - 1; // walk into the cell above when possible
            bool closed = tracer.trace(e, ci, cj, points, &edges, opt.refine);
            for (const auto& te : edges)
                if (te.orient == 0) seen[hidx(te.i, te.j)] = 1;
            if (!closed) {
                // open contour: trace the other way just to mark its edges
                int cj2 = j - 1;
                if (cj2 >= 0 && cj2 != cj) {
                    tracer.trace(e, i, cj2, points, &edges, false);
                    for (const auto& te : edges)
                        if (te.orient == 0) seen[hidx(te.i, te.j)] = 1;
                }
                continue;
            }
            for (const Vec2& p : points)
                if (field.speed(p) < floor)
                    throw DegenerateLevel("contour speed below degeneracy floor");
            cycles.push_back(detail::build_cycle(field, h, points, opt));
        }
    }
    if (cycles.empty()) {
        if (!any_crossing) throw NoCycles("level set is empty");
        throw NoCycles("level set has no closed component");
    }
    auto key_vertex = [](const Cycle& c) {
        Vec2 best = c.pts[0];
        for (const Vec2& p : c.pts)
            if (p.x < best.x || (p.x == best.x && p.y < best.y)) best = p;
        return best;
    };
    std::stable_sort(cycles.begin(), cycles.end(), [&](const Cycle& a, const Cycle& b) {
        if (a.length != b.length) return a.length > b.length;
        Vec2 ka = key_vertex(a), kb = key_vertex(b);
        return ka.x < kb.x || (ka.x == kb.x && ka.y < kb.y);
    });
    return cycles;
}

inline std::vector<Cycle> extract_cycles(const HamiltonianField& field, double h,
                                         int resolution) {
    ExtractOptions opt;
    opt.resolution = resolution;
    return extract_cycles(field, h, opt);
}

/// The single cycle through point x at level H(x), traced from x's grid cell.
/// On return *s_at_x (if given) holds the arc position of x on the cycle.
inline Cycle extract_cycle_through(const HamiltonianField& field, Vec2 x,
                                   const ExtractOptions& opt, double* s_at_x = nullptr) {
    if (opt.resolution < 64) throw ConfigError("extraction resolution must be >= 64");
    int m = opt.resolution;
    double R = field.support_radius();
    double cell = 2.0 * R / m;
    double h = field.value(x);
    detail::ContourTracer tracer(field, h, m);

    int ci = std::clamp(static_cast<int>(std::floor((x.x + R) / cell)), 0, m - 1);
    int cj = std::clamp(static_cast<int>(std::floor((x.y + R) / cell)), 0, m - 1);

    detail::Edge start{0, 0, 0};
    bool found = false;
    for (int ring = 0; ring <= 1 && !found; ++ring) {
        for (int dj = -ring; dj <= ring && !found; ++dj) {
            for (int di = -ring; di <= ring && !found; ++di) {
                int i = ci + di, j = cj + dj;
                if (i < 0 || j < 0 || i >= m || j >= m) continue;
                for (int side = 0; side < 4; ++side) {
                    detail::Edge e = detail::ContourTracer::cell_edge(i, j, side);
                    if (tracer.edge_crosses(e)) {
                        start = e;
                        ci = i;
                        cj = j;
                        found = true;
                        break;
                    }
                }
            }
        }
    }
    if (!found) throw DegenerateLevel("no level crossing near seed point");

    std::vector<Vec2> points;
    if (!tracer.trace(start, ci, cj, points, nullptr, opt.refine))
        throw DegenerateLevel("contour through point does not close");
    double floor = opt.floor_scale * field.sup_speed();
    for (const Vec2& p : points)
        if (field.speed(p) < floor)
            throw DegenerateLevel("contour speed below degeneracy floor");
    Cycle c = detail::build_cycle(field, h, points, opt);

    if (s_at_x) {
        double best = std::numeric_limits<double>::max();
        size_t bk = 0;
        double bt = 0.0;
        size_t n = c.pts.size();
        for (size_t k = 0; k < n; ++k) {
            double t;
            double d2 = point_segment_dist2(x, c.pts[k], c.pts[(k + 1) % n], &t);
            if (d2 < best) {
                best = d2;
                bk = k;
                bt = t;
            }
        }
        double s0 = c.cum[bk];
        double s1 = bk + 1 < n ? c.cum[bk + 1] : c.length;
        *s_at_x = s0 + bt * (s1 - s0);
    }
    return c;
}

// ---------------------------------------------------------------------------
// CSV golden-test interchange (columns: s,x,y)

inline void save_cycle_csv(const Cycle& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "s,x,y\n" << std::setprecision(17);
    for (size_t k = 0; k < c.pts.size(); ++k)
        out << c.cum[k] << ',' << c.pts[k].x << ',' << c.pts[k].y << '\n';
}

inline Cycle load_cycle_csv(const std::string& path, double level = 0.0) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::getline(in, line); // header
    std::vector<Vec2> ring;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        std::getline(ss, tok, ',');
        double x = std::stod(tok);
        std::getline(ss, tok, ',');
        double y = std::stod(tok);
        ring.push_back({x, y});
    }
    return Cycle::from_polygon(std::move(ring), level);
}

} // namespace hamflow
