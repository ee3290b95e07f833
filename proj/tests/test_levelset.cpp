#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamflow/cycle.hpp"
#include "hamflow/field.hpp"

using namespace hamflow;

namespace {

std::vector<Vec2> circle_poly(double r, int n = 1024, bool ccw = true) {
    std::vector<Vec2> p(n);
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n * (ccw ? 1.0 : -1.0);
        p[i] = {r * std::cos(a), r * std::sin(a)};
    }
    return p;
}

std::vector<Vec2> ellipse_poly(double a, double b, int n = 4096) {
    // resample to near-uniform arc length so the cycle invariant holds
    std::vector<Vec2> raw(8 * n);
    for (int i = 0; i < 8 * n; ++i) {
        double t = 2.0 * M_PI * i / (8 * n);
        raw[i] = {a * std::cos(t), b * std::sin(t)};
    }
    double l = 0.0;
    for (size_t i = 0; i < raw.size(); ++i) l += dist(raw[i], raw[(i + 1) % raw.size()]);
    std::vector<Vec2> out;
    out.reserve(n);
    double step = l / n, acc = 0.0, next = 0.0;
    for (size_t i = 0; i < raw.size() && out.size() < static_cast<size_t>(n); ++i) {
        if (acc >= next) {
            out.push_back(raw[i]);
            next += step;
        }
        acc += dist(raw[i], raw[(i + 1) % raw.size()]);
    }
    return out;
}

double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

TEST_CASE("extract one cycle of the differential rotation") {
    auto f = HamiltonianField::differential_rotation();
    double h = 1.0 / 16.0;
    auto cycles = extract_cycles(f, h, 512);
    REQUIRE(cycles.size() == 1);
    double r_exact = std::sqrt(1.0 - 2.0 * std::sqrt(h)); // closed-form level radius
    CHECK(r_exact == Catch::Approx(std::sqrt(0.5)));
    CHECK(cycles[0].length == Catch::Approx(2.0 * M_PI * r_exact).epsilon(1e-4));
    for (size_t k = 0; k < cycles[0].pts.size(); k += 37)
        CHECK(cycles[0].pts[k].norm() == Catch::Approx(r_exact).epsilon(1e-6));
}

TEST_CASE("level above the range has no cycles") {
    auto f = HamiltonianField::differential_rotation();
    CHECK_THROWS_AS(extract_cycles(f, 0.3, 128), NoCycles);
}

TEST_CASE("double well: two cycles between saddle and peaks") {
    auto f = HamiltonianField::double_well();
    double h = 0.06; // peak is 4/27 ~ 0.148, saddle value 0
    auto cycles = extract_cycles(f, h, 512);

    // flood-fill oracle on the sign of H - h over a coarse grid
    int n = 256;
    std::vector<int> lab(static_cast<size_t>(n) * n, 0);
    auto at = [&](int i, int j) -> int& { return lab[static_cast<size_t>(j) * n + i]; };
    auto above = [&](int i, int j) {
        Vec2 p{-1.0 + (i + 0.5) * 2.0 / n, -1.0 + (j + 0.5) * 2.0 / n};
        return f.value(p) > h;
    };
    int comps = 0;
    std::vector<std::pair<int, int>> stack;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (at(i, j) != 0 || !above(i, j)) continue;
            ++comps;
            stack.push_back({i, j});
            at(i, j) = comps;
            while (!stack.empty()) {
                auto [ci, cj] = stack.back();
                stack.pop_back();
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int ni = ci + di[d], nj = cj + dj[d];
                    if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;
                    if (at(ni, nj) == 0 && above(ni, nj)) {
                        at(ni, nj) = comps;
                        stack.push_back({ni, nj});
                    }
                }
            }
        }
    CHECK(comps == 2);
    CHECK(cycles.size() == 2);
}

TEST_CASE("H is constant along extracted cycles") {
    auto f = HamiltonianField::double_well();
    auto cycles = extract_cycles(f, 0.06, 512);
    for (const auto& c : cycles) {
        double worst = 0.0;
        for (const Vec2& p : c.pts) worst = std::max(worst, std::abs(f.value(p) - c.level));
        CHECK(worst < 1e-7);
    }
}

TEST_CASE("turn of canonical shapes") {
    Cycle circle = Cycle::from_polygon(circle_poly(0.7, 1024));
    CHECK(turn(circle) == Catch::Approx(2.0 * M_PI).margin(1e-3));

    Cycle square = Cycle::from_polygon({{1, 1}, {-1, 1}, {-1, -1}, {1, -1}});
    CHECK(turn(square) == Catch::Approx(4.0 * std::sqrt(2.0)));

    // curvature quadrature oracle for the convex ellipse: total curvature 2*pi
    Cycle ell = Cycle::from_polygon(ellipse_poly(1.0, 0.5));
    double a = 1.0, b = 0.5, quad = 0.0;
    int n = 200000;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * M_PI * i / n;
        double num = a * b;
        double den = std::pow(a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t), 1.5);
        double speed = std::sqrt(a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t));
        quad += (num / den) * speed * (2.0 * M_PI / n); // |kappa| ds
    }
    CHECK(quad == Catch::Approx(2.0 * M_PI).margin(1e-3));
    CHECK(turn(ell) == Catch::Approx(quad).margin(1e-3));
}

TEST_CASE("extracted cycles have turn at least 2*pi") {
    auto f = HamiltonianField::double_well();
    for (const auto& c : extract_cycles(f, 0.06, 256))
        CHECK(turn(c) >= 2.0 * M_PI - 1e-3);
}

TEST_CASE("window_mass examples") {
    DiscreteMeasure atom;
    atom.domain_length = 1.0;
    atom.atoms = {{0.5, 1.0}};
    CHECK(window_mass(atom, 0.01) == Catch::Approx(1.0));
    CHECK(window_mass(atom, 0.3) == Catch::Approx(1.0));

    DiscreteMeasure unif;
    unif.domain_length = 1.0;
    int n = 4000;
    for (int i = 0; i < n; ++i) unif.atoms.emplace_back((i + 0.5) / n, 1.0 / n);
    CHECK(window_mass(unif, 0.05) == Catch::Approx(0.1).margin(1e-3));

    DiscreteMeasure mix;
    mix.domain_length = 1.0;
    for (int i = 0; i < n; ++i) mix.atoms.emplace_back((i + 0.5) / n, 0.4 / n);
    mix.atoms.emplace_back(0.2, 0.6);
    mix.sort();
    CHECK(window_mass(mix, 0.05) == Catch::Approx(0.64).margin(1e-3));
}

TEST_CASE("inverse lipschitz constants") {
    Cycle circle = Cycle::from_polygon(circle_poly(1.0, 2048));
    CHECK(inverse_lipschitz(circle) == Catch::Approx(M_PI / 2.0).epsilon(0.01));

    // brute-force all-pairs oracle at 4096 samples
    auto brute = [](const Cycle& c) {
        double best = 0.0;
        size_t m = c.pts.size();
        size_t stride = std::max<size_t>(1, m / 4096);
        for (size_t i = 0; i < m; i += stride)
            for (size_t j = i + stride; j < m; j += stride) {
                double chord = dist(c.pts[i], c.pts[j]);
                if (chord < 1e-12) continue;
                best = std::max(best, c.arc_dist(c.cum[i], c.cum[j]) / chord);
            }
        return best;
    };

    Cycle ell = Cycle::from_polygon(ellipse_poly(1.0, 0.5, 4096));
    double le = inverse_lipschitz(ell);
    CHECK(le >= M_PI / 2.0);
    CHECK(le == Catch::Approx(brute(ell)).epsilon(0.02));

    // square corners have turn sqrt(2) < 2: cusp-free, finite constant
    std::vector<Vec2> sq;
    for (int side = 0; side < 4; ++side)
        for (int i = 0; i < 256; ++i) {
            double t = i / 256.0;
            switch (side) {
            case 0: sq.push_back({-1.0 + 2.0 * t, -1.0}); break;
            case 1: sq.push_back({1.0, -1.0 + 2.0 * t}); break;
            case 2: sq.push_back({1.0 - 2.0 * t, 1.0}); break;
            default: sq.push_back({-1.0, 1.0 - 2.0 * t}); break;
            }
        }
    Cycle square = Cycle::from_polygon(sq);
    double ls = inverse_lipschitz(square);
    CHECK(std::isfinite(ls));
    CHECK(ls == Catch::Approx(brute(square)).epsilon(0.02));
}

TEST_CASE("cusp detection") {
    // degenerate "needle": out along a segment and straight back
    std::vector<Vec2> needle;
    for (int i = 0; i < 128; ++i) needle.push_back({i / 128.0, 1e-7 * (i % 2)});
    for (int i = 128; i-- > 0;) needle.push_back({i / 128.0, -1e-7 * (i % 2)});
    Cycle c = Cycle::from_polygon(needle);
    CHECK_THROWS_AS(inverse_lipschitz(c), CuspDetected);
}

TEST_CASE("degree and reversal") {
    Cycle ccw = Cycle::from_polygon(circle_poly(1.0, 512, true));
    Cycle cw = Cycle::from_polygon(circle_poly(1.0, 512, false));
    CHECK(degree(ccw) == 1);
    CHECK(degree(cw) == -1);
    CHECK(degree(reverse(ccw)) == -degree(ccw));

    // cycles of the differential rotation are oriented along b: clockwise
    auto f = HamiltonianField::differential_rotation();
    auto cycles = extract_cycles(f, 0.05, 256);
    REQUIRE(cycles.size() == 1);
    CHECK(degree(cycles[0]) == -1);
    // orientation induced by b: tangents align with the velocity
    const Cycle& c = cycles[0];
    for (size_t k = 0; k < c.pts.size(); k += 17)
        CHECK(dot(c.tangents[k], f.velocity(c.pts[k])) > 0.0);

    Cycle degenerate = Cycle::from_polygon({{0, 0}, {1, 0}, {0, 0}, {1, 0}});
    CHECK_THROWS_AS(degree(degenerate), ZeroArea);
}

TEST_CASE("interior containment") {
    Cycle circle = Cycle::from_polygon(circle_poly(1.0, 512));
    CHECK(interior_contains(circle, {0.0, 0.0}));
    CHECK_FALSE(interior_contains(circle, {2.0, 0.0}));
    CHECK_THROWS_AS(interior_contains(circle, {1.0, 0.0}, 1e-3), OnBoundary);

    auto f = HamiltonianField::differential_rotation();
    double h = std::pow(1.0 - 0.49, 2) / 4.0; // level of the r=0.7 circle
    auto cycles = extract_cycles(f, h, 256);
    REQUIRE(cycles.size() == 1);
    Vec2 q{0.6, 0.3};
    CHECK(q.norm() < 0.7);
    CHECK(interior_contains(cycles[0], q));

    // winding-number cross-check on random points
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        Vec2 p{2.4 * unit_double(rng) - 1.2, 2.4 * unit_double(rng) - 1.2};
        bool inside = interior_contains(cycles[0], p);
        double w = 0.0;
        const auto& pts = cycles[0].pts;
        for (size_t k = 0; k < pts.size(); ++k) {
            Vec2 a = pts[k] - p, b = pts[(k + 1) % pts.size()] - p;
            w += std::atan2(cross(a, b), dot(a, b));
        }
        bool winding_inside = std::abs(w) > M_PI;
        CHECK(inside == winding_inside);
    }
}

TEST_CASE("admissibility certificates") {
    auto f = HamiltonianField::rigid_rotation();
    double h = 0.5 * (1.0 - 0.25); // level of r = 0.5
    auto cycles = extract_cycles(f, h, 512);
    REQUIRE(cycles.size() == 1);

    auto cert = certify_admissible(cycles[0], f, {0.4, 7.0, 2.0});
    CHECK(cert.measured_c_S == Catch::Approx(0.5).epsilon(1e-3));
    CHECK(cert.measured_turn == Catch::Approx(2.0 * M_PI).margin(1e-2));
    CHECK(cert.measured_L == Catch::Approx(M_PI / 2.0).epsilon(0.01));
    CHECK(cert.pass());

    auto tight = certify_admissible(cycles[0], f, {0.6, 7.0, 2.0});
    CHECK_FALSE(tight.pass_speed);
    CHECK_FALSE(tight.pass());

    auto dr = HamiltonianField::differential_rotation();
    double h2 = std::pow(1.0 - 0.25, 2) / 4.0;
    auto c2 = extract_cycles(dr, h2, 512);
    REQUIRE(c2.size() == 1);
    auto cert2 = certify_admissible(c2[0], dr, {0.35, 7.0, 2.0});
    CHECK(cert2.measured_c_S == Catch::Approx(0.375).epsilon(1e-3));
    CHECK(cert2.pass());
}

TEST_CASE("cycle csv round trip") {
    auto f = HamiltonianField::differential_rotation();
    auto cycles = extract_cycles(f, 0.1, 128);
    REQUIRE(!cycles.empty());
    save_cycle_csv(cycles[0], "cycle_roundtrip.csv");
    Cycle back = load_cycle_csv("cycle_roundtrip.csv", cycles[0].level);
    REQUIRE(back.pts.size() == cycles[0].pts.size());
    CHECK(back.length == Catch::Approx(cycles[0].length).epsilon(1e-12));
    for (size_t k = 0; k < back.pts.size(); k += 11)
        CHECK(dist(back.pts[k], cycles[0].pts[k]) < 1e-12);
}

TEST_CASE("unit-speed resampling invariant") {
    auto f = HamiltonianField::differential_rotation();
    auto cycles = extract_cycles(f, 0.1, 256);
    const Cycle& c = cycles[0];
    double ds = c.ds();
    for (size_t k = 0; k + 1 < c.pts.size(); ++k) {
        double step = dist(c.pts[k], c.pts[k + 1]);
        CHECK(std::abs(step - ds) < 0.02 * ds);
    }
}
