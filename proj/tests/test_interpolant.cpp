#include <catch2/catch_amalgamated.hpp>

#include "hamflow/field.hpp"
#include "hamflow/interpolant.hpp"

using namespace hamflow;

namespace {

std::vector<Vec2> circle_poly(double r, int n) {
    std::vector<Vec2> p(n);
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        p[i] = {r * std::cos(a), r * std::sin(a)};
    }
    return p;
}

// open-interval turn mass of (s_i, s_{i+1}) measured on the source samples
double segment_interior_turn(const PolylineReparam& rep, size_t seg) {
    const Cycle& c = rep.source;
    size_t M = c.pts.size();
    size_t lo = rep.knot_idx[seg];
    size_t hi = seg + 1 < rep.knot_idx.size() ? rep.knot_idx[seg + 1] : M;
    double t = 0.0;
    for (size_t k = lo + 1; k < hi; ++k)
        t += (c.tangents[k % M] - c.tangents[(k + M - 1) % M]).norm();
    return t;
}

} // namespace

TEST_CASE("interpolant of the unit circle: turn budget binds") {
    Cycle c = Cycle::from_polygon(circle_poly(1.0, 2048));
    auto rep = affine_interpolant(c, 10.0); // large gap: mesh constraint inactive
    CHECK(rep.segments() == 15);            // ceil(2*pi*sqrt(5))
    for (size_t i = 0; i < rep.segments(); ++i)
        CHECK(segment_interior_turn(rep, i) <= 1.0 / std::sqrt(5.0) + 1e-12);
    CHECK(rep.y_of_s(0.0) == 0.0);
    CHECK(rep.y_of_s(c.length) == Catch::Approx(rep.l_K));
}

TEST_CASE("interpolant of the unit circle: mesh bound binds") {
    Cycle c = Cycle::from_polygon(circle_poly(1.0, 3150));
    auto rep = affine_interpolant(c, 0.01);
    CHECK(rep.segments() == 315); // ceil(2*pi / 0.02)
    for (size_t i = 0; i < rep.segments(); ++i)
        CHECK(rep.seg_source_len(i) <= 0.02 * (1.0 + 1e-9));
}

TEST_CASE("interpolant is idempotent on a compliant polygon") {
    // regular octagon: corner turn 2*sin(pi/8) ~ 0.765 > 1/sqrt(5), so knots
    // must land exactly on the corners; edges short enough for the mesh cap
    int sides = 8;
    std::vector<Vec2> ring;
    int per_side = 64;
    std::vector<Vec2> corners(sides);
    for (int i = 0; i < sides; ++i) {
        double a = 2.0 * M_PI * i / sides;
        corners[i] = {std::cos(a), std::sin(a)};
    }
    for (int i = 0; i < sides; ++i)
        for (int k = 0; k < per_side; ++k) {
            double t = static_cast<double>(k) / per_side;
            ring.push_back(corners[i] + (corners[(i + 1) % sides] - corners[i]) * t);
        }
    Cycle c = Cycle::from_polygon(ring);
    double edge = dist(corners[0], corners[1]);
    auto rep = affine_interpolant(c, 0.51 * edge); // cap just above the edge length
    REQUIRE(rep.segments() == static_cast<size_t>(sides));
    for (int i = 0; i < sides; ++i)
        CHECK(dist(rep.verts[i], corners[i]) < 1e-12);
}

TEST_CASE("reparametrization is monotone and consistent") {
    Cycle c = Cycle::from_polygon(circle_poly(0.8, 1500));
    auto rep = affine_interpolant(c, 0.05);
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
        double s = c.length * i / 200.0;
        double y = rep.y_of_s(s);
        CHECK(y > prev);
        prev = y;
        CHECK(rep.s_of_y(y) == Catch::Approx(s).margin(1e-9));
    }
    // each direction e_i is the normalized chord
    for (size_t i = 0; i < rep.segments(); ++i) {
        Vec2 chord = rep.verts[(i + 1) % rep.segments()] - rep.verts[i];
        CHECK(dist(normalized(chord), rep.dirs[i]) < 1e-14);
    }
}

TEST_CASE("interpolant tangents align with segment directions") {
    // Lemma property: on (s_i, s_{i+1}) the source tangent has dot >= 2/sqrt(5)
    auto f = HamiltonianField::differential_rotation();
    auto cycles = extract_cycles(f, 0.08, 256);
    REQUIRE(!cycles.empty());
    const Cycle& c = cycles[0];
    auto rep = affine_interpolant(c, 0.02);
    size_t M = c.pts.size();
    for (size_t seg = 0; seg < rep.segments(); ++seg) {
        size_t lo = rep.knot_idx[seg];
        size_t hi = seg + 1 < rep.knot_idx.size() ? rep.knot_idx[seg + 1] : M;
        for (size_t k = lo; k < hi; ++k)
            CHECK(dot(c.tangents[k % M], rep.dirs[seg]) >= 2.0 / std::sqrt(5.0) - 5e-3);
    }
}

TEST_CASE("overlap bad set: circle ribbons never cross below the radius") {
    Cycle c = Cycle::from_polygon(circle_poly(0.6, 2048));
    auto rep = affine_interpolant(c, 0.05);
    auto bad = overlap_bad_set(rep, 0.3); // a = r/2
    CHECK(bad.measure() == 0.0);

    auto bad_big = overlap_bad_set(rep, 0.61); // beyond the center: everything crosses
    CHECK(bad_big.measure() > 0.9 * c.length);
}

TEST_CASE("overlap bad set: peanut neck is flagged") {
    // Cassini oval with a/c slightly above 1: two round lobes and a narrow
    // waist at x = 0 of half-width sqrt(a^2 - c^2) ~ 0.2
    double cc = 1.0, aa = 1.02;
    std::vector<Vec2> ring;
    int n = 4096;
    for (int i = 0; i < n; ++i) {
        double t = 2.0 * M_PI * i / n;
        double c2t = std::cos(2.0 * t);
        double r2 = cc * cc * c2t +
                    std::sqrt(std::pow(cc, 4) * c2t * c2t + std::pow(aa, 4) - std::pow(cc, 4));
        double r = std::sqrt(std::max(0.0, r2));
        ring.push_back({r * std::cos(t), r * std::sin(t)});
    }
    Cycle c = Cycle::from_polygon(ring);
    auto rep = affine_interpolant(c, 0.05);
    double waist = std::sqrt(aa * aa - cc * cc); // ~0.2: ribbons meet across it
    auto bad = overlap_bad_set(rep, 1.25 * waist);
    CHECK(bad.measure() > 0.0);
    // flagged parameters concentrate at the neck: |x| small
    for (auto& part : bad.parts) {
        Vec2 p = c.pos(0.5 * (part.first + part.second));
        CHECK(std::abs(p.x) < 0.6);
    }
}

TEST_CASE("overlap bad set measure is monotone in a and obeys the turn bound") {
    Cycle c = Cycle::from_polygon(circle_poly(0.5, 1024));
    auto rep = affine_interpolant(c, 0.05);
    double prev = 0.0;
    double L = inverse_lipschitz(c);
    double tv = turn(c);
    for (double a : {0.05, 0.1, 0.2, 0.3, 0.45, 0.55}) {
        double m = overlap_bad_set(rep, a).measure();
        CHECK(m >= prev - 1e-12);
        prev = m;
        CHECK(m <= 10.0 * (1.0 + L) * a * tv); // Lemma bound with slack factor 10
    }
}
