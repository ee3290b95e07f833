#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hamflow/cycle.hpp"
#include "hamflow/field.hpp"

using namespace hamflow;

namespace {

// deterministic uniform double in [0,1) from raw bits
double unit_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec2 random_point_in_disk(std::mt19937_64& rng, double radius) {
    for (;;) {
        double x = 2.0 * unit_double(rng) - 1.0;
        double y = 2.0 * unit_double(rng) - 1.0;
        if (x * x + y * y < 1.0) return {x * radius, y * radius};
    }
}

std::vector<Vec2> circle_poly(double r, int n = 720) {
    std::vector<Vec2> p(n);
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        p[i] = {r * std::cos(a), r * std::sin(a)};
    }
    return p;
}

} // namespace

TEST_CASE("hamiltonian evaluation: closed forms and support") {
    auto f = HamiltonianField::differential_rotation();
    CHECK(f.value({0.0, 0.0}) == Catch::Approx(0.25));
    CHECK(f.value({2.0, 0.0}) == 0.0);
    CHECK(f.value({1.0, 0.0}) == 0.0);

    auto g = HamiltonianField::sampled_copy(f, 512);
    double exact = std::pow(1.0 - 0.25, 2) / 4.0; // r^2 = 0.09 + 0.16
    CHECK(std::abs(g.value({0.3, 0.4}) - exact) < 1e-4);
    CHECK(exact == Catch::Approx(0.140625));
}

TEST_CASE("velocity is the rotated gradient") {
    auto rigid = HamiltonianField::rigid_rotation();
    Vec2 b = rigid.velocity({0.5, 0.0});
    CHECK(b.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(b.y == Catch::Approx(-0.5));

    auto dr = HamiltonianField::differential_rotation();
    Vec2 b2 = dr.velocity({0.5, 0.0});
    CHECK(b2.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(b2.y == Catch::Approx(-0.375)); // -r(1-r^2)

    // grid field central differences track the closed form at O(h^2)
    auto grid = HamiltonianField::sampled_copy(dr, 512);
    double h = grid.grid_spacing();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        Vec2 p = random_point_in_disk(rng, 0.9);
        Vec2 gb = grid.velocity(p);
        Vec2 eb = dr.velocity(p);
        CHECK(dist(gb, eb) < 40.0 * h * h);
    }
}

TEST_CASE("divergence-free and b orthogonal to grad H") {
    std::mt19937_64 rng(11);
    double fd = 1e-5;
    for (auto f : {HamiltonianField::rigid_rotation(), HamiltonianField::differential_rotation(),
                   HamiltonianField::double_well()}) {
        for (int i = 0; i < 100; ++i) {
            Vec2 p = random_point_in_disk(rng, 0.9);
            Vec2 bxp = f.velocity({p.x + fd, p.y});
            Vec2 bxm = f.velocity({p.x - fd, p.y});
            Vec2 byp = f.velocity({p.x, p.y + fd});
            Vec2 bym = f.velocity({p.x, p.y - fd});
            double div = (bxp.x - bxm.x + byp.y - bym.y) / (2.0 * fd);
            CHECK(std::abs(div) < 1e-6);

            Vec2 b = f.velocity(p);
            double gx = (f.value({p.x + fd, p.y}) - f.value({p.x - fd, p.y})) / (2.0 * fd);
            double gy = (f.value({p.x, p.y + fd}) - f.value({p.x, p.y - fd})) / (2.0 * fd);
            CHECK(std::abs(b.x * gx + b.y * gy) < 1e-7 * (1.0 + b.norm()));
        }
    }
}

TEST_CASE("lipschitz bound holds on random pairs") {
    auto f = HamiltonianField::double_well();
    double lam = f.sup_speed();
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        Vec2 p = random_point_in_disk(rng, 1.2);
        Vec2 q = random_point_in_disk(rng, 1.2);
        CHECK(std::abs(f.value(p) - f.value(q)) <= lam * dist(p, q) * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("sup_speed closed forms") {
    CHECK(HamiltonianField::rigid_rotation().sup_speed() == Catch::Approx(1.0));
    // 1-D calculus oracle: maximize r(1-r^2) on [0,1] -> r = 1/sqrt(3)
    double best = 0.0;
    for (int i = 0; i <= 100000; ++i) {
        double r = i / 100000.0;
        best = std::max(best, r * (1.0 - r * r));
    }
    CHECK(HamiltonianField::differential_rotation().sup_speed() == Catch::Approx(best).epsilon(1e-6));
    CHECK(HamiltonianField::differential_rotation().sup_speed() ==
          Catch::Approx(2.0 / (3.0 * std::sqrt(3.0))));

    auto zero = HamiltonianField::from_grid(8, 1.0, std::vector<double>(64, 0.0));
    CHECK(zero.sup_speed() == 0.0);
}

TEST_CASE("tv_measure: rigid rotation over the unit square") {
    // constant Jacobian [[0,1],[-1,0]], Frobenius norm sqrt(2), area 1
    auto f = HamiltonianField::rigid_rotation();
    std::vector<Vec2> square{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
    double tv = tv_measure(f, RegionSpec::between(square), 1024);
    CHECK(tv == Catch::Approx(std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("tv_measure: empty region throws") {
    auto f = HamiltonianField::rigid_rotation();
    RegionSpec r = RegionSpec::from_mask(16, 1.0, std::vector<uint8_t>(256, 0));
    CHECK_THROWS_AS(tv_measure(f, r), EmptyRegion);
}

TEST_CASE("tv_measure: refinement oracle on an annulus") {
    auto f = HamiltonianField::differential_rotation();
    RegionSpec region = RegionSpec::between(circle_poly(0.6, 2000), circle_poly(0.4, 2000));
    double coarse = tv_measure(f, region, 1024);
    double fine = tv_measure(f, region, 4096);
    CHECK(std::abs(coarse - fine) < 0.01 * fine);

    // closed-form check: |Jb|_F = sqrt(2(2r^2-1)^2 + 2r^4) for the catalogue entry
    double exact = 0.0;
    int n = 20000;
    for (int i = 0; i < n; ++i) {
        double r = 0.4 + 0.2 * (i + 0.5) / n;
        double fr = std::sqrt(2.0 * std::pow(2.0 * r * r - 1.0, 2) + 2.0 * std::pow(r, 4));
        exact += 2.0 * M_PI * r * fr * 0.2 / n;
    }
    CHECK(fine == Catch::Approx(exact).epsilon(0.01));
}

TEST_CASE("tv_measure monotone under region inclusion") {
    auto f = HamiltonianField::double_well();
    std::vector<Vec2> small = circle_poly(0.4);
    std::vector<Vec2> big = circle_poly(0.8);
    double tv_small = tv_measure(f, RegionSpec::between(small), 1024);
    double tv_big = tv_measure(f, RegionSpec::between(big), 1024);
    CHECK(tv_small <= tv_big * 1.001);
}

TEST_CASE("hamf round trip and pgm load") {
    auto f = HamiltonianField::sampled_copy(HamiltonianField::differential_rotation(), 128);
    f.save_hamf("field_roundtrip.hamf");
    auto g = HamiltonianField::load_hamf("field_roundtrip.hamf");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        Vec2 p = random_point_in_disk(rng, 0.95);
        CHECK(g.value(p) == Catch::Approx(f.value(p)).margin(1e-15));
    }

    {
        std::ofstream pgm("field_test.pgm");
        pgm << "P2\n# test grid\n3 3\n100\n";
        pgm << "0 0 0\n0 100 0\n0 0 0\n";
    }
    auto p = HamiltonianField::load_pgm("field_test.pgm", 1.0, 2.0);
    CHECK(p.value({0.0, 0.0}) == Catch::Approx(2.0));
    CHECK(p.value({2.0, 0.0}) == 0.0);
}
