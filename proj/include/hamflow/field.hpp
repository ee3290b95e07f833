#pragma once

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "hamflow/errors.hpp"
#include "hamflow/geometry.hpp"

namespace hamflow {

/// Compactly supported Lipschitz Hamiltonian H with velocity b = (-dH/dy, dH/dx).
/// Either a closed-form catalogue entry or a bilinear grid sample.
class HamiltonianField {
public:
    enum class Kind { rigid, diffrot, doublewell, grid };

    // H = (1 - r^2)/2 inside the unit disk: rigid clockwise rotation b = (y, -x).
    static HamiltonianField rigid_rotation() { return HamiltonianField(Kind::rigid); }

    // H = (1 - r^2)^2/4: angular speed 1 - r^2, shearing rotation.
    static HamiltonianField differential_rotation() { return HamiltonianField(Kind::diffrot); }

    // H = (1 - r^2)^2 * x^2: two peaks at (+-1/sqrt(3), 0), saddle line x = 0.
    static HamiltonianField double_well() { return HamiltonianField(Kind::doublewell); }

    static HamiltonianField from_grid(int n, double radius, std::vector<double> samples) {
        if (n < 2 || static_cast<int>(samples.size()) != n * n)
            throw ConfigError("grid field needs n>=2 and n*n samples");
        HamiltonianField f(Kind::grid);
        f.grid_n_ = n;
        f.radius_ = radius;
        f.samples_ = std::make_shared<std::vector<double>>(std::move(samples));
        return f;
    }

    // Sample any field onto an n x n node grid over [-R, R]^2.
    static HamiltonianField sampled_copy(const HamiltonianField& src, int n) {
        std::vector<double> v(static_cast<size_t>(n) * n);
        double R = src.support_radius();
        double h = 2.0 * R / (n - 1);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                v[static_cast<size_t>(j) * n + i] =
                    src.value({-R + i * h, -R + j * h});
        return from_grid(n, R, std::move(v));
    }

    static HamiltonianField load_hamf(const std::string& path);
    static HamiltonianField load_pgm(const std::string& path, double radius = 1.0,
                                     double scale = 1.0);
    void save_hamf(const std::string& path) const;

    Kind kind() const { return kind_; }
    bool is_grid() const { return kind_ == Kind::grid; }
    double support_radius() const { return radius_; }

    // Node spacing of the grid representation (0 for closed-form entries).
    double grid_spacing() const {
        return kind_ == Kind::grid ? 2.0 * radius_ / (grid_n_ - 1) : 0.0;
    }

    double value(Vec2 p) const {
        switch (kind_) {
        case Kind::rigid: {
            double r2 = p.norm2();
            return r2 >= 1.0 ? 0.0 : 0.5 * (1.0 - r2);
        }
        case Kind::diffrot: {
            double r2 = p.norm2();
            if (r2 >= 1.0) return 0.0;
            double u = 1.0 - r2;
            return 0.25 * u * u;
        }
        case Kind::doublewell: {
            double r2 = p.norm2();
            if (r2 >= 1.0) return 0.0;
            double u = 1.0 - r2;
            return u * u * p.x * p.x;
        }
        case Kind::grid:
            return grid_value(p);
        }
        return 0.0;
    }

    Vec2 velocity(Vec2 p) const {
        switch (kind_) {
        case Kind::rigid: {
            if (p.norm2() >= 1.0) return {0.0, 0.0};
            return {p.y, -p.x}; // grad H = -p, b = perp of it
        }
        case Kind::diffrot: {
            double r2 = p.norm2();
            if (r2 >= 1.0) return {0.0, 0.0};
            double u = 1.0 - r2;
            return {u * p.y, -u * p.x};
        }
        case Kind::doublewell: {
            double r2 = p.norm2();
            if (r2 >= 1.0) return {0.0, 0.0};
            double u = 1.0 - r2;
            double hx = 2.0 * p.x * u * (u - 2.0 * p.x * p.x);
            double hy = -4.0 * p.x * p.x * p.y * u;
            return {-hy, hx};
        }
        case Kind::grid: {
            double h = grid_spacing();
            double b1 = -(grid_value({p.x, p.y + h}) - grid_value({p.x, p.y - h})) / (2.0 * h);
            double b2 = (grid_value({p.x + h, p.y}) - grid_value({p.x - h, p.y})) / (2.0 * h);
            return {b1, b2};
        }
        }
        return {0.0, 0.0};
    }

    double speed(Vec2 p) const { return velocity(p).norm(); }

    double sup_speed() const {
        switch (kind_) {
        case Kind::rigid:
            return 1.0;
        case Kind::diffrot:
            return 2.0 / (3.0 * std::sqrt(3.0)); // max of r(1-r^2) on [0,1]
        case Kind::doublewell:
        case Kind::grid:
            if (sup_speed_cache_ < 0.0) sup_speed_cache_ = scan_sup_speed();
            return sup_speed_cache_;
        }
        return 0.0;
    }

    // Speed below which a point counts as stationary / a level as degenerate.
    double degeneracy_floor() const { return 1e-3 * sup_speed(); }

private:
    explicit HamiltonianField(Kind k) : kind_(k) {}

    double grid_value(Vec2 p) const {
        if (p.norm2() >= radius_ * radius_) return 0.0;
        const auto& v = *samples_;
        int n = grid_n_;
        double h = 2.0 * radius_ / (n - 1);
        double fx = (p.x + radius_) / h;
        double fy = (p.y + radius_) / h;
        int i = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
        int j = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
        double tx = fx - i;
        double ty = fy - j;
        double v00 = v[static_cast<size_t>(j) * n + i];
        double v10 = v[static_cast<size_t>(j) * n + i + 1];
        double v01 = v[static_cast<size_t>(j + 1) * n + i];
        double v11 = v[static_cast<size_t>(j + 1) * n + i + 1];
        return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
               (1 - tx) * ty * v01 + tx * ty * v11;
    }

    double scan_sup_speed() const {
        int m = kind_ == Kind::grid ? std::max(2 * (grid_n_ - 1), 512) : 2048;
        double best = 0.0;
        double h = 2.0 * radius_ / m;
        for (int j = 0; j <= m; ++j)
            for (int i = 0; i <= m; ++i)
                best = std::max(best, speed({-radius_ + i * h, -radius_ + j * h}));
        return best;
    }

    Kind kind_;
    double radius_ = 1.0;
    int grid_n_ = 0;
    std::shared_ptr<const std::vector<double>> samples_;
    mutable double sup_speed_cache_ = -1.0;
};

/// Planar region: either the area between two closed polylines (inner may be
/// empty, giving the whole interior of the outer one) or an explicit cell mask.
struct RegionSpec {
    std::vector<Vec2> outer;
    std::vector<Vec2> inner; // empty = none
    // mask alternative
    int mask_n = 0;
    double mask_extent = 0.0;
    std::vector<uint8_t> mask;

    static RegionSpec between(std::vector<Vec2> outer_poly, std::vector<Vec2> inner_poly = {}) {
        RegionSpec r;
        r.outer = std::move(outer_poly);
        r.inner = std::move(inner_poly);
        return r;
    }

    static RegionSpec from_mask(int n, double extent, std::vector<uint8_t> cells) {
        RegionSpec r;
        r.mask_n = n;
        r.mask_extent = extent;
        r.mask = std::move(cells);
        return r;
    }

    bool is_mask() const { return mask_n > 0; }
};

/// Quadrature of the Frobenius norm of the velocity Jacobian over a region:
/// the numerical stand-in for the total variation mass of Db on it.
/// `resolution` is the internal grid for region coverage and differencing.
inline double tv_measure(const HamiltonianField& field, const RegionSpec& region,
                         int resolution = 2048) {
    double R = field.support_radius();
    double extent = region.is_mask() ? region.mask_extent : R;
    int n = region.is_mask() ? region.mask_n : resolution;
    double cell = 2.0 * extent / n;
    double fd = 0.5 * cell;

    auto cell_tv = [&](int i, int j) {
        Vec2 c{-extent + (i + 0.5) * cell, -extent + (j + 0.5) * cell};
        Vec2 bxp = field.velocity({c.x + fd, c.y});
        Vec2 bxm = field.velocity({c.x - fd, c.y});
        Vec2 byp = field.velocity({c.x, c.y + fd});
        Vec2 bym = field.velocity({c.x, c.y - fd});
        double d11 = (bxp.x - bxm.x) / (2.0 * fd);
        double d12 = (byp.x - bym.x) / (2.0 * fd);
        double d21 = (bxp.y - bxm.y) / (2.0 * fd);
        double d22 = (byp.y - bym.y) / (2.0 * fd);
        return std::sqrt(d11 * d11 + d12 * d12 + d21 * d21 + d22 * d22) * cell * cell;
    };

    double total = 0.0;
    long covered = 0;
    if (region.is_mask()) {
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (region.mask[static_cast<size_t>(j) * n + i]) {
                    total += cell_tv(i, j);
                    ++covered;
                }
    } else {
        std::vector<uint8_t> inside(static_cast<size_t>(n) * n, 0);
        polygon_fill_cells(region.outer, n, extent,
                           [&](int i, int j) { inside[static_cast<size_t>(j) * n + i] = 1; });
        if (!region.inner.empty())
            polygon_fill_cells(region.inner, n, extent,
                               [&](int i, int j) { inside[static_cast<size_t>(j) * n + i] = 0; });
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (inside[static_cast<size_t>(j) * n + i]) {
                    total += cell_tv(i, j);
                    ++covered;
                }
    }
    if (covered == 0) throw EmptyRegion("region covers no cell");
    return total;
}

inline HamiltonianField HamiltonianField::load_hamf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, "HAMF1", 5) != 0)
        throw IoError("bad magic in " + path);
    uint32_t n = 0;
    double R = 0.0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&R), 8);
    if (!in || n < 2 || n > 1 << 20 || !(R > 0.0))
        throw IoError("bad header in " + path);
    std::vector<double> v(static_cast<size_t>(n) * n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    if (!in) throw IoError("truncated data in " + path);
    return from_grid(static_cast<int>(n), R, std::move(v));
}

inline void HamiltonianField::save_hamf(const std::string& path) const {
    if (kind_ != Kind::grid) {
        sampled_copy(*this, 512).save_hamf(path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out.write("HAMF1", 5);
    uint32_t n = static_cast<uint32_t>(grid_n_);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&radius_), 8);
    out.write(reinterpret_cast<const char*>(samples_->data()),
              static_cast<std::streamsize>(samples_->size() * 8));
}

inline HamiltonianField HamiltonianField::load_pgm(const std::string& path, double radius,
                                                   double scale) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("truncated pgm " + path);
    };
    if (next_token() != "P2") throw IoError("not a P2 graymap: " + path);
    int w = std::stoi(next_token());
    int h = std::stoi(next_token());
    int maxval = std::stoi(next_token());
    if (w != h || w < 2 || maxval <= 0) throw IoError("unsupported pgm shape in " + path);
    std::vector<double> v(static_cast<size_t>(w) * h);
    for (auto& x : v) x = scale * std::stod(next_token()) / maxval;
    return from_grid(w, radius, std::move(v));
}

} // namespace hamflow
