#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace fhn {

/// Spatial position; y is ignored on 1-D grids.
struct Point {
    double x = 0.0;
    double y = 0.0;

    double norm2() const noexcept { return x * x + y * y; }
};

/// Uniform grid on the truncated domain [-L, L]^dim, nodes at both ends.
///
/// Every node is an unknown; values outside the box are taken to be zero
/// (homogeneous Dirichlet through a zero ghost layer).
struct Grid {
    int dim = 1;
    double half_width = 1.0;
    int n = 8;
    double dx = 0.0;

    /// Throws ConfigError unless dim is 1 or 2, L > 0 and n >= 8.
    static Grid make(int dim, double half_width, int n);

    std::size_t size() const noexcept {
        return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
    }
    /// Quadrature weight dx^dim.
    double cell() const noexcept { return dim == 1 ? dx : dx * dx; }
    double coord(int i) const noexcept { return -half_width + dx * i; }
    /// Row-major in x then y: index = i * n + j.
    Point point(std::size_t index) const noexcept;

    bool operator==(const Grid&) const = default;
};

/// Node values of one scalar profile.
struct Field {
    Grid grid;
    std::vector<double> values;

    explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> v);

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool all_finite() const noexcept;
    double max_abs() const noexcept;
};

enum class Frame { Transformed, Physical };

/// (u, v) in the transformed frame, or (u~, v~) in the physical frame;
/// the two are related by u = z * u~ and v = z * v~.
struct StatePair {
    Field u;
    Field v;
    double t = 0.0;
    Frame frame = Frame::Physical;

    explicit StatePair(const Grid& g, double time = 0.0, Frame fr = Frame::Physical)
        : u(g), v(g), t(time), frame(fr) {}
    StatePair(Field uu, Field vv, double time, Frame fr);

    const Grid& grid() const noexcept { return u.grid; }
    bool all_finite() const noexcept { return u.all_finite() && v.all_finite(); }
};

/// Pairwise summation; the result does not depend on thread count.
double pairwise_sum(std::span<const double> xs);

/// Five-point (2-D) or three-point (1-D) Laplacian with a zero ghost layer.
Field laplacian(const Field& f);

double inner(const Field& a, const Field& b);
double norm_l2(const Field& f);
/// (sum |f_i|^p dx^dim)^(1/p), p >= 1.
double norm_lp(const Field& f, double p);
/// sum over nodes with |f_i| >= M of |f_i|^p dx^dim.
double tail_mass(const Field& f, double threshold, double p);
/// beta * |u|^2 + alpha * |v|^2.
double energy(const StatePair& s, double alpha, double beta);
/// |u|^2 + |v|^2.
double pair_norm2(const StatePair& s);
/// sqrt(|u1 - u2|^2 + |v1 - v2|^2).
double pair_distance(const StatePair& a, const StatePair& b);

/// Fraction of |f|^2 carried by nodes in the outer 10% shell of the box.
double boundary_leak(const Field& f);

/// Samples a function of position on every node.
template <typename Fn>
Field sample_field(const Grid& g, Fn&& fn) {
    Field out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        out[i] = fn(g.point(i));
    }
    return out;
}

/// 1-D: `x,value`; 2-D: `x,y,value`.
void write_field_csv(std::ostream& out, const Field& f);

}  // namespace fhn
