#include "fhn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "fhn/errors.hpp"

namespace fhn {

Grid Grid::make(int dim, double half_width, int n) {
    if (dim != 1 && dim != 2) {
        throw ConfigError(fmt::format("grid.dim must be 1 or 2, got {}", dim));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw ConfigError(fmt::format("grid.l must be positive, got {}", half_width));
    }
    if (n < 8) {
        throw ConfigError(fmt::format("grid.n must be at least 8, got {}", n));
    }
    return Grid{dim, half_width, n, 2.0 * half_width / (n - 1)};
}

Point Grid::point(std::size_t index) const noexcept {
    if (dim == 1) {
        return {coord(static_cast<int>(index)), 0.0};
    }
    const auto i = static_cast<int>(index / static_cast<std::size_t>(n));
    const auto j = static_cast<int>(index % static_cast<std::size_t>(n));
    return {coord(i), coord(j)};
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) {
        throw ConfigError(fmt::format("field has {} values, grid expects {}", values.size(), grid.size()));
    }
}

bool Field::all_finite() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

double Field::max_abs() const noexcept {
    double m = 0.0;
    for (double x : values) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

StatePair::StatePair(Field uu, Field vv, double time, Frame fr)
    : u(std::move(uu)), v(std::move(vv)), t(time), frame(fr) {
    if (!(u.grid == v.grid)) {
        throw ConfigError("state components must share one grid");
    }
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 16) {
        double s = 0.0;
        for (double x : xs) {
            s += x;
        }
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

Field laplacian(const Field& f) {
    const Grid& g = f.grid;
    const double inv = 1.0 / (g.dx * g.dx);
    Field out(g);
    const int n = g.n;
    if (g.dim == 1) {
        for (int i = 0; i < n; ++i) {
            const double left = i > 0 ? f[i - 1] : 0.0;
            const double right = i + 1 < n ? f[i + 1] : 0.0;
            out[i] = (left - 2.0 * f[i] + right) * inv;
        }
        return out;
    }
    auto at = [&](int i, int j) -> double {
        if (i < 0 || j < 0 || i >= n || j >= n) {
            return 0.0;
        }
        return f[static_cast<std::size_t>(i) * n + j];
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(i) * n + j] =
                (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) - 4.0 * at(i, j)) * inv;
        }
    }
    return out;
}

double inner(const Field& a, const Field& b) {
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        prod[i] = a[i] * b[i];
    }
    return pairwise_sum(prod) * a.grid.cell();
}

double norm_l2(const Field& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double norm_lp(const Field& f, double p) {
    if (!(p >= 1.0)) {
        throw ConfigError(fmt::format("L^p exponent must be >= 1, got {}", p));
    }
    if (p == 2.0) {
        return norm_l2(f);
    }
    std::vector<double> powers(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        powers[i] = std::pow(std::abs(f[i]), p);
    }
    return std::pow(pairwise_sum(powers) * f.grid.cell(), 1.0 / p);
}

double tail_mass(const Field& f, double threshold, double p) {
    std::vector<double> powers(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        if (a >= threshold) {
            powers[i] = std::pow(a, p);
        }
    }
    return pairwise_sum(powers) * f.grid.cell();
}

double energy(const StatePair& s, double alpha, double beta) {
    return beta * inner(s.u, s.u) + alpha * inner(s.v, s.v);
}

double pair_norm2(const StatePair& s) { return inner(s.u, s.u) + inner(s.v, s.v); }

double pair_distance(const StatePair& a, const StatePair& b) {
    Field du(a.grid());
    Field dv(a.grid());
    for (std::size_t i = 0; i < du.size(); ++i) {
        du[i] = a.u[i] - b.u[i];
        dv[i] = a.v[i] - b.v[i];
    }
    return std::sqrt(inner(du, du) + inner(dv, dv));
}

double boundary_leak(const Field& f) {
    const double total = inner(f, f);
    if (total == 0.0) {
        return 0.0;
    }
    const double edge = 0.9 * f.grid.half_width;
    std::vector<double> shell(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point p = f.grid.point(i);
        if (std::max(std::abs(p.x), f.grid.dim == 2 ? std::abs(p.y) : 0.0) > edge) {
            shell[i] = f[i] * f[i];
        }
    }
    return pairwise_sum(shell) * f.grid.cell() / total;
}

void write_field_csv(std::ostream& out, const Field& f) {
    if (f.grid.dim == 1) {
        out << "x,value\n";
        for (std::size_t i = 0; i < f.size(); ++i) {
            out << fmt::format("{:.17g},{:.17g}\n", f.grid.point(i).x, f[i]);
        }
        return;
    }
    out << "x,y,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point p = f.grid.point(i);
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.x, p.y, f[i]);
    }
}

}  // namespace fhn
