#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fhn/errors.hpp"
#include "fhn/grid.hpp"

using namespace fhn;

namespace {

Field random_field(const Grid& g, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Field f(g);
    for (auto& x : f.values) {
        x = d(gen);
    }
    return f;
}

double sine_error(int n) {
    const double L = 1.0;
    const auto g = Grid::make(1, L, n);
    const double k = std::numbers::pi / L;
    const auto f = sample_field(g, [&](const Point& p) { return std::sin(k * p.x); });
    const auto lap = laplacian(f);
    double err = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
        err = std::max(err, std::abs(lap[i] + k * k * f[i]));
    }
    return err;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("construction") {
    const auto g = Grid::make(1, 2.0, 9);
    CHECK(g.dx == 0.5);
    CHECK(g.coord(0) == -2.0);
    CHECK(g.coord(8) == 2.0);
    const auto g2 = Grid::make(2, 1.0, 11);
    CHECK(g2.size() == 121);
    CHECK(g2.cell() == doctest::Approx(0.04));
    CHECK(g2.point(12).x == doctest::Approx(-0.8));
    CHECK(g2.point(12).y == doctest::Approx(-0.8));
    CHECK_THROWS_AS(Grid::make(3, 1.0, 9), ConfigError);
    CHECK_THROWS_AS(Grid::make(1, 0.0, 9), ConfigError);
    CHECK_THROWS_AS(Grid::make(1, 1.0, 7), ConfigError);
}

TEST_CASE("laplacian basics") {
    const auto g = Grid::make(1, 1.0, 17);
    const auto zero = laplacian(Field(g));
    CHECK(zero.max_abs() == 0.0);

    const auto lin = sample_field(g, [](const Point& p) { return p.x; });
    const auto l = laplacian(lin);
    for (int i = 1; i + 1 < g.n; ++i) {
        CHECK(l[i] == doctest::Approx(0.0).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("laplacian second order") {
    const double e1 = sine_error(33);
    const double e2 = sine_error(65);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("laplacian is negative semidefinite") {
    for (int dim : {1, 2}) {
        const auto g = Grid::make(dim, 3.0, 20);
        for (unsigned seed = 0; seed < 10; ++seed) {
            const auto f = random_field(g, seed);
            CHECK(inner(f, laplacian(f)) <= 0.0);
        }
    }
    // symmetric
    const auto g = Grid::make(2, 1.0, 12);
    const auto a = random_field(g, 1);
    const auto b = random_field(g, 2);
    CHECK(inner(a, laplacian(b)) == doctest::Approx(inner(laplacian(a), b)).epsilon(1e-12));
}

TEST_CASE("norms") {
    const auto g = Grid::make(1, 1.0, 201);
    CHECK(norm_lp(Field(g), 3.0) == 0.0);
    Field one(g, std::vector<double>(g.size(), 1.0));
    for (double p : {1.0, 2.0, 4.0}) {
        CHECK(std::abs(norm_lp(one, p) - std::pow(2.0, 1.0 / p)) <= g.dx * (1.0 + 1e-12));
    }
    const auto f = random_field(g, 5);
    Field cf(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        cf[i] = -2.5 * f[i];
    }
    CHECK(norm_lp(cf, 4.0) == doctest::Approx(2.5 * norm_lp(f, 4.0)).epsilon(1e-14));
    CHECK(norm_l2(f) == doctest::Approx(norm_lp(f, 2.0)));
    CHECK_THROWS_AS(norm_lp(f, 0.5), ConfigError);
    // continuity in p
    CHECK(norm_lp(f, 3.0001) == doctest::Approx(norm_lp(f, 3.0)).epsilon(1e-3));
}

TEST_CASE("quadrature converges on a gaussian") {
    // int exp(-x^2) over R = sqrt(pi); domain [-6,6] makes the truncation negligible
    auto err = [](int n) {
        const auto g = Grid::make(1, 6.0, n);
        const auto f = sample_field(g, [](const Point& p) { return std::exp(-0.5 * p.x * p.x); });
        return std::abs(inner(f, f) - std::sqrt(std::numbers::pi));
    };
    CHECK(err(65) < 1e-6);
    const auto g2 = Grid::make(2, 6.0, 65);
    const auto f2 = sample_field(g2, [](const Point& p) { return std::exp(-0.5 * p.norm2()); });
    CHECK(inner(f2, f2) == doctest::Approx(std::numbers::pi).epsilon(1e-6));
}

TEST_CASE("tail mass") {
    const auto g = Grid::make(1, 1.0, 100);
    Field step(g);
    for (int i = 0; i < 50; ++i) {
        step[i] = 3.0;
    }
    CHECK(tail_mass(step, 2.0, 4.0) == doctest::Approx(81.0 * 50 * g.dx));
    CHECK(tail_mass(step, 3.5, 4.0) == 0.0);
    const auto f = random_field(g, 8);
    CHECK(tail_mass(f, 1e-300, 3.0) == doctest::Approx(std::pow(norm_lp(f, 3.0), 3.0)));
    double prev = tail_mass(f, 0.01, 3.0);
    for (double M = 0.02; M < 1.1; M += 0.01) {
        const double t = tail_mass(f, M, 3.0);
        CHECK(t <= prev);
        prev = t;
    }
}

TEST_CASE("energy") {
    const auto g = Grid::make(1, 0.5, 1001);
    StatePair s(g);
    CHECK(energy(s, 1.0, 1.0) == 0.0);
    for (auto& x : s.u.values) {
        x = 1.0;
    }
    // rectangle rule over n nodes covers 1 + dx
    CHECK(energy(s, 3.0, 2.0) == doctest::Approx(2.0 * (1.0 + g.dx)));
    const auto a = random_field(g, 1);
    const auto b = random_field(g, 2);
    StatePair p(a, b, 0.0, Frame::Physical);
    Field na(g), nb(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        na[i] = -a[i];
        nb[i] = -b[i];
    }
    StatePair q(na, nb, 0.0, Frame::Physical);
    CHECK(energy(p, 0.7, 1.3) == energy(q, 0.7, 1.3));
    CHECK(pair_distance(p, p) == 0.0);
    CHECK(pair_distance(p, q) == doctest::Approx(2.0 * std::sqrt(pair_norm2(p))));
}

TEST_CASE("state pair requires one grid") {
    CHECK_THROWS_AS(StatePair(Field(Grid::make(1, 1.0, 9)), Field(Grid::make(1, 1.0, 10)), 0.0,
                              Frame::Physical),
                    ConfigError);
    CHECK_THROWS_AS(Field(Grid::make(1, 1.0, 9), std::vector<double>(3)), ConfigError);
}

TEST_CASE("pairwise sum") {
    std::vector<double> xs(1000, 0.1);
    CHECK(pairwise_sum(xs) == doctest::Approx(100.0).epsilon(1e-14));
    CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("boundary leak and csv") {
    const auto g = Grid::make(1, 10.0, 101);
    const auto bump = sample_field(g, [](const Point& p) { return std::exp(-p.x * p.x); });
    CHECK(boundary_leak(bump) < 1e-20);
    Field edge(g);
    edge[0] = 1.0;
    CHECK(boundary_leak(edge) == 1.0);

    std::ostringstream os;
    write_field_csv(os, Field(Grid::make(2, 1.0, 8)));
    CHECK(os.str().rfind("x,y,value\n", 0) == 0);
    std::ostringstream os1;
    write_field_csv(os1, bump);
    CHECK(os1.str().rfind("x,value\n", 0) == 0);
}

}
