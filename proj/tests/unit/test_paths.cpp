#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "fhn/errors.hpp"
#include "fhn/paths.hpp"

using namespace fhn;

TEST_SUITE("paths") {

TEST_CASE("anchored at zero") {
    const auto p = sample_path(1, -1.0, 1.0, 0.5);
    CHECK(p(0.0) == 0.0);
    CHECK(p.size() == 5);
    CHECK(p.t_min() == -1.0);
    CHECK(p.t_max() == 1.0);
}

TEST_CASE("window must contain zero") {
    CHECK_THROWS_AS(sample_path(1, 0.5, 1.0, 0.1), InvalidWindow);
    CHECK_THROWS_AS(sample_path(1, -1.0, -0.5, 0.1), InvalidWindow);
    CHECK_THROWS_AS(sample_path(1, -0.35, 1.0, 0.1), InvalidWindow);
    CHECK_THROWS_AS(sample_path(1, -1.0, 1.0, 0.0), InvalidWindow);
}

TEST_CASE("bit-identical for identical seeds") {
    const auto a = sample_path(42, -3.0, 2.0, 1e-2);
    const auto b = sample_path(42, -3.0, 2.0, 1e-2);
    const auto c = sample_path(43, -3.0, 2.0, 1e-2);
    CHECK(a.values() == b.values());
    CHECK(a.values() != c.values());
}

TEST_CASE("increment statistics") {
    const double dt = 1e-3;
    const auto p = sample_path(7, -10.0, 10.0, dt);
    const auto v = p.values();
    std::vector<double> inc;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc.push_back(v[i] - v[i - 1]);
    }
    REQUIRE(inc.size() >= 20000);
    const double n = static_cast<double>(inc.size());
    const double mean = std::accumulate(inc.begin(), inc.end(), 0.0) / n;
    double var = 0.0;
    for (double d : inc) {
        var += (d - mean) * (d - mean);
    }
    var /= n - 1.0;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(dt / n));
    CHECK(std::abs(var / dt - 1.0) <= 0.05);
}

TEST_CASE("piecewise linear between nodes") {
    const auto p = WienerPath::from_samples(-1.0, 0.5, {2.0, -1.0, 0.0, 3.0, 1.0});
    CHECK(p(-1.0) == 2.0);
    CHECK(p(0.25) == doctest::Approx(1.5));
    CHECK(p(-0.75) == doctest::Approx(0.5));
    CHECK(p(0.9) == doctest::Approx(3.0 - 0.8 * 2.0));
    CHECK_THROWS_AS(p(1.2), OutOfWindow);
}

TEST_CASE("from_samples validates the anchor") {
    CHECK_THROWS_AS(WienerPath::from_samples(-1.0, 0.5, {0.0, 0.0, 0.1}), InvalidWindow);
    CHECK_THROWS_AS(WienerPath::from_samples(0.3, 0.5, {0.0, 0.0}), InvalidWindow);
}

TEST_CASE("shift re-anchors") {
    const auto p = sample_path(3, -5.0, 5.0, 0.01);
    const auto q = shift(p, 0.0);
    CHECK(q.values() == p.values());

    const auto s = shift(p, 1.5);
    CHECK(s(0.0) == 0.0);
    for (double t : {-2.0, -0.37, 0.0, 1.0, 3.49}) {
        CHECK(s(t) == doctest::Approx(p(t + 1.5) - p(1.5)).epsilon(1e-12));
    }
    CHECK(s.t_min() == doctest::Approx(-6.5));
    CHECK(s.t_max() == doctest::Approx(3.5));
    CHECK_THROWS_AS(shift(p, 5.5), OutOfWindow);
    CHECK_THROWS_AS(shift(p, 0.005), InvalidWindow);
}

TEST_CASE("shift group law is exact on shared nodes") {
    const auto p = sample_path(11, -8.0, 8.0, 1e-3);
    const auto a = shift(shift(p, 1.0), 2.0);
    const auto b = shift(p, 3.0);
    REQUIRE(a.first_node() == b.first_node());
    REQUIRE(a.last_node() == b.last_node());
    for (std::int64_t k = a.first_node(); k <= a.last_node(); ++k) {
        REQUIRE(a.node_value(k) == b.node_value(k));
    }
    const auto c = shift(shift(p, -2.5), 2.5);
    for (std::int64_t k = c.first_node(); k <= c.last_node(); k += 97) {
        REQUIRE(c.node_value(k) == p.node_value(k));
    }
}

TEST_CASE("noise factor") {
    const auto p = sample_path(5, -4.0, 4.0, 1e-2);
    CHECK(noise_factor(p, 0.3, 0.0) == 1.0);
    CHECK(noise_factor(p, 0.0, 2.7) == 1.0);
    CHECK_THROWS_AS(noise_factor(p, 0.3, 4.5), OutOfWindow);

    const auto q = WienerPath::from_samples(-1.0, 1.0, {0.4, 0.0, -1.2});
    CHECK(noise_factor(q, 0.5, 1.0) == doctest::Approx(std::exp(0.6)).epsilon(1e-15));

    // log z is linear in eps
    for (double t : {-3.0, 1.23}) {
        const double l1 = std::log(noise_factor(p, 0.1, t));
        const double l3 = std::log(noise_factor(p, 0.3, t));
        CHECK(l3 == doctest::Approx(3.0 * l1).epsilon(1e-12));
        CHECK(noise_factor(p, 0.4, t) > 0.0);
    }
}

TEST_CASE("lil statistic") {
    const auto zero = WienerPath::from_samples(-20.0, 1.0, std::vector<double>(41, 0.0));
    CHECK(lil_statistic(zero, 5.0) == 0.0);

    // omega = c for |t| >= 1, so the sup sits at the smallest |t| >= t0
    std::vector<double> vals(41, 2.0);
    vals[20] = 0.0;
    const auto flat = WienerPath::from_samples(-20.0, 1.0, vals);
    CHECK(lil_statistic(flat, 4.0) == doctest::Approx(2.0 / 4.0));

    CHECK_THROWS_AS(lil_statistic(flat, 0.0), OutOfWindow);
    CHECK_THROWS_AS(lil_statistic(flat, 20.0), OutOfWindow);

    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto p = sample_path(seed, -100.0, 100.0, 0.05);
        ok += lil_statistic(p, 50.0) <= lil_statistic(p, 10.0) ? 1 : 0;
    }
    CHECK(ok >= 90);
}

TEST_CASE("csv round trip is lossless") {
    const auto p = sample_path(9, -2.0, 1.0, 1e-2);
    std::stringstream ss;
    write_path_csv(ss, p);
    const auto q = read_path_csv(ss);
    CHECK(q.values() == p.values());
    CHECK(q.t_min() == doctest::Approx(p.t_min()));
    CHECK(q.dt() == doctest::Approx(p.dt()).epsilon(1e-12));

    std::stringstream bad("time,omega\n0,0\n");
    CHECK_THROWS_AS(read_path_csv(bad), ConfigError);
    std::stringstream nonmono("t,omega\n0,0\n-1,0.1\n");
    CHECK_THROWS_AS(read_path_csv(nonmono), InvalidWindow);
}

}
