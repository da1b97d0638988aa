#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "fhn/attractor.hpp"
#include "fhn/errors.hpp"
#include "fhn/parallel.hpp"

using namespace fhn;

namespace {

ProblemSpec unforced(double eps) {
    ProblemSpec spec = default_problem().with_epsilon(eps);
    spec.g.amplitude = 0.0;
    spec.h.amplitude = 0.0;
    return spec;
}

ProblemSpec linear_problem() {
    ProblemSpec spec = unforced(0.0);
    spec.nonlinearity = zero_nonlinearity();
    return spec;
}

// Simpson's rule on every path interval of [-horizon, 0] (the integrand is
// smooth between path nodes), with the profile norms summed on a fine grid
// instead of taken from the closed-form Gaussian integral.
double simpson_l_eps(const ProblemSpec& spec, const WienerPath& path, double tau, double d01, double horizon) {
    const Grid fine = Grid::make(1, 12.0, 801);
    const double cg = spec.g.profile_norm2(fine);
    const double ch = spec.h.profile_norm2(fine);
    auto f = [&](double s) {
        const double ag = spec.g.amplitude * spec.g.temporal(s + tau);
        const double ah = spec.h.amplitude * spec.h.temporal(s + tau);
        return std::exp(d01 * s + 2.0 * spec.epsilon * std::abs(path(s))) * (ag * ag * cg + ah * ah * ch + 1.0);
    };
    const double dt = path.dt();
    const auto n = static_cast<long>(std::llround(horizon / dt));
    double sum = 0.0;
    for (long k = 0; k < n; ++k) {
        const double a = -horizon + static_cast<double>(k) * dt;
        const double b = a + dt;
        // split at a sign change of omega, where |omega| has a kink
        const double wa = path(a);
        const double wb = path(b);
        std::vector<double> cuts{a};
        if (wa * wb < 0.0) {
            cuts.push_back(a + dt * wa / (wa - wb));
        }
        cuts.push_back(b);
        for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
            const double l = cuts[j];
            const double r = cuts[j + 1];
            sum += (r - l) / 6.0 * (f(l) + 4.0 * f(0.5 * (l + r)) + f(r));
        }
    }
    return sum;
}

}  // namespace

TEST_SUITE("attractor") {

TEST_CASE("bundle members sit on the requested sphere") {
    const auto g = Grid::make(1, 12.0, 129);
    InitialBundle b{7.5, 5, 0.0};
    const auto states = b.states(g);
    REQUIRE(states.size() == 5);
    for (const auto& s : states) {
        CHECK(std::sqrt(pair_norm2(s)) == doctest::Approx(7.5).epsilon(1e-12));
        CHECK(s.frame == Frame::Physical);
    }
    // members differ from one another
    CHECK(pair_distance(states[0], states[1]) > 1.0);

    b.growth_rate = 0.1;
    CHECK(std::sqrt(pair_norm2(b.member(g, 2, 4.0))) == doctest::Approx(7.5 * std::exp(0.4)).epsilon(1e-12));

    const auto g2 = Grid::make(2, 6.0, 25);
    CHECK(std::sqrt(pair_norm2(InitialBundle{3.0, 2, 0.0}.member(g2, 1))) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::sqrt(pair_norm2(InitialBundle{0.0, 1, 0.0}.member(g, 0))) == 0.0);

    const auto ladder = build_ladder(default_problem());
    CHECK(InitialBundle{}.violations(ladder).empty());
    CHECK(InitialBundle{-1.0, 0, 0.0}.violations(ladder).size() == 2);
    CHECK(InitialBundle{1.0, 1, ladder.delta1}.violations(ladder).size() == 1);
}

TEST_CASE("absorption integral of the constant term") {
    const auto spec = unforced(0.0);
    const auto ladder = build_ladder(spec);
    const auto path = sample_path(11, -70.0, 1.0, 1e-3);
    const auto l = absorption_radius(spec, path, 0.0, ladder, 64.0, 1);
    CHECK(l.value == doctest::Approx(1.0 / ladder.delta01).epsilon(1e-6));
    CHECK(l.tail < 1e-12);
}

TEST_CASE("absorption integral against an independent quadrature") {
    const auto spec = default_problem();
    const auto ladder = build_ladder(spec);
    const auto path = sample_path(7, -130.0, 1.0, 1e-3);
    for (double tau : {0.0, 1.3}) {
        const auto l = absorption_radius(spec, path, tau, ladder, 32.0, 1);
        const double oracle = simpson_l_eps(spec, path, tau, ladder.delta01, 32.0);
        // trapezoid on the path nodes against Simpson inside each interval
        CHECK(l.body == doctest::Approx(oracle).epsilon(5e-5));
    }
}

TEST_CASE("absorption integral is monotone in eps and converged in the horizon") {
    const auto spec = default_problem();
    const auto ladder = build_ladder(spec);
    const auto path = sample_path(7, -130.0, 1.0, 1e-3);
    double prev = absorption_radius(spec.with_epsilon(0.0), path, 0.0, ladder, 64.0, 1).value;
    for (double eps : {0.1, 0.2, 0.4}) {
        const double l = absorption_radius(spec.with_epsilon(eps), path, 0.0, ladder, 64.0, 1).value;
        CHECK(l >= prev);
        prev = l;
        const double l2 = absorption_radius(spec.with_epsilon(eps), path, 0.0, ladder, 128.0, 1).value;
        CHECK(std::abs(l2 - l) <= 0.01 * l);
    }
}

TEST_CASE("absorption integral errors") {
    const auto spec = default_problem();
    const auto ladder = build_ladder(spec);
    const auto path = sample_path(7, -20.0, 1.0, 1e-3);
    CHECK_THROWS_AS(absorption_radius(spec, path, 0.0, ladder, 1.0, 1), HorizonTooShort);
    CHECK_THROWS_AS(absorption_radius(spec, path, 0.0, ladder, 40.0, 1), OutOfWindow);
    CHECK_THROWS_AS(absorption_radius(spec, path, 0.0, ladder, 0.0, 1), ConfigError);
}

TEST_CASE("parallel_for is index keyed and rethrows the lowest failure") {
    std::vector<double> a(100), b(100);
    parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(static_cast<double>(i)); }, 1);
    parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(static_cast<double>(i)); }, 4);
    CHECK(a == b);

    std::atomic<int> calls{0};
    try {
        parallel_for(
            50,
            [&](std::size_t i) {
                ++calls;
                if (i == 7 || i == 30) {
                    throw std::runtime_error(std::to_string(i));
                }
            },
            3);
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "7");
    }
    CHECK(calls == 50);
    parallel_for(0, [](std::size_t) { throw std::runtime_error("never"); });
}

TEST_CASE("zero data stays at the origin and is absorbed immediately") {
    const auto g = Grid::make(1, 8.0, 65);
    const auto spec = unforced(0.2);
    const auto ladder = build_ladder(spec);
    const CocycleHandle h(spec, sample_path(3, -70.0, 1.0, 1e-3), {1e-3, 10});
    const auto m = run_pullback_matrix(h, g, {InitialBundle{0.0, 2, 0.0}}, 0.0, {1.0, 2.0}, {0.1, 0.2});
    REQUIRE(m.cells.size() == 8);
    for (const auto& c : m.cells) {
        CHECK(c.endpoint_norm2 == 0.0);
        CHECK(c.sup_lp_p == 0.0);
    }
    AbsorptionSettings s;
    s.plateau_depth = 2.0;
    const auto r = analyze_absorption(m, h, ladder, s);
    REQUIRE(r.t_abs.has_value());
    CHECK(*r.t_abs == 1.0);
    CHECK(r.passed(s));
    CHECK(analyze_lp(m, 1.0).ceiling == 0.0);
}

TEST_CASE("pullback matrix does not depend on the worker count") {
    const auto g = Grid::make(1, 8.0, 33);
    const CocycleHandle h(default_problem(), sample_path(5, -10.0, 1.0, 1e-3), {1e-3, 10});
    const std::vector<InitialBundle> bundles{{1.0, 2, 0.0}, {5.0, 1, 0.0}};
    const auto a = run_pullback_matrix(h, g, bundles, 0.0, {1.0, 2.0}, {0.1, 0.4}, 1);
    const auto b = run_pullback_matrix(h, g, bundles, 0.0, {1.0, 2.0}, {0.1, 0.4}, 3);
    REQUIRE(a.cells.size() == 12);
    REQUIRE(b.cells.size() == a.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].endpoint.u.values == b.cells[i].endpoint.u.values);
        CHECK(a.cells[i].sup_lp_p == b.cells[i].sup_lp_p);
    }
    // ordering: eps, t_back, bundle, member
    CHECK(a.cells[0].eps == 0.1);
    CHECK(a.cells[3].t_back == 2.0);
    CHECK(a.cells[2].bundle_radius == 5.0);
    CHECK(a.cells[6].eps == 0.4);
    // each cell is an ordinary pullback run
    const auto direct = h.with_epsilon(0.4).pullback_endpoint(2.0, 0.0, bundles[0].member(g, 1, 2.0));
    CHECK(a.cells[10].endpoint.u.values == direct.u.values);
}

TEST_CASE("truncation tails vanish above the maximum and are monotone") {
    const auto g = Grid::make(1, 8.0, 33);
    const CocycleHandle h(default_problem(), sample_path(5, -10.0, 1.0, 1e-3), {1e-3, 10});
    const auto m = run_pullback_matrix(h, g, {InitialBundle{2.0, 2, 0.0}}, 0.0, {1.0, 2.0}, {0.2});
    double top = 0.0;
    for (const auto& c : m.cells) {
        top = std::max(top, c.endpoint.u.max_abs());
    }
    const auto r = truncation_profile(m, {0.01, 0.1, top * 0.5, top * 1.01}, 4.0, 1e-6, 1.0);
    CHECK(r.monotone);
    REQUIRE(r.m_eta.has_value());
    CHECK(*r.m_eta <= top * 1.01);
    for (const auto& row : r.rows) {
        if (row.m == top * 1.01) {
            CHECK(row.tail_mass == 0.0);
        }
    }
    CHECK_THROWS_AS(truncation_profile(m, {1.0, 0.5}, 4.0, 1e-6, 1.0), ConfigError);
}

TEST_CASE("O-set partition of a step profile") {
    const auto g = Grid::make(1, 1.0, 9);
    Field a(g), b(g);
    // a = 3 on the first four nodes, b = 3 on nodes 2..5, level 1, p = 2:
    // O4 holds nodes 2,3 (diff 0); O2 holds 0,1 (diff 3); O3 holds 4,5 (diff 3)
    for (std::size_t i = 0; i < g.size(); ++i) {
        a[i] = i < 4 ? 3.0 : 0.0;
        b[i] = (i >= 2 && i < 6) ? 3.0 : 0.5 * (i == 8);
    }
    const auto part = o_partition(a, b, 1.0, 2.0);
    CHECK(part.parts[0] == doctest::Approx(0.25 * g.dx));
    CHECK(part.parts[1] == doctest::Approx(18.0 * g.dx));
    CHECK(part.parts[2] == doctest::Approx(18.0 * g.dx));
    CHECK(part.parts[3] == 0.0);
    CHECK(part.total == doctest::Approx(36.25 * g.dx));
    CHECK(part.sum() == doctest::Approx(part.total).epsilon(1e-15));
}

TEST_CASE("Cauchy test of identical entries gives zero distance") {
    const auto g = Grid::make(1, 8.0, 33);
    const CocycleHandle h(default_problem(), sample_path(5, -10.0, 1.0, 1e-3), {1e-3, 10});
    const auto r = lp_cauchy_test(h, g, 0.0, {2.0, 2.0}, {0.2, 0.2}, InitialBundle{1.0, 1, 0.0}, 0.0);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].lp_distance == 0.0);
    CHECK(r.pairs[0].bounds_hold);
    CHECK_THROWS_AS(lp_cauchy_test(h, g, 0.0, {2.0}, {0.2}, InitialBundle{}, 0.0), ConfigError);
    CHECK_THROWS_AS(lp_cauchy_test(h, g, 0.0, {2.0, 1.0}, {0.2, 0.2}, InitialBundle{}, 0.0), ConfigError);
}

TEST_CASE("Cauchy distances shrink with depth") {
    const auto g = Grid::make(1, 8.0, 33);
    const CocycleHandle h(default_problem(), sample_path(5, -20.0, 1.0, 1e-3), {1e-3, 10});
    const auto r = lp_cauchy_test(h, g, 0.0, {1.0, 2.0, 4.0, 8.0}, {0.2, 0.2, 0.2, 0.2}, InitialBundle{}, 0.0);
    CHECK(r.pairs.size() == 6);
    CHECK(r.monotone);
    CHECK(r.bounds_hold);
    CHECK(r.max_partition_error <= 1e-12);
    for (const auto& p : r.pairs) {
        CHECK(p.lp_distance == doctest::Approx(std::pow(p.split.total, 0.25)));
    }
}

TEST_CASE("eps continuity is linear in the gap") {
    const auto g = Grid::make(1, 8.0, 33);
    const CocycleHandle h(default_problem(), sample_path(9, -1.0, 2.0, 1e-3), {1e-3, 10});
    const auto r = epsilon_continuity(h, 0.0, 1.0, 0.2, {0.1, 0.05, 0.025}, InitialBundle{0.5, 1, 0.0}.member(g, 0));
    CHECK(r.toward_eps0.size() == 3);
    CHECK(r.toward_zero.size() == 3);
    CHECK(r.monotone);
    CHECK(r.zero_monotone);
    CHECK(r.ratios_in_band);
    for (double q : r.ratios) {
        CHECK(q == doctest::Approx(2.0).epsilon(0.1));
    }
    CHECK_THROWS_AS(epsilon_continuity(h, 0.0, 1.0, 0.2, {0.05, 0.1}, InitialBundle{}.member(g, 0)), ConfigError);
}

TEST_CASE("linear equilibrium decays at rate delta") {
    const auto g = Grid::make(1, 8.0, 65);
    const auto spec = linear_problem();
    const CocycleHandle h(spec, sample_path(2, -40.0, 5.0, 1e-3), {1e-3, 10});
    const auto r = equilibrium(h, g, 0.0, {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}, InitialBundle{}, 1e-6);
    CHECK(r.u_star.u.max_abs() < 1e-10);
    CHECK(r.converged);
    CHECK(r.b_fit == doctest::Approx(spec.delta()).epsilon(0.1));

    const auto x0 = InitialBundle{}.member(g, 0, 32.0);
    const auto inv = equilibrium_invariance(h, r.u_star, 0.0, 32.0, x0, {0.0, 1.0, 2.0});
    CHECK(inv[0].residual == 0.0);
    for (const auto& row : inv) {
        CHECK(row.residual < 1e-10);
    }
}

TEST_CASE("equilibrium requires the contraction condition") {
    const auto g = Grid::make(1, 8.0, 33);
    auto spec = default_problem();
    spec.lambda = 0.05;
    const CocycleHandle h(spec, sample_path(2, -10.0, 1.0, 1e-3), {1e-3, 10});
    CHECK_THROWS_AS(equilibrium(h, g, 0.0, {1.0, 2.0}, InitialBundle{}, 1e-6), EquilibriumConditionViolated);
}

}  // TEST_SUITE
