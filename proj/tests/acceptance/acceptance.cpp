#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "fhn/cocycle.hpp"
#include "fhn/config.hpp"
#include "fhn/runner.hpp"

using namespace fhn;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const std::string& criterion, const std::string& detail) {
    if (!ok) {
        ++failures;
    }
    std::cout << fmt::format("{} {}: {}\n", ok ? "PASS" : "FAIL", criterion, detail) << std::flush;
}

StatePair bump(const Grid& g, double a, double b, Frame frame = Frame::Physical) {
    StatePair s(g, 0.0, frame);
    s.u = sample_field(g, [&](const Point& p) { return a * std::exp(-p.x * p.x); });
    s.v = sample_field(g, [&](const Point& p) { return b * std::exp(-0.5 * (p.x - 1.0) * (p.x - 1.0)); });
    return s;
}

bool bitwise_equal(const StatePair& a, const StatePair& b) {
    return a.u.values == b.u.values && a.v.values == b.v.values;
}

void cocycle_axioms() {
    const auto g = Grid::make(1, 12.0, 129);
    const SchemeConfig scheme{1e-3, 10};
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> steps(1, 1500);
    std::uniform_int_distribution<int> taus(-2000, 2000);
    std::uniform_real_distribution<double> amp(-3.0, 3.0);

    bool identity = true;
    double worst = 0.0;
    const int combos = 24;
    for (int k = 0; k < combos; ++k) {
        const auto seed = static_cast<std::uint64_t>(100 + k);
        const double t = steps(rng) * 1e-3;
        const double s = steps(rng) * 1e-3;
        const double tau = taus(rng) * 1e-3;
        const CocycleHandle h(default_problem(), sample_path(seed, -4.0, 6.0, 1e-3), scheme);
        const auto x = bump(g, amp(rng), amp(rng));
        identity = identity && bitwise_equal(h.phi(0.0, tau, x), x);
        const auto chk = check_cocycle_law(h, t, s, tau, x);
        if (!chk.aligned) {
            worst = INFINITY;
        }
        worst = std::max(worst, chk.residual);
    }
    report(identity, "cocycle identity", fmt::format("phi(0) bitwise identity over {} states", combos));
    report(worst <= 1e-10, "cocycle law",
           fmt::format("max relative residual {:.3e} over {} aligned (t, s, tau, seed) combos (tol 1e-10)",
                       worst, combos));
}

void transform_exactness() {
    const auto g = Grid::make(1, 12.0, 129);
    const SchemeConfig scheme{1e-3, 10};
    const auto spec = default_problem().with_epsilon(0.0);
    const auto det = CocycleHandle::deterministic(spec, scheme);
    bool same = true;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const CocycleHandle random(spec, sample_path(seed, -4.0, 4.0, 1e-3), scheme);
        const auto x = bump(g, 1.5, -0.7);
        same = same && bitwise_equal(random.phi(1.0, -0.5, x), det.phi(1.0, -0.5, x));
        same = same && bitwise_equal(random.pullback_endpoint(2.0, 0.0, x), det.pullback_endpoint(2.0, 0.0, x));
    }
    report(same, "transform exactness (eps = 0)", "random and deterministic cocycles coincide bitwise");

    const CocycleHandle h(default_problem().with_epsilon(0.4), sample_path(9, -8.0, 8.0, 1e-3), scheme);
    const auto x = bump(g, 2.0, -1.0);
    double worst = 0.0;
    for (int k = -7000; k <= 7000; k += 250) {
        const double z = h.z(k * 1e-3, -1.0);
        const auto back = to_physical(to_transformed(x, z), z);
        worst = std::max(worst, pair_distance(back, x) / std::sqrt(pair_norm2(x)));
    }
    report(worst <= 1e-14, "transform round trip",
           fmt::format("max relative error {:.3e} (tol 1e-14)", worst));
}

void oracle_equivalence() {
    const auto spec = default_problem();
    const auto g = Grid::make(1, 12.0, 33);
    const auto path = sample_path(11, -1.0, 2.0, 1e-3);
    const auto s0 = bump(g, 2.0, -1.0, Frame::Transformed);
    const auto ref = reference_integrate(s0, 0.0, 1.0, spec, path, 1e-11);
    const double norm = std::sqrt(pair_norm2(ref));
    const double e1 = pair_distance(integrate_endpoint(s0, 0.0, 1.0, {1e-3, 1}, spec, path), ref) / norm;
    const double e2 = pair_distance(integrate_endpoint(s0, 0.0, 1.0, {5e-4, 1}, spec, path), ref) / norm;
    report(e1 <= 5e-3 && e1 >= 1.5 * e2, "oracle equivalence",
           fmt::format("relative L2 error {:.3e} at dt 1e-3 (tol 5e-3), {:.3e} at dt 5e-4, ratio {:.2f} (min 1.5)",
                       e1, e2, e1 / e2));
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string describe(const std::vector<CheckResult>& checks, const std::vector<std::string>& experiments) {
    std::string out;
    for (const auto& c : checks) {
        if (std::find(experiments.begin(), experiments.end(), c.experiment) == experiments.end()) {
            continue;
        }
        if (!out.empty()) {
            out += ", ";
        }
        out += c.threshold ? fmt::format("{} {:.3g} (limit {:.3g})", c.name, c.value, *c.threshold)
                           : fmt::format("{} {:.3g}", c.name, c.value);
        if (!c.passed) {
            out += " FAILED";
        }
    }
    return out;
}

void criterion_from_run(const RunOutcome& outcome, const std::string& criterion,
                        const std::vector<std::string>& experiments) {
    bool ok = outcome.status != kExitConfigInvalid && outcome.status != kExitBlowUp;
    bool seen = false;
    for (const auto& c : outcome.checks) {
        if (std::find(experiments.begin(), experiments.end(), c.experiment) != experiments.end()) {
            seen = true;
            ok = ok && c.passed;
        }
    }
    const std::string detail = seen ? describe(outcome.checks, experiments)
                                    : fmt::format("no checks ran (status {}: {})", outcome.status, outcome.error);
    report(ok && seen, criterion, detail);
}

}  // namespace

int main() {
    cocycle_axioms();
    transform_exactness();
    oracle_equivalence();

    // The attractor criteria run through the same pipeline as the CLI with the
    // shipped default config, which carries the criterion grids and tolerances.
    const fs::path root = fs::temp_directory_path() / "fhnlab_acceptance";
    fs::remove_all(root);
    RunConfig cfg;
    std::ostringstream log;

    cfg.experiment.name = "simulate";
    cfg.output_dir = (root / "simulate").string();
    const RunOutcome energy = run(cfg, log);
    criterion_from_run(energy, "energy inequality", {"simulate"});

    cfg.experiment.name = "all";
    cfg.output_dir = (root / "a").string();
    const RunOutcome first = run(cfg, log);
    criterion_from_run(first, "uniform absorption", {"absorb"});
    criterion_from_run(first, "L^p bound and truncation", {"lp", "truncate"});
    criterion_from_run(first, "L^p Cauchy", {"cauchy"});
    criterion_from_run(first, "eps-continuity", {"continuity"});
    criterion_from_run(first, "equilibrium", {"equilibrium", "invariance"});

    cfg.output_dir = (root / "b").string();
    const RunOutcome second = run(cfg, log);
    auto names = [](const RunOutcome& o) {
        std::vector<std::string> out;
        for (const auto& file : o.files) {
            out.push_back(fs::path(file).filename().string());
        }
        return out;
    };
    bool identical = first.files.size() == 7 && names(first) == names(second);
    for (const auto& file : first.files) {
        const auto name = fs::path(file).filename();
        identical = identical && slurp(root / "a" / name) == slurp(root / "b" / name);
    }
    report(identical, "reproducibility",
           fmt::format("{} CSV reports byte-identical across two runs with seed {}", first.files.size(),
                       cfg.experiment.seed));

    std::cout << fmt::format("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
