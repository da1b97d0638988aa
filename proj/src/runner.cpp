#include "fhn/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include "json.hpp"

#include "fhn/attractor.hpp"
#include "fhn/cocycle.hpp"
#include "fhn/errors.hpp"

namespace fhn {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_ratio(double num, double den) {
    if (den > 0.0) {
        return num / den;
    }
    return num > 0.0 ? kInf : 0.0;
}

ordered_json number_json(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return std::isnan(v) ? "nan" : (v > 0.0 ? "inf" : "-inf");
}

/// Collects checks for one experiment and echoes them to the log.
class Checks {
public:
    Checks(RunOutcome& out, std::ostream& log, std::string experiment)
        : out_(out), log_(log), experiment_(std::move(experiment)) {}

    void le(const std::string& name, double value, double threshold) {
        add(name, value <= threshold, value, threshold);
    }
    void ge(const std::string& name, double value, double threshold) {
        add(name, value >= threshold, value, threshold);
    }
    void add(const std::string& name, bool passed, double value, std::optional<double> threshold = std::nullopt) {
        out_.checks.push_back({experiment_, name, passed, value, threshold});
        log_ << fmt::format("  [{}] {:<28} value={:.6g}{}\n", passed ? "pass" : "FAIL", name, value,
                            threshold ? fmt::format(" threshold={:.6g}", *threshold) : std::string());
    }

private:
    RunOutcome& out_;
    std::ostream& log_;
    std::string experiment_;
};

/// Largest ratio between successive entries; < 1 means strictly decreasing.
double worst_successive_ratio(const std::vector<double>& xs) {
    double worst = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        worst = std::max(worst, safe_ratio(xs[i], xs[i - 1]));
    }
    return worst;
}

class Session {
public:
    Session(const RunConfig& cfg, std::ostream& log, RunOutcome& out)
        : cfg_(cfg),
          log_(log),
          out_(out),
          spec_(build_problem(cfg)),
          ladder_(configured_ladder(cfg)),
          grid_(Grid::make(cfg.grid.dim, cfg.grid.l, cfg.grid.n)),
          handle_(spec_, sample_path(cfg.experiment.seed, cfg.path.t_min, cfg.path.t_max, cfg.path.dt_path),
                  cfg.scheme),
          dir_(cfg.output_dir) {
        fs::create_directories(dir_);
    }

    void run(const std::string& name) {
        log_ << fmt::format("{}\n", name);
        Checks checks(out_, log_, name);
        try {
            if (name == "simulate") {
                simulate(checks);
            } else if (name == "absorb") {
                absorb(checks);
            } else if (name == "lp") {
                lp(checks);
            } else if (name == "truncate") {
                truncate(checks);
            } else if (name == "cauchy") {
                cauchy(checks);
            } else if (name == "continuity") {
                continuity(checks);
            } else if (name == "equilibrium") {
                equilibrium_run(checks);
            } else if (name == "invariance") {
                invariance(checks);
            }
        } catch (const BlowUp& e) {
            throw e.within(fmt::format("experiment {}", name));
        }
    }

private:
    const ExperimentConfig& ex() const { return cfg_.experiment; }

    InitialBundle bundle(double radius) const { return {radius, ex().bundle.count, ex().bundle.growth_rate}; }

    template <typename Writer>
    void write(const std::string& experiment, Writer&& writer) {
        const fs::path file = dir_ / report_file(experiment);
        std::ofstream os(file, std::ios::binary);
        if (!os) {
            throw ConfigError(fmt::format("output_dir: cannot write {}", file.string()));
        }
        writer(os);
        os.close();
        if (!os) {
            throw ConfigError(fmt::format("output_dir: failed writing {}", file.string()));
        }
        out_.files.push_back(file.string());
        log_ << fmt::format("  wrote {}\n", file.string());
    }

    const PullbackMatrix& matrix() {
        if (!matrix_) {
            std::vector<InitialBundle> bundles;
            for (double r : ex().bundle.radii) {
                bundles.push_back(bundle(r));
            }
            matrix_ = run_pullback_matrix(handle_, grid_, bundles, ex().tau, ex().t_back_grid, ex().eps_grid,
                                          ex().workers);
        }
        return *matrix_;
    }

    const EquilibriumReport& equilibrium_report() {
        if (!equilibrium_) {
            const auto& s = ex().equilibrium;
            equilibrium_ = fhn::equilibrium(handle_, grid_, ex().tau, s.t_back, bundle(ex().bundle.radii.front()),
                                            s.tol, s.burn_in);
        }
        return *equilibrium_;
    }

    void simulate(Checks& checks) {
        const auto& s = ex().simulate;
        const double tau = ex().tau;
        const StatePair x = InitialBundle{s.x0_radius, 1, 0.0}.member(grid_, 0);
        StatePair u0 = to_transformed(x, handle_.z(tau, tau));
        u0.t = tau;
        const WienerPath noise = handle_.path().shifted(-tau);
        const EnergyCheck c = check_energy_inequality(u0, tau, tau + s.t_span, cfg_.scheme, spec_, noise, s.shrink);
        write("simulate", [&](std::ostream& os) { write_energy_csv(os, c.records, c.c_fit); });
        checks.le("c_fit_within_theory", c.c_fit, c.c_theory);
        checks.le("residual_within_eta", c.excess_coarse, c.eta_coarse);
        checks.add("eta_shrink", c.eta_shrinks(), safe_ratio(c.eta_coarse, c.eta_fine), s.shrink);
        checks.add("excess_shrink", c.excess_shrinks(), safe_ratio(c.excess_coarse, c.excess_fine), s.shrink);
    }

    void absorb(Checks& checks) {
        const auto& s = ex().absorb;
        const AbsorptionReport r = analyze_absorption(matrix(), handle_, ladder_, s);
        write("absorb", [&](std::ostream& os) { write_absorption_csv(os, r); });
        checks.le("t_abs", r.t_abs.value_or(kInf), s.t_abs_limit);
        double step = kInf;
        std::vector<std::pair<double, double>> ls{{0.0, r.l_zero.value}};
        for (std::size_t i = 0; i < r.l_eps.size(); ++i) {
            ls.emplace_back(matrix().eps_grid[i], r.l_eps[i].value);
        }
        std::sort(ls.begin(), ls.end());
        for (std::size_t i = 1; i < ls.size(); ++i) {
            step = std::min(step, ls[i].second - ls[i - 1].second);
        }
        checks.add("l_eps_monotone", r.l_monotone, step, 0.0);
        checks.add("l_zero_finite", std::isfinite(r.l_zero.value), r.l_zero.value);
        checks.le("plateau_gap", r.plateau_gap, s.plateau_tol);
    }

    void lp(Checks& checks) {
        const LpReport r = analyze_lp(matrix(), ex().lp.from_t_back);
        write("lp", [&](std::ostream& os) { write_lp_csv(os, r); });
        checks.add("ceiling_finite", r.passed, r.ceiling);
    }

    void truncate(Checks& checks) {
        const auto& s = ex().truncate;
        const TruncationReport r = truncation_profile(matrix(), s.m_grid, spec_.p(), s.eta, s.from_t_back);
        write("truncate", [&](std::ostream& os) { write_truncation_csv(os, r); });
        // rows run over M for each (eps, t_back) cell
        double rise = 0.0;
        const std::size_t nm = s.m_grid.size();
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            if (i % nm != 0) {
                rise = std::max(rise, r.rows[i].tail_mass - r.rows[i - 1].tail_mass);
            }
        }
        checks.add("tail_monotone_in_m", r.monotone, rise, 0.0);
        checks.add("uniform_m_eta", r.m_eta.has_value(), r.m_eta.value_or(kInf));
        checks.ge("doubling_gain", r.doubling_gain, s.min_doubling_gain);
    }

    void cauchy(Checks& checks) {
        const auto& s = ex().cauchy;
        const CauchyReport r =
            lp_cauchy_test(handle_, grid_, ex().tau, s.t_back, s.eps, bundle(ex().bundle.radii.front()), s.level);
        write("cauchy", [&](std::ostream& os) { write_cauchy_csv(os, r); });
        std::vector<double> row_max(s.t_back.size() - 1, 0.0);
        int broken = 0;
        for (const auto& p : r.pairs) {
            row_max[static_cast<std::size_t>(p.i)] = std::max(row_max[static_cast<std::size_t>(p.i)], p.lp_distance);
            broken += p.bounds_hold ? 0 : 1;
        }
        checks.add("distances_decreasing", r.monotone, worst_successive_ratio(row_max), 1.0);
        checks.le("last_pair", r.last_pair, s.tol);
        checks.le("partition_error", r.max_partition_error, s.partition_tol);
        checks.add("o_set_bounds", r.bounds_hold, broken, 0.0);
    }

    void continuity(Checks& checks) {
        const auto& s = ex().continuity;
        const StatePair x0 = InitialBundle{s.x0_radius, 1, 0.0}.member(grid_, 0);
        const ContinuityReport r =
            epsilon_continuity(handle_, ex().tau, s.t_span, s.eps0, s.gaps, x0, s.ratio_lo, s.ratio_hi);
        write("continuity", [&](std::ostream& os) { write_continuity_csv(os, r); });
        std::vector<double> to_eps0;
        std::vector<double> to_zero;
        for (const auto& row : r.toward_eps0) {
            to_eps0.push_back(row.sup_deviation);
        }
        for (const auto& row : r.toward_zero) {
            to_zero.push_back(row.sup_deviation);
        }
        checks.add("eps0_decreasing", r.monotone, worst_successive_ratio(to_eps0), 1.0);
        const double lo = r.ratios.empty() ? kInf : *std::min_element(r.ratios.begin(), r.ratios.end());
        const double hi = r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
        checks.ge("ratio_min", lo, s.ratio_lo);
        checks.le("ratio_max", hi, s.ratio_hi);
        checks.add("zero_decreasing", r.zero_monotone, worst_successive_ratio(to_zero), 1.0);
        checks.le("zero_last", r.zero_last, s.zero_tol);
    }

    void equilibrium_run(Checks& checks) {
        const auto& s = ex().equilibrium;
        const EquilibriumReport& r = equilibrium_report();
        write("equilibrium", [&](std::ostream& os) { write_equilibrium_csv(os, r); });
        checks.le("bundle_spread", r.final_spread, s.tol);
        checks.le("successive_distance", r.rows[r.rows.size() - 2].distance_to_final, s.tol);
        checks.ge("decay_rate", r.b_fit, s.rate_fraction * ladder_.b0.value_or(kInf));
    }

    void invariance(Checks& checks) {
        const auto& s = ex().invariance;
        const EquilibriumReport& eq = equilibrium_report();
        const StatePair x0 = bundle(ex().bundle.radii.front()).member(grid_, 0, eq.depth);
        const auto rows = equilibrium_invariance(handle_, eq.u_star, ex().tau, eq.depth, x0, s.t);
        write("invariance", [&](std::ostream& os) { write_invariance_csv(os, rows); });
        double worst = 0.0;
        for (const auto& row : rows) {
            worst = std::max(worst, row.residual);
        }
        checks.le("residual", worst, s.factor * ex().equilibrium.tol);
    }

    const RunConfig& cfg_;
    std::ostream& log_;
    RunOutcome& out_;
    ProblemSpec spec_;
    ExponentLadder ladder_;
    Grid grid_;
    CocycleHandle handle_;
    fs::path dir_;
    std::optional<PullbackMatrix> matrix_;
    std::optional<EquilibriumReport> equilibrium_;
};

void write_summary(const RunConfig& cfg, const RunOutcome& out, std::ostream& log) {
    ordered_json j;
    j["schema"] = kConfigSchema;
    j["experiment"] = cfg.experiment.name;
    j["seed"] = cfg.experiment.seed;
    j["status"] = out.status;
    j["passed"] = out.status == kExitPass;
    j["error"] = out.error.empty() ? ordered_json(nullptr) : ordered_json(out.error);
    j["violations"] = out.violations;
    ordered_json checks = ordered_json::array();
    for (const auto& c : out.checks) {
        checks.push_back({{"experiment", c.experiment},
                          {"name", c.name},
                          {"passed", c.passed},
                          {"value", number_json(c.value)},
                          {"threshold", c.threshold ? number_json(*c.threshold) : ordered_json(nullptr)}});
    }
    j["checks"] = checks;
    ordered_json files = ordered_json::array();
    for (const auto& f : out.files) {
        files.push_back(fs::path(f).filename().string());
    }
    j["files"] = files;
    j["config"] = ordered_json::parse(dump_config(cfg));

    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    const fs::path file = fs::path(cfg.output_dir) / "summary.json";
    std::ofstream os(file, std::ios::binary);
    if (!os) {
        log << fmt::format("cannot write {}\n", file.string());
        return;
    }
    os << j.dump(2) << "\n";
    log << fmt::format("wrote {}\n", file.string());
}

}  // namespace

bool RunOutcome::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string report_file(const std::string& experiment) {
    if (experiment == "simulate") {
        return "energy.csv";
    }
    if (experiment == "absorb") {
        return "absorption.csv";
    }
    if (experiment == "truncate") {
        return "truncation.csv";
    }
    return experiment + ".csv";
}

RunOutcome run(const RunConfig& cfg, std::ostream& log) {
    RunOutcome out;
    out.violations = validate(cfg);
    if (!out.violations.empty()) {
        out.status = kExitConfigInvalid;
        out.error = out.violations.front();
        log << fmt::format("invalid config: {}\n", out.error);
        if (!cfg.output_dir.empty()) {
            write_summary(cfg, out, log);
        }
        return out;
    }
    try {
        Session session(cfg, log, out);
        for (const auto& name : enabled_experiments(cfg)) {
            session.run(name);
        }
        out.status = out.all_passed() ? kExitPass : kExitCheckFailed;
        if (!out.all_passed()) {
            const auto it = std::find_if(out.checks.begin(), out.checks.end(),
                                         [](const CheckResult& c) { return !c.passed; });
            out.error = fmt::format("check {}.{} failed", it->experiment, it->name);
        }
    } catch (const BlowUp& e) {
        out.status = kExitBlowUp;
        out.error = e.what();
    } catch (const Error& e) {
        // window, horizon and precondition failures found while running
        out.status = kExitConfigInvalid;
        out.error = e.what();
    } catch (const fs::filesystem_error& e) {
        out.status = kExitConfigInvalid;
        out.error = fmt::format("output_dir: {}", e.what());
    }
    if (!out.error.empty()) {
        log << fmt::format("error: {}\n", out.error);
    }
    write_summary(cfg, out, log);
    return out;
}

}  // namespace fhn
