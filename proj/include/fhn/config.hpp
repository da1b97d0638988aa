#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fhn/attractor.hpp"
#include "fhn/problem.hpp"
#include "fhn/solver.hpp"

namespace fhn {

inline constexpr int kConfigSchema = 1;

/// Experiments understood by `run`. `all` runs the seven pullback
/// experiments (everything except `simulate`).
inline const std::vector<std::string> kExperiments = {"simulate",   "absorb",      "lp",         "truncate", "cauchy",
                                                      "continuity", "equilibrium", "invariance", "all"};

struct NonlinearityConfig {
    std::string kind = "cubic";  // cubic | zero
    double a0 = 0.1;
    double s_cap = 10.0;
};

struct ProblemConfig {
    double lambda = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double sigma = 1.0;
    double epsilon = 0.2;
    double max_epsilon = 0.4;
    NonlinearityConfig nonlinearity;
    ForcingSpec g{ForcingKind::Cosine, 0.25, 1.0, 1.0};
    ForcingSpec h{ForcingKind::Sine, 0.25, 1.0, 1.0};
};

/// Optional replacements for the default exponent ladder.
struct LadderConfig {
    std::optional<double> delta0;
    std::optional<double> delta01;
    std::optional<double> delta1;
    std::optional<double> b0;
};

struct GridConfig {
    int dim = 1;
    double l = 12.0;
    int n = 129;
};

struct PathConfig {
    double t_min = -80.0;
    double t_max = 40.0;
    double dt_path = 1e-3;
};

struct BundleConfig {
    std::vector<double> radii{10.0, 100.0};
    int count = 4;
    double growth_rate = 0.0;
};

struct SimulateConfig {
    double t_span = 32.0;
    double x0_radius = 10.0;
    double shrink = 1.5;
};

struct LpConfig {
    double from_t_back = 4.0;
};

struct TruncateConfig {
    std::vector<double> m_grid{0.015625, 0.03125, 0.0625, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0};
    double eta = 1e-6;
    double from_t_back = 4.0;
    double min_doubling_gain = 10.0;
};

struct CauchyConfig {
    std::vector<double> t_back{4.0, 8.0, 16.0, 32.0};
    std::vector<double> eps{0.2, 0.2, 0.2, 0.2};
    double level = 0.0;  // <= 0: half the largest |u~|
    double tol = 1e-4;
    double partition_tol = 1e-12;
};

struct ContinuityConfig {
    double eps0 = 0.2;
    std::vector<double> gaps{0.1, 0.05, 0.025, 0.0125};
    double t_span = 1.0;
    double x0_radius = 0.0;
    double ratio_lo = 1.6;
    double ratio_hi = 2.4;
    double zero_tol = 1e-3;
};

struct EquilibriumConfig {
    std::vector<double> t_back{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    double tol = 1e-6;
    double burn_in = 2.0;
    double rate_fraction = 0.8;  // b_fit >= rate_fraction * b0
};

struct InvarianceConfig {
    std::vector<double> t{1.0, 2.0, 4.0};
    double factor = 2.0;  // residual <= factor * equilibrium.tol
};

struct ExperimentConfig {
    std::string name = "all";
    std::uint64_t seed = 7;
    double tau = 0.0;
    unsigned workers = 0;  // 0: hardware concurrency
    std::vector<double> eps_grid{0.1, 0.2, 0.4};
    std::vector<double> t_back_grid{1.0, 2.0, 4.0, 8.0, 16.0};
    BundleConfig bundle;
    SimulateConfig simulate;
    AbsorptionSettings absorb;
    LpConfig lp;
    TruncateConfig truncate;
    CauchyConfig cauchy;
    ContinuityConfig continuity;
    EquilibriumConfig equilibrium;
    InvarianceConfig invariance;
};

struct RunConfig {
    int schema = kConfigSchema;
    ProblemConfig problem;
    LadderConfig ladder;
    GridConfig grid;
    SchemeConfig scheme;
    PathConfig path;
    ExperimentConfig experiment;
    std::string output_dir = "out";
};

/// Parses a JSON document. Missing keys keep their defaults; unknown keys
/// and wrongly typed values throw ConfigError naming the field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& file);

/// Full JSON form of a configuration, every field present.
std::string dump_config(const RunConfig& cfg);

ProblemSpec build_problem(const RunConfig& cfg);

/// Default ladder of the problem with the configured replacements applied.
/// Does not check the ladder ordering.
ExponentLadder configured_ladder(const RunConfig& cfg);

/// Experiments enabled by `experiment.name` (expands `all`).
std::vector<std::string> enabled_experiments(const RunConfig& cfg);

/// Time interval of the Wiener path read by the enabled experiments.
std::pair<double, double> required_window(const RunConfig& cfg);

/// Every precondition of the enabled experiments, checked without running
/// any simulation. Each message starts with the offending field.
std::vector<std::string> validate(const RunConfig& cfg);

}  // namespace fhn
