#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fhn/cocycle.hpp"
#include "fhn/grid.hpp"
#include "fhn/paths.hpp"
#include "fhn/problem.hpp"

namespace fhn {

/// Family of `count` physical initial states with |(u~, v~)| equal to
/// radius * exp(growth_rate * t_back).
///
/// Members are smooth flat-top profiles with the energy split between both
/// components, alternating signs and slightly shifted centres. Keeping the
/// amplitude spread out keeps the explicit reaction term stable for large
/// radii.
struct InitialBundle {
    double radius = 10.0;
    int count = 4;
    double growth_rate = 0.0;

    double radius_at(double t_back) const;
    StatePair member(const Grid& grid, int j, double t_back = 0.0) const;
    std::vector<StatePair> states(const Grid& grid, double t_back = 0.0) const;

    /// radius >= 0, count >= 1, 0 <= growth_rate < delta1.
    std::vector<std::string> violations(const ExponentLadder& ladder) const;
};

/// L_eps(tau, omega) = int_{-inf}^0 e^{delta01 s + 2 eps |omega(s)|}
///                     (|g(s+tau)|^2 + |h(s+tau)|^2 + 1) ds.
struct AbsorptionIntegral {
    double value = 0.0;  // body + tail
    double body = 0.0;   // trapezoid rule on the path nodes of [-horizon, 0]
    double tail = 0.0;   // bound for (-inf, -horizon] from the sampled growth of omega
};

/// Uses spec.epsilon and the unshifted path. Throws HorizonTooShort when
/// the tail bound exceeds 10% of the body or the growth rate of omega
/// beyond horizon/2 does not leave the exponent negative.
AbsorptionIntegral absorption_radius(const ProblemSpec& spec, const WienerPath& path, double tau,
                                     const ExponentLadder& ladder, double quad_horizon, int dim);

/// One pullback run of the experiment matrix.
struct PullbackCell {
    double eps = 0.0;
    double t_back = 0.0;
    double bundle_radius = 0.0;
    int member = 0;
    StatePair endpoint;          // physical state at tau
    double endpoint_norm2 = 0.0;
    double sup_lp_p = 0.0;       // sup over records in [tau - 1, tau] of |u|_p^p (transformed)
};

struct PullbackMatrix {
    double tau = 0.0;
    std::vector<double> eps_grid;
    std::vector<double> t_back_grid;
    std::vector<double> radii;
    std::vector<PullbackCell> cells;  // ordered by eps, t_back, bundle, member
};

/// Runs every (eps, t_back, bundle member) pullback from tau. Independent
/// cells are spread over `workers` threads; the result does not depend on
/// the worker count.
PullbackMatrix run_pullback_matrix(const CocycleHandle& base, const Grid& grid,
                                   const std::vector<InitialBundle>& bundles, double tau, const std::vector<double>& t_back_grid,
                                   const std::vector<double>& eps_grid, unsigned workers = 0);

struct AbsorptionSettings {
    double quad_horizon = 64.0;
    double c_margin = 1.1;       // head room on the calibrated constant
    double t_abs_limit = 16.0;
    double plateau_depth = 16.0;
    double plateau_tol = 0.05;
};

struct AbsorptionRow {
    double eps = 0.0;
    double t_back = 0.0;
    double max_endpoint_norm2 = 0.0;  // over every bundle member
    double radius = 0.0;              // c_fit (1 + L_eps)
    bool absorbed = false;
};

struct AbsorptionReport {
    std::vector<AbsorptionRow> rows;
    std::vector<AbsorptionIntegral> l_eps;  // aligned with the eps grid
    AbsorptionIntegral l_zero;
    double c_fit = 0.0;
    std::optional<double> t_abs;
    bool l_monotone = false;
    double plateau_gap = 0.0;  // max over eps of the relative gap between bundle radii

    bool passed(const AbsorptionSettings& s) const;
};

/// c_fit is calibrated once: the largest ratio endpoint_norm2 / (1 + L_eps)
/// over the eps grid for the smallest bundle at the deepest t_back, times
/// c_margin. Every other bundle and depth is then checked against it.
AbsorptionReport analyze_absorption(const PullbackMatrix& m, const CocycleHandle& base,
                                    const ExponentLadder& ladder, const AbsorptionSettings& s);

struct LpRow {
    double eps = 0.0;
    double t_back = 0.0;
    double sup_lp_p = 0.0;  // max over bundle members
};

struct LpReport {
    std::vector<LpRow> rows;
    double from_t_back = 0.0;          // depths >= this enter the ceiling
    double ceiling = 0.0;
    std::vector<double> eps_ceilings;  // aligned with the eps grid
    bool passed = false;
};

LpReport analyze_lp(const PullbackMatrix& m, double from_t_back);

struct TruncationRow {
    double eps = 0.0;
    double t_back = 0.0;
    double m = 0.0;
    double tail_mass = 0.0;  // max over bundle members
};

struct TruncationReport {
    std::vector<TruncationRow> rows;
    double eta = 1e-6;
    double from_t_back = 0.0;
    bool monotone = false;
    std::optional<double> m_eta;  // smallest level with every tail (t_back >= from) <= eta
    double doubling_gain = 0.0;   // min over levels beyond the bulk of sup-tail(M)/sup-tail(2M)
    bool passed() const noexcept { return monotone && m_eta.has_value(); }
};

/// Tail masses of the physical endpoints u~ over the levels `m_grid`.
TruncationReport truncation_profile(const PullbackMatrix& m, const std::vector<double>& m_grid, double p,
                                    double eta, double from_t_back);

/// Integrals of |a - b|^p over the four sets
///   O1 = {|a| <= M, |b| <= M}, O2 = {|a| > M, |b| <= M},
///   O3 = {|a| <= M, |b| > M},  O4 = {|a| > M, |b| > M}.
struct OPartition {
    double parts[4] = {0.0, 0.0, 0.0, 0.0};
    double total = 0.0;  // |a - b|_p^p computed over the whole grid

    double sum() const noexcept { return parts[0] + parts[1] + parts[2] + parts[3]; }
};

OPartition o_partition(const Field& a, const Field& b, double level, double p);

struct CauchyPair {
    int i = 0;
    int j = 0;
    double t_i = 0.0;
    double t_j = 0.0;
    double lp_distance = 0.0;
    OPartition split;
    double partition_error = 0.0;  // |sum - total| / total
    bool bounds_hold = false;      // each O_k below its a-priori bound
};

struct CauchyReport {
    std::vector<CauchyPair> pairs;
    double level = 0.0;
    bool monotone = false;       // max_{j > i} d(i, j) strictly decreasing in i
    double last_pair = 0.0;      // distance of the two deepest entries
    double max_partition_error = 0.0;
    bool bounds_hold = false;
    bool passed(double tol, double partition_tol) const noexcept {
        return monotone && last_pair <= tol && max_partition_error <= partition_tol && bounds_hold;
    }
};

/// Entry n is the physical u~ at tau started at tau - t_n from bundle
/// member n mod count, with intensity eps_n. A level <= 0 uses half the
/// largest |u~| over the entries.
CauchyReport lp_cauchy_test(const CocycleHandle& handle, const Grid& grid, double tau, const std::vector<double>& t_back_seq,
                            const std::vector<double>& eps_seq, const InitialBundle& bundle, double level);

struct ContinuityRow {
    double eps = 0.0;
    double eps0 = 0.0;
    double sup_deviation = 0.0;
};

struct ContinuityReport {
    std::vector<ContinuityRow> toward_eps0;  // eps = eps0 + gap
    std::vector<ContinuityRow> toward_zero;  // eps = gap against z == 1
    std::vector<double> ratios;              // successive ratios along toward_eps0
    bool monotone = false;
    bool ratios_in_band = false;
    bool zero_monotone = false;
    double zero_last = 0.0;
    bool passed(double zero_tol) const noexcept {
        return monotone && ratios_in_band && zero_monotone && zero_last <= zero_tol;
    }
};

/// sup over records in [tau, tau + t_span] of the L2 deviation of the
/// physical solutions from x0. Gaps must be decreasing and positive.
ContinuityReport epsilon_continuity(const CocycleHandle& handle, double tau, double t_span, double eps0,
                                    const std::vector<double>& gaps, const StatePair& x0,
                                    double ratio_lo = 1.6, double ratio_hi = 2.4);

struct EquilibriumRow {
    double t_back = 0.0;
    double distance_to_final = 0.0;  // max over members of |e(t_back) - e(t_max)|
    double spread = 0.0;             // max pairwise distance within the bundle
};

struct EquilibriumReport {
    StatePair u_star;  // endpoint of member 0 at the deepest t_back
    double depth = 0.0;
    double b_fit = 0.0;
    std::vector<EquilibriumRow> rows;
    double final_spread = 0.0;
    bool converged = false;
};

/// Requires delta > alpha3 and beta >= 1 (throws EquilibriumConditionViolated).
/// b_fit is minus the least-squares slope of log distance_to_final against
/// t_back over depths >= burn_in below the deepest one.
EquilibriumReport equilibrium(const CocycleHandle& handle, const Grid& grid, double tau, const std::vector<double>& t_back_grid,
                              const InitialBundle& bundle, double tol, double burn_in = 2.0);

struct InvarianceRow {
    double t = 0.0;
    double residual = 0.0;
};

/// |phi(t, tau, omega, u*) - u*(tau + t, theta_t omega)| where the right side
/// is rebuilt from x0 with the same pullback depth.
std::vector<InvarianceRow> equilibrium_invariance(const CocycleHandle& handle, const StatePair& u_star,
                                                  double tau, double depth, const StatePair& x0,
                                                  const std::vector<double>& t_grid);

/// CSV reports, one row per entry, doubles with 17 significant digits.
///   absorption   eps,t_back,max_endpoint_norm2,radius,absorbed
///   lp           eps,t_back,sup_lp_p
///   truncation   eps,t_back,M,tail_mass
///   cauchy       i,j,t_i,t_j,lp_distance
///   continuity   eps,sup_deviation (eps0 + gap rows, then gap rows against z == 1)
///   equilibrium  t_back,distance_to_final,spread
///   invariance   t,residual
void write_absorption_csv(std::ostream& out, const AbsorptionReport& r);
void write_lp_csv(std::ostream& out, const LpReport& r);
void write_truncation_csv(std::ostream& out, const TruncationReport& r);
void write_cauchy_csv(std::ostream& out, const CauchyReport& r);
void write_continuity_csv(std::ostream& out, const ContinuityReport& r);
void write_equilibrium_csv(std::ostream& out, const EquilibriumReport& r);
void write_invariance_csv(std::ostream& out, const std::vector<InvarianceRow>& rows);

}  // namespace fhn
