#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fhn/grid.hpp"

namespace fhn {

/// Reaction term f(x, s) together with its declared growth majorants:
///
///     f(x,s) s       <= -alpha1 |s|^p + psi1(x)
///     |f(x,s)|       <=  alpha2 |s|^(p-1) + psi2(x)
///     df/ds(x,s)     <=  alpha3
///     |grad_x f|     <=  psi3(x)
///     |df/ds(x,s)|   <=  alpha4 |s|^(p-2) + psi4(x)
struct Nonlinearity {
    std::string name;
    std::function<double(const Point&, double)> f;
    double p = 2.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double alpha3 = 0.0;
    double alpha4 = 0.0;
    std::function<double(const Point&)> psi1;
    std::function<double(const Point&)> psi2;
    std::function<double(const Point&)> psi3;
    std::function<double(const Point&)> psi4;

    double operator()(const Point& x, double s) const { return f(x, s); }
};

/// f(x,s) = -s^3 + a0 exp(-|x|^2) s with p = 4, alpha1 = 1/2, alpha2 = 2,
/// alpha3 = a0, alpha4 = 3. The x-gradient majorant psi3 is only valid for
/// |s| <= s_cap since grad_x f grows linearly in s.
Nonlinearity default_cubic(double a0, double s_cap = 10.0);

/// f == 0 with all majorants zero (p = 2). Used by linear test problems.
Nonlinearity zero_nonlinearity();

enum class ForcingKind { Cosine, Sine, Constant };

/// Separable forcing A * T(w t) * exp(-|x|^2 / r^2), T in {cos, sin, 1}.
struct ForcingSpec {
    ForcingKind kind = ForcingKind::Constant;
    double amplitude = 0.0;
    double frequency = 0.0;
    double width = 1.0;

    double temporal(double t) const noexcept;
    double profile(const Point& x) const noexcept;
    double operator()(double t, const Point& x) const noexcept {
        return amplitude * temporal(t) * profile(x);
    }

    /// Grid quadrature of exp(-2|x|^2/r^2) (the spatial factor of |g|^2).
    double profile_norm2(const Grid& g) const;
    /// Closed form over R^dim: r sqrt(pi/2) in 1-D, pi r^2 / 2 in 2-D.
    double analytic_profile_norm2(int dim) const;
    /// |g(t,.)|^2 on the grid.
    double norm2(const Grid& g, double t) const;
    /// Grid samples of A * exp(-|x|^2/r^2).
    Field sample_profile(const Grid& g) const;
};

/// g = A_g cos(w t) bump_r(x), h = A_h sin(w t) bump_r(x).
std::pair<ForcingSpec, ForcingSpec> default_forcings(double a_g, double a_h, double w, double r);

struct ProblemSpec {
    double lambda = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double sigma = 1.0;
    double epsilon = 0.2;
    double max_epsilon = 0.4;  // a
    Nonlinearity nonlinearity = default_cubic(0.1);
    ForcingSpec g;
    ForcingSpec h;

    double p() const noexcept { return nonlinearity.p; }
    /// delta = min(lambda, sigma).
    double delta() const noexcept { return lambda < sigma ? lambda : sigma; }

    /// Field-named violations of lambda, alpha, beta, sigma > 0, p >= 2,
    /// 0 <= epsilon <= a.
    std::vector<std::string> violations() const;

    ProblemSpec with_epsilon(double eps) const {
        ProblemSpec out = *this;
        out.epsilon = eps;
        return out;
    }
};

/// Default problem: lambda = sigma = alpha = beta = 1, a0 = 0.1, eps = 0.2,
/// forcing amplitudes 0.25, w = 1, r = 1.
ProblemSpec default_problem();

struct ExponentLadder {
    double delta = 0.0;
    double delta0 = 0.0;
    double delta01 = 0.0;
    double delta1 = 0.0;
    std::optional<double> b;
    std::optional<double> b0;

    /// Ordering violations: 0 < delta0 < delta01 < delta1 < delta and, when
    /// present, delta0 < b0 < b.
    std::vector<std::string> violations() const;
};

/// delta0 = delta/4, delta01 = delta/2, delta1 = 3 delta/4; when
/// delta > alpha3 also b = delta - alpha3 and b0 inside (delta0, b).
/// With require_equilibrium, throws EquilibriumConditionViolated unless
/// delta > alpha3 and beta >= 1.
ExponentLadder build_ladder(const ProblemSpec& spec, bool require_equilibrium = false);

/// Throws EquilibriumConditionViolated unless delta > alpha3 and beta >= 1.
void check_equilibrium_condition(const ProblemSpec& spec);

struct SampleBox {
    double x_min = -5.0;
    double x_max = 5.0;
    double s_min = -10.0;
    double s_max = 10.0;
    int dim = 1;
};

struct ConditionEntry {
    std::string name;
    double worst_margin = 0.0;
    Point worst_x;
    double worst_s = 0.0;
    bool informational = false;

    bool passed() const noexcept { return worst_margin >= 0.0; }
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;

    /// True when every non-informational entry has a nonnegative margin.
    bool all_passed() const noexcept;
    const ConditionEntry& at(const std::string& name) const;
};

/// Spot-checks the declared majorants of `nl` on an n_samples^(dim+1)
/// lattice. Margins are min over samples of (right side - left side);
/// derivative-based margins are credited with their finite-difference error
/// bound. The literal product form df/ds * f <= alpha3 is reported as an
/// informational entry.
ConditionReport check_growth_conditions(const Nonlinearity& nl, const SampleBox& box,
                                        int n_samples);

/// Margin of the two derivative-based conditions at one sample; exposed for
/// tests that probe a single point.
double ds_upper_margin(const Nonlinearity& nl, const Point& x, double s);

struct ForcingIntegral {
    double value = 0.0;       // quadrature over [tau - horizon, tau] plus tail bound
    double tail_bound = 0.0;  // bound on the part below tau - horizon
};

/// int_{-inf}^{tau} e^{delta0 s} (|g(s)|^2 + |h(s)|^2) ds using the
/// closed-form spatial norms over R^dim.
ForcingIntegral forcing_integral(const ForcingSpec& g, const ForcingSpec& h, int dim,
                                 double delta0, double tau, double horizon);

}  // namespace fhn
