#pragma once

#include <optional>

#include "fhn/grid.hpp"
#include "fhn/paths.hpp"
#include "fhn/problem.hpp"
#include "fhn/solver.hpp"

namespace fhn {

/// Random cocycle of the physical system built from the transformed solver:
///
///     phi(t, tau, omega, x) = z^{-1}(tau + t) * S(tau + t, tau) (z(tau) x),
///
/// where S integrates the transformed system and every z is taken along
/// the single shifted path theta_{-tau} omega,
///
///     z(s, theta_{-tau} omega) = exp(-eps (omega(s - tau) - omega(-tau))).
///
/// A handle without a path is the deterministic cocycle (z == 1).
class CocycleHandle {
public:
    CocycleHandle(ProblemSpec spec, WienerPath path, SchemeConfig cfg);

    /// z == 1 regardless of spec.epsilon.
    static CocycleHandle deterministic(ProblemSpec spec, SchemeConfig cfg);

    const ProblemSpec& spec() const noexcept { return spec_; }
    const SchemeConfig& scheme() const noexcept { return cfg_; }
    bool is_deterministic() const noexcept { return !path_.has_value(); }
    /// Throws ConfigError for a deterministic handle.
    const WienerPath& path() const;

    /// Handle driven by theta_s omega; s must be a path grid time.
    CocycleHandle shifted(double s) const;
    /// Same path and scheme with a different noise intensity.
    CocycleHandle with_epsilon(double eps) const;

    /// z(s, theta_{-tau} omega).
    double z(double s, double tau) const;

    /// Physical state at tau + t started from the physical state x at tau.
    /// A zero duration returns x untouched (apart from its time stamp).
    StatePair phi(double t, double tau, const StatePair& x) const;
    StatePair phi(double t, double tau, const StatePair& x, const Observer* observer) const;

    /// phi(t_back, tau - t_back, theta_{-t_back} omega, x): the state at tau
    /// of the solution started from x at tau - t_back.
    StatePair pullback_endpoint(double t_back, double tau, const StatePair& x) const;

    /// pullback_endpoint that also hands every recorded transformed state
    /// (along theta_{-tau} omega) to `observer`.
    StatePair pullback_endpoint(double t_back, double tau, const StatePair& x,
                                const Observer& observer) const;

    /// Transformed trajectory on [tau, tau + t] started from the physical
    /// state x, together with the clock along theta_{-tau} omega.
    Trajectory transformed_trajectory(double t, double tau, const StatePair& x,
                                      const SchemeConfig& cfg) const;

private:
    CocycleHandle(ProblemSpec spec, std::optional<WienerPath> path, SchemeConfig cfg);
    std::optional<WienerPath> noise_for(double tau) const;

    ProblemSpec spec_;
    std::optional<WienerPath> path_;
    SchemeConfig cfg_;
};

/// u = z x (physical to transformed) and back.
StatePair to_transformed(const StatePair& x, double z);
StatePair to_physical(const StatePair& u, double z);

struct CocycleCheck {
    double residual = 0.0;  // relative L2 residual of the two sides
    bool aligned = true;    // t, s and tau are whole multiples of dt
};

/// |phi(t+s, tau, omega, x) - phi(t, tau+s, theta_s omega, phi(s, tau, omega, x))|
/// divided by the norm of the left side.
CocycleCheck check_cocycle_law(const CocycleHandle& handle, double t, double s, double tau,
                               const StatePair& x);

}  // namespace fhn
