#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fhn/grid.hpp"
#include "fhn/paths.hpp"
#include "fhn/problem.hpp"

namespace fhn {

/// Time-stepping parameters. Diffusion is always fully implicit.
struct SchemeConfig {
    double dt = 1e-3;
    int record_every = 10;
};

/// Field-named violations of dt > 0, record_every >= 1 and, when a path is
/// given, dt <= its spacing.
std::vector<std::string> scheme_violations(const SchemeConfig& cfg, const WienerPath* path = nullptr);

/// z_eps(t) along one (already shifted) path; without a path z == 1.
struct NoiseClock {
    const WienerPath* path = nullptr;
    double epsilon = 0.0;

    double operator()(double t) const;
};

/// Energy bookkeeping at one record time t_n, built from the step that
/// starts at t_n (or the one ending there, for the final record).
struct EnergyRecord {
    double t = 0.0;
    double energy = 0.0;      // beta |u|^2 + alpha |v|^2
    double lp_term = 0.0;     // z^{2-p} |u|_p^p
    double z = 1.0;
    double g_norm2 = 0.0;
    double h_norm2 = 0.0;
    double psi1_norm1 = 0.0;
    double lhs = 0.0;         // (E_{n+1} - E_n)/dt + delta E_{n+1} + 2 alpha1 beta lp_term
    double lhs_exact = 0.0;   // same with the semi-discrete dE/dt at (u_n, v_n, t_n)

    /// z^2 (|g|^2 + |h|^2 + |psi1|_1).
    double rhs_unit() const noexcept { return z * z * (g_norm2 + h_norm2 + psi1_norm1); }
    double residual(double c_fit) const noexcept { return lhs - c_fit * rhs_unit(); }
};

struct Trajectory {
    std::vector<StatePair> snapshots;
    std::vector<EnergyRecord> energy;

    const StatePair& back() const { return snapshots.back(); }
};

/// `t,energy,lp_term,z,g_norm2,h_norm2,residual` with residual = lhs - c_fit * rhs.
void write_energy_csv(std::ostream& out, const std::vector<EnergyRecord>& records, double c_fit);

/// Solver for (lambda - Delta) on the grid, shifted by 1/h: solves
/// (I + h (lambda - Delta)) x = b. Thomas elimination in 1-D, a dense
/// discrete sine transform in 2-D.
class ImplicitDiffusion {
public:
    ImplicitDiffusion(const Grid& grid, double lambda, double h);
    void solve(std::vector<double>& rhs) const;
    double h() const noexcept { return h_; }

private:
    Grid grid_;
    double h_ = 0.0;
    // 1-D: forward-elimination coefficients
    std::vector<double> c_prime_;
    std::vector<double> inv_denom_;
    double off_ = 0.0;
    // 2-D: orthonormal sine matrix and inverse eigenvalues
    std::vector<double> sine_;
    std::vector<double> inv_eig_;
};

/// First-order IMEX stepper for the transformed system
///
///     du/dt + lambda u - Delta u + alpha v = z f(x, u/z) + z g
///     dv/dt + sigma v - beta u            = z h
///
/// implicit in (lambda - Delta) and sigma, explicit in the coupling, the
/// reaction and the forcing, all taken at the left end of the step.
class Stepper {
public:
    Stepper(const ProblemSpec& spec, const Grid& grid);

    /// Advances a transformed state from s.t by h with z = z(s.t).
    /// Throws BlowUp if the new state is not finite.
    void advance(StatePair& s, double h, double z) const;

    /// Semi-discrete right-hand side (du/dt, dv/dt) at (u, v, t) with z.
    void rhs(const std::vector<double>& u, const std::vector<double>& v, double t, double z,
             std::vector<double>& du, std::vector<double>& dv) const;

    /// Energy record quantities that do not need a step.
    EnergyRecord instant(const StatePair& s, double z) const;

    const ProblemSpec& spec() const noexcept { return spec_; }
    const Grid& grid() const noexcept { return grid_; }

private:
    const ImplicitDiffusion& solver_for(double h) const;

    ProblemSpec spec_;
    Grid grid_;
    std::vector<Point> nodes_;
    std::vector<double> g_profile_;
    std::vector<double> h_profile_;
    double g_profile_norm2_ = 0.0;
    double h_profile_norm2_ = 0.0;
    double psi1_norm1_ = 0.0;
    mutable std::map<double, std::unique_ptr<ImplicitDiffusion>> solvers_;
};

/// One step of the scheme; the state must be in the transformed frame.
StatePair step(const StatePair& s, const SchemeConfig& cfg, const ProblemSpec& spec,
               const std::function<double(double)>& z_at);

/// Integrates a transformed state from t0 to t1 along `path` with intensity
/// spec.epsilon. Steps have length cfg.dt except a shorter final one when
/// dt does not divide t1 - t0. Snapshots and energy records are kept every
/// record_every steps and at both endpoints.
Trajectory integrate(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                     const ProblemSpec& spec, const WienerPath& path);

/// Same, with an explicit clock; a clock without a path runs with z == 1.
Trajectory integrate(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                     const ProblemSpec& spec, const NoiseClock& clock);

/// Same stepping without keeping a trajectory; returns the final state.
StatePair integrate_endpoint(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                             const ProblemSpec& spec, const WienerPath& path);
StatePair integrate_endpoint(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                             const ProblemSpec& spec, const NoiseClock& clock);

/// Called with the transformed state every record_every steps and at both
/// endpoints.
using Observer = std::function<void(const StatePair&)>;

StatePair integrate_observed(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                             const ProblemSpec& spec, const NoiseClock& clock,
                             const Observer& observer);

/// Discrete energy inequality checked on one run and its dt/2 refinement.
///
/// c_fit is the largest ratio lhs_exact / rhs_unit (rhs_unit > 0) over a
/// calibration pass: the coarse run itself, read through the semi-discrete
/// rate. Every record is then held to lhs <= c_fit rhs_unit + eta, where eta
/// is the largest gap between the finite-difference and the semi-discrete
/// rate on the coarse run.
struct EnergyCheck {
    std::vector<EnergyRecord> records;  // coarse run
    double c_fit = 0.0;
    double c_theory = 0.0;       // max(2 beta, beta / lambda, alpha / sigma)
    double eta_coarse = 0.0;
    double eta_fine = 0.0;
    double excess_coarse = 0.0;  // max over records of (lhs - c_fit rhs)_+
    double excess_fine = 0.0;
    bool every_record = false;   // residual <= eta_coarse at every record
    double shrink = 1.5;

    bool eta_shrinks() const noexcept { return eta_fine * shrink <= eta_coarse; }
    bool excess_shrinks() const noexcept {
        return excess_coarse == 0.0 ? excess_fine == 0.0 : excess_fine * shrink <= excess_coarse;
    }
    bool passed() const noexcept {
        return c_fit <= c_theory && every_record && eta_shrinks() && excess_shrinks();
    }
};

/// `s0` is transformed. The fine run uses dt/2 and 2 record_every so that
/// both runs record at the same times.
EnergyCheck check_energy_inequality(const StatePair& s0, double t0, double t1,
                                    const SchemeConfig& cfg, const ProblemSpec& spec, const WienerPath& path,
                                    double shrink = 1.5);

/// Adaptive Dormand-Prince integration of the same semi-discrete system to
/// relative and absolute tolerance `tol`. Intended as a test oracle on
/// small grids; throws OracleFailure if the step size collapses.
StatePair reference_integrate(const StatePair& s0, double t0, double t1, const ProblemSpec& spec,
                              const WienerPath& path, double tol);

}  // namespace fhn
