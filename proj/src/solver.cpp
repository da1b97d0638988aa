#include "fhn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "fhn/errors.hpp"

namespace fhn {

std::vector<std::string> scheme_violations(const SchemeConfig& cfg, const WienerPath* path) {
    std::vector<std::string> out;
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
        out.push_back(fmt::format("scheme.dt must be positive (got {})", cfg.dt));
    }
    if (cfg.record_every < 1) {
        out.push_back(fmt::format("scheme.record_every must be >= 1 (got {})", cfg.record_every));
    }
    if (path != nullptr && cfg.dt > path->dt() * (1.0 + 1e-12)) {
        out.push_back(fmt::format("scheme.dt ({}) must not exceed path.dt_path ({})", cfg.dt,
                                  path->dt()));
    }
    return out;
}

double NoiseClock::operator()(double t) const {
    if (path == nullptr) {
        return 1.0;
    }
    return noise_factor(*path, epsilon, t);
}

void write_energy_csv(std::ostream& out, const std::vector<EnergyRecord>& records, double c_fit) {
    out << "t,energy,lp_term,z,g_norm2,h_norm2,residual\n";
    for (const auto& r : records) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t,
                           r.energy, r.lp_term, r.z, r.g_norm2, r.h_norm2, r.residual(c_fit));
    }
}

ImplicitDiffusion::ImplicitDiffusion(const Grid& grid, double lambda, double h)
    : grid_(grid), h_(h) {
    const int n = grid.n;
    const double r = h / (grid.dx * grid.dx);
    if (grid.dim == 1) {
        const double diag = 1.0 + h * lambda + 2.0 * r;
        off_ = -r;
        c_prime_.assign(static_cast<std::size_t>(n), 0.0);
        inv_denom_.assign(static_cast<std::size_t>(n), 0.0);
        double c_prev = 0.0;
        for (int i = 0; i < n; ++i) {
            const double denom = diag - off_ * c_prev;
            inv_denom_[static_cast<std::size_t>(i)] = 1.0 / denom;
            c_prev = off_ / denom;
            c_prime_[static_cast<std::size_t>(i)] = c_prev;
        }
        return;
    }
    const auto un = static_cast<std::size_t>(n);
    sine_.assign(un * un, 0.0);
    const double scale = std::sqrt(2.0 / (n + 1));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            sine_[static_cast<std::size_t>(j) * un + static_cast<std::size_t>(k)] =
                scale * std::sin(std::numbers::pi * (j + 1) * (k + 1) / (n + 1));
        }
    }
    std::vector<double> mu(un);
    for (int k = 0; k < n; ++k) {
        const double s = std::sin(std::numbers::pi * (k + 1) / (2.0 * (n + 1)));
        mu[static_cast<std::size_t>(k)] = 4.0 * s * s / (grid.dx * grid.dx);
    }
    inv_eig_.assign(un * un, 0.0);
    for (std::size_t k = 0; k < un; ++k) {
        for (std::size_t l = 0; l < un; ++l) {
            inv_eig_[k * un + l] = 1.0 / (1.0 + h * lambda + h * (mu[k] + mu[l]));
        }
    }
}

namespace {

// out = a * b for square row-major matrices.
void matmul(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out,
            std::size_t n) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            for (std::size_t j = 0; j < n; ++j) {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
}

}  // namespace

void ImplicitDiffusion::solve(std::vector<double>& rhs) const {
    const auto n = static_cast<std::size_t>(grid_.n);
    if (grid_.dim == 1) {
        rhs[0] *= inv_denom_[0];
        for (std::size_t i = 1; i < n; ++i) {
            rhs[i] = (rhs[i] - off_ * rhs[i - 1]) * inv_denom_[i];
        }
        for (std::size_t i = n - 1; i-- > 0;) {
            rhs[i] -= c_prime_[i] * rhs[i + 1];
        }
        return;
    }
    std::vector<double> tmp(n * n);
    matmul(sine_, rhs, tmp, n);
    matmul(tmp, sine_, rhs, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        rhs[i] *= inv_eig_[i];
    }
    matmul(sine_, rhs, tmp, n);
    matmul(tmp, sine_, rhs, n);
}

Stepper::Stepper(const ProblemSpec& spec, const Grid& grid) : spec_(spec), grid_(grid) {
    nodes_.resize(grid.size());
    g_profile_.resize(grid.size());
    h_profile_.resize(grid.size());
    std::vector<double> psi1(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        nodes_[i] = grid.point(i);
        g_profile_[i] = spec.g.profile(nodes_[i]);
        h_profile_[i] = spec.h.profile(nodes_[i]);
        psi1[i] = std::abs(spec.nonlinearity.psi1(nodes_[i]));
    }
    g_profile_norm2_ = spec.g.profile_norm2(grid);
    h_profile_norm2_ = spec.h.profile_norm2(grid);
    psi1_norm1_ = pairwise_sum(psi1) * grid.cell();
}

const ImplicitDiffusion& Stepper::solver_for(double h) const {
    auto it = solvers_.find(h);
    if (it == solvers_.end()) {
        it = solvers_.emplace(h, std::make_unique<ImplicitDiffusion>(grid_, spec_.lambda, h)).first;
    }
    return *it->second;
}

void Stepper::advance(StatePair& s, double h, double z) const {
    if (s.frame != Frame::Transformed) {
        throw ConfigError("the stepper works on transformed states");
    }
    const std::size_t n = grid_.size();
    const auto& f = spec_.nonlinearity.f;
    const double zg = z * spec_.g.amplitude * spec_.g.temporal(s.t);
    const double zh = z * spec_.h.amplitude * spec_.h.temporal(s.t);
    const double inv_z = 1.0 / z;
    const double inv_v = 1.0 / (1.0 + h * spec_.sigma);

    std::vector<double> u_next(n);
    auto& u = s.u.values;
    auto& v = s.v.values;
    for (std::size_t i = 0; i < n; ++i) {
        u_next[i] = u[i] + h * (-spec_.alpha * v[i] + z * f(nodes_[i], u[i] * inv_z) + zg * g_profile_[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = (v[i] + h * (spec_.beta * u[i] + zh * h_profile_[i])) * inv_v;
    }
    solver_for(h).solve(u_next);
    u = std::move(u_next);
    s.t += h;

    if (!s.all_finite()) {
        throw BlowUp(s.t, std::max(s.u.max_abs(), s.v.max_abs()));
    }
}

void Stepper::rhs(const std::vector<double>& u, const std::vector<double>& v, double t, double z,
                  std::vector<double>& du, std::vector<double>& dv) const {
    const std::size_t n = grid_.size();
    const Field lap = laplacian(Field(grid_, u));
    const auto& f = spec_.nonlinearity.f;
    const double zg = z * spec_.g.amplitude * spec_.g.temporal(t);
    const double zh = z * spec_.h.amplitude * spec_.h.temporal(t);
    du.resize(n);
    dv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        du[i] = -spec_.lambda * u[i] + lap[i] - spec_.alpha * v[i] + z * f(nodes_[i], u[i] / z) +
                zg * g_profile_[i];
        dv[i] = -spec_.sigma * v[i] + spec_.beta * u[i] + zh * h_profile_[i];
    }
}

EnergyRecord Stepper::instant(const StatePair& s, double z) const {
    EnergyRecord r;
    r.t = s.t;
    r.z = z;
    r.energy = energy(s, spec_.alpha, spec_.beta);
    const double p = spec_.p();
    r.lp_term = std::pow(z, 2.0 - p) * std::pow(norm_lp(s.u, p), p);
    const double ag = spec_.g.amplitude * spec_.g.temporal(s.t);
    const double ah = spec_.h.amplitude * spec_.h.temporal(s.t);
    r.g_norm2 = ag * ag * g_profile_norm2_;
    r.h_norm2 = ah * ah * h_profile_norm2_;
    r.psi1_norm1 = psi1_norm1_;

    std::vector<double> du;
    std::vector<double> dv;
    rhs(s.u.values, s.v.values, s.t, z, du, dv);
    const double de = 2.0 * spec_.beta * inner(s.u, Field(grid_, std::move(du))) +
                      2.0 * spec_.alpha * inner(s.v, Field(grid_, std::move(dv)));
    const double tail = spec_.delta() * r.energy + 2.0 * spec_.nonlinearity.alpha1 * spec_.beta * r.lp_term;
    r.lhs_exact = de + tail;
    r.lhs = r.lhs_exact;
    return r;
}

StatePair step(const StatePair& s, const SchemeConfig& cfg, const ProblemSpec& spec,
               const std::function<double(double)>& z_at) {
    Stepper stepper(spec, s.grid());
    StatePair out = s;
    stepper.advance(out, cfg.dt, z_at(s.t));
    return out;
}

namespace {

std::int64_t step_count(double t0, double t1, double dt) {
    if (t1 < t0) {
        throw ConfigError(fmt::format("integration end {} precedes start {}", t1, t0));
    }
    return static_cast<std::int64_t>(std::ceil((t1 - t0) / dt - 1e-9));
}

Trajectory run(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
               const ProblemSpec& spec, const NoiseClock& clock, bool keep,
               const Observer* observer = nullptr) {
    if (auto v = scheme_violations(cfg, clock.path); !v.empty()) {
        throw ConfigError(v.front());
    }
    if (s0.frame != Frame::Transformed) {
        throw ConfigError("integrate expects a transformed state");
    }
    if (clock.path != nullptr && (!clock.path->contains(t0) || !clock.path->contains(t1))) {
        throw OutOfWindow(fmt::format("integration interval [{}, {}] outside path window [{}, {}]",
                                      t0, t1, clock.path->t_min(), clock.path->t_max()));
    }
    const Stepper stepper(spec, s0.grid());
    const std::int64_t n = step_count(t0, t1, cfg.dt);

    Trajectory out;
    StatePair s = s0;
    s.t = t0;
    if (keep) {
        out.snapshots.push_back(s);
    }
    if (observer != nullptr) {
        (*observer)(s);
    }
    const double delta = spec.delta();
    const double lp_weight = 2.0 * spec.nonlinearity.alpha1 * spec.beta;
    for (std::int64_t k = 0; k < n; ++k) {
        const double t_next = k + 1 == n ? t1 : t0 + static_cast<double>(k + 1) * cfg.dt;
        const double h = t_next - s.t;
        const double z = clock(s.t);
        const bool record = keep && k % cfg.record_every == 0;
        EnergyRecord rec;
        if (record) {
            rec = stepper.instant(s, z);
        }
        stepper.advance(s, h, z);
        s.t = t_next;
        if (record) {
            const double e_next = energy(s, spec.alpha, spec.beta);
            rec.lhs = (e_next - rec.energy) / h + delta * e_next + lp_weight * rec.lp_term;
            out.energy.push_back(rec);
        }
        if ((k + 1) % cfg.record_every == 0 || k + 1 == n) {
            if (keep) {
                out.snapshots.push_back(s);
            }
            if (observer != nullptr) {
                (*observer)(s);
            }
        }
    }
    if (keep) {
        // The final record has no step after it and uses the exact rate.
        out.energy.push_back(stepper.instant(s, clock(s.t)));
    } else {
        out.snapshots.push_back(std::move(s));
    }
    return out;
}

}  // namespace

Trajectory integrate(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                     const ProblemSpec& spec, const WienerPath& path) {
    return run(s0, t0, t1, cfg, spec, NoiseClock{&path, spec.epsilon}, true);
}

Trajectory integrate(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                     const ProblemSpec& spec, const NoiseClock& clock) {
    return run(s0, t0, t1, cfg, spec, clock, true);
}

StatePair integrate_endpoint(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                             const ProblemSpec& spec, const WienerPath& path) {
    return integrate_endpoint(s0, t0, t1, cfg, spec, NoiseClock{&path, spec.epsilon});
}

StatePair integrate_endpoint(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                             const ProblemSpec& spec, const NoiseClock& clock) {
    return std::move(run(s0, t0, t1, cfg, spec, clock, false).snapshots.back());
}

StatePair integrate_observed(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                             const ProblemSpec& spec, const NoiseClock& clock,
                             const Observer& observer) {
    return std::move(run(s0, t0, t1, cfg, spec, clock, false, &observer).snapshots.back());
}

EnergyCheck check_energy_inequality(const StatePair& s0, double t0, double t1, const SchemeConfig& cfg,
                                    const ProblemSpec& spec, const WienerPath& path, double shrink) {
    SchemeConfig fine = cfg;
    fine.dt = 0.5 * cfg.dt;
    fine.record_every = 2 * cfg.record_every;

    EnergyCheck out;
    out.shrink = shrink;
    out.c_theory = std::max({2.0 * spec.beta, spec.beta / spec.lambda, spec.alpha / spec.sigma});
    out.records = integrate(s0, t0, t1, cfg, spec, path).energy;
    const std::vector<EnergyRecord> refined = integrate(s0, t0, t1, fine, spec, path).energy;

    for (const auto& r : out.records) {
        if (r.rhs_unit() > 0.0) {
            out.c_fit = std::max(out.c_fit, r.lhs_exact / r.rhs_unit());
        }
    }
    auto scan = [&](const std::vector<EnergyRecord>& recs, double& eta, double& excess) {
        for (const auto& r : recs) {
            eta = std::max(eta, std::abs(r.lhs - r.lhs_exact));
            excess = std::max(excess, r.residual(out.c_fit));
        }
    };
    scan(out.records, out.eta_coarse, out.excess_coarse);
    scan(refined, out.eta_fine, out.excess_fine);
    out.every_record = out.excess_coarse <= out.eta_coarse;
    return out;
}

StatePair reference_integrate(const StatePair& s0, double t0, double t1, const ProblemSpec& spec,
                              const WienerPath& path, double tol) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    if (!path.contains(t0) || !path.contains(t1)) {
        throw OutOfWindow(fmt::format("integration interval [{}, {}] outside path window", t0, t1));
    }
    const Stepper stepper(spec, s0.grid());
    const NoiseClock clock{&path, spec.epsilon};
    const std::size_t n = s0.grid().size();

    State x(2 * n);
    std::copy(s0.u.values.begin(), s0.u.values.end(), x.begin());
    std::copy(s0.v.values.begin(), s0.v.values.end(), x.begin() + static_cast<std::ptrdiff_t>(n));

    std::vector<double> u(n), v(n), du, dv;
    auto system = [&](const State& y, State& dy, double t) {
        std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), u.begin());
        std::copy(y.begin() + static_cast<std::ptrdiff_t>(n), y.end(), v.begin());
        stepper.rhs(u, v, t, clock(t), du, dv);
        std::copy(du.begin(), du.end(), dy.begin());
        std::copy(dv.begin(), dv.end(), dy.begin() + static_cast<std::ptrdiff_t>(n));
    };

    auto controlled = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>());
    double t = t0;
    double h = std::min(1e-4, t1 - t0);
    std::size_t attempts = 0;
    const double t_eps = 1e-12 * std::max(1.0, std::abs(t1));
    while (t1 - t > t_eps) {
        h = std::min(h, t1 - t);
        // On success t advances; either way h holds the next proposal.
        controlled.try_step(system, x, t, h);
        if (++attempts > 50'000'000 || h < 1e-13) {
            throw OracleFailure(fmt::format("reference integrator stalled at t = {} (h = {})", t, h));
        }
        if (!std::all_of(x.begin(), x.end(), [](double y) { return std::isfinite(y); })) {
            throw OracleFailure(fmt::format("reference integrator produced non-finite values at t = {}", t));
        }
    }
    StatePair out(s0.grid(), t1, Frame::Transformed);
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), out.u.values.begin());
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(n), x.end(), out.v.values.begin());
    return out;
}

}  // namespace fhn
