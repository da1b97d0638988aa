#include "fhn/cocycle.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fhn/errors.hpp"

namespace fhn {

CocycleHandle::CocycleHandle(ProblemSpec spec, WienerPath path, SchemeConfig cfg)
    : CocycleHandle(std::move(spec), std::optional<WienerPath>(std::move(path)), cfg) {}

CocycleHandle::CocycleHandle(ProblemSpec spec, std::optional<WienerPath> path, SchemeConfig cfg)
    : spec_(std::move(spec)), path_(std::move(path)), cfg_(cfg) {
    if (auto v = scheme_violations(cfg_, path_ ? &*path_ : nullptr); !v.empty()) {
        throw ConfigError(v.front());
    }
}

CocycleHandle CocycleHandle::deterministic(ProblemSpec spec, SchemeConfig cfg) {
    return CocycleHandle(std::move(spec), std::optional<WienerPath>{}, cfg);
}

const WienerPath& CocycleHandle::path() const {
    if (!path_) {
        throw ConfigError("deterministic cocycle has no driving path");
    }
    return *path_;
}

CocycleHandle CocycleHandle::shifted(double s) const {
    if (!path_) {
        return *this;
    }
    return CocycleHandle(spec_, path_->shifted(s), cfg_);
}

CocycleHandle CocycleHandle::with_epsilon(double eps) const {
    CocycleHandle out = *this;
    out.spec_.epsilon = eps;
    return out;
}

std::optional<WienerPath> CocycleHandle::noise_for(double tau) const {
    if (!path_) {
        return std::nullopt;
    }
    return path_->shifted(-tau);
}

double CocycleHandle::z(double s, double tau) const {
    const auto q = noise_for(tau);
    return NoiseClock{q ? &*q : nullptr, spec_.epsilon}(s);
}

StatePair to_transformed(const StatePair& x, double z) {
    StatePair out = x;
    for (auto& a : out.u.values) {
        a *= z;
    }
    for (auto& a : out.v.values) {
        a *= z;
    }
    out.frame = Frame::Transformed;
    return out;
}

StatePair to_physical(const StatePair& u, double z) {
    StatePair out = u;
    for (auto& a : out.u.values) {
        a /= z;
    }
    for (auto& a : out.v.values) {
        a /= z;
    }
    out.frame = Frame::Physical;
    return out;
}

Trajectory CocycleHandle::transformed_trajectory(double t, double tau, const StatePair& x,
                                                 const SchemeConfig& cfg) const {
    const auto q = noise_for(tau);
    const NoiseClock clock{q ? &*q : nullptr, spec_.epsilon};
    StatePair u0 = to_transformed(x, clock(tau));
    u0.t = tau;
    return integrate(u0, tau, tau + t, cfg, spec_, clock);
}

StatePair CocycleHandle::phi(double t, double tau, const StatePair& x) const {
    return phi(t, tau, x, nullptr);
}

StatePair CocycleHandle::phi(double t, double tau, const StatePair& x,
                             const Observer* observer) const {
    if (!(t >= 0.0)) {
        throw ConfigError(fmt::format("cocycle duration must be nonnegative, got {}", t));
    }
    if (x.frame != Frame::Physical) {
        throw ConfigError("phi expects a physical state");
    }
    if (t == 0.0) {
        StatePair out = x;
        out.t = tau;
        return out;
    }
    const auto q = noise_for(tau);
    const NoiseClock clock{q ? &*q : nullptr, spec_.epsilon};
    StatePair u0 = to_transformed(x, clock(tau));
    u0.t = tau;
    const StatePair end = observer != nullptr
                              ? integrate_observed(u0, tau, tau + t, cfg_, spec_, clock, *observer)
                              : integrate_endpoint(u0, tau, tau + t, cfg_, spec_, clock);
    return to_physical(end, clock(tau + t));
}

StatePair CocycleHandle::pullback_endpoint(double t_back, double tau, const StatePair& x) const {
    if (!(t_back >= 0.0)) {
        throw ConfigError(fmt::format("pullback depth must be nonnegative, got {}", t_back));
    }
    return shifted(-t_back).phi(t_back, tau - t_back, x);
}

StatePair CocycleHandle::pullback_endpoint(double t_back, double tau, const StatePair& x,
                                           const Observer& observer) const {
    if (!(t_back >= 0.0)) {
        throw ConfigError(fmt::format("pullback depth must be nonnegative, got {}", t_back));
    }
    return shifted(-t_back).phi(t_back, tau - t_back, x, &observer);
}

namespace {

bool whole_steps(double t, double dt) {
    const double k = t / dt;
    return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

}  // namespace

CocycleCheck check_cocycle_law(const CocycleHandle& handle, double t, double s, double tau,
                               const StatePair& x) {
    const double dt = handle.scheme().dt;
    const StatePair lhs = handle.phi(t + s, tau, x);
    const StatePair mid = handle.phi(s, tau, x);
    const StatePair rhs = handle.shifted(s).phi(t, tau + s, mid);
    const double scale = std::sqrt(pair_norm2(lhs));
    const double diff = pair_distance(lhs, rhs);
    CocycleCheck out;
    out.residual = scale > 0.0 ? diff / scale : diff;
    out.aligned = whole_steps(t, dt) && whole_steps(s, dt) && whole_steps(tau, dt);
    return out;
}

}  // namespace fhn
