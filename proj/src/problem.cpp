#include "fhn/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "fhn/errors.hpp"

namespace fhn {

Nonlinearity default_cubic(double a0, double s_cap) {
    if (!(a0 > 0.0)) {
        throw ConfigError(fmt::format("problem.a0 must be positive, got {}", a0));
    }
    Nonlinearity nl;
    nl.name = "cubic";
    nl.f = [a0](const Point& x, double s) { return -s * s * s + a0 * std::exp(-x.norm2()) * s; };
    nl.p = 4.0;
    nl.alpha1 = 0.5;
    nl.alpha2 = 2.0;
    nl.alpha3 = a0;
    nl.alpha4 = 3.0;
    // s^4/2 - a0 e^{-|x|^2} s^2 + psi1 >= 0 with equality at s^2 = a0 e^{-|x|^2}.
    nl.psi1 = [a0](const Point& x) { return 0.5 * a0 * a0 * std::exp(-2.0 * x.norm2()); };
    // max_s (phi |s| - |s|^3) = 2/(3 sqrt 3) phi^{3/2}.
    nl.psi2 = [a0](const Point& x) {
        return 2.0 / (3.0 * std::sqrt(3.0)) * std::pow(a0, 1.5) * std::exp(-1.5 * x.norm2());
    };
    nl.psi3 = [a0, s_cap](const Point& x) {
        return 2.0 * a0 * s_cap * std::sqrt(x.norm2()) * std::exp(-x.norm2());
    };
    nl.psi4 = [a0](const Point& x) { return a0 * std::exp(-x.norm2()); };
    return nl;
}

Nonlinearity zero_nonlinearity() {
    Nonlinearity nl;
    nl.name = "zero";
    nl.f = [](const Point&, double) { return 0.0; };
    nl.p = 2.0;
    auto zero = [](const Point&) { return 0.0; };
    nl.psi1 = zero;
    nl.psi2 = zero;
    nl.psi3 = zero;
    nl.psi4 = zero;
    return nl;
}

double ForcingSpec::temporal(double t) const noexcept {
    switch (kind) {
    case ForcingKind::Cosine: return std::cos(frequency * t);
    case ForcingKind::Sine: return std::sin(frequency * t);
    case ForcingKind::Constant: return 1.0;
    }
    return 0.0;
}

double ForcingSpec::profile(const Point& x) const noexcept {
    return std::exp(-x.norm2() / (width * width));
}

double ForcingSpec::profile_norm2(const Grid& g) const {
    std::vector<double> sq(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double b = profile(g.point(i));
        sq[i] = b * b;
    }
    return pairwise_sum(sq) * g.cell();
}

double ForcingSpec::analytic_profile_norm2(int dim) const {
    const double one_d = width * std::sqrt(std::numbers::pi / 2.0);
    return dim == 1 ? one_d : one_d * one_d;
}

double ForcingSpec::norm2(const Grid& g, double t) const {
    const double a = amplitude * temporal(t);
    return a * a * profile_norm2(g);
}

Field ForcingSpec::sample_profile(const Grid& g) const {
    return sample_field(g, [this](const Point& x) { return amplitude * profile(x); });
}

std::pair<ForcingSpec, ForcingSpec> default_forcings(double a_g, double a_h, double w, double r) {
    if (!(r > 0.0)) {
        throw ConfigError(fmt::format("forcing width r must be positive, got {}", r));
    }
    return {ForcingSpec{ForcingKind::Cosine, a_g, w, r}, ForcingSpec{ForcingKind::Sine, a_h, w, r}};
}

std::vector<std::string> ProblemSpec::violations() const {
    std::vector<std::string> out;
    auto positive = [&](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            out.push_back(fmt::format("problem.{} must be positive (got {})", name, v));
        }
    };
    positive("lambda", lambda);
    positive("alpha", alpha);
    positive("beta", beta);
    positive("sigma", sigma);
    positive("a", max_epsilon);
    if (!(nonlinearity.p >= 2.0)) {
        out.push_back(fmt::format("problem.p must be >= 2 (got {})", nonlinearity.p));
    }
    if (!(epsilon >= 0.0 && epsilon <= max_epsilon)) {
        out.push_back(fmt::format("problem.epsilon must lie in [0, a] = [0, {}] (got {})",
                                  max_epsilon, epsilon));
    }
    return out;
}

ProblemSpec default_problem() {
    ProblemSpec spec;
    auto [g, h] = default_forcings(0.25, 0.25, 1.0, 1.0);
    spec.g = g;
    spec.h = h;
    return spec;
}

std::vector<std::string> ExponentLadder::violations() const {
    std::vector<std::string> out;
    if (!(0.0 < delta0)) {
        out.push_back(fmt::format("ladder: delta0 must be positive (got {})", delta0));
    }
    if (!(delta0 < delta01)) {
        out.push_back(fmt::format("ladder: delta0 < delta01 violated ({} >= {})", delta0, delta01));
    }
    if (!(delta01 < delta1)) {
        out.push_back(fmt::format("ladder: delta01 < delta1 violated ({} >= {})", delta01, delta1));
    }
    if (!(delta1 < delta)) {
        out.push_back(fmt::format("ladder: delta1 < delta violated ({} >= {})", delta1, delta));
    }
    if (b0 && b) {
        if (!(delta0 < *b0 && *b0 < *b)) {
            out.push_back(fmt::format("ladder: delta0 < b0 < b violated (delta0={}, b0={}, b={})",
                                      delta0, *b0, *b));
        }
    }
    return out;
}

void check_equilibrium_condition(const ProblemSpec& spec) {
    const double delta = spec.delta();
    if (!(delta > spec.nonlinearity.alpha3) || !(spec.beta >= 1.0)) {
        throw EquilibriumConditionViolated(fmt::format(
            "equilibrium condition violated: requires delta = min(lambda, sigma) > alpha3 and "
            "beta >= 1 (delta = {}, alpha3 = {}, beta = {})",
            delta, spec.nonlinearity.alpha3, spec.beta));
    }
}

ExponentLadder build_ladder(const ProblemSpec& spec, bool require_equilibrium) {
    if (require_equilibrium) {
        check_equilibrium_condition(spec);
    }
    ExponentLadder ladder;
    ladder.delta = spec.delta();
    ladder.delta0 = ladder.delta / 4.0;
    ladder.delta01 = ladder.delta / 2.0;
    ladder.delta1 = 3.0 * ladder.delta / 4.0;
    const double alpha3 = spec.nonlinearity.alpha3;
    if (ladder.delta > alpha3) {
        const double b = ladder.delta - alpha3;
        double b0 = std::min(0.9 * b, std::max(1.01 * ladder.delta1, 1.01 * ladder.delta0));
        // Clip into the open interval (delta0, b).
        if (!(b0 > ladder.delta0)) {
            b0 = 0.5 * (ladder.delta0 + b);
        }
        if (!(b0 < b)) {
            b0 = 0.5 * (ladder.delta0 + b);
        }
        ladder.b = b;
        ladder.b0 = b0;
    }
    if (auto v = ladder.violations(); !v.empty()) {
        throw ConfigError(v.front());
    }
    return ladder;
}

bool ConditionReport::all_passed() const noexcept {
    return std::all_of(entries.begin(), entries.end(),
                       [](const ConditionEntry& e) { return e.informational || e.passed(); });
}

const ConditionEntry& ConditionReport::at(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) {
            return e;
        }
    }
    throw ConfigError("no condition named " + name);
}

namespace {

constexpr double kRelStep = 1e-6;
constexpr double kMachEps = std::numeric_limits<double>::epsilon();

struct Derivative {
    double value = 0.0;
    double error = 0.0;  // truncation estimate plus round-off bound
};

// Richardson-extrapolated central difference of a scalar function.
template <typename Fn>
Derivative central_difference(Fn&& fn, double at) {
    const double h = kRelStep * std::max(std::abs(at), 1.0);
    const double fp1 = fn(at + h);
    const double fm1 = fn(at - h);
    const double fp2 = fn(at + 2.0 * h);
    const double fm2 = fn(at - 2.0 * h);
    const double d1 = (fp1 - fm1) / (2.0 * h);
    const double d2 = (fp2 - fm2) / (4.0 * h);
    const double rich = (4.0 * d1 - d2) / 3.0;
    const double roundoff =
        4.0 * kMachEps * (std::abs(fp1) + std::abs(fm1) + std::abs(fp2) + std::abs(fm2)) / h;
    return {rich, std::abs(d1 - d2) / 3.0 + roundoff};
}

Derivative ds(const Nonlinearity& nl, const Point& x, double s) {
    return central_difference([&](double q) { return nl.f(x, q); }, s);
}

Derivative grad_x(const Nonlinearity& nl, const Point& x, double s, int dim) {
    const Derivative dx = central_difference([&](double q) { return nl.f(Point{q, x.y}, s); }, x.x);
    if (dim == 1) {
        return {std::abs(dx.value), dx.error};
    }
    const Derivative dy = central_difference([&](double q) { return nl.f(Point{x.x, q}, s); }, x.y);
    return {std::hypot(dx.value, dy.value), dx.error + dy.error};
}

void record(ConditionEntry& e, double margin, const Point& x, double s) {
    if (margin < e.worst_margin) {
        e.worst_margin = margin;
        e.worst_x = x;
        e.worst_s = s;
    }
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    }
    return out;
}

}  // namespace

double ds_upper_margin(const Nonlinearity& nl, const Point& x, double s) {
    const Derivative d = ds(nl, x, s);
    return nl.alpha3 - d.value + d.error;
}

ConditionReport check_growth_conditions(const Nonlinearity& nl, const SampleBox& box,
                                        int n_samples) {
    if (n_samples < 2) {
        throw ConfigError("condition check needs at least 2 samples per axis");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    ConditionEntry dissipation{"dissipation", inf, {}, 0.0, false};
    ConditionEntry growth{"growth", inf, {}, 0.0, false};
    ConditionEntry ds_upper{"ds_upper_bound", inf, {}, 0.0, false};
    ConditionEntry dx_bound{"dx_bound", inf, {}, 0.0, false};
    ConditionEntry ds_growth{"ds_growth", inf, {}, 0.0, false};
    ConditionEntry literal{"ds_times_f_literal", inf, {}, 0.0, true};

    const auto xs = linspace(box.x_min, box.x_max, n_samples);
    const auto ss = linspace(box.s_min, box.s_max, n_samples);
    const std::vector<double> ys = box.dim == 2 ? xs : std::vector<double>{0.0};
    const double p = nl.p;

    for (double xv : xs) {
        for (double yv : ys) {
            const Point x{xv, yv};
            const double psi1 = nl.psi1(x);
            const double psi2 = nl.psi2(x);
            const double psi3 = nl.psi3(x);
            const double psi4 = nl.psi4(x);
            for (double s : ss) {
                const double fv = nl.f(x, s);
                const double as = std::abs(s);
                record(dissipation, -nl.alpha1 * std::pow(as, p) + psi1 - fv * s, x, s);
                record(growth, nl.alpha2 * std::pow(as, p - 1.0) + psi2 - std::abs(fv), x, s);

                const Derivative d = ds(nl, x, s);
                record(ds_upper, nl.alpha3 - d.value + d.error, x, s);
                record(ds_growth, nl.alpha4 * std::pow(as, p - 2.0) + psi4 - std::abs(d.value) + d.error,
                       x, s);
                record(literal, nl.alpha3 - d.value * fv + d.error * std::abs(fv), x, s);

                const Derivative gx = grad_x(nl, x, s, box.dim);
                record(dx_bound, psi3 - gx.value + gx.error, x, s);
            }
        }
    }
    return ConditionReport{{dissipation, growth, ds_upper, dx_bound, ds_growth, literal}};
}

ForcingIntegral forcing_integral(const ForcingSpec& g, const ForcingSpec& h, int dim,
                                 double delta0, double tau, double horizon) {
    if (!(delta0 > 0.0) || !(horizon > 0.0)) {
        throw ConfigError("forcing integral needs delta0 > 0 and horizon > 0");
    }
    const double cg = g.analytic_profile_norm2(dim);
    const double ch = h.analytic_profile_norm2(dim);
    auto integrand = [&](double s) {
        const double ag = g.amplitude * g.temporal(s);
        const double ah = h.amplitude * h.temporal(s);
        return std::exp(delta0 * s) * (ag * ag * cg + ah * ah * ch);
    };
    const double w = std::max(g.frequency, h.frequency);
    double step = 0.01;
    if (w > 0.0) {
        step = std::min(step, 2.0 * std::numbers::pi / w / 400.0);
    }
    const auto n = static_cast<std::size_t>(std::ceil(horizon / step));
    const double hq = horizon / static_cast<double>(n);
    const double start = tau - horizon;
    std::vector<double> terms(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double wgt = (i == 0 || i == n) ? 0.5 : 1.0;
        terms[i] = wgt * integrand(start + hq * static_cast<double>(i));
    }
    const double body = pairwise_sum(terms) * hq;
    const double amp2 = g.amplitude * g.amplitude * cg + h.amplitude * h.amplitude * ch;
    const double tail = amp2 * std::exp(delta0 * start) / delta0;
    return {body + tail, tail};
}

}  // namespace fhn
