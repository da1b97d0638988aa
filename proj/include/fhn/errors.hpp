#pragma once

#include <stdexcept>
#include <string>

namespace fhn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Path window does not contain t = 0, or the grid spacing is not positive.
class InvalidWindow : public Error {
public:
    using Error::Error;
};

/// Evaluation or shift outside the sampled window of a path.
class OutOfWindow : public Error {
public:
    using Error::Error;
};

/// Non-finite state produced by the time stepper. `context` names the run
/// (experiment cell) that failed, when known.
class BlowUp : public Error {
public:
    BlowUp(double t, double max_norm, const std::string& context = {})
        : Error((context.empty() ? std::string() : context + ": ") + "blow-up at t=" + std::to_string(t) +
                " (max-norm " + std::to_string(max_norm) + ")"),
          t_(t), max_norm_(max_norm), context_(context) {}

    double time() const noexcept { return t_; }
    double max_norm() const noexcept { return max_norm_; }
    const std::string& context() const noexcept { return context_; }

    BlowUp within(const std::string& context) const {
        return BlowUp(t_, max_norm_, context_.empty() ? context : context + ", " + context_);
    }

private:
    double t_;
    double max_norm_;
    std::string context_;
};

/// The reference integrator could not reach its tolerance.
class OracleFailure : public Error {
public:
    using Error::Error;
};

/// delta = min(lambda, sigma) > alpha3 and beta >= 1 are required for the
/// single-point attractor experiments.
class EquilibriumConditionViolated : public Error {
public:
    using Error::Error;
};

/// Quadrature horizon too short: the tail estimate dominates the body.
class HorizonTooShort : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or invalid argument to an operation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fhn
