#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fhn {

/// Two-sided sampled Wiener trajectory omega on a uniform grid containing t = 0.
///
/// Samples live in one immutable buffer shared by every shifted view, so a
/// path is cheap to copy and safe to read from several threads. A shift by s
/// does not resample anything: the view re-anchors at s,
///
///     (theta_s omega)(t) = omega(t + s) - omega(s),
///
/// and composing shifts composes the integer offsets, which makes the group
/// law hold bit-for-bit on shared nodes.
class WienerPath {
public:
    /// Builds a path from explicit node values on {t_min + k dt}. The grid
    /// must contain 0 and the value there must be exactly 0.
    static WienerPath from_samples(double t_min, double dt, std::vector<double> values,
                                   std::uint64_t seed = 0);

    double t_min() const noexcept { return static_cast<double>(lo_) * dt_; }
    double t_max() const noexcept { return static_cast<double>(hi_) * dt_; }
    double dt() const noexcept { return dt_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::size_t size() const noexcept { return static_cast<std::size_t>(hi_ - lo_ + 1); }
    /// Grid index of the first node (time = first_node() * dt()); always <= 0.
    std::int64_t first_node() const noexcept { return lo_; }
    std::int64_t last_node() const noexcept { return hi_; }

    /// Value at grid node k (time k * dt). Throws OutOfWindow.
    double node_value(std::int64_t k) const;
    double node_time(std::int64_t k) const noexcept { return static_cast<double>(k) * dt_; }

    /// Piecewise-linear evaluation; times within 1e-7 steps of a node snap to it.
    double operator()(double t) const;

    bool contains(double t) const noexcept;

    /// Index of the grid node at time t; throws InvalidWindow if t is off-grid.
    std::int64_t node_index(double t) const;

    /// All node values in increasing time order.
    std::vector<double> values() const;

    /// theta_s applied to this path; s must be a grid time inside the window.
    WienerPath shifted(double s) const;

private:
    WienerPath(std::shared_ptr<const std::vector<double>> base, std::int64_t base_zero,
               std::int64_t offset, double dt, std::uint64_t seed);

    double raw(std::int64_t k) const noexcept {
        return (*base_)[static_cast<std::size_t>(base_zero_ + offset_ + k)];
    }

    std::shared_ptr<const std::vector<double>> base_;
    std::int64_t base_zero_ = 0;  // index of base time 0 inside base_
    std::int64_t offset_ = 0;     // accumulated shift in steps
    std::int64_t lo_ = 0;
    std::int64_t hi_ = 0;
    double anchor_ = 0.0;  // base value at the shift origin
    double dt_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Samples a two-sided path on [t_min, t_max] with spacing dt_path.
///
/// The forward and backward halves are independent Gaussian walks started at
/// omega(0) = 0. Identical arguments give bit-identical paths.
WienerPath sample_path(std::uint64_t seed, double t_min, double t_max, double dt_path);

/// theta_s omega.
WienerPath shift(const WienerPath& path, double s);

/// z_eps(t, omega) = exp(-eps * omega(t)).
double noise_factor(const WienerPath& path, double epsilon, double t);

/// sup over grid times |t| >= t0 of |omega(t) / t|.
double lil_statistic(const WienerPath& path, double t0);

/// CSV with header `t,omega`, 17 significant digits.
void write_path_csv(std::ostream& out, const WienerPath& path);
WienerPath read_path_csv(std::istream& in);

}  // namespace fhn
