#include "fhn/paths.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "fhn/errors.hpp"

namespace fhn {

namespace {

constexpr double kSnap = 1e-7;  // in units of grid steps

std::int64_t snapped_steps(double t, double dt, bool& on_grid) {
    const double k = t / dt;
    const double r = std::round(k);
    on_grid = std::abs(k - r) <= kSnap;
    return static_cast<std::int64_t>(r);
}

}  // namespace

WienerPath::WienerPath(std::shared_ptr<const std::vector<double>> base, std::int64_t base_zero,
                       std::int64_t offset, double dt, std::uint64_t seed)
    : base_(std::move(base)), base_zero_(base_zero), offset_(offset), dt_(dt), seed_(seed) {
    const auto n = static_cast<std::int64_t>(base_->size());
    lo_ = -base_zero_ - offset_;
    hi_ = n - 1 - base_zero_ - offset_;
    anchor_ = (*base_)[static_cast<std::size_t>(base_zero_ + offset_)];
}

WienerPath WienerPath::from_samples(double t_min, double dt, std::vector<double> values,
                                    std::uint64_t seed) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidWindow(fmt::format("path spacing must be positive, got {}", dt));
    }
    if (t_min > 0.0) {
        throw InvalidWindow(fmt::format("path window must contain 0 (t_min = {})", t_min));
    }
    bool on_grid = false;
    const std::int64_t k_min = snapped_steps(t_min, dt, on_grid);
    if (!on_grid) {
        throw InvalidWindow(fmt::format("grid {} + k*{} does not contain 0", t_min, dt));
    }
    const std::int64_t zero = -k_min;
    if (zero >= static_cast<std::int64_t>(values.size())) {
        throw InvalidWindow("path window must contain 0");
    }
    if (values[static_cast<std::size_t>(zero)] != 0.0) {
        throw InvalidWindow("path value at t = 0 must be exactly 0");
    }
    auto base = std::make_shared<const std::vector<double>>(std::move(values));
    return WienerPath(std::move(base), zero, 0, dt, seed);
}

double WienerPath::node_value(std::int64_t k) const {
    if (k < lo_ || k > hi_) {
        throw OutOfWindow(fmt::format("node {} outside path window [{}, {}]", k, lo_, hi_));
    }
    return raw(k) - anchor_;
}

bool WienerPath::contains(double t) const noexcept {
    const double k = t / dt_;
    return k >= static_cast<double>(lo_) - kSnap && k <= static_cast<double>(hi_) + kSnap;
}

double WienerPath::operator()(double t) const {
    if (!contains(t)) {
        throw OutOfWindow(fmt::format("t = {} outside path window [{}, {}]", t, t_min(), t_max()));
    }
    bool on_grid = false;
    const std::int64_t k = snapped_steps(t, dt_, on_grid);
    if (on_grid) {
        return node_value(std::clamp(k, lo_, hi_));
    }
    const double pos = t / dt_;
    const auto left = std::clamp(static_cast<std::int64_t>(std::floor(pos)), lo_, hi_ - 1);
    const double w = pos - static_cast<double>(left);
    const double a = node_value(left);
    const double b = node_value(left + 1);
    return a + w * (b - a);
}

std::int64_t WienerPath::node_index(double t) const {
    bool on_grid = false;
    const std::int64_t k = snapped_steps(t, dt_, on_grid);
    if (!on_grid) {
        throw InvalidWindow(fmt::format("t = {} is not a node of the path grid (dt = {})", t, dt_));
    }
    return k;
}

std::vector<double> WienerPath::values() const {
    std::vector<double> out;
    out.reserve(size());
    for (std::int64_t k = lo_; k <= hi_; ++k) {
        out.push_back(raw(k) - anchor_);
    }
    return out;
}

WienerPath WienerPath::shifted(double s) const {
    if (!contains(s)) {
        throw OutOfWindow(fmt::format("shift s = {} outside path window [{}, {}]", s, t_min(), t_max()));
    }
    const std::int64_t k = node_index(s);
    return WienerPath(base_, base_zero_, offset_ + k, dt_, seed_);
}

WienerPath sample_path(std::uint64_t seed, double t_min, double t_max, double dt_path) {
    if (!(dt_path > 0.0) || !std::isfinite(dt_path)) {
        throw InvalidWindow(fmt::format("dt_path must be positive, got {}", dt_path));
    }
    if (t_min > 0.0 || t_max < 0.0) {
        throw InvalidWindow(fmt::format("window [{}, {}] does not contain 0", t_min, t_max));
    }
    bool on_grid = false;
    const std::int64_t k_min = snapped_steps(t_min, dt_path, on_grid);
    if (!on_grid) {
        throw InvalidWindow(fmt::format("grid {} + k*{} does not contain 0", t_min, dt_path));
    }
    const auto k_max = static_cast<std::int64_t>(std::floor(t_max / dt_path + kSnap));
    const auto n_back = static_cast<std::size_t>(-k_min);
    const auto n_fwd = static_cast<std::size_t>(k_max);

    std::vector<double> values(n_back + n_fwd + 1, 0.0);
    const double sd = std::sqrt(dt_path);

    std::seed_seq fwd_seq{seed, std::uint64_t{1}};
    std::mt19937_64 fwd(fwd_seq);
    std::normal_distribution<double> fwd_inc(0.0, sd);
    for (std::size_t i = 1; i <= n_fwd; ++i) {
        values[n_back + i] = values[n_back + i - 1] + fwd_inc(fwd);
    }

    std::seed_seq back_seq{seed, std::uint64_t{2}};
    std::mt19937_64 back(back_seq);
    std::normal_distribution<double> back_inc(0.0, sd);
    for (std::size_t i = 1; i <= n_back; ++i) {
        values[n_back - i] = values[n_back - i + 1] + back_inc(back);
    }

    return WienerPath::from_samples(static_cast<double>(k_min) * dt_path, dt_path,
                                    std::move(values), seed);
}

WienerPath shift(const WienerPath& path, double s) { return path.shifted(s); }

double noise_factor(const WienerPath& path, double epsilon, double t) {
    return std::exp(-epsilon * path(t));
}

double lil_statistic(const WienerPath& path, double t0) {
    const double reach = std::min(-path.t_min(), path.t_max());
    if (!(t0 > 0.0) || !(t0 < reach)) {
        throw OutOfWindow(fmt::format("LIL threshold {} must lie in (0, {})", t0, reach));
    }
    double sup = 0.0;
    for (std::int64_t k = path.first_node(); k <= path.last_node(); ++k) {
        const double t = path.node_time(k);
        if (std::abs(t) >= t0 * (1.0 - 1e-12)) {
            sup = std::max(sup, std::abs(path.node_value(k) / t));
        }
    }
    return sup;
}

void write_path_csv(std::ostream& out, const WienerPath& path) {
    out << "t,omega\n";
    for (std::int64_t k = path.first_node(); k <= path.last_node(); ++k) {
        out << fmt::format("{:.17g},{:.17g}\n", path.node_time(k), path.node_value(k));
    }
}

WienerPath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,omega") {
        throw ConfigError("path CSV must start with header `t,omega`");
    }
    std::vector<double> ts;
    std::vector<double> ws;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("malformed path CSV row: " + line);
        }
        ts.push_back(std::stod(line.substr(0, comma)));
        ws.push_back(std::stod(line.substr(comma + 1)));
    }
    if (ts.size() < 2) {
        throw InvalidWindow("path CSV needs at least two rows");
    }
    const double dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i] > ts[i - 1])) {
            throw InvalidWindow("path CSV times must be strictly increasing");
        }
        if (std::abs((ts[i] - ts[i - 1]) - dt) > 1e-6 * dt) {
            throw InvalidWindow("path CSV times must be uniformly spaced");
        }
    }
    return WienerPath::from_samples(ts.front(), dt, std::move(ws));
}

}  // namespace fhn
