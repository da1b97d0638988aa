#include "fhn/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "fhn/errors.hpp"
#include "fhn/parallel.hpp"

namespace fhn {

// ---------------------------------------------------------------- bundles

double InitialBundle::radius_at(double t_back) const { return radius * std::exp(growth_rate * t_back); }

namespace {

double plateau(double x, double centre, double half, double edge) {
    return 0.5 * (std::tanh((x - centre + half) / edge) - std::tanh((x - centre - half) / edge));
}

}  // namespace

StatePair InitialBundle::member(const Grid& grid, int j, double t_back) const {
    const double L = grid.half_width;
    const double half = 0.4 * L;
    const double edge = 0.05 * L;
    const double centre = 0.05 * L * static_cast<double>(j % 3 - 1);
    auto bump = [&](const Point& p) {
        const double bx = plateau(p.x, centre, half, edge);
        return grid.dim == 1 ? bx : bx * plateau(p.y, -centre, half, edge);
    };
    const double su = j % 2 == 0 ? 1.0 : -1.0;
    const double sv = (j / 2) % 2 == 0 ? 1.0 : -1.0;
    const double mix = count > 1 ? static_cast<double>(j) / (count - 1) : 0.5;
    const double angle = std::numbers::pi * (0.2 + 0.1 * mix);

    StatePair s(grid);
    s.u = sample_field(grid, bump);
    s.v = s.u;
    const double target = radius_at(t_back);
    const double n = norm_l2(s.u);
    const double cu = n > 0.0 ? su * target * std::cos(angle) / n : 0.0;
    const double cv = n > 0.0 ? sv * target * std::sin(angle) / n : 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.u[i] *= cu;
        s.v[i] *= cv;
    }
    return s;
}

std::vector<StatePair> InitialBundle::states(const Grid& grid, double t_back) const {
    std::vector<StatePair> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int j = 0; j < count; ++j) {
        out.push_back(member(grid, j, t_back));
    }
    return out;
}

std::vector<std::string> InitialBundle::violations(const ExponentLadder& ladder) const {
    std::vector<std::string> out;
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        out.push_back(fmt::format("bundle.radius must be nonnegative (got {})", radius));
    }
    if (count < 1) {
        out.push_back(fmt::format("bundle.count must be >= 1 (got {})", count));
    }
    if (!(growth_rate >= 0.0) || !(growth_rate < ladder.delta1)) {
        out.push_back(fmt::format("bundle.growth_rate must lie in [0, delta1) = [0, {}) (got {})",
                                  ladder.delta1, growth_rate));
    }
    return out;
}

// ------------------------------------------------------ absorption integral

AbsorptionIntegral absorption_radius(const ProblemSpec& spec, const WienerPath& path, double tau,
                                     const ExponentLadder& ladder, double quad_horizon, int dim) {
    if (!(quad_horizon > 0.0)) {
        throw ConfigError(fmt::format("quadrature horizon must be positive (got {})", quad_horizon));
    }
    if (!path.contains(-quad_horizon)) {
        throw OutOfWindow(fmt::format("quadrature horizon {} exceeds the path window [{}, {}]",
                                      quad_horizon, path.t_min(), path.t_max()));
    }
    const double eps = spec.epsilon;
    const double d01 = ladder.delta01;
    const double cg = spec.g.analytic_profile_norm2(dim);
    const double ch = spec.h.analytic_profile_norm2(dim);
    auto forcing = [&](double t) {
        const double ag = spec.g.amplitude * spec.g.temporal(t);
        const double ah = spec.h.amplitude * spec.h.temporal(t);
        return ag * ag * cg + ah * ah * ch + 1.0;
    };

    const std::int64_t k_lo = path.node_index(-quad_horizon);
    const double dt = path.dt();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(-k_lo + 1));
    for (std::int64_t k = k_lo; k <= 0; ++k) {
        const double s = path.node_time(k);
        const double w = (k == k_lo || k == 0) ? 0.5 : 1.0;
        terms.push_back(w * std::exp(d01 * s + 2.0 * eps * std::abs(path.node_value(k))) * forcing(s + tau));
    }
    AbsorptionIntegral out;
    out.body = pairwise_sum(terms) * dt;

    // |omega(s)| <= kappa |s| for s <= -horizon/2 on the sampled window; the
    // same growth is assumed below the window.
    double kappa = 0.0;
    for (std::int64_t k = path.first_node(); k <= 0; ++k) {
        const double s = path.node_time(k);
        if (s <= -0.5 * quad_horizon) {
            kappa = std::max(kappa, std::abs(path.node_value(k) / s));
        }
    }
    const double rate = d01 - 2.0 * eps * kappa;
    if (!(rate > 0.0)) {
        throw HorizonTooShort(fmt::format(
            "growth of |omega| beyond {} (rate {}) leaves no decay for delta01 = {} at eps = {}",
            0.5 * quad_horizon, kappa, d01, eps));
    }
    const double g_sup = spec.g.amplitude * spec.g.amplitude * cg + spec.h.amplitude * spec.h.amplitude * ch;
    out.tail = (g_sup + 1.0) * std::exp(-rate * quad_horizon) / rate;
    if (out.tail > 0.1 * out.body) {
        throw HorizonTooShort(fmt::format("tail bound {} exceeds 10% of the quadrature body {} (horizon {})",
                                          out.tail, out.body, quad_horizon));
    }
    out.value = out.body + out.tail;
    return out;
}

// ------------------------------------------------------- pullback matrix

PullbackMatrix run_pullback_matrix(const CocycleHandle& base, const Grid& grid,
                                   const std::vector<InitialBundle>& bundles, double tau,
                                   const std::vector<double>& t_back_grid,
                                   const std::vector<double>& eps_grid, unsigned workers) {
    if (bundles.empty() || t_back_grid.empty() || eps_grid.empty()) {
        throw ConfigError("pullback matrix needs nonempty bundle, t_back and eps grids");
    }
    struct Job {
        std::size_t e;
        std::size_t t;
        std::size_t b;
        int member;
    };
    std::vector<Job> jobs;
    for (std::size_t e = 0; e < eps_grid.size(); ++e) {
        for (std::size_t t = 0; t < t_back_grid.size(); ++t) {
            for (std::size_t b = 0; b < bundles.size(); ++b) {
                for (int j = 0; j < bundles[b].count; ++j) {
                    jobs.push_back({e, t, b, j});
                }
            }
        }
    }
    const double p = base.spec().p();
    std::vector<std::optional<PullbackCell>> slots(jobs.size());
    parallel_for(
        jobs.size(),
        [&](std::size_t i) {
            const Job& job = jobs[i];
            const double eps = eps_grid[job.e];
            const double t_back = t_back_grid[job.t];
            const CocycleHandle handle = base.with_epsilon(eps);
            const StatePair x = bundles[job.b].member(grid, job.member, t_back);
            double sup_lp = 0.0;
            const double window_start = tau - 1.0 - 1e-9;
            const Observer watch = [&](const StatePair& u) {
                if (u.t >= window_start) {
                    sup_lp = std::max(sup_lp, std::pow(norm_lp(u.u, p), p));
                }
            };
            StatePair end = [&] {
                try {
                    return handle.pullback_endpoint(t_back, tau, x, watch);
                } catch (const BlowUp& e) {
                    throw e.within(fmt::format("cell eps={} t_back={} radius={} member={}", eps, t_back,
                                               bundles[job.b].radius, job.member));
                }
            }();
            const double n2 = pair_norm2(end);
            slots[i] = PullbackCell{eps, t_back, bundles[job.b].radius, job.member, std::move(end), n2, sup_lp};
        },
        workers);

    PullbackMatrix out;
    out.tau = tau;
    out.eps_grid = eps_grid;
    out.t_back_grid = t_back_grid;
    for (const auto& b : bundles) {
        out.radii.push_back(b.radius);
    }
    out.cells.reserve(slots.size());
    for (auto& s : slots) {
        out.cells.push_back(std::move(*s));
    }
    return out;
}

namespace {

// Max of `key` over cells matching eps, t_back and (optionally) a bundle radius.
template <typename Key>
double cell_max(const PullbackMatrix& m, double eps, double t_back, Key key,
                std::optional<double> radius = std::nullopt) {
    double out = 0.0;
    for (const auto& c : m.cells) {
        if (c.eps == eps && c.t_back == t_back && (!radius || c.bundle_radius == *radius)) {
            out = std::max(out, key(c));
        }
    }
    return out;
}

}  // namespace

// ------------------------------------------------------------- absorption

bool AbsorptionReport::passed(const AbsorptionSettings& s) const {
    return t_abs.has_value() && *t_abs <= s.t_abs_limit && l_monotone && plateau_gap <= s.plateau_tol;
}

AbsorptionReport analyze_absorption(const PullbackMatrix& m, const CocycleHandle& base,
                                    const ExponentLadder& ladder, const AbsorptionSettings& s) {
    AbsorptionReport out;
    const int dim = m.cells.front().endpoint.grid().dim;
    for (double eps : m.eps_grid) {
        out.l_eps.push_back(absorption_radius(base.spec().with_epsilon(eps), base.path(), m.tau, ladder,
                                              s.quad_horizon, dim));
    }
    out.l_zero = absorption_radius(base.spec().with_epsilon(0.0), base.path(), m.tau, ladder, s.quad_horizon, dim);

    // L_eps nondecreasing along increasing eps, and bounded below by L_0.
    std::vector<std::size_t> order(m.eps_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m.eps_grid[a] < m.eps_grid[b]; });
    out.l_monotone = true;
    double prev = out.l_zero.value;
    for (std::size_t i : order) {
        out.l_monotone = out.l_monotone && out.l_eps[i].value >= prev;
        prev = out.l_eps[i].value;
    }

    const auto norm2 = [](const PullbackCell& c) { return c.endpoint_norm2; };
    const double deepest = *std::max_element(m.t_back_grid.begin(), m.t_back_grid.end());
    const double smallest = *std::min_element(m.radii.begin(), m.radii.end());
    double ratio = 0.0;
    for (std::size_t e = 0; e < m.eps_grid.size(); ++e) {
        const double v = cell_max(m, m.eps_grid[e], deepest, norm2, smallest);
        ratio = std::max(ratio, v / (1.0 + out.l_eps[e].value));
    }
    out.c_fit = s.c_margin * ratio;

    std::vector<double> depths = m.t_back_grid;
    std::sort(depths.begin(), depths.end());
    std::vector<bool> all_absorbed(depths.size(), true);
    for (std::size_t e = 0; e < m.eps_grid.size(); ++e) {
        const double bound = out.c_fit * (1.0 + out.l_eps[e].value);
        for (double t : m.t_back_grid) {
            const double v = cell_max(m, m.eps_grid[e], t, norm2);
            const bool absorbed = v <= bound;
            out.rows.push_back({m.eps_grid[e], t, v, bound, absorbed});
            const auto k = static_cast<std::size_t>(std::find(depths.begin(), depths.end(), t) - depths.begin());
            all_absorbed[k] = all_absorbed[k] && absorbed;
        }
    }
    // T_abs: the first depth from which every deeper depth is absorbed.
    for (std::size_t k = depths.size(); k-- > 0;) {
        if (!all_absorbed[k]) {
            break;
        }
        out.t_abs = depths[k];
    }

    // Forgetting of the initial radius at the plateau depth.
    const auto plateau_it = std::find(m.t_back_grid.begin(), m.t_back_grid.end(), s.plateau_depth);
    if (plateau_it == m.t_back_grid.end()) {
        out.plateau_gap = std::numeric_limits<double>::infinity();
    } else if (m.radii.size() > 1) {
        const double largest = *std::max_element(m.radii.begin(), m.radii.end());
        for (double eps : m.eps_grid) {
            const double lo = cell_max(m, eps, s.plateau_depth, norm2, smallest);
            const double hi = cell_max(m, eps, s.plateau_depth, norm2, largest);
            const double gap = lo > 0.0 ? std::abs(hi - lo) / lo : (hi > 0.0 ? 1.0 : 0.0);
            out.plateau_gap = std::max(out.plateau_gap, gap);
        }
    }
    return out;
}

// ---------------------------------------------------------------- L^p bound

LpReport analyze_lp(const PullbackMatrix& m, double from_t_back) {
    LpReport out;
    out.from_t_back = from_t_back;
    bool finite = true;
    for (double eps : m.eps_grid) {
        double ceiling = 0.0;
        for (double t : m.t_back_grid) {
            const double v = cell_max(m, eps, t, [](const PullbackCell& c) { return c.sup_lp_p; });
            out.rows.push_back({eps, t, v});
            finite = finite && std::isfinite(v);
            if (t >= from_t_back) {
                ceiling = std::max(ceiling, v);
            }
        }
        out.eps_ceilings.push_back(ceiling);
        out.ceiling = std::max(out.ceiling, ceiling);
    }
    out.passed = finite && std::isfinite(out.ceiling);
    return out;
}

// ------------------------------------------------------------- truncation

TruncationReport truncation_profile(const PullbackMatrix& m, const std::vector<double>& m_grid, double p,
                                    double eta, double from_t_back) {
    if (m_grid.empty() || !std::is_sorted(m_grid.begin(), m_grid.end()) || !(m_grid.front() > 0.0)) {
        throw ConfigError("truncation levels must be positive and increasing");
    }
    TruncationReport out;
    out.eta = eta;
    out.from_t_back = from_t_back;
    out.monotone = true;
    std::vector<double> sup_tail(m_grid.size(), 0.0);
    for (double eps : m.eps_grid) {
        for (double t : m.t_back_grid) {
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < m_grid.size(); ++k) {
                const double level = m_grid[k];
                double worst = 0.0;
                for (const auto& c : m.cells) {
                    if (c.eps == eps && c.t_back == t) {
                        const double tail = tail_mass(c.endpoint.u, level, p);
                        // each member must be monotone on its own
                        worst = std::max(worst, tail);
                    }
                }
                out.rows.push_back({eps, t, level, worst});
                out.monotone = out.monotone && worst <= prev;
                prev = worst;
                if (t >= from_t_back) {
                    sup_tail[k] = std::max(sup_tail[k], worst);
                }
            }
        }
    }
    for (std::size_t k = 0; k < m_grid.size(); ++k) {
        if (sup_tail[k] <= eta) {
            out.m_eta = m_grid[k];
            break;
        }
    }
    // Gain from doubling M over levels where the tail is still nonzero and
    // below a tenth of its value at the first level (beyond the bulk).
    out.doubling_gain = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m_grid.size(); ++k) {
        const auto twice = std::find(m_grid.begin(), m_grid.end(), 2.0 * m_grid[k]);
        if (twice == m_grid.end() || sup_tail[k] == 0.0 || sup_tail[k] > 0.1 * sup_tail[0]) {
            continue;
        }
        const double next = sup_tail[static_cast<std::size_t>(twice - m_grid.begin())];
        out.doubling_gain = std::min(out.doubling_gain, next > 0.0 ? sup_tail[k] / next
                                                                   : std::numeric_limits<double>::infinity());
    }
    return out;
}

// ---------------------------------------------------------------- L^p Cauchy

OPartition o_partition(const Field& a, const Field& b, double level, double p) {
    const std::size_t n = a.size();
    std::vector<double> sets[4];
    std::vector<double> whole(n);
    for (auto& s : sets) {
        s.assign(n, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::pow(std::abs(a[i] - b[i]), p);
        whole[i] = d;
        const bool big_a = std::abs(a[i]) > level;
        const bool big_b = std::abs(b[i]) > level;
        const int k = big_a ? (big_b ? 3 : 1) : (big_b ? 2 : 0);
        sets[k][i] = d;
    }
    OPartition out;
    for (int k = 0; k < 4; ++k) {
        out.parts[k] = pairwise_sum(sets[k]) * a.grid.cell();
    }
    out.total = pairwise_sum(whole) * a.grid.cell();
    return out;
}

CauchyReport lp_cauchy_test(const CocycleHandle& handle, const Grid& grid, double tau,
                            const std::vector<double>& t_back_seq, const std::vector<double>& eps_seq,
                            const InitialBundle& bundle, double level) {
    if (t_back_seq.size() < 2 || eps_seq.size() != t_back_seq.size()) {
        throw ConfigError("Cauchy test needs at least two depths and one eps per depth");
    }
    if (!std::is_sorted(t_back_seq.begin(), t_back_seq.end())) {
        throw ConfigError("Cauchy depths must be increasing");
    }
    const double p = handle.spec().p();
    const std::size_t n = t_back_seq.size();
    std::vector<std::optional<StatePair>> ends(n);
    parallel_for(n, [&](std::size_t i) {
        const StatePair x = bundle.member(grid, static_cast<int>(i) % bundle.count, t_back_seq[i]);
        try {
            ends[i] = handle.with_epsilon(eps_seq[i]).pullback_endpoint(t_back_seq[i], tau, x);
        } catch (const BlowUp& e) {
            throw e.within(fmt::format("entry {} eps={} t_back={}", i, eps_seq[i], t_back_seq[i]));
        }
    });

    CauchyReport out;
    if (level <= 0.0) {
        double top = 0.0;
        for (const auto& e : ends) {
            top = std::max(top, e->u.max_abs());
        }
        level = 0.5 * top;
    }
    out.level = level;
    out.bounds_hold = true;
    std::vector<double> row_max(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Field& a = ends[i]->u;
            const Field& b = ends[j]->u;
            CauchyPair pair;
            pair.i = static_cast<int>(i);
            pair.j = static_cast<int>(j);
            pair.t_i = t_back_seq[i];
            pair.t_j = t_back_seq[j];
            pair.split = o_partition(a, b, level, p);
            pair.lp_distance = std::pow(pair.split.total, 1.0 / p);
            pair.partition_error =
                pair.split.total > 0.0 ? std::abs(pair.split.sum() - pair.split.total) / pair.split.total : 0.0;

            // A-priori bounds: on O1 |a - b| <= 2M; on O2 and O3 the larger
            // entry dominates; on O4 convexity of |.|^p.
            Field diff(a.grid);
            for (std::size_t k = 0; k < diff.size(); ++k) {
                diff[k] = a[k] - b[k];
            }
            const double slack = 1.0 + 1e-12;
            const double ta = tail_mass(a, level, p);
            const double tb = tail_mass(b, level, p);
            const bool ok = pair.split.parts[0] <= std::pow(2.0 * level, p - 2.0) * inner(diff, diff) * slack &&
                            pair.split.parts[1] <= std::pow(2.0, p) * ta * slack &&
                            pair.split.parts[2] <= std::pow(2.0, p) * tb * slack &&
                            pair.split.parts[3] <= std::pow(2.0, p - 1.0) * (ta + tb) * slack;
            pair.bounds_hold = ok;
            out.bounds_hold = out.bounds_hold && ok;
            out.max_partition_error = std::max(out.max_partition_error, pair.partition_error);
            row_max[i] = std::max(row_max[i], pair.lp_distance);
            out.pairs.push_back(pair);
        }
    }
    out.monotone = true;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out.monotone = out.monotone && row_max[i] < row_max[i - 1];
    }
    out.last_pair = row_max[n - 2];
    return out;
}

// ------------------------------------------------------------ continuity

namespace {

// Physical snapshots of the solution from x0 over [tau, tau + t_span].
std::vector<StatePair> physical_run(const CocycleHandle& h, double tau, double t_span, const StatePair& x0) {
    const Trajectory traj = h.transformed_trajectory(t_span, tau, x0, h.scheme());
    std::vector<StatePair> out;
    out.reserve(traj.snapshots.size());
    for (const auto& s : traj.snapshots) {
        out.push_back(to_physical(s, h.z(s.t, tau)));
    }
    return out;
}

double sup_deviation(const std::vector<StatePair>& a, const std::vector<StatePair>& b) {
    double out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        out = std::max(out, pair_distance(a[i], b[i]));
    }
    return out;
}

}  // namespace

ContinuityReport epsilon_continuity(const CocycleHandle& handle, double tau, double t_span, double eps0,
                                    const std::vector<double>& gaps, const StatePair& x0, double ratio_lo,
                                    double ratio_hi) {
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (!(gaps[i] > 0.0) || (i > 0 && !(gaps[i] < gaps[i - 1]))) {
            throw ConfigError("continuity gaps must be positive and decreasing");
        }
    }
    // Index 0 is the eps0 reference, 1 the z == 1 reference, then eps0 + gap
    // and gap for every gap.
    const std::size_t n = 2 + 2 * gaps.size();
    std::vector<std::vector<StatePair>> runs(n);
    const CocycleHandle det = CocycleHandle::deterministic(handle.spec(), handle.scheme());
    parallel_for(n, [&](std::size_t i) {
        if (i == 1) {
            runs[i] = physical_run(det, tau, t_span, x0);
            return;
        }
        double eps = eps0;
        if (i >= 2) {
            const std::size_t k = (i - 2) / 2;
            eps = (i % 2 == 0) ? eps0 + gaps[k] : gaps[k];
        }
        runs[i] = physical_run(handle.with_epsilon(eps), tau, t_span, x0);
    });

    ContinuityReport out;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        out.toward_eps0.push_back({eps0 + gaps[k], eps0, sup_deviation(runs[2 + 2 * k], runs[0])});
        out.toward_zero.push_back({gaps[k], 0.0, sup_deviation(runs[3 + 2 * k], runs[1])});
    }
    out.monotone = true;
    out.zero_monotone = true;
    out.ratios_in_band = true;
    for (std::size_t k = 1; k < gaps.size(); ++k) {
        const double prev = out.toward_eps0[k - 1].sup_deviation;
        const double cur = out.toward_eps0[k].sup_deviation;
        out.monotone = out.monotone && cur < prev;
        const double r = cur > 0.0 ? prev / cur : std::numeric_limits<double>::infinity();
        out.ratios.push_back(r);
        out.ratios_in_band = out.ratios_in_band && r >= ratio_lo && r <= ratio_hi;
        out.zero_monotone = out.zero_monotone && out.toward_zero[k].sup_deviation < out.toward_zero[k - 1].sup_deviation;
    }
    out.zero_last = out.toward_zero.empty() ? 0.0 : out.toward_zero.back().sup_deviation;
    return out;
}

// ------------------------------------------------------------ equilibrium

EquilibriumReport equilibrium(const CocycleHandle& handle, const Grid& grid, double tau,
                              const std::vector<double>& t_back_grid, const InitialBundle& bundle, double tol,
                              double burn_in) {
    check_equilibrium_condition(handle.spec());
    if (t_back_grid.size() < 2 || !std::is_sorted(t_back_grid.begin(), t_back_grid.end())) {
        throw ConfigError("equilibrium needs at least two increasing pullback depths");
    }
    const std::size_t nt = t_back_grid.size();
    const auto m = static_cast<std::size_t>(bundle.count);
    std::vector<std::optional<StatePair>> ends(nt * m);
    parallel_for(nt * m, [&](std::size_t i) {
        const double t_back = t_back_grid[i / m];
        const StatePair x = bundle.member(grid, static_cast<int>(i % m), t_back);
        try {
            ends[i] = handle.pullback_endpoint(t_back, tau, x);
        } catch (const BlowUp& e) {
            throw e.within(fmt::format("t_back={} member={}", t_back, i % m));
        }
    });
    auto at = [&](std::size_t t, std::size_t j) -> const StatePair& { return *ends[t * m + j]; };

    EquilibriumReport out{at(nt - 1, 0), t_back_grid.back(), 0.0, {}, 0.0, false};
    for (std::size_t t = 0; t < nt; ++t) {
        EquilibriumRow row{t_back_grid[t], 0.0, 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            row.distance_to_final = std::max(row.distance_to_final, pair_distance(at(t, j), at(nt - 1, j)));
            for (std::size_t k = j + 1; k < m; ++k) {
                row.spread = std::max(row.spread, pair_distance(at(t, j), at(t, k)));
            }
        }
        out.rows.push_back(row);
    }
    out.final_spread = out.rows.back().spread;
    out.converged = out.final_spread <= tol && out.rows[nt - 2].distance_to_final <= tol;

    // Least squares on log distance; points at round-off level carry no rate.
    const double floor = 1e-12 * (1.0 + std::sqrt(pair_norm2(out.u_star)));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (std::size_t t = 0; t + 1 < nt; ++t) {
        const double d = out.rows[t].distance_to_final;
        if (t_back_grid[t] >= burn_in && d > floor) {
            const double x = t_back_grid[t];
            const double y = std::log(d);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++count;
        }
    }
    if (count >= 2) {
        const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        out.b_fit = -slope;
    }
    return out;
}

std::vector<InvarianceRow> equilibrium_invariance(const CocycleHandle& handle, const StatePair& u_star, double tau,
                                                  double depth, const StatePair& x0,
                                                  const std::vector<double>& t_grid) {
    std::vector<InvarianceRow> out(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t i) {
        const double t = t_grid[i];
        const StatePair forward = handle.phi(t, tau, u_star);
        const StatePair rebuilt = handle.shifted(t).pullback_endpoint(depth, tau + t, x0);
        out[i] = {t, pair_distance(forward, rebuilt)};
    });
    return out;
}

// ------------------------------------------------------------- reports

void write_absorption_csv(std::ostream& out, const AbsorptionReport& r) {
    out << "eps,t_back,max_endpoint_norm2,radius,absorbed\n";
    for (const auto& row : r.rows) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{}\n", row.eps, row.t_back, row.max_endpoint_norm2,
                           row.radius, row.absorbed);
    }
}

void write_lp_csv(std::ostream& out, const LpReport& r) {
    out << "eps,t_back,sup_lp_p\n";
    for (const auto& row : r.rows) {
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", row.eps, row.t_back, row.sup_lp_p);
    }
}

void write_truncation_csv(std::ostream& out, const TruncationReport& r) {
    out << "eps,t_back,M,tail_mass\n";
    for (const auto& row : r.rows) {
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", row.eps, row.t_back, row.m, row.tail_mass);
    }
}

void write_cauchy_csv(std::ostream& out, const CauchyReport& r) {
    out << "i,j,t_i,t_j,lp_distance\n";
    for (const auto& p : r.pairs) {
        out << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", p.i, p.j, p.t_i, p.t_j, p.lp_distance);
    }
}

void write_continuity_csv(std::ostream& out, const ContinuityReport& r) {
    out << "eps,sup_deviation\n";
    for (const auto* rows : {&r.toward_eps0, &r.toward_zero}) {
        for (const auto& row : *rows) {
            out << fmt::format("{:.17g},{:.17g}\n", row.eps, row.sup_deviation);
        }
    }
}

void write_equilibrium_csv(std::ostream& out, const EquilibriumReport& r) {
    out << "t_back,distance_to_final,spread\n";
    for (const auto& row : r.rows) {
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", row.t_back, row.distance_to_final, row.spread);
    }
}

void write_invariance_csv(std::ostream& out, const std::vector<InvarianceRow>& rows) {
    out << "t,residual\n";
    for (const auto& row : rows) {
        out << fmt::format("{:.17g},{:.17g}\n", row.t, row.residual);
    }
}

}  // namespace fhn
