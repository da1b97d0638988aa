#include "fhn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include "json.hpp"

#include "fhn/errors.hpp"

namespace fhn {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Reads one JSON object, remembering which keys were used so that typos
/// surface as unknown keys.
class Reader {
public:
    Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) {
            throw ConfigError(fmt::format("{} must be an object", name()));
        }
    }

    void get(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) {
                throw ConfigError(fmt::format("{} must be a number", field(key)));
            }
            out = v->get<double>();
        }
    }

    void get(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) {
                throw ConfigError(fmt::format("{} must be an integer", field(key)));
            }
            out = v->get<int>();
        }
    }

    void get(const char* key, unsigned& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) {
                throw ConfigError(fmt::format("{} must be a nonnegative integer", field(key)));
            }
            out = v->get<unsigned>();
        }
    }

    void get(const char* key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) {
                throw ConfigError(fmt::format("{} must be a nonnegative integer", field(key)));
            }
            out = v->get<std::uint64_t>();
        }
    }

    void get(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) {
                throw ConfigError(fmt::format("{} must be a string", field(key)));
            }
            out = v->get<std::string>();
        }
    }

    void get(const char* key, std::vector<double>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& x) { return x.is_number(); })) {
                throw ConfigError(fmt::format("{} must be an array of numbers", field(key)));
            }
            out = v->get<std::vector<double>>();
        }
    }

    void get(const char* key, std::optional<double>& out) {
        if (const json* v = take(key)) {
            if (v->is_null()) {
                out.reset();
            } else if (v->is_number()) {
                out = v->get<double>();
            } else {
                throw ConfigError(fmt::format("{} must be a number or null", field(key)));
            }
        }
    }

    /// Nested object, or nothing when absent.
    std::optional<Reader> child(const char* key) {
        if (const json* v = take(key)) {
            return Reader(*v, field(key));
        }
        return std::nullopt;
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (seen_.count(item.key()) == 0) {
                throw ConfigError(fmt::format("unknown key {}", field(item.key().c_str())));
            }
        }
    }

private:
    const json* take(const char* key) {
        const auto it = j_.find(key);
        if (it == j_.end()) {
            return nullptr;
        }
        seen_.insert(key);
        return &*it;
    }

    std::string name() const { return prefix_.empty() ? "config" : prefix_; }
    std::string field(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

const char* kind_name(ForcingKind k) {
    switch (k) {
    case ForcingKind::Cosine: return "cosine";
    case ForcingKind::Sine: return "sine";
    case ForcingKind::Constant: return "constant";
    }
    return "constant";
}

void read_forcing(Reader& r, const std::string& where, ForcingSpec& f) {
    std::string kind = kind_name(f.kind);
    r.get("kind", kind);
    if (kind == "cosine") {
        f.kind = ForcingKind::Cosine;
    } else if (kind == "sine") {
        f.kind = ForcingKind::Sine;
    } else if (kind == "constant") {
        f.kind = ForcingKind::Constant;
    } else {
        throw ConfigError(fmt::format("{}.kind must be cosine, sine or constant (got \"{}\")", where, kind));
    }
    r.get("amplitude", f.amplitude);
    r.get("frequency", f.frequency);
    r.get("width", f.width);
    r.finish();
}

ordered_json forcing_json(const ForcingSpec& f) {
    return {{"kind", kind_name(f.kind)}, {"amplitude", f.amplitude}, {"frequency", f.frequency}, {"width", f.width}};
}

ordered_json optional_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

bool positive_increasing(const std::vector<double>& xs) {
    if (xs.empty() || !(xs.front() > 0.0)) {
        return false;
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (!(xs[i] > xs[i - 1])) {
            return false;
        }
    }
    return true;
}

bool contains_value(const std::vector<double>& xs, double x) { return std::find(xs.begin(), xs.end(), x) != xs.end(); }

bool enabled(const std::vector<std::string>& names, const char* name) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

double max_of(const std::vector<double>& xs) { return xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end()); }

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    RunConfig cfg;
    Reader top(j, "");
    top.get("schema", cfg.schema);
    if (cfg.schema != kConfigSchema) {
        throw ConfigError(fmt::format("schema must be {} (got {})", kConfigSchema, cfg.schema));
    }
    if (auto r = top.child("problem")) {
        auto& p = cfg.problem;
        r->get("lambda", p.lambda);
        r->get("alpha", p.alpha);
        r->get("beta", p.beta);
        r->get("sigma", p.sigma);
        r->get("epsilon", p.epsilon);
        r->get("max_epsilon", p.max_epsilon);
        if (auto n = r->child("nonlinearity")) {
            n->get("kind", p.nonlinearity.kind);
            n->get("a0", p.nonlinearity.a0);
            n->get("s_cap", p.nonlinearity.s_cap);
            n->finish();
        }
        if (auto g = r->child("g")) {
            read_forcing(*g, "problem.g", p.g);
        }
        if (auto h = r->child("h")) {
            read_forcing(*h, "problem.h", p.h);
        }
        r->finish();
    }
    if (auto r = top.child("ladder")) {
        r->get("delta0", cfg.ladder.delta0);
        r->get("delta01", cfg.ladder.delta01);
        r->get("delta1", cfg.ladder.delta1);
        r->get("b0", cfg.ladder.b0);
        r->finish();
    }
    if (auto r = top.child("grid")) {
        r->get("dim", cfg.grid.dim);
        r->get("l", cfg.grid.l);
        r->get("n", cfg.grid.n);
        r->finish();
    }
    if (auto r = top.child("scheme")) {
        r->get("dt", cfg.scheme.dt);
        r->get("record_every", cfg.scheme.record_every);
        r->finish();
    }
    if (auto r = top.child("path")) {
        r->get("t_min", cfg.path.t_min);
        r->get("t_max", cfg.path.t_max);
        r->get("dt_path", cfg.path.dt_path);
        r->finish();
    }
    if (auto r = top.child("experiment")) {
        auto& e = cfg.experiment;
        r->get("name", e.name);
        r->get("seed", e.seed);
        r->get("tau", e.tau);
        r->get("workers", e.workers);
        r->get("eps_grid", e.eps_grid);
        r->get("t_back_grid", e.t_back_grid);
        if (auto b = r->child("bundle")) {
            b->get("radii", e.bundle.radii);
            b->get("count", e.bundle.count);
            b->get("growth_rate", e.bundle.growth_rate);
            b->finish();
        }
        if (auto s = r->child("simulate")) {
            s->get("t_span", e.simulate.t_span);
            s->get("x0_radius", e.simulate.x0_radius);
            s->get("shrink", e.simulate.shrink);
            s->finish();
        }
        if (auto s = r->child("absorb")) {
            s->get("quad_horizon", e.absorb.quad_horizon);
            s->get("c_margin", e.absorb.c_margin);
            s->get("t_abs_limit", e.absorb.t_abs_limit);
            s->get("plateau_depth", e.absorb.plateau_depth);
            s->get("plateau_tol", e.absorb.plateau_tol);
            s->finish();
        }
        if (auto s = r->child("lp")) {
            s->get("from_t_back", e.lp.from_t_back);
            s->finish();
        }
        if (auto s = r->child("truncate")) {
            s->get("m_grid", e.truncate.m_grid);
            s->get("eta", e.truncate.eta);
            s->get("from_t_back", e.truncate.from_t_back);
            s->get("min_doubling_gain", e.truncate.min_doubling_gain);
            s->finish();
        }
        if (auto s = r->child("cauchy")) {
            s->get("t_back", e.cauchy.t_back);
            s->get("eps", e.cauchy.eps);
            s->get("level", e.cauchy.level);
            s->get("tol", e.cauchy.tol);
            s->get("partition_tol", e.cauchy.partition_tol);
            s->finish();
        }
        if (auto s = r->child("continuity")) {
            s->get("eps0", e.continuity.eps0);
            s->get("gaps", e.continuity.gaps);
            s->get("t_span", e.continuity.t_span);
            s->get("x0_radius", e.continuity.x0_radius);
            s->get("ratio_lo", e.continuity.ratio_lo);
            s->get("ratio_hi", e.continuity.ratio_hi);
            s->get("zero_tol", e.continuity.zero_tol);
            s->finish();
        }
        if (auto s = r->child("equilibrium")) {
            s->get("t_back", e.equilibrium.t_back);
            s->get("tol", e.equilibrium.tol);
            s->get("burn_in", e.equilibrium.burn_in);
            s->get("rate_fraction", e.equilibrium.rate_fraction);
            s->finish();
        }
        if (auto s = r->child("invariance")) {
            s->get("t", e.invariance.t);
            s->get("factor", e.invariance.factor);
            s->finish();
        }
        r->finish();
    }
    top.get("output_dir", cfg.output_dir);
    top.finish();
    return cfg;
}

RunConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError(fmt::format("cannot read config file {}", file));
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    const auto& e = cfg.experiment;
    ordered_json j;
    j["schema"] = cfg.schema;
    j["problem"] = {{"lambda", p.lambda},
                    {"alpha", p.alpha},
                    {"beta", p.beta},
                    {"sigma", p.sigma},
                    {"epsilon", p.epsilon},
                    {"max_epsilon", p.max_epsilon},
                    {"nonlinearity", {{"kind", p.nonlinearity.kind}, {"a0", p.nonlinearity.a0}, {"s_cap", p.nonlinearity.s_cap}}},
                    {"g", forcing_json(p.g)},
                    {"h", forcing_json(p.h)}};
    j["ladder"] = {{"delta0", optional_json(cfg.ladder.delta0)},
                   {"delta01", optional_json(cfg.ladder.delta01)},
                   {"delta1", optional_json(cfg.ladder.delta1)},
                   {"b0", optional_json(cfg.ladder.b0)}};
    j["grid"] = {{"dim", cfg.grid.dim}, {"l", cfg.grid.l}, {"n", cfg.grid.n}};
    j["scheme"] = {{"dt", cfg.scheme.dt}, {"record_every", cfg.scheme.record_every}};
    j["path"] = {{"t_min", cfg.path.t_min}, {"t_max", cfg.path.t_max}, {"dt_path", cfg.path.dt_path}};
    ordered_json x;
    x["name"] = e.name;
    x["seed"] = e.seed;
    x["tau"] = e.tau;
    x["workers"] = e.workers;
    x["eps_grid"] = e.eps_grid;
    x["t_back_grid"] = e.t_back_grid;
    x["bundle"] = {{"radii", e.bundle.radii}, {"count", e.bundle.count}, {"growth_rate", e.bundle.growth_rate}};
    x["simulate"] = {{"t_span", e.simulate.t_span}, {"x0_radius", e.simulate.x0_radius}, {"shrink", e.simulate.shrink}};
    x["absorb"] = {{"quad_horizon", e.absorb.quad_horizon},
                   {"c_margin", e.absorb.c_margin},
                   {"t_abs_limit", e.absorb.t_abs_limit},
                   {"plateau_depth", e.absorb.plateau_depth},
                   {"plateau_tol", e.absorb.plateau_tol}};
    x["lp"] = {{"from_t_back", e.lp.from_t_back}};
    x["truncate"] = {{"m_grid", e.truncate.m_grid},
                     {"eta", e.truncate.eta},
                     {"from_t_back", e.truncate.from_t_back},
                     {"min_doubling_gain", e.truncate.min_doubling_gain}};
    x["cauchy"] = {{"t_back", e.cauchy.t_back},
                   {"eps", e.cauchy.eps},
                   {"level", e.cauchy.level},
                   {"tol", e.cauchy.tol},
                   {"partition_tol", e.cauchy.partition_tol}};
    x["continuity"] = {{"eps0", e.continuity.eps0},         {"gaps", e.continuity.gaps},
                       {"t_span", e.continuity.t_span},     {"x0_radius", e.continuity.x0_radius},
                       {"ratio_lo", e.continuity.ratio_lo}, {"ratio_hi", e.continuity.ratio_hi},
                       {"zero_tol", e.continuity.zero_tol}};
    x["equilibrium"] = {{"t_back", e.equilibrium.t_back},
                        {"tol", e.equilibrium.tol},
                        {"burn_in", e.equilibrium.burn_in},
                        {"rate_fraction", e.equilibrium.rate_fraction}};
    x["invariance"] = {{"t", e.invariance.t}, {"factor", e.invariance.factor}};
    j["experiment"] = x;
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

ProblemSpec build_problem(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    ProblemSpec spec;
    spec.lambda = p.lambda;
    spec.alpha = p.alpha;
    spec.beta = p.beta;
    spec.sigma = p.sigma;
    spec.epsilon = p.epsilon;
    spec.max_epsilon = p.max_epsilon;
    if (p.nonlinearity.kind == "cubic") {
        spec.nonlinearity = default_cubic(p.nonlinearity.a0, p.nonlinearity.s_cap);
    } else if (p.nonlinearity.kind == "zero") {
        spec.nonlinearity = zero_nonlinearity();
    } else {
        throw ConfigError(
            fmt::format("problem.nonlinearity.kind must be cubic or zero (got \"{}\")", p.nonlinearity.kind));
    }
    spec.g = p.g;
    spec.h = p.h;
    return spec;
}

ExponentLadder configured_ladder(const RunConfig& cfg) {
    ExponentLadder ladder = build_ladder(build_problem(cfg));
    ladder.delta0 = cfg.ladder.delta0.value_or(ladder.delta0);
    ladder.delta01 = cfg.ladder.delta01.value_or(ladder.delta01);
    ladder.delta1 = cfg.ladder.delta1.value_or(ladder.delta1);
    if (ladder.b && cfg.ladder.b0) {
        ladder.b0 = cfg.ladder.b0;
    }
    return ladder;
}

std::vector<std::string> enabled_experiments(const RunConfig& cfg) {
    if (cfg.experiment.name == "all") {
        return {"absorb", "lp", "truncate", "cauchy", "continuity", "equilibrium", "invariance"};
    }
    return {cfg.experiment.name};
}

std::pair<double, double> required_window(const RunConfig& cfg) {
    const auto& e = cfg.experiment;
    const auto names = enabled_experiments(cfg);
    // A run started at tau reads omega(s - tau) - omega(-tau); pullbacks of
    // depth t read omega on [-t, 0], forward runs of length t on [0, t].
    double lo = std::min(0.0, -e.tau);
    double hi = std::max(0.0, -e.tau);
    if (enabled(names, "simulate")) {
        hi = std::max(hi, e.simulate.t_span);
    }
    if (enabled(names, "absorb") || enabled(names, "lp") || enabled(names, "truncate")) {
        lo = std::min(lo, -max_of(e.t_back_grid));
    }
    if (enabled(names, "absorb")) {
        lo = std::min(lo, -e.absorb.quad_horizon);
    }
    if (enabled(names, "cauchy")) {
        lo = std::min(lo, -max_of(e.cauchy.t_back));
    }
    if (enabled(names, "continuity")) {
        hi = std::max(hi, e.continuity.t_span);
    }
    if (enabled(names, "equilibrium") || enabled(names, "invariance")) {
        lo = std::min(lo, -max_of(e.equilibrium.t_back));
    }
    if (enabled(names, "invariance")) {
        hi = std::max(hi, max_of(e.invariance.t));
    }
    return {lo, hi};
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> out;
    auto add = [&](std::vector<std::string> more) { out.insert(out.end(), more.begin(), more.end()); };
    const auto& e = cfg.experiment;

    if (cfg.schema != kConfigSchema) {
        out.push_back(fmt::format("schema must be {} (got {})", kConfigSchema, cfg.schema));
    }
    if (std::find(kExperiments.begin(), kExperiments.end(), e.name) == kExperiments.end()) {
        out.push_back(fmt::format("experiment.name \"{}\" is not one of {}", e.name, fmt::join(kExperiments, ", ")));
        return out;
    }
    if (cfg.output_dir.empty()) {
        out.push_back("output_dir must not be empty");
    }

    // problem
    std::optional<ProblemSpec> spec;
    try {
        spec = build_problem(cfg);
    } catch (const ConfigError& err) {
        out.push_back(err.what());
    }
    if (cfg.problem.nonlinearity.kind == "cubic" && !(cfg.problem.nonlinearity.a0 > 0.0)) {
        out.push_back(fmt::format("problem.nonlinearity.a0 must be positive (got {})", cfg.problem.nonlinearity.a0));
        spec.reset();
    }
    for (const auto* f : {&cfg.problem.g, &cfg.problem.h}) {
        const char* which = f == &cfg.problem.g ? "g" : "h";
        if (!(f->width > 0.0)) {
            out.push_back(fmt::format("problem.{}.width must be positive (got {})", which, f->width));
        }
        if (!std::isfinite(f->amplitude) || !std::isfinite(f->frequency)) {
            out.push_back(fmt::format("problem.{} amplitude and frequency must be finite", which));
        }
    }
    if (!spec) {
        return out;
    }
    add(spec->violations());

    // grid
    std::optional<Grid> grid;
    try {
        grid = Grid::make(cfg.grid.dim, cfg.grid.l, cfg.grid.n);
    } catch (const ConfigError& err) {
        out.push_back(err.what());
    }

    // growth conditions of f on the domain and the capped state range
    if (grid) {
        SampleBox box;
        box.dim = grid->dim;
        box.x_min = -grid->half_width;
        box.x_max = grid->half_width;
        box.s_min = -cfg.problem.nonlinearity.s_cap;
        box.s_max = cfg.problem.nonlinearity.s_cap;
        const ConditionReport report = check_growth_conditions(spec->nonlinearity, box, grid->dim == 1 ? 41 : 17);
        for (const auto& c : report.entries) {
            if (!c.informational && !c.passed()) {
                out.push_back(fmt::format("problem.nonlinearity violates the {} condition (margin {} at x = {}, s = {})",
                                          c.name, c.worst_margin, c.worst_x.x, c.worst_s));
            }
        }
    }

    // ladder
    ExponentLadder ladder;
    try {
        ladder = configured_ladder(cfg);
    } catch (const ConfigError& err) {
        out.push_back(err.what());
        return out;
    }
    add(ladder.violations());

    // scheme and path
    add(scheme_violations(cfg.scheme));
    const auto& pc = cfg.path;
    if (!(pc.dt_path > 0.0) || !std::isfinite(pc.dt_path)) {
        out.push_back(fmt::format("path.dt_path must be positive (got {})", pc.dt_path));
    } else {
        if (cfg.scheme.dt > pc.dt_path * (1.0 + 1e-12)) {
            out.push_back(
                fmt::format("scheme.dt ({}) must not exceed path.dt_path ({})", cfg.scheme.dt, pc.dt_path));
        }
        const double k = pc.t_min / pc.dt_path;
        if (std::abs(k - std::round(k)) > 1e-9) {
            out.push_back(fmt::format("path.t_min ({}) must be a whole multiple of path.dt_path ({})", pc.t_min,
                                      pc.dt_path));
        }
    }
    if (pc.t_min > 0.0 || pc.t_max < 0.0) {
        out.push_back(fmt::format("path window [{}, {}] must contain 0 (path.t_min <= 0 <= path.t_max)", pc.t_min,
                                  pc.t_max));
    }
    const auto [need_lo, need_hi] = required_window(cfg);
    if (pc.t_min > need_lo + 1e-9 || pc.t_max < need_hi - 1e-9) {
        out.push_back(fmt::format("path window [{}, {}] does not cover [{}, {}] needed by experiment \"{}\"",
                                  pc.t_min, pc.t_max, need_lo, need_hi, e.name));
    }

    // experiment parameters
    const auto names = enabled_experiments(cfg);
    const double a = cfg.problem.max_epsilon;
    auto check_eps = [&](const std::string& field, double eps) {
        if (!(eps > 0.0) || !(eps <= a)) {
            out.push_back(fmt::format("{} = {} must lie in (0, max_epsilon] = (0, {}]", field, eps, a));
        }
    };
    if (e.workers > 1024) {
        out.push_back(fmt::format("experiment.workers must be at most 1024 (got {})", e.workers));
    }
    const bool matrix = enabled(names, "absorb") || enabled(names, "lp") || enabled(names, "truncate");
    const bool pullback = matrix || enabled(names, "cauchy") || enabled(names, "equilibrium") ||
                          enabled(names, "invariance");
    if (matrix) {
        if (e.eps_grid.empty()) {
            out.push_back("experiment.eps_grid must not be empty");
        }
        for (double eps : e.eps_grid) {
            check_eps("experiment.eps_grid entry", eps);
        }
        if (!positive_increasing(e.t_back_grid)) {
            out.push_back("experiment.t_back_grid must be positive and increasing");
        }
    }
    if (pullback) {
        if (e.bundle.radii.empty()) {
            out.push_back("experiment.bundle.radii must not be empty");
        }
        for (double r : e.bundle.radii) {
            add(InitialBundle{r, e.bundle.count, e.bundle.growth_rate}.violations(ladder));
        }
    }
    if (enabled(names, "simulate")) {
        const auto& s = e.simulate;
        if (!(s.t_span > 0.0)) {
            out.push_back(fmt::format("experiment.simulate.t_span must be positive (got {})", s.t_span));
        }
        if (!(s.x0_radius >= 0.0)) {
            out.push_back(fmt::format("experiment.simulate.x0_radius must be nonnegative (got {})", s.x0_radius));
        }
        if (!(s.shrink >= 1.0)) {
            out.push_back(fmt::format("experiment.simulate.shrink must be >= 1 (got {})", s.shrink));
        }
    }
    if (enabled(names, "absorb")) {
        const auto& s = e.absorb;
        if (!(s.quad_horizon > 0.0)) {
            out.push_back(fmt::format("experiment.absorb.quad_horizon must be positive (got {})", s.quad_horizon));
        }
        if (!(s.c_margin >= 1.0)) {
            out.push_back(fmt::format("experiment.absorb.c_margin must be >= 1 (got {})", s.c_margin));
        }
        if (!contains_value(e.t_back_grid, s.plateau_depth)) {
            out.push_back(fmt::format("experiment.absorb.plateau_depth ({}) must be an entry of experiment.t_back_grid",
                                      s.plateau_depth));
        }
    }
    if (enabled(names, "lp") && !(e.lp.from_t_back <= max_of(e.t_back_grid))) {
        out.push_back(fmt::format("experiment.lp.from_t_back ({}) exceeds the deepest t_back", e.lp.from_t_back));
    }
    if (enabled(names, "truncate")) {
        const auto& s = e.truncate;
        if (!positive_increasing(s.m_grid)) {
            out.push_back("experiment.truncate.m_grid must be positive and increasing");
        }
        if (!(s.eta > 0.0)) {
            out.push_back(fmt::format("experiment.truncate.eta must be positive (got {})", s.eta));
        }
        if (!(s.from_t_back <= max_of(e.t_back_grid))) {
            out.push_back(fmt::format("experiment.truncate.from_t_back ({}) exceeds the deepest t_back", s.from_t_back));
        }
    }
    if (enabled(names, "cauchy")) {
        const auto& s = e.cauchy;
        if (s.t_back.size() < 2 || !positive_increasing(s.t_back)) {
            out.push_back("experiment.cauchy.t_back must hold at least two positive increasing depths");
        }
        if (s.eps.size() != s.t_back.size()) {
            out.push_back(fmt::format("experiment.cauchy.eps must have one entry per depth ({} != {})", s.eps.size(),
                                      s.t_back.size()));
        }
        for (double eps : s.eps) {
            check_eps("experiment.cauchy.eps entry", eps);
        }
    }
    if (enabled(names, "continuity")) {
        const auto& s = e.continuity;
        check_eps("experiment.continuity.eps0", s.eps0);
        if (!(s.t_span > 0.0)) {
            out.push_back(fmt::format("experiment.continuity.t_span must be positive (got {})", s.t_span));
        }
        if (s.gaps.empty()) {
            out.push_back("experiment.continuity.gaps must not be empty");
        }
        for (std::size_t i = 0; i < s.gaps.size(); ++i) {
            if (!(s.gaps[i] > 0.0) || (i > 0 && !(s.gaps[i] < s.gaps[i - 1]))) {
                out.push_back("experiment.continuity.gaps must be positive and decreasing");
                break;
            }
        }
        for (double gap : s.gaps) {
            check_eps("experiment.continuity eps0 + gap", s.eps0 + gap);
        }
        if (!(s.x0_radius >= 0.0)) {
            out.push_back(fmt::format("experiment.continuity.x0_radius must be nonnegative (got {})", s.x0_radius));
        }
        if (!(s.ratio_lo <= s.ratio_hi)) {
            out.push_back("experiment.continuity.ratio_lo must not exceed ratio_hi");
        }
    }
    if (enabled(names, "equilibrium") || enabled(names, "invariance")) {
        const auto& s = e.equilibrium;
        const double d = spec->delta();
        const double alpha3 = spec->nonlinearity.alpha3;
        if (!(d > alpha3) || !(spec->beta >= 1.0)) {
            out.push_back(fmt::format(
                "problem: experiment \"{}\" needs the equilibrium condition delta = min(lambda, sigma) > alpha3 and "
                "beta >= 1 (delta = {}, alpha3 = {}, beta = {})",
                e.name, d, alpha3, spec->beta));
        }
        if (s.t_back.size() < 2 || !positive_increasing(s.t_back)) {
            out.push_back("experiment.equilibrium.t_back must hold at least two positive increasing depths");
        }
        if (!(s.tol > 0.0)) {
            out.push_back(fmt::format("experiment.equilibrium.tol must be positive (got {})", s.tol));
        }
    }
    if (enabled(names, "invariance")) {
        for (double t : e.invariance.t) {
            if (!(t >= 0.0)) {
                out.push_back(fmt::format("experiment.invariance.t entries must be nonnegative (got {})", t));
            }
        }
    }
    return out;
}

}  // namespace fhn
