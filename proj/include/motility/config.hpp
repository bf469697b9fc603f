/**
 * @file config.hpp
 * @brief Run configuration: JSON ingestion with strict key checking, range
 *        validation and a faithful echo for re-runs.
 */
#pragma once

#include "motility/errors.hpp"
#include "motility/initial.hpp"
#include "motility/model.hpp"
#include "motility/steady.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace motility {

using json = nlohmann::json;

inline constexpr const char* kCodeVersion = "1.0.0";

enum class SolverKind { Lattice, Continuum, Stefan, Steady, Stability };

inline const char* to_string(SolverKind s) {
    switch (s) {
        case SolverKind::Lattice: return "lattice";
        case SolverKind::Continuum: return "continuum";
        case SolverKind::Stefan: return "stefan";
        case SolverKind::Steady: return "steady";
        case SolverKind::Stability: return "stability";
    }
    return "?";
}

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::Full: return "full";
        case Branch::Low: return "low";
        case Branch::High: return "high";
    }
    return "?";
}

/// Continuum state at first contact with rho_flat, embedded by `handoff`.
struct HitStart {
    double t_c = 0.0;
    double x_c = 0.0;
    std::size_t node = 0;
    std::vector<double> rho;
};

struct StefanSpec {
    std::size_t nodes_per_phase = 100;
    std::size_t global_nodes = 0;  ///< 0: same as grid.n
    double spike_width = 0.0;
    bool compare_direct = false;   ///< also run the direct scheme and overlay
    std::optional<HitStart> start;
};

struct SteadySpec {
    std::string kind = "smooth";  ///< smooth | plateau
    std::optional<double> C;
    std::optional<double> rho_c;  ///< alternative to C: C = rho_c - G(rho_c)
    std::size_t half_periods = 1;
    Branch branch = Branch::Full;
    double half_width = 1.0;      ///< plateau kind only
    double evolve_time = 0.0;     ///< optional dynamic check with the continuum scheme
};

struct RunConfig {
    std::string name = "run";
    SolverKind solver = SolverKind::Continuum;
    ModelParams params;
    std::size_t n = 400;
    InitialCondition initial = ic::Bell{4.0, 1.0, 0.15, 0.1};
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    std::string output = "out";
    bool deterministic = true;
    bool stop_on_hit = false;
    StefanSpec stefan;
    SteadySpec steady;
    std::optional<double> rho_bar;  ///< stability solver; defaults to the mean of the initial datum
};

namespace detail {

/// Object reader that records consumed keys so leftovers can be rejected.
class KeyReader {
public:
    KeyReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(where("") + ": expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    [[nodiscard]] const json& at(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ValidationError(where(key) + ": missing required key");
        return j_.at(key);
    }
    [[nodiscard]] std::string where(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    double number(const std::string& key, double def) { return has(key) ? number(key) : def; }
    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) throw ValidationError(where(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ValidationError(where(key) + ": must be finite");
        return d;
    }
    std::size_t count(const std::string& key, std::size_t def) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ValidationError(where(key) + ": expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }
    bool flag(const std::string& key, bool def) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_boolean()) throw ValidationError(where(key) + ": expected true or false");
        return v.get<bool>();
    }
    std::string text(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const json& v = at(key);
        if (!v.is_string()) throw ValidationError(where(key) + ": expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& key) {
        const json& v = at(key);
        if (!v.is_array()) throw ValidationError(where(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ValidationError(where(key) + ": expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.count(item.key())) throw ValidationError(where(item.key()) + ": unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ValidationError(key + ": " + msg);
}

inline ModelParams parse_params(const json& j) {
    KeyReader r(j, "params");
    ModelParams p;
    p.alpha = r.number("alpha", p.alpha);
    p.chi0 = r.number("chi0", p.chi0);
    p.L = r.number("L", p.L);
    p.jump_low = r.number("jump_low", p.jump_low);
    p.jump_high = r.number("jump_high", p.jump_high);
    r.finish();
    require(p.alpha >= 0.0 && p.alpha <= 1.0, "params.alpha", "must lie in [0, 1], got " + json(p.alpha).dump());
    require(p.chi0 >= 0.0, "params.chi0", "must be >= 0");
    require(p.L > 0.0, "params.L", "must be > 0");
    require(p.jump_low > 0.0 && p.jump_low < 1.0, "params.jump_low", "must lie in (0, 1)");
    require(p.jump_high > 0.0 && p.jump_high < 1.0, "params.jump_high", "must lie in (0, 1)");
    require(p.jump_low < p.jump_high, "params.jump_low", "must be below params.jump_high");
    if (const auto I = unstable_interval(p)) {
        require(p.jump_low < I->lo, "params.jump_low", "must lie below the unstable interval");
        require(p.jump_high > I->hi, "params.jump_high", "must lie above the unstable interval");
    }
    return p;
}

inline InitialCondition parse_initial(const json& j) {
    KeyReader r(j, "initial");
    const std::string kind = r.text("kind", "");
    InitialCondition out;
    if (kind == "uniform") {
        out = ic::Uniform{r.number("value")};
    } else if (kind == "bell") {
        ic::Bell b;
        b.center = r.number("center", b.center);
        b.width = r.number("width", b.width);
        b.amplitude = r.number("amplitude", b.amplitude);
        b.baseline = r.number("baseline", b.baseline);
        require(b.width > 0.0, "initial.width", "must be > 0");
        out = b;
    } else if (kind == "cosine") {
        ic::Cosine c;
        c.mean = r.number("mean", c.mean);
        c.amplitude = r.number("amplitude", c.amplitude);
        c.k = r.number("k", c.k);
        out = c;
    } else if (kind == "plateaus" || kind == "spike_on_flat") {
        ic::Plateaus pl;
        pl.baseline = r.number("baseline", pl.baseline);
        const json& arr = r.at("plateaus");
        require(arr.is_array() && !arr.empty(), "initial.plateaus", "expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            KeyReader q(arr[i], "initial.plateaus[" + std::to_string(i) + "]");
            ic::Plateau item{q.number("center"), q.number("width"), q.number("height")};
            q.finish();
            require(item.width > 0.0, q.where("width"), "must be > 0");
            pl.plateaus.push_back(item);
        }
        require(kind != "spike_on_flat" || pl.plateaus.size() == 1, "initial.plateaus",
                "spike_on_flat takes exactly one plateau");
        out = pl;
    } else if (kind == "samples") {
        out = ic::Samples{r.numbers("values")};
    } else {
        throw ValidationError("initial.kind: expected uniform | bell | cosine | plateaus | spike_on_flat | samples");
    }
    r.finish();
    return out;
}

inline HitStart parse_start(const json& j) {
    KeyReader r(j, "stefan.start");
    HitStart h;
    h.t_c = r.number("t_c");
    h.x_c = r.number("x_c");
    h.node = r.count("node", 0);
    h.rho = r.numbers("rho");
    r.finish();
    require(h.rho.size() >= 3, "stefan.start.rho", "needs at least 3 samples");
    require(h.node < h.rho.size(), "stefan.start.node", "outside the sample range");
    return h;
}

inline Branch parse_branch(const std::string& s) {
    if (s == "full") return Branch::Full;
    if (s == "low") return Branch::Low;
    if (s == "high") return Branch::High;
    throw ValidationError("steady.branch: expected full | low | high");
}

}  // namespace detail

/// Parse and validate; every error message starts with the offending key.
inline RunConfig parse_config(const json& j) {
    detail::KeyReader r(j, "");
    RunConfig c;
    c.name = r.text("name", c.name);
    const std::string solver = r.text("solver", "continuum");
    if (solver == "lattice") c.solver = SolverKind::Lattice;
    else if (solver == "continuum") c.solver = SolverKind::Continuum;
    else if (solver == "stefan") c.solver = SolverKind::Stefan;
    else if (solver == "steady") c.solver = SolverKind::Steady;
    else if (solver == "stability") c.solver = SolverKind::Stability;
    else throw ValidationError("solver: expected lattice | continuum | stefan | steady | stability");

    c.params = r.has("params") ? detail::parse_params(r.at("params")) : detail::parse_params(json::object());
    if (r.has("grid")) {
        detail::KeyReader g(r.at("grid"), "grid");
        c.n = g.count("n", c.n);
        c.stefan.nodes_per_phase = g.count("nodes_per_phase", c.stefan.nodes_per_phase);
        g.finish();
    }
    detail::require(c.n >= 3, "grid.n", "must be >= 3");
    detail::require(c.stefan.nodes_per_phase >= 5, "grid.nodes_per_phase", "must be >= 5");
    if (r.has("initial")) c.initial = detail::parse_initial(r.at("initial"));
    c.t_end = r.number("t_end", c.t_end);
    detail::require(c.t_end >= 0.0, "t_end", "must be >= 0");
    if (r.has("snapshot_times")) c.snapshot_times = r.numbers("snapshot_times");
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
        detail::require(c.snapshot_times[i] >= 0.0 && c.snapshot_times[i] <= c.t_end, "snapshot_times",
                        "entries must lie in [0, t_end]");
        detail::require(i == 0 || c.snapshot_times[i] > c.snapshot_times[i - 1], "snapshot_times",
                        "must be strictly increasing");
    }
    c.output = r.text("output", c.output);
    c.deterministic = r.flag("deterministic", true);
    detail::require(c.deterministic, "deterministic", "runs are always deterministic");
    c.stop_on_hit = r.flag("stop_on_hit", false);

    if (r.has("stefan")) {
        detail::KeyReader s(r.at("stefan"), "stefan");
        c.stefan.global_nodes = s.count("global_nodes", 0);
        c.stefan.spike_width = s.number("spike_width", 0.0);
        c.stefan.compare_direct = s.flag("compare_direct", false);
        if (s.has("start")) c.stefan.start = detail::parse_start(s.at("start"));
        s.finish();
        detail::require(c.stefan.spike_width >= 0.0, "stefan.spike_width", "must be >= 0");
        detail::require(c.stefan.global_nodes == 0 || c.stefan.global_nodes >= 3, "stefan.global_nodes",
                        "must be 0 or >= 3");
    }
    if (c.solver == SolverKind::Stefan) {
        detail::require(unstable_interval(c.params).has_value(), "params.alpha",
                        "the stefan solver needs alpha > 3/4");
        if (c.stefan.start) {
            for (double t : c.snapshot_times) {
                detail::require(t >= c.stefan.start->t_c, "snapshot_times", "entries must not precede stefan.start.t_c");
            }
            detail::require(c.t_end >= c.stefan.start->t_c, "t_end", "must not precede stefan.start.t_c");
        }
    }

    if (r.has("steady")) {
        detail::KeyReader s(r.at("steady"), "steady");
        c.steady.kind = s.text("kind", c.steady.kind);
        if (s.has("C")) c.steady.C = s.number("C");
        if (s.has("rho_c")) c.steady.rho_c = s.number("rho_c");
        c.steady.half_periods = s.count("half_periods", 1);
        c.steady.branch = detail::parse_branch(s.text("branch", "full"));
        c.steady.half_width = s.number("half_width", c.steady.half_width);
        c.steady.evolve_time = s.number("evolve_time", 0.0);
        s.finish();
        detail::require(c.steady.kind == "smooth" || c.steady.kind == "plateau", "steady.kind",
                        "expected smooth | plateau");
        detail::require(!(c.steady.C && c.steady.rho_c), "steady.C", "give either C or rho_c, not both");
        detail::require(c.steady.half_periods >= 1, "steady.half_periods", "must be >= 1");
        detail::require(c.steady.evolve_time >= 0.0, "steady.evolve_time", "must be >= 0");
        if (c.steady.rho_c) {
            detail::require(*c.steady.rho_c > 0.0 && *c.steady.rho_c < 1.0, "steady.rho_c", "must lie in (0, 1)");
        }
    }
    if (c.solver == SolverKind::Steady && c.steady.kind == "smooth") {
        detail::require(c.steady.C || c.steady.rho_c, "steady.C", "smooth steady states need C or rho_c");
    }
    if (r.has("rho_bar")) {
        c.rho_bar = r.number("rho_bar");
        detail::require(*c.rho_bar > 0.0 && *c.rho_bar < 1.0, "rho_bar", "must lie in (0, 1)");
    }
    r.finish();

    // The initial datum must generate densities in [0, 1] on the run grid.
    if (c.solver == SolverKind::Lattice || c.solver == SolverKind::Continuum ||
        (c.solver == SolverKind::Stefan && !c.stefan.start)) {
        try {
            (void)make_initial(c.initial, Grid1D(c.n, c.params.L));
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("initial: ") + e.what());
        }
    }
    return c;
}

inline json initial_to_json(const InitialCondition& cond) {
    json j;
    j["kind"] = kind_name(cond);
    if (const auto* u = std::get_if<ic::Uniform>(&cond)) {
        j["value"] = u->value;
    } else if (const auto* b = std::get_if<ic::Bell>(&cond)) {
        j["center"] = b->center;
        j["width"] = b->width;
        j["amplitude"] = b->amplitude;
        j["baseline"] = b->baseline;
    } else if (const auto* c = std::get_if<ic::Cosine>(&cond)) {
        j["mean"] = c->mean;
        j["amplitude"] = c->amplitude;
        j["k"] = c->k;
    } else if (const auto* pl = std::get_if<ic::Plateaus>(&cond)) {
        j["baseline"] = pl->baseline;
        j["plateaus"] = json::array();
        for (const auto& q : pl->plateaus) {
            j["plateaus"].push_back({{"center", q.center}, {"width", q.width}, {"height", q.height}});
        }
    } else if (const auto* s = std::get_if<ic::Samples>(&cond)) {
        j["values"] = s->values;
    }
    return j;
}

/// Complete echo: parse_config(to_json(c)) reproduces c.
inline json to_json(const RunConfig& c) {
    json j;
    j["name"] = c.name;
    j["solver"] = to_string(c.solver);
    j["params"] = {{"alpha", c.params.alpha},
                   {"chi0", c.params.chi0},
                   {"L", c.params.L},
                   {"jump_low", c.params.jump_low},
                   {"jump_high", c.params.jump_high}};
    j["grid"] = {{"n", c.n}, {"nodes_per_phase", c.stefan.nodes_per_phase}};
    j["initial"] = initial_to_json(c.initial);
    j["t_end"] = c.t_end;
    j["snapshot_times"] = c.snapshot_times;
    j["output"] = c.output;
    j["deterministic"] = c.deterministic;
    j["stop_on_hit"] = c.stop_on_hit;
    json s = {{"global_nodes", c.stefan.global_nodes},
              {"spike_width", c.stefan.spike_width},
              {"compare_direct", c.stefan.compare_direct}};
    if (c.stefan.start) {
        s["start"] = {{"t_c", c.stefan.start->t_c},
                      {"x_c", c.stefan.start->x_c},
                      {"node", c.stefan.start->node},
                      {"rho", c.stefan.start->rho}};
    }
    j["stefan"] = s;
    json st = {{"kind", c.steady.kind},
               {"half_periods", c.steady.half_periods},
               {"branch", to_string(c.steady.branch)},
               {"half_width", c.steady.half_width},
               {"evolve_time", c.steady.evolve_time}};
    if (c.steady.C) st["C"] = *c.steady.C;
    if (c.steady.rho_c) st["rho_c"] = *c.steady.rho_c;
    j["steady"] = st;
    if (c.rho_bar) j["rho_bar"] = *c.rho_bar;
    return j;
}

inline RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace motility
