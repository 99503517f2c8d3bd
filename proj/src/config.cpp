#include "mcbf/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "mcbf/errors.hpp"

namespace mcbf {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& get(const std::string& k) {
        seen_.insert(k);
        if (!j_.contains(k)) throw ConfigError(key(k), "missing required key");
        return j_.at(k);
    }

    double number(const std::string& k, double fallback) { return has(k) ? number(k) : (seen_.insert(k), fallback); }

    double number(const std::string& k) {
        const json& v = get(k);
        if (!v.is_number()) throw ConfigError(key(k), "expected a number");
        return v.get<double>();
    }

    int integer(const std::string& k, int fallback) {
        seen_.insert(k);
        if (!has(k)) return fallback;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
        return v.get<int>();
    }

    std::string string(const std::string& k) {
        const json& v = get(k);
        if (!v.is_string()) throw ConfigError(key(k), "expected a string");
        return v.get<std::string>();
    }

    Eigen::Vector2d vec2(const std::string& k) {
        const json& v = get(k);
        return to_vec2(v, key(k));
    }

    static Eigen::Vector2d to_vec2(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ConfigError(where, "expected [x, y]");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    Eigen::VectorXd points(const std::string& k) {
        const json& v = get(k);
        if (!v.is_array()) throw ConfigError(key(k), "expected a list of [x, y] points");
        Eigen::VectorXd out(static_cast<Eigen::Index>(2 * v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.segment<2>(static_cast<Eigen::Index>(2 * i)) = to_vec2(v[i], key(k) + "[" + std::to_string(i) + "]");
        }
        return out;
    }

    Reader child(const std::string& k) {
        seen_.insert(k);
        static const json empty = json::object();
        return Reader(has(k) ? j_.at(k) : empty, key(k));
    }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (item.key() == "_refs" || seen_.count(item.key())) continue;
            throw ConfigError(key(item.key()), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
}

// ConnectivityParams::validate names bare fields; prefix them with the section.
void validate_params(const ConnectivityParams& p) {
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("params." + e.key(), e.what() + e.key().size() + 2);
    }
}

ClassKe parse_class_k(Reader r) {
    const std::string kind = r.string("kind");
    ClassKe out = ClassKe::linear(1.0);
    try {
        switch (ClassKe::parse_kind(kind)) {
            case ClassKe::Kind::Linear:
                out = ClassKe::linear(r.number("c"));
                break;
            case ClassKe::Kind::Cubic:
                out = ClassKe::cubic(r.number("c"));
                break;
            case ClassKe::Kind::ScaledTanh:
                out = ClassKe::scaled_tanh(r.number("c"), r.number("s"));
                break;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.key("kind"), e.what());
    }
    r.finish();
    return out;
}

ObstacleSpec parse_obstacle(Reader r, ScenarioKind kind) {
    ObstacleSpec spec;
    if (kind == ScenarioKind::ObstacleDisk) {
        spec = Disk2d{r.vec2("center"), r.number("radius")};
    } else if (r.has("faces")) {
        Box2d box;
        const json& faces = r.get("faces");
        if (!faces.is_array()) throw ConfigError(r.key("faces"), "expected a list of faces");
        for (std::size_t i = 0; i < faces.size(); ++i) {
            Reader f(faces[i], r.key("faces") + "[" + std::to_string(i) + "]");
            box.normals.push_back(f.vec2("normal"));
            box.offsets.push_back(f.number("offset"));
            f.finish();
        }
        spec = box;
    } else {
        const Eigen::Vector2d lo = r.vec2("lo");
        const Eigen::Vector2d hi = r.vec2("hi");
        if (!(lo.array() < hi.array()).all()) throw ConfigError(r.key("hi"), "must exceed lo in both coordinates");
        spec = Box2d::axis_aligned(lo, hi);
    }
    r.finish();
    validate_obstacle(spec);
    return spec;
}

json vec2_json(const Eigen::Vector2d& v) { return json::array({v(0), v(1)}); }

json points_json(const Eigen::VectorXd& x) {
    json out = json::array();
    for (Eigen::Index i = 0; i + 1 < x.size(); i += 2) out.push_back(json::array({x(i), x(i + 1)}));
    return out;
}

json class_k_json(const ClassKe& a) {
    json out{{"kind", std::string(a.kind_name())}, {"c", a.gain()}};
    if (a.kind() == ClassKe::Kind::ScaledTanh) out["s"] = a.scale();
    return out;
}

}  // namespace

std::string_view to_string(ScenarioKind k) noexcept {
    switch (k) {
        case ScenarioKind::Connectivity:
            return "connectivity";
        case ScenarioKind::ObstacleDisk:
            return "obstacle_disk";
        case ScenarioKind::ObstacleBox:
            return "obstacle_box";
        case ScenarioKind::Custom:
            return "custom";
    }
    return "connectivity";
}

std::string_view to_string(FilterKind k) noexcept {
    switch (k) {
        case FilterKind::Exponential:
            return "exponential";
        case FilterKind::General:
            return "general";
        case FilterKind::Indefinite:
            return "indefinite";
        case FilterKind::SmallestEig:
            return "smallest_eig";
        case FilterKind::BaselineEigen:
            return "baseline_eigen";
        case FilterKind::None:
            return "none";
    }
    return "none";
}

ScenarioKind parse_scenario(std::string_view s) {
    for (auto k : {ScenarioKind::Connectivity, ScenarioKind::ObstacleDisk, ScenarioKind::ObstacleBox,
                   ScenarioKind::Custom}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("scenario", "unknown scenario '" + std::string(s) + "'");
}

FilterKind parse_filter(std::string_view s) {
    for (auto k : {FilterKind::Exponential, FilterKind::General, FilterKind::Indefinite, FilterKind::SmallestEig,
                   FilterKind::BaselineEigen, FilterKind::None}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("filter", "unknown filter '" + std::string(s) + "'");
}

int RunConfig::agents() const {
    if (is_obstacle()) return 1;
    if (scenario == ScenarioKind::Custom) return static_cast<int>(initial_positions.size() / 2);
    return 5;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    Reader root(j, "");
    c.scenario = parse_scenario(root.string("scenario"));
    if (j.contains("_refs")) c.refs = j.at("_refs");

    Reader params = root.child("params");
    const bool has_class_k = root.has("classK");
    if (c.is_obstacle()) {
        c.obstacle.obstacle = parse_obstacle(params.child("obstacle"), c.scenario);
        c.obstacle.start = params.vec2("start");
        c.obstacle.target = params.vec2("target");
        c.obstacle.k_gain = params.number("k_gain", 1.0);
        positive(c.obstacle.k_gain, params.key("k_gain"));
        c.pinned_agents.clear();
        c.filter = FilterKind::Indefinite;
    } else {
        auto& p = c.params;
        p.R = params.number("R", p.R);
        p.eps = params.number("eps", p.eps);
        p.c_alpha = params.number("c_alpha", p.c_alpha);
        p.c_collision = params.number("c_collision", p.c_collision);
        p.r_agent = params.number("r_agent", p.r_agent);
        p.k_gain = params.number("k_gain", p.k_gain);
        p.priority_agent = params.integer("priority_agent", p.priority_agent);
        validate_params(p);
        if (c.scenario == ScenarioKind::Custom) {
            c.initial_positions = params.points("initial_positions");
            c.targets = params.points("targets");
            if (c.initial_positions.size() < 4) {
                throw ConfigError(params.key("initial_positions"), "needs at least two agents");
            }
            if (c.targets.size() != c.initial_positions.size()) {
                throw ConfigError(params.key("targets"), "must list one target per agent");
            }
        }
        const int agents = c.agents();
        if (p.priority_agent >= agents) throw ConfigError(params.key("priority_agent"), "agent index out of range");
        c.pinned_agents = {p.priority_agent};
        if (params.has("pinned_agents")) {
            const json& pins = params.get("pinned_agents");
            if (!pins.is_array()) throw ConfigError(params.key("pinned_agents"), "expected a list of agent indices");
            c.pinned_agents.clear();
            std::set<int> seen;
            for (const auto& v : pins) {
                if (!v.is_number_integer()) throw ConfigError(params.key("pinned_agents"), "expected integers");
                const int a = v.get<int>();
                if (a < 0 || a >= agents) throw ConfigError(params.key("pinned_agents"), "agent index out of range");
                if (!seen.insert(a).second) {
                    throw ConfigError(params.key("pinned_agents"), "duplicate pin index " + std::to_string(a));
                }
                c.pinned_agents.push_back(a);
            }
        }
        c.alpha = ClassKe::linear(p.c_alpha);
    }
    c.c_perp = params.number("c_perp", c.c_perp);
    if (!(c.c_perp >= 0.0)) throw ConfigError(params.key("c_perp"), "must be >= 0");
    params.finish();

    if (root.has("filter")) c.filter = parse_filter(root.string("filter"));
    const bool filter_ok = c.is_obstacle()
                               ? (c.filter == FilterKind::Indefinite || c.filter == FilterKind::None)
                               : (c.filter != FilterKind::Indefinite);
    if (!filter_ok) {
        throw ConfigError("filter", "filter '" + std::string(to_string(c.filter)) + "' does not apply to scenario '" +
                                        std::string(to_string(c.scenario)) + "'");
    }
    if (has_class_k) c.alpha = parse_class_k(root.child("classK"));

    Reader sim = root.child("sim");
    c.sim.dt = sim.number("dt", c.sim.dt);
    c.sim.duration = sim.number("duration", c.sim.duration);
    const int seed = sim.integer("seed", 0);
    if (seed < 0) throw ConfigError(sim.key("seed"), "must be >= 0");
    c.sim.seed = static_cast<std::uint64_t>(seed);
    positive(c.sim.dt, sim.key("dt"));
    if (!(c.sim.duration >= c.sim.dt)) throw ConfigError(sim.key("duration"), "must be >= dt");
    sim.finish();

    Reader solver = root.child("solver");
    c.solver.feas_tol = solver.number("feas_tol", c.solver.feas_tol);
    c.solver.rel_obj_tol = solver.number("rel_obj_tol", c.solver.rel_obj_tol);
    c.solver.max_iter = solver.integer("max_iter", c.solver.max_iter);
    positive(c.solver.feas_tol, solver.key("feas_tol"));
    positive(c.solver.rel_obj_tol, solver.key("rel_obj_tol"));
    if (c.solver.max_iter <= 0) throw ConfigError(solver.key("max_iter"), "must be > 0");
    solver.finish();

    if (root.has("output")) c.output = root.string("output");
    root.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    if (!c.refs.is_null()) j["_refs"] = c.refs;
    j["scenario"] = std::string(to_string(c.scenario));
    json params;
    if (c.is_obstacle()) {
        json obs;
        if (const auto* disk = std::get_if<Disk2d>(&c.obstacle.obstacle)) {
            obs = {{"center", vec2_json(disk->center)}, {"radius", disk->radius}};
        } else {
            const auto& box = std::get<Box2d>(c.obstacle.obstacle);
            obs["faces"] = json::array();
            for (std::size_t k = 0; k < box.normals.size(); ++k) {
                obs["faces"].push_back({{"normal", vec2_json(box.normals[k])}, {"offset", box.offsets[k]}});
            }
        }
        params = {{"obstacle", obs},
                  {"start", vec2_json(c.obstacle.start)},
                  {"target", vec2_json(c.obstacle.target)},
                  {"k_gain", c.obstacle.k_gain}};
    } else {
        const auto& p = c.params;
        params = {{"R", p.R},
                  {"eps", p.eps},
                  {"c_alpha", p.c_alpha},
                  {"c_collision", p.c_collision},
                  {"r_agent", p.r_agent},
                  {"k_gain", p.k_gain},
                  {"priority_agent", p.priority_agent},
                  {"pinned_agents", c.pinned_agents}};
        if (c.scenario == ScenarioKind::Custom) {
            params["initial_positions"] = points_json(c.initial_positions);
            params["targets"] = points_json(c.targets);
        }
    }
    params["c_perp"] = c.c_perp;
    j["params"] = params;
    j["filter"] = std::string(to_string(c.filter));
    j["classK"] = class_k_json(c.alpha);
    j["sim"] = {{"dt", c.sim.dt}, {"duration", c.sim.duration}, {"seed", c.sim.seed}};
    j["solver"] = {{"feas_tol", c.solver.feas_tol}, {"rel_obj_tol", c.solver.rel_obj_tol},
                   {"max_iter", c.solver.max_iter}};
    j["output"] = c.output;
    return j;
}

}  // namespace mcbf
