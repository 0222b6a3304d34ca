#include "yieldopt/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "yieldopt/external_model.hpp"
#include "yieldopt/io.hpp"
#include "yieldopt/pmsm_constants.hpp"
#include "yieldopt/synthetic_pmsm.hpp"

namespace yieldopt {

using nlohmann::json;

namespace {

struct MethodName {
    Method method;
    const char* name;
};
constexpr MethodName method_names[] = {
    {Method::mc, "mc"},   {Method::hybrid, "hybrid"},          {Method::eps, "eps"},
    {Method::ws, "ws"},   {Method::ws_multistart, "ws-multistart"}, {Method::nsga2, "nsga2"},
};

/// Typed access to one JSON object that remembers which keys were read.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        const auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        used_.insert(key);
        return &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(key_path(key) + ": expected a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(key_path(key) + ": must be finite");
        }
    }
    template <class U>
    void count(const std::string& key, U& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(key_path(key) + ": expected a non-negative integer");
            out = static_cast<U>(v->get<std::uint64_t>());
        }
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
            out = v->get<int>();
        }
    }
    void text(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(key_path(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!used_.count(k)) throw ConfigError("unknown key '" + key_path(k) + "'");
        }
    }

private:
    std::string where() const { return path_.empty() ? "configuration" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void read_design(const json& j, const std::string& path, DesignVector& x) {
    Reader r(j, path);
    r.number("d1", x.d1);
    r.number("d2", x.d2);
    r.number("d3", x.d3);
    r.number("s", x.s);
    r.finish();
}

json design_json(const DesignVector& x) { return {{"d1", x.d1}, {"d2", x.d2}, {"d3", x.d3}, {"s", x.s}}; }

template <class F>
void with_object(Reader& r, const std::string& key, F&& f) {
    if (const json* v = r.find(key)) {
        Reader sub(*v, r.key_path(key));
        f(sub);
        sub.finish();
    }
}

template <class F>
void with_enum(Reader& r, const std::string& key, F&& parse) {
    std::string s;
    r.text(key, s);
    if (s.empty()) return;
    try {
        parse(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.key_path(key) + ": " + e.what());
    }
}

const char* training_name(TrainingCase c) { return c == TrainingCase::joint ? "joint" : "parameters"; }

void read_training(Reader& r, const std::string& key, TrainingCase& out) {
    with_enum(r, key, [&](const std::string& v) {
        if (v == "joint") out = TrainingCase::joint;
        else if (v == "parameters") out = TrainingCase::parameters;
        else throw std::invalid_argument("expected 'joint' or 'parameters'");
    });
}

}  // namespace

const char* to_string(Method m) {
    for (const auto& n : method_names) {
        if (n.method == m) return n.name;
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    for (const auto& n : method_names) {
        if (s == n.name) return n.method;
    }
    throw std::invalid_argument("unknown method '" + s + "' (mc, hybrid, eps, ws, ws-multistart, nsga2)");
}

bool is_estimation(Method m) { return m == Method::mc || m == Method::hybrid; }

RunConfig::RunConfig() {
    pfs.threshold = pmsm::default_torque_threshold;
    pfs.direction = Direction::at_least;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (model.kind != "synthetic" && model.kind != "external") fail("model.kind: expected 'synthetic' or 'external'");
    if (model.kind == "external" && model.command.empty()) fail("model.command: required for an external model");
    if (model.kind == "synthetic" && uncertainty.dim() != 2 * pmsm::magnet_count) {
        fail("uncertainty: the synthetic model takes " + std::to_string(2 * pmsm::magnet_count) + " parameters");
    }
    if (uncertainty.dim() == 0) fail("uncertainty: at least one parameter required");
    if (!std::isfinite(pfs.threshold)) fail("pfs.threshold: must be finite");
    if (!(estimate.sigma_target > 0.0 && estimate.sigma_target <= 0.5)) fail("estimate.sigma_target: must be in (0, 0.5]");
    if (!estimate.design.finite()) fail("estimate.design: must be finite");
    if (!(surrogate.gamma > 0.0)) fail("surrogate.gamma: must be positive");
    if (surrogate.n_train < 2) fail("surrogate.n_train: must be at least 2");
    if (surrogate.mc_samples < 1) fail("surrogate.mc_samples: must be at least 1");
    if (surrogate.capacity != 0 && surrogate.capacity <= surrogate.n_train) {
        fail("surrogate.capacity: must exceed surrogate.n_train (or be 0)");
    }
    if (!(c_max > 0.0)) fail("c_max: must be positive");
    if (!(weight > 0.0)) fail("weight: must be positive");
    if (optimizer.max_fev < 2 * DesignVector::size + 1) fail("optimizer.max_fev: must be at least 9");
    if (!(optimizer.radius_start > 0.0) || !(optimizer.radius_end > 0.0) ||
        optimizer.radius_max < optimizer.radius_start) {
        fail("optimizer: need 0 < radius_start <= radius_max and radius_end > 0");
    }
    if (!(optimizer.delta_f_tol >= 0.0)) fail("optimizer.delta_f_tol: must be >= 0");
    if (!(optimizer.penalty > 0.0)) fail("optimizer.penalty: must be positive");
    if (multistart.n_starts < 1) fail("multistart.n_starts: must be at least 1");
    if (multistart.exploration_fev < 1) fail("multistart.exploration_fev: must be at least 1");
    if (multistart.low_fidelity_mc >= multistart.high_fidelity_mc) {
        fail("multistart: low_fidelity_mc must be below high_fidelity_mc");
    }
    try {
        nsga2.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("nsga2: ") + e.what());
    }
    try {
        design_box(constraints);
    } catch (const std::invalid_argument& e) {
        fail(std::string("constraints: ") + e.what());
    }
    if (!check_constraints(start, constraints).feasible()) fail("start: design violates the constraints");
    for (double v : sweep.values) {
        if (!(v > 0.0)) fail("sweep.values: every value must be positive");
    }
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Reader r(j, "");
    int version = RunConfig::schema_version;
    r.integer("schema_version", version);
    if (version != RunConfig::schema_version) {
        throw ConfigError("schema_version: expected " + std::to_string(RunConfig::schema_version));
    }
    r.count("seed", cfg.seed);
    with_enum(r, "method", [&](const std::string& s) { cfg.method = method_from_string(s); });
    r.text("out", cfg.out);
    with_object(r, "model", [&](Reader& m) {
        m.text("kind", cfg.model.kind);
        m.text("command", cfg.model.command);
        m.count("timeout_ms", cfg.model.timeout_ms);
        m.text("cache_path", cfg.model.cache_path);
    });
    if (const json* u = r.find("uncertainty")) {
        if (!u->is_array()) throw ConfigError("uncertainty: expected an array");
        std::vector<UncertainParameter> entries;
        for (std::size_t i = 0; i < u->size(); ++i) {
            UncertainParameter p;
            Reader e((*u)[i], "uncertainty[" + std::to_string(i) + "]");
            e.number("mean", p.mean);
            e.number("half_width", p.half_width);
            e.text("label", p.label);
            e.finish();
            entries.push_back(p);
        }
        try {
            cfg.uncertainty = UncertaintySpec(std::move(entries));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("uncertainty: ") + e.what());
        }
    }
    with_object(r, "constraints", [&](Reader& c) {
        if (const json* lb = c.find("lower_bounds")) read_design(*lb, c.key_path("lower_bounds"), cfg.constraints.lower_bounds);
        c.number("d3_upper", cfg.constraints.d3_upper);
        c.number("s_upper", cfg.constraints.s_upper);
        if (const json* rows = c.find("linear_rows")) {
            if (!rows->is_array()) throw ConfigError("constraints.linear_rows: expected an array");
            cfg.constraints.linear_rows.clear();
            for (std::size_t i = 0; i < rows->size(); ++i) {
                const std::string path = "constraints.linear_rows[" + std::to_string(i) + "]";
                Reader e((*rows)[i], path);
                LinearRow row;
                if (const json* co = e.find("coefficients")) {
                    if (!co->is_array() || co->size() != 4) throw ConfigError(path + ".coefficients: expected 4 numbers");
                    for (std::size_t k = 0; k < 4; ++k) {
                        if (!(*co)[k].is_number()) throw ConfigError(path + ".coefficients: expected 4 numbers");
                        row.coefficients[k] = (*co)[k].get<double>();
                    }
                }
                e.number("bound", row.bound);
                e.text("label", row.label);
                e.finish();
                cfg.constraints.linear_rows.push_back(row);
            }
        }
    });
    with_object(r, "pfs", [&](Reader& p) {
        p.number("threshold", cfg.pfs.threshold);
        with_enum(p, "direction", [&](const std::string& s) { cfg.pfs.direction = direction_from_string(s); });
    });
    if (const json* s = r.find("start")) read_design(*s, "start", cfg.start);
    with_object(r, "estimate", [&](Reader& e) {
        if (const json* d = e.find("design")) read_design(*d, "estimate.design", cfg.estimate.design);
        e.number("sigma_target", cfg.estimate.sigma_target);
        e.count("n_samples", cfg.estimate.n_samples);
        read_training(e, "training", cfg.estimate.training);
    });
    with_object(r, "surrogate", [&](Reader& s) {
        s.number("gamma", cfg.surrogate.gamma);
        s.count("n_train", cfg.surrogate.n_train);
        read_training(s, "training", cfg.surrogate.training);
        s.count("capacity", cfg.surrogate.capacity);
        with_enum(s, "yield_mode", [&](const std::string& v) { cfg.surrogate.yield_mode = yield_mode_from_string(v); });
        s.count("mc_samples", cfg.surrogate.mc_samples);
    });
    with_object(r, "gpr", [&](Reader& g) {
        g.count("grid_size", cfg.gpr.grid_size);
        g.integer("refine_rounds", cfg.gpr.refine_rounds);
        g.number("jitter_start", cfg.gpr.jitter_start);
        g.number("jitter_max", cfg.gpr.jitter_max);
        g.count("refit_every", cfg.gpr.refit_every);
        g.number("duplicate_tol", cfg.gpr.duplicate_tol);
        g.number("zeta_lower", cfg.gpr.zeta_lower);
        g.number("zeta_upper", cfg.gpr.zeta_upper);
        g.number("length_lower", cfg.gpr.length_lower);
        g.number("length_upper", cfg.gpr.length_upper);
    });
    with_object(r, "optimizer", [&](Reader& o) {
        o.count("max_fev", cfg.optimizer.max_fev);
        o.number("radius_start", cfg.optimizer.radius_start);
        o.number("radius_end", cfg.optimizer.radius_end);
        o.number("radius_max", cfg.optimizer.radius_max);
        o.number("delta_f_tol", cfg.optimizer.delta_f_tol);
        o.number("penalty", cfg.optimizer.penalty);
    });
    r.number("c_max", cfg.c_max);
    r.number("weight", cfg.weight);
    with_object(r, "multistart", [&](Reader& m) {
        m.count("n_starts", cfg.multistart.n_starts);
        m.count("exploration_fev", cfg.multistart.exploration_fev);
        m.count("low_fidelity_mc", cfg.multistart.low_fidelity_mc);
        m.count("high_fidelity_mc", cfg.multistart.high_fidelity_mc);
    });
    with_object(r, "nsga2", [&](Reader& g) {
        g.count("population", cfg.nsga2.population);
        g.count("offspring", cfg.nsga2.offspring);
        g.count("eval_budget", cfg.nsga2.eval_budget);
        g.number("crossover_prob", cfg.nsga2.crossover_prob);
        g.number("crossover_eta", cfg.nsga2.crossover_eta);
        g.number("mutation_prob", cfg.nsga2.mutation_prob);
        g.number("mutation_eta", cfg.nsga2.mutation_eta);
    });
    with_object(r, "sweep", [&](Reader& s) {
        if (const json* v = s.find("values")) {
            if (!v->is_array()) throw ConfigError("sweep.values: expected an array of numbers");
            cfg.sweep.values.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) throw ConfigError("sweep.values: expected an array of numbers");
                cfg.sweep.values.push_back(e.get<double>());
            }
        }
    });
    r.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("cannot read configuration '" + path.string() + "': " + e.what());
    }
    return parse_config(text);
}

std::string config_to_json(const RunConfig& cfg) {
    json unc = json::array();
    for (const auto& p : cfg.uncertainty.entries()) {
        unc.push_back({{"label", p.label}, {"mean", p.mean}, {"half_width", p.half_width}});
    }
    json rows = json::array();
    for (const auto& row : cfg.constraints.linear_rows) {
        rows.push_back({{"coefficients", row.coefficients}, {"bound", row.bound}, {"label", row.label}});
    }
    json j = {
        {"schema_version", RunConfig::schema_version},
        {"seed", cfg.seed},
        {"method", to_string(cfg.method)},
        {"out", cfg.out},
        {"model",
         {{"kind", cfg.model.kind},
          {"command", cfg.model.command},
          {"timeout_ms", cfg.model.timeout_ms},
          {"cache_path", cfg.model.cache_path}}},
        {"uncertainty", unc},
        {"constraints",
         {{"lower_bounds", design_json(cfg.constraints.lower_bounds)},
          {"d3_upper", cfg.constraints.d3_upper},
          {"s_upper", cfg.constraints.s_upper},
          {"linear_rows", rows}}},
        {"pfs", {{"threshold", cfg.pfs.threshold}, {"direction", to_string(cfg.pfs.direction)}}},
        {"start", design_json(cfg.start)},
        {"estimate",
         {{"design", design_json(cfg.estimate.design)},
          {"sigma_target", cfg.estimate.sigma_target},
          {"n_samples", cfg.estimate.n_samples},
          {"training", training_name(cfg.estimate.training)}}},
        {"surrogate",
         {{"gamma", cfg.surrogate.gamma},
          {"n_train", cfg.surrogate.n_train},
          {"training", training_name(cfg.surrogate.training)},
          {"capacity", cfg.surrogate.capacity},
          {"yield_mode", to_string(cfg.surrogate.yield_mode)},
          {"mc_samples", cfg.surrogate.mc_samples}}},
        {"gpr",
         {{"grid_size", cfg.gpr.grid_size},
          {"refine_rounds", cfg.gpr.refine_rounds},
          {"jitter_start", cfg.gpr.jitter_start},
          {"jitter_max", cfg.gpr.jitter_max},
          {"refit_every", cfg.gpr.refit_every},
          {"duplicate_tol", cfg.gpr.duplicate_tol},
          {"zeta_lower", cfg.gpr.zeta_lower},
          {"zeta_upper", cfg.gpr.zeta_upper},
          {"length_lower", cfg.gpr.length_lower},
          {"length_upper", cfg.gpr.length_upper}}},
        {"optimizer",
         {{"max_fev", cfg.optimizer.max_fev},
          {"radius_start", cfg.optimizer.radius_start},
          {"radius_end", cfg.optimizer.radius_end},
          {"radius_max", cfg.optimizer.radius_max},
          {"delta_f_tol", cfg.optimizer.delta_f_tol},
          {"penalty", cfg.optimizer.penalty}}},
        {"c_max", cfg.c_max},
        {"weight", cfg.weight},
        {"multistart",
         {{"n_starts", cfg.multistart.n_starts},
          {"exploration_fev", cfg.multistart.exploration_fev},
          {"low_fidelity_mc", cfg.multistart.low_fidelity_mc},
          {"high_fidelity_mc", cfg.multistart.high_fidelity_mc}}},
        {"nsga2",
         {{"population", cfg.nsga2.population},
          {"offspring", cfg.nsga2.offspring},
          {"eval_budget", cfg.nsga2.eval_budget},
          {"crossover_prob", cfg.nsga2.crossover_prob},
          {"crossover_eta", cfg.nsga2.crossover_eta},
          {"mutation_prob", cfg.nsga2.mutation_prob},
          {"mutation_eta", cfg.nsga2.mutation_eta}}},
        {"sweep", {{"values", cfg.sweep.values}}},
    };
    return j.dump(2) + "\n";
}

std::unique_ptr<QoiModel> make_model(const ModelConfig& cfg, std::size_t parameter_dim) {
    if (cfg.kind == "synthetic") return std::make_unique<SyntheticPmsm>();
    if (cfg.kind == "external") {
        ExternalModelOptions o;
        o.command = cfg.command;
        o.parameter_dim = parameter_dim;
        o.timeout = std::chrono::milliseconds(cfg.timeout_ms);
        if (!cfg.cache_path.empty()) o.cache_path = cfg.cache_path;
        return std::make_unique<ExternalModel>(std::move(o));
    }
    throw ConfigError("model.kind: expected 'synthetic' or 'external'");
}

}  // namespace yieldopt
