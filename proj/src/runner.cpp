#include "yieldopt/runner.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "yieldopt/io.hpp"
#include "yieldopt/montecarlo.hpp"
#include "yieldopt/random.hpp"

namespace yieldopt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json design_json(const DesignVector& x) { return {{"d1", x.d1}, {"d2", x.d2}, {"d3", x.d3}, {"s", x.s}}; }

void prepare(const RunConfig& cfg) {
    fs::create_directories(cfg.out);
    write_file_atomic(fs::path(cfg.out) / "config.snapshot", config_to_json(cfg));
}

void write_summary(const fs::path& dir, const json& j) { write_file_atomic(dir / "summary.json", j.dump(2) + "\n"); }

YieldEvaluatorConfig evaluator_config(const RunConfig& cfg) {
    YieldEvaluatorConfig e;
    e.mode = cfg.surrogate.yield_mode;
    e.hybrid.gamma = cfg.surrogate.gamma;
    e.hybrid.n_train_initial = cfg.surrogate.n_train;
    e.hybrid.mc_samples = cfg.surrogate.mc_samples;
    e.hybrid.seed = cfg.seed;
    e.training = cfg.surrogate.training;
    e.training_design = cfg.start;
    e.gpr = cfg.gpr;
    e.surrogate_capacity = cfg.surrogate.capacity;
    e.seed = cfg.seed;
    return e;
}

json row_json(const SummaryRow& r) {
    json j = {{"yield", r.yield},
              {"cost", r.cost},
              {"n_fev", r.n_fev},
              {"offline", r.offline},
              {"online", r.online},
              {"total_evaluations", total_evaluations(r.offline, r.online)}};
    if (!r.parameter_name.empty()) {
        j["parameter_name"] = r.parameter_name;
        j["parameter"] = r.parameter;
    }
    return j;
}

std::vector<ObjectivePoint> history_front(const OptimRun& run) {
    std::vector<ObjectivePoint> pts;
    for (const auto& h : run.history) {
        if (h.feasible && h.fidelity == run.best.fidelity) pts.push_back({h.yield, h.cost, h.design, {h.n_fev, h.fidelity}});
    }
    return pareto_front(pts);
}

}  // namespace

std::string total_evaluations(std::size_t offline, std::size_t online) {
    return std::to_string(offline) + " + " + std::to_string(online) + " = " + std::to_string(offline + online);
}

std::string format_table(const std::vector<SummaryRow>& rows) {
    std::string out;
    const std::string name = rows.empty() || rows.front().parameter_name.empty() ? "" : rows.front().parameter_name;
    char line[256];
    std::snprintf(line, sizeof line, "%-8s | %-8s | %-10s | %-5s | %s\n", name.empty() ? "-" : name.c_str(), "Y",
                  "C(x)", "n_fev", "Total evaluations");
    out += line;
    for (const auto& r : rows) {
        char p[32] = "-";
        if (!r.parameter_name.empty()) std::snprintf(p, sizeof p, "%g", r.parameter);
        std::snprintf(line, sizeof line, "%-8s | %-8.4f | %-10.3f | %-5zu | %s\n", p, r.yield, r.cost, r.n_fev,
                      total_evaluations(r.offline, r.online).c_str());
        out += line;
    }
    return out;
}

std::string run_estimate(const RunConfig& cfg) {
    cfg.validate();
    if (!is_estimation(cfg.method)) throw ConfigError("method: 'estimate' needs method mc or hybrid");
    prepare(cfg);
    const fs::path dir = cfg.out;
    auto model = make_model(cfg.model, cfg.uncertainty.dim());
    const std::size_t n = cfg.estimate.n_samples > 0 ? cfg.estimate.n_samples : sample_size_for(cfg.estimate.sigma_target);

    YieldEvaluatorConfig ec = evaluator_config(cfg);
    ec.mode = cfg.method == Method::mc ? YieldMode::mc : YieldMode::hybrid;
    ec.hybrid.mc_samples = n;
    ec.training = cfg.estimate.training;
    ec.training_design = cfg.estimate.design;
    ec.surrogate_capacity = 0;
    YieldEvaluator ev(*model, cfg.uncertainty, cfg.constraints, cfg.pfs, ec);
    const YieldEstimate est = ev.estimate(cfg.estimate.design, n);

    json j = {{"method", to_string(cfg.method)},
              {"design", design_json(cfg.estimate.design)},
              {"yield", est.value},
              {"sigma", est.sigma},
              {"n_samples", est.n_samples},
              {"n_accepted", est.n_accepted}};
    char text[512];
    if (cfg.method == Method::mc) {
        j["blackbox_evaluations"] = est.n_blackbox;
        std::snprintf(text, sizeof text, "yield %.6g (sigma %.3g) from %zu samples, %zu blackbox evaluations\n",
                      est.value, est.sigma, est.n_samples, est.n_blackbox);
    } else {
        const HybridReport& rep = *ev.last_report();
        j["N_train"] = rep.n_train;
        j["n_online"] = rep.n_online;
        j["n_gpr"] = rep.n_gpr;
        j["n_tot"] = rep.n_tot;
        j["total_evaluations"] = total_evaluations(rep.n_train, rep.n_online);
        write_trace_csv(rep, dir / "trace.csv");
        std::snprintf(text, sizeof text, "N_train | Y | n_online | n_gpr | total\n%zu | %.6g | %zu | %zu | %s\n",
                      rep.n_train, est.value, rep.n_online, rep.n_gpr,
                      total_evaluations(rep.n_train, rep.n_online).c_str());
    }
    write_summary(dir, j);
    return text;
}

std::string run_optimize(const RunConfig& cfg) {
    cfg.validate();
    if (is_estimation(cfg.method)) throw ConfigError("method: 'optimize' needs method eps, ws, ws-multistart or nsga2");
    prepare(cfg);
    const fs::path dir = cfg.out;
    auto model = make_model(cfg.model, cfg.uncertainty.dim());
    YieldEvaluator ev(*model, cfg.uncertainty, cfg.constraints, cfg.pfs, evaluator_config(cfg));

    SummaryRow row;
    json j = {{"method", to_string(cfg.method)}};
    if (cfg.method == Method::nsga2) {
        GaConfig ga = cfg.nsga2;
        ga.seed = derive_seed(cfg.seed, 0x6e736761);
        const GaResult res = nsga2_run(ev, cfg.constraints, ga);
        fs::create_directories(dir / "generations");
        for (const auto& g : res.generations) {
            char name[32];
            std::snprintf(name, sizeof name, "gen_%03zu.csv", g.index);
            write_generation_csv(g, dir / "generations" / name);
        }
        write_front_csv(res.archive.points(), dir / "front.csv");
        json front = json::array();
        for (const auto& p : res.archive.points()) {
            front.push_back({{"yield", p.yield}, {"cost", p.cost}, {"design", design_json(p.design)}});
        }
        j["archive"] = front;
        j["generations"] = res.generations.size();
        j["yield_estimations"] = res.evaluations;
        // The archive member with the highest yield stands for the run in the table.
        const ObjectivePoint* pick = nullptr;
        for (const auto& p : res.archive.points()) {
            if (!pick || p.yield > pick->yield || (p.yield == pick->yield && p.cost < pick->cost)) pick = &p;
        }
        if (pick) {
            row.yield = pick->yield;
            row.cost = pick->cost;
        }
        row.n_fev = res.evaluations;
    } else {
        OptimRun run;
        if (cfg.method == Method::eps) {
            row.parameter_name = "C_max";
            row.parameter = cfg.c_max;
            run = solve_eps_constraint(ev, cfg.constraints, cfg.start, cfg.c_max, cfg.optimizer);
        } else if (cfg.method == Method::ws) {
            row.parameter_name = "w";
            row.parameter = cfg.weight;
            run = solve_weighted_sum(ev, cfg.constraints, cfg.start, cfg.weight, cfg.optimizer);
        } else {
            row.parameter_name = "w";
            row.parameter = cfg.weight;
            YieldCostProblem problem(ev, Scalarization::weighted_sum, cfg.weight);
            const auto starts = latin_hypercube_starts(cfg.constraints, cfg.multistart.n_starts,
                                                       derive_seed(cfg.seed, 0x6d756c7469));
            const MultiStartRun ms = multi_start(problem, starts, cfg.constraints, cfg.multistart, cfg.optimizer);
            run = ms.run;
            json st = json::array();
            for (const auto& s : starts) st.push_back(design_json(s));
            j["starts"] = st;
            j["chosen_start"] = ms.chosen;
            j["explorer_merit"] = ms.explorer_merit;
        }
        write_history_csv(run.history, dir / "history.csv");
        write_front_csv(history_front(run), dir / "front.csv");
        row.yield = run.best.yield;
        row.cost = run.best.cost;
        row.n_fev = run.n_fev;
        j["design"] = design_json(run.best.design);
        j["feasible"] = run.best_feasible;
        j["terminated_by"] = to_string(run.terminated_by);
    }
    row.offline = ev.offline_evaluations();
    row.online = ev.online_evaluations();
    json by_fid = json::object();
    for (const auto& [fid, count] : ev.online_by_fidelity()) by_fid[std::to_string(fid)] = count;
    j["online_by_fidelity"] = by_fid;
    j["yield_mode"] = to_string(cfg.surrogate.yield_mode);
    j["row"] = row_json(row);
    write_summary(dir, j);
    return format_table({row});
}

std::string run_sweep(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.method != Method::eps && cfg.method != Method::ws && cfg.method != Method::ws_multistart) {
        throw ConfigError("method: 'sweep' needs method eps, ws or ws-multistart");
    }
    std::vector<double> values = cfg.sweep.values;
    if (values.empty()) {
        values = cfg.method == Method::eps ? std::vector<double>{120.0, 110.0, 108.0, 100.0}
                                           : std::vector<double>{1e-3, 2e-3, 3e-3, 5e-3};
    }
    prepare(cfg);
    const fs::path dir = cfg.out;
    std::vector<SummaryRow> rows;
    json list = json::array();
    CsvTable table({"parameter", "yield", "cost", "n_fev", "offline", "online", "total_evaluations"});
    for (std::size_t i = 0; i < values.size(); ++i) {
        RunConfig sub = cfg;
        if (cfg.method == Method::eps) sub.c_max = values[i];
        else sub.weight = values[i];
        char name[32];
        std::snprintf(name, sizeof name, "run_%02zu", i);
        sub.out = (dir / name).string();
        run_optimize(sub);
        const json s = json::parse(read_file(dir / name / "summary.json"));
        const json& r = s.at("row");
        SummaryRow row;
        row.parameter_name = r.at("parameter_name").get<std::string>();
        row.parameter = r.at("parameter").get<double>();
        row.yield = r.at("yield").get<double>();
        row.cost = r.at("cost").get<double>();
        row.n_fev = r.at("n_fev").get<std::size_t>();
        row.offline = r.at("offline").get<std::size_t>();
        row.online = r.at("online").get<std::size_t>();
        rows.push_back(row);
        json entry = r;
        entry["directory"] = name;
        list.push_back(entry);
        table.row({format_double(row.parameter), format_double(row.yield), format_double(row.cost),
                   std::to_string(row.n_fev), std::to_string(row.offline), std::to_string(row.online),
                   total_evaluations(row.offline, row.online)});
    }
    table.write(dir / "table.csv");
    write_summary(dir, {{"method", to_string(cfg.method)}, {"rows", list}});
    return format_table(rows);
}

}  // namespace yieldopt
