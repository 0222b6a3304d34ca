// Command-line front end: estimate, optimize and sweep.
//
// Exit codes: 0 success, 2 invalid configuration or arguments, 3 model or
// run failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "yieldopt/config.hpp"
#include "yieldopt/runner.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> method;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> model;
    std::optional<double> c_max;
    std::optional<double> weight;
    std::optional<std::size_t> budget;
};

void add_options(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config, "JSON configuration file");
    app->add_option("--method", o.method, "mc | hybrid | eps | ws | ws-multistart | nsga2");
    app->add_option("--seed", o.seed, "random seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--model", o.model, "'synthetic' or 'external:<command>'");
    app->add_option("--c-max", o.c_max, "cost bound of the eps-constraint method");
    app->add_option("--weight", o.weight, "cost weight of the weighted-sum methods");
    app->add_option("--budget", o.budget, "max_fev of the local solver, or the NSGA-II evaluation budget");
}

yieldopt::RunConfig resolve(const Overrides& o) {
    using namespace yieldopt;
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    try {
        if (o.method) cfg.method = method_from_string(*o.method);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--method: ") + e.what());
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    if (o.model) {
        const std::string prefix = "external:";
        if (*o.model == "synthetic") {
            cfg.model.kind = "synthetic";
        } else if (o.model->rfind(prefix, 0) == 0) {
            cfg.model.kind = "external";
            cfg.model.command = o.model->substr(prefix.size());
        } else {
            throw ConfigError("--model: expected 'synthetic' or 'external:<command>'");
        }
    }
    if (o.c_max) cfg.c_max = *o.c_max;
    if (o.weight) cfg.weight = *o.weight;
    if (o.budget) {
        if (cfg.method == Method::nsga2) cfg.nsga2.eval_budget = *o.budget;
        else cfg.optimizer.max_fev = *o.budget;
    }
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yield estimation and yield/cost design optimization"};
    app.require_subcommand(1);
    Overrides o;
    auto* estimate = app.add_subcommand("estimate", "estimate the yield of one design (method mc or hybrid)");
    auto* optimize = app.add_subcommand("optimize", "run one optimization (method eps, ws, ws-multistart or nsga2)");
    auto* sweep = app.add_subcommand("sweep", "repeat an optimization over C_max or w values");
    for (auto* s : {estimate, optimize, sweep}) add_options(s, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const yieldopt::RunConfig cfg = resolve(o);
        std::string text;
        if (estimate->parsed()) text = yieldopt::run_estimate(cfg);
        else if (optimize->parsed()) text = yieldopt::run_optimize(cfg);
        else text = yieldopt::run_sweep(cfg);
        std::fputs(text.c_str(), stdout);
        return 0;
    } catch (const yieldopt::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
