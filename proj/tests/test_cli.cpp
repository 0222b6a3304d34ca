#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "yieldopt/config.hpp"
#include "yieldopt/io.hpp"
#include "yieldopt/runner.hpp"

using namespace yieldopt;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(YIELDOPT_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "yieldopt_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

}  // namespace

TEST_CASE("config round trip") {
    RunConfig c;
    c.seed = 17;
    c.method = Method::ws_multistart;
    c.weight = 3e-3;
    c.surrogate.capacity = 250;
    c.sweep.values = {1e-3, 4e-3};
    c.estimate.design = {18.0, 6.5, 8.0, 1.5};
    const std::string text = config_to_json(c);
    CHECK(config_to_json(parse_config(text)) == text);
    CHECK(config_to_json(parse_config("{}")) == config_to_json(RunConfig{}));
}

TEST_CASE("config errors name the key") {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(R"({"surrogate": {"gama": 2}})").find("surrogate.gama") != std::string::npos);
    CHECK(message(R"({"seed": "one"})").find("seed") != std::string::npos);
    CHECK(message(R"({"method": "simplex"})").find("method") != std::string::npos);
    CHECK_FALSE(message("{not json").empty());
}

TEST_CASE("method names") {
    for (Method m : {Method::mc, Method::hybrid, Method::eps, Method::ws, Method::ws_multistart, Method::nsga2}) {
        CHECK(method_from_string(to_string(m)) == m);
    }
    CHECK(is_estimation(Method::hybrid));
    CHECK_FALSE(is_estimation(Method::nsga2));
}

TEST_CASE("evaluation accounting format") {
    CHECK(total_evaluations(20, 350) == "20 + 350 = 370");
    SummaryRow r{"C_max", 120, 0.5, 110, 40, 20, 350};
    CHECK(format_table({r}).find("20 + 350 = 370") != std::string::npos);
}

TEST_CASE("estimate writes the hybrid accounting") {
    const fs::path out = scratch("estimate");
    REQUIRE(run_cli("estimate --method hybrid --seed 3 --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(read_file(out / "summary.json"));
    CHECK(j.at("N_train").get<int>() == 20);
    CHECK(j.at("n_online").get<int>() + j.at("n_gpr").get<int>() == 2500);
    CHECK(j.at("n_tot").get<int>() == 20 + j.at("n_online").get<int>());
    CHECK(fs::exists(out / "trace.csv"));
    CHECK(fs::exists(out / "config.snapshot"));
    const RunConfig snap = load_config(out / "config.snapshot");
    CHECK(snap.seed == 3);
}

TEST_CASE("optimize writes history and front") {
    const fs::path out = scratch("eps");
    REQUIRE(run_cli("optimize --method eps --c-max 125 --budget 20 --out " + out.string()) == 0);
    const auto rows = CsvTable::parse(read_file(out / "history.csv"));
    CHECK(rows.size() == 21);
    CHECK(fs::exists(out / "front.csv"));
    const auto j = nlohmann::json::parse(read_file(out / "summary.json"));
    CHECK(j.at("row").at("n_fev").get<int>() == 20);
}

TEST_CASE("sweep over weights") {
    const fs::path out = scratch("sweep");
    const fs::path cfg = out.string() + ".json";
    write_file_atomic(cfg, R"({"method": "ws", "surrogate": {"yield_mode": "mc"},
                               "optimizer": {"max_fev": 12}, "sweep": {"values": [0.001, 0.005]}})");
    REQUIRE(run_cli("sweep --config " + cfg.string() + " --out " + out.string()) == 0);
    CHECK(CsvTable::parse(read_file(out / "table.csv")).size() == 3);
    CHECK(fs::exists(out / "run_01" / "history.csv"));
}

TEST_CASE("nsga2 writes one file per generation") {
    const fs::path out = scratch("ga");
    const fs::path cfg = out.string() + ".json";
    write_file_atomic(cfg, R"({"method": "nsga2", "surrogate": {"yield_mode": "mc", "mc_samples": 200}})");
    REQUIRE(run_cli("optimize --config " + cfg.string() + " --budget 200 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "generations" / "gen_000.csv"));
    CHECK(fs::exists(out / "generations" / "gen_002.csv"));
    CHECK(fs::exists(out / "front.csv"));
}

TEST_CASE("exit codes") {
    const fs::path out = scratch("bad");
    CHECK(run_cli("") == 2);
    CHECK(run_cli("estimate --method simplex --out " + out.string()) == 2);
    CHECK(run_cli("optimize --method hybrid --out " + out.string()) == 2);
    const fs::path cfg = out.string() + ".json";
    write_file_atomic(cfg, R"({"surrogate": {"gama": 2}})");
    CHECK(run_cli("estimate --config " + cfg.string() + " --out " + out.string()) == 2);
    CHECK(run_cli("estimate --method mc --model external:/nonexistent/child --out " + out.string()) == 3);
}
