#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "yieldopt/design.hpp"
#include "yieldopt/dfo.hpp"
#include "yieldopt/hybrid.hpp"
#include "yieldopt/local_optim.hpp"
#include "yieldopt/nsga2.hpp"
#include "yieldopt/qoi_model.hpp"
#include "yieldopt/uncertainty.hpp"
#include "yieldopt/yield_problem.hpp"

namespace yieldopt {

/// Invalid run configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method { mc, hybrid, eps, ws, ws_multistart, nsga2 };
const char* to_string(Method m);
Method method_from_string(const std::string& s);
/// mc and hybrid only estimate; the others optimize.
bool is_estimation(Method m);

struct ModelConfig {
    std::string kind = "synthetic";  ///< synthetic | external
    std::string command;             ///< external only
    std::uint64_t timeout_ms = 60'000;
    std::string cache_path;          ///< empty = in-memory cache only
};

struct EstimateConfig {
    DesignVector design = DesignVector::nominal();
    double sigma_target = 0.01;  ///< sets the sample count when n_samples == 0
    std::size_t n_samples = 0;
    TrainingCase training = TrainingCase::parameters;  ///< the design is fixed, so only p varies
};

struct SurrogateConfig {
    double gamma = 2.0;
    std::size_t n_train = 20;
    TrainingCase training = TrainingCase::joint;
    std::size_t capacity = 300;  ///< optimizers only; 0 = unbounded
    YieldMode yield_mode = YieldMode::hybrid;  ///< estimator inside the optimizers
    std::size_t mc_samples = 2500;             ///< samples per yield estimate inside the optimizers
};

struct SweepConfig {
    std::vector<double> values;  ///< C_max for eps, w for ws / ws-multistart
};

/// Everything a run needs; every field has a default.
struct RunConfig {
    static constexpr int schema_version = 1;

    std::uint64_t seed = 1;
    Method method = Method::hybrid;
    std::string out = "run";
    ModelConfig model;
    UncertaintySpec uncertainty = UncertaintySpec::pmsm_default();
    DesignConstraints constraints = DesignConstraints::defaults();
    PerformanceSpec pfs;
    DesignVector start = DesignVector::nominal();
    EstimateConfig estimate;
    SurrogateConfig surrogate;
    GprConfig gpr;
    DfoOptions optimizer;
    double c_max = 120.0;
    double weight = 1e-3;
    MultiStartConfig multistart;
    GaConfig nsga2;
    SweepConfig sweep;

    RunConfig();

    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

/// Parses a JSON configuration. Missing keys keep their defaults; unknown
/// keys and wrong types raise ConfigError with the dotted key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Complete JSON form, every field spelled out; parse_config reads it back
/// to an identical configuration.
std::string config_to_json(const RunConfig& cfg);

std::unique_ptr<QoiModel> make_model(const ModelConfig& cfg, std::size_t parameter_dim);

}  // namespace yieldopt
