#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "yieldopt/design.hpp"
#include "yieldopt/pareto.hpp"

namespace yieldopt {

class YieldEvaluator;

struct GaConfig {
    std::size_t population = 100;
    std::size_t offspring = 50;
    std::size_t eval_budget = 1000;  ///< yield estimations, not blackbox calls
    double crossover_prob = 0.9;
    double crossover_eta = 15.0;
    double mutation_prob = 0.0;  ///< per variable; 0 selects 1 / dim
    double mutation_eta = 20.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

struct Individual {
    DesignVector design;
    double yield = 0.0;  ///< 0 for infeasible individuals, which are never estimated
    double cost = 0.0;
    bool feasible = false;
    double violation = 0.0;
    std::size_t rank = 0;  ///< 1 = first front
    double crowding = 0.0;
    std::size_t n_fev = 0;  ///< index of the yield estimation, 0 if none
};

struct Generation {
    std::size_t index = 0;
    std::vector<Individual> individuals;
    std::size_t evaluations = 0;  ///< cumulative yield estimations
};

struct GaResult {
    ParetoArchive archive;
    std::vector<Generation> generations;
    std::size_t evaluations = 0;
};

inline constexpr double crowding_infinity = std::numeric_limits<double>::infinity();

/// Fronts of point indices: front 0 is non-dominated, front k is
/// non-dominated once fronts < k are removed.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ObjectivePoint> points);

/// Crowding distance over (yield, cost); boundary points get crowding_infinity.
std::vector<double> crowding_distance(std::span<const ObjectivePoint> front);

/// Yield of a feasible design; called once per estimation.
using YieldFunction = std::function<double(const DesignVector&)>;

/// Runs until exactly eval_budget yield estimations have been made.
/// `fidelity` is recorded as provenance only.
GaResult nsga2_run(const YieldFunction& yield, const DesignConstraints& constraints, const GaConfig& cfg,
                   std::size_t fidelity = 0);
GaResult nsga2_run(YieldEvaluator& evaluator, const DesignConstraints& constraints, const GaConfig& cfg);

/// CSV: generation, yield, cost, rank, crowding, feasible, d1, d2, d3, s.
void write_generation_csv(const Generation& g, const std::filesystem::path& path);

}  // namespace yieldopt
