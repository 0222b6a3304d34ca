#pragma once

#include <cstdint>
#include <vector>

#include "yieldopt/dfo.hpp"
#include "yieldopt/yield_problem.hpp"

namespace yieldopt {

struct MultiStartConfig {
    std::size_t n_starts = 5;
    std::size_t exploration_fev = 12;
    std::size_t low_fidelity_mc = 100;
    std::size_t high_fidelity_mc = 2500;
};

struct MultiStartRun {
    OptimRun run;               ///< explorer histories in start order, then the exploitation
    std::size_t chosen = 0;     ///< index of the start that was continued
    std::vector<double> explorer_merit;
};

/// n feasible points from Latin hypercube rounds over the design box;
/// infeasible draws are discarded and further rounds drawn.
std::vector<DesignVector> latin_hypercube_starts(const DesignConstraints& constraints, std::size_t n,
                                                 std::uint64_t seed);

/// Runs every start for exactly exploration_fev evaluations at the low
/// fidelity, then continues the solver with the lowest merit at the high
/// fidelity until options.max_fev evaluations of that solver are spent.
MultiStartRun multi_start(ScalarProblem& problem, const std::vector<DesignVector>& starts,
                          const DesignConstraints& constraints, const MultiStartConfig& cfg, DfoOptions options);

/// Maximizes the yield subject to C(x) <= c_max and the linear constraints.
OptimRun solve_eps_constraint(YieldEvaluator& evaluator, const DesignConstraints& constraints, const DesignVector& x0,
                              double c_max, DfoOptions options);

/// Minimizes -Y + w C subject to the linear constraints.
OptimRun solve_weighted_sum(YieldEvaluator& evaluator, const DesignConstraints& constraints, const DesignVector& x0,
                            double w, DfoOptions options);

}  // namespace yieldopt
