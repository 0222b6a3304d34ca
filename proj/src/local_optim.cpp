#include "yieldopt/local_optim.hpp"

#include <memory>
#include <numeric>
#include <stdexcept>

#include "yieldopt/random.hpp"

namespace yieldopt {

std::vector<DesignVector> latin_hypercube_starts(const DesignConstraints& constraints, std::size_t n,
                                                 std::uint64_t seed) {
    const DesignBox box = design_box(constraints);
    const auto lo = box.lower.as_array(), hi = box.upper.as_array();
    std::vector<DesignVector> out;
    for (std::uint64_t round = 0; out.size() < n; ++round) {
        if (round > 1000) throw std::runtime_error("latin_hypercube_starts: feasible set too thin to sample");
        SplitMix64 rng(derive_seed(seed, round));
        std::array<std::vector<std::size_t>, 4> strata;
        for (auto& s : strata) {
            s.resize(n);
            std::iota(s.begin(), s.end(), std::size_t{0});
            for (std::size_t i = n; i > 1; --i) std::swap(s[i - 1], s[rng.below(i)]);
        }
        for (std::size_t i = 0; i < n && out.size() < n; ++i) {
            std::array<double, 4> a{};
            for (std::size_t j = 0; j < 4; ++j) {
                const double t = (static_cast<double>(strata[j][i]) + rng.uniform()) / static_cast<double>(n);
                a[j] = lo[j] + (hi[j] - lo[j]) * t;
            }
            const auto x = DesignVector::from_array(a);
            if (check_constraints(x, constraints).feasible()) out.push_back(x);
        }
    }
    return out;
}

MultiStartRun multi_start(ScalarProblem& problem, const std::vector<DesignVector>& starts,
                          const DesignConstraints& constraints, const MultiStartConfig& cfg, DfoOptions options) {
    if (starts.empty()) throw std::invalid_argument("multi_start: no starting points");
    if (cfg.exploration_fev < 1) throw std::invalid_argument("multi_start: exploration_fev must be >= 1");
    if (cfg.low_fidelity_mc >= cfg.high_fidelity_mc) {
        throw std::invalid_argument("multi_start: low fidelity must use fewer samples than high fidelity");
    }
    std::vector<DesignVector> feasible;
    for (const auto& s : starts) {
        if (check_constraints(s, constraints).feasible()) feasible.push_back(s);
    }
    if (feasible.size() != starts.size()) {
        throw std::invalid_argument(feasible.empty() ? "multi_start: all starts are infeasible"
                                                     : "multi_start: a start is infeasible");
    }

    options.fidelity = cfg.low_fidelity_mc;
    std::vector<std::unique_ptr<DfoSolver>> solvers;
    MultiStartRun out;
    for (const auto& s : starts) {
        auto solver = std::make_unique<DfoSolver>(problem, s, constraints, options, "exploration");
        solver->run(cfg.exploration_fev, false);
        out.explorer_merit.push_back(solver->best_merit());
        solvers.push_back(std::move(solver));
    }
    for (std::size_t k = 1; k < solvers.size(); ++k) {
        if (out.explorer_merit[k] < out.explorer_merit[out.chosen]) out.chosen = k;
    }

    DfoSolver& best = *solvers[out.chosen];
    const std::size_t explored = best.n_fev();
    if (!best.finished()) {
        best.switch_fidelity(cfg.high_fidelity_mc, "exploitation");
        best.run(options.max_fev, true);
    }
    OptimRun chosen = best.result();

    for (std::size_t k = 0; k < solvers.size(); ++k) {
        for (auto h : solvers[k]->history()) {
            if (h.n_fev > cfg.exploration_fev && k == out.chosen) break;
            h.start = k;
            out.run.history.push_back(std::move(h));
        }
    }
    for (std::size_t i = explored; i < chosen.history.size(); ++i) {
        auto h = chosen.history[i];
        h.start = out.chosen;
        out.run.history.push_back(std::move(h));
    }
    out.run.terminated_by = chosen.terminated_by;
    out.run.n_fev = out.run.history.size();
    out.run.best = chosen.best;
    out.run.best.start = out.chosen;
    out.run.best_feasible = chosen.best_feasible;
    return out;
}

OptimRun solve_eps_constraint(YieldEvaluator& evaluator, const DesignConstraints& constraints, const DesignVector& x0,
                              double c_max, DfoOptions options) {
    YieldCostProblem problem(evaluator, Scalarization::eps_constraint, c_max);
    if (options.fidelity == 0) options.fidelity = evaluator.config().hybrid.mc_samples;
    return dfo_minimize(problem, x0, constraints, options);
}

OptimRun solve_weighted_sum(YieldEvaluator& evaluator, const DesignConstraints& constraints, const DesignVector& x0,
                            double w, DfoOptions options) {
    YieldCostProblem problem(evaluator, Scalarization::weighted_sum, w);
    if (options.fidelity == 0) options.fidelity = evaluator.config().hybrid.mc_samples;
    return dfo_minimize(problem, x0, constraints, options);
}

}  // namespace yieldopt
