#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>

#include "yieldopt/dfo.hpp"
#include "yieldopt/hybrid.hpp"
#include "yieldopt/pareto.hpp"

namespace yieldopt {

enum class YieldMode { mc, hybrid };
const char* to_string(YieldMode m);
YieldMode yield_mode_from_string(const std::string& s);

struct YieldEvaluatorConfig {
    YieldMode mode = YieldMode::hybrid;
    HybridConfig hybrid;
    TrainingCase training = TrainingCase::joint;
    DesignVector training_design = DesignVector::nominal();  ///< x of TrainingCase::parameters
    GprConfig gpr;
    std::size_t surrogate_capacity = 0;  ///< 0 = unbounded
    std::uint64_t seed = 0;
};

/// Yield estimates with one fixed sample set per fidelity (common random
/// numbers) and, in hybrid mode, one surrogate shared by every estimate.
class YieldEvaluator {
public:
    YieldEvaluator(QoiModel& model, UncertaintySpec spec, DesignConstraints constraints, PerformanceSpec pfs,
                   YieldEvaluatorConfig config);

    /// Estimate at `n_samples` Monte Carlo points (0 selects hybrid.mc_samples).
    YieldEstimate estimate(const DesignVector& x, std::size_t n_samples = 0);
    /// The last hybrid report (empty in mc mode).
    const std::optional<HybridReport>& last_report() const { return last_report_; }

    const SampleSet& samples(std::size_t n_samples);

    std::size_t offline_evaluations() const { return offline_; }
    std::size_t online_evaluations() const;
    const std::map<std::size_t, std::size_t>& online_by_fidelity() const { return online_; }
    std::size_t surrogate_classifications() const { return surrogate_; }
    std::size_t estimates() const { return estimates_; }
    std::size_t blackbox_evaluations() const { return offline_ + online_evaluations(); }
    const YieldEvaluatorConfig& config() const { return config_; }
    const Surrogate* surrogate() const { return surrogate_model_.get(); }

private:
    void ensure_surrogate();

    QoiModel& model_;
    UncertaintySpec spec_;
    DesignConstraints constraints_;
    PerformanceSpec pfs_;
    YieldEvaluatorConfig config_;
    std::map<std::size_t, SampleSet> sample_sets_;
    std::unique_ptr<GprSurrogate> surrogate_model_;
    std::optional<HybridReport> last_report_;
    std::size_t offline_ = 0;
    std::map<std::size_t, std::size_t> online_;
    std::size_t surrogate_ = 0;
    std::size_t estimates_ = 0;
};

enum class Scalarization { eps_constraint, weighted_sum };

/// Yield/cost problem scalarized for the local solver.
///  - eps_constraint: minimize -Y subject to (c_max - C) / c_max >= 0
///  - weighted_sum: minimize -Y + w C
class YieldCostProblem final : public ScalarProblem {
public:
    YieldCostProblem(YieldEvaluator& evaluator, Scalarization kind, double parameter);

    ProblemValue evaluate(const DesignVector& x, std::size_t fidelity) override;
    std::size_t constraint_count() const override { return kind_ == Scalarization::eps_constraint ? 1 : 0; }

    Scalarization kind() const { return kind_; }
    double parameter() const { return parameter_; }

private:
    YieldEvaluator& evaluator_;
    Scalarization kind_;
    double parameter_;
};

}  // namespace yieldopt
