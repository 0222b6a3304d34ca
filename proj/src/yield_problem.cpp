#include "yieldopt/yield_problem.hpp"

#include <stdexcept>

#include "yieldopt/random.hpp"

namespace yieldopt {

const char* to_string(YieldMode m) { return m == YieldMode::mc ? "mc" : "hybrid"; }

YieldMode yield_mode_from_string(const std::string& s) {
    if (s == "mc") return YieldMode::mc;
    if (s == "hybrid") return YieldMode::hybrid;
    throw std::invalid_argument("unknown yield mode '" + s + "'");
}

YieldEvaluator::YieldEvaluator(QoiModel& model, UncertaintySpec spec, DesignConstraints constraints,
                               PerformanceSpec pfs, YieldEvaluatorConfig config)
    : model_(model), spec_(std::move(spec)), constraints_(std::move(constraints)), pfs_(pfs), config_(config) {
    if (spec_.dim() != model.parameter_dim()) throw std::invalid_argument("uncertainty dimension does not match the model");
}

const SampleSet& YieldEvaluator::samples(std::size_t n_samples) {
    if (n_samples == 0) n_samples = config_.hybrid.mc_samples;
    auto it = sample_sets_.find(n_samples);
    if (it == sample_sets_.end()) {
        it = sample_sets_.emplace(n_samples, sample_uniform(spec_, n_samples, derive_seed(config_.seed, n_samples))).first;
    }
    return it->second;
}

void YieldEvaluator::ensure_surrogate() {
    if (surrogate_model_) return;
    const auto data = build_initial_training(spec_, constraints_, config_.hybrid.n_train_initial,
                                             derive_seed(config_.seed, 0x747261696eULL), model_, config_.training,
                                             config_.training_design);
    offline_ = data.outputs.size();
    std::optional<std::size_t> cap;
    if (config_.surrogate_capacity > 0) cap = config_.surrogate_capacity;
    surrogate_model_ = std::make_unique<GprSurrogate>(GprModel::fit(data.inputs, data.outputs, config_.gpr), cap);
}

YieldEstimate YieldEvaluator::estimate(const DesignVector& x, std::size_t n_samples) {
    if (n_samples == 0) n_samples = config_.hybrid.mc_samples;
    const SampleSet& s = samples(n_samples);
    ++estimates_;
    if (config_.mode == YieldMode::mc) {
        auto est = mc_yield(model_, x, s, pfs_);
        online_[n_samples] += est.n_blackbox;
        return est;
    }
    ensure_surrogate();
    last_report_ = estimate_yield_hybrid(model_, *surrogate_model_, x, s, pfs_, config_.hybrid, offline_);
    online_[n_samples] += last_report_->n_online;
    surrogate_ += last_report_->n_gpr;
    return last_report_->estimate;
}

std::size_t YieldEvaluator::online_evaluations() const {
    std::size_t n = 0;
    for (const auto& [k, v] : online_) n += v;
    return n;
}

YieldCostProblem::YieldCostProblem(YieldEvaluator& evaluator, Scalarization kind, double parameter)
    : evaluator_(evaluator), kind_(kind), parameter_(parameter) {
    if (kind == Scalarization::eps_constraint && !(parameter > 0.0)) throw std::invalid_argument("c_max must be positive");
    if (kind == Scalarization::weighted_sum && !(parameter >= 0.0)) throw std::invalid_argument("weight must be non-negative");
}

ProblemValue YieldCostProblem::evaluate(const DesignVector& x, std::size_t fidelity) {
    ProblemValue v;
    v.yield = evaluator_.estimate(x, fidelity).value;
    v.cost = cost(x);
    if (kind_ == Scalarization::eps_constraint) {
        v.objective = -v.yield;
        v.constraints = {(parameter_ - v.cost) / parameter_};
    } else {
        v.objective = parameter_ > 0.0 ? weighted_sum_objective(v.yield, v.cost, parameter_) : -v.yield;
    }
    return v;
}

}  // namespace yieldopt
