#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "yieldopt/design.hpp"
#include "yieldopt/gpr.hpp"
#include "yieldopt/montecarlo.hpp"

namespace yieldopt {

struct HybridConfig {
    double gamma = 2.0;               ///< safety factor on the surrogate std
    std::size_t n_train_initial = 20;
    std::size_t mc_samples = 2500;
    std::uint64_t seed = 0;
};

enum class Decision { surrogate_accept, surrogate_reject, critical };

const char* to_string(Decision d);

/// Classification in the canonical "value <= c" form.
Decision classify(double pred_mean, double pred_std, double c, double gamma);

/// Anything that predicts the QoI over the joint (x, p) input and may learn
/// from blackbox results.
class Surrogate {
public:
    virtual ~Surrogate() = default;
    virtual GprPrediction predict(std::span<const double> y) const = 0;
    /// Folds in a blackbox result; false if the point was not added.
    virtual bool absorb(std::span<const double> y, double q) = 0;
    virtual std::size_t size() const = 0;
};

/// GPR surrogate. `capacity` caps the number of training points: when it is
/// reached the oldest quarter of the absorbed points is dropped and the
/// hyperparameters are refitted, so the model follows the region currently
/// being sampled. The initial training points are always kept. Between these
/// window refits appends do not trigger refits.
class GprSurrogate final : public Surrogate {
public:
    explicit GprSurrogate(GprModel model, std::optional<std::size_t> capacity = std::nullopt)
        : model_(std::move(model)), capacity_(capacity), initial_(model_.size()) {}

    GprPrediction predict(std::span<const double> y) const override { return model_.predict(y); }
    bool absorb(std::span<const double> y, double q) override;
    std::size_t size() const override { return model_.size(); }

    const GprModel& model() const { return model_; }

private:
    GprModel model_;
    std::optional<std::size_t> capacity_;
    std::size_t initial_ = 0;
};

struct TraceEntry {
    std::size_t index = 0;
    Decision decision = Decision::critical;
    double sigma = 0.0;
    std::size_t n_online = 0;  ///< cumulative
    bool accepted = false;
    bool update_skipped = false;
};

struct HybridReport {
    YieldEstimate estimate;
    std::size_t n_train = 0;
    std::size_t n_online = 0;
    std::size_t n_gpr = 0;
    std::size_t n_tot = 0;
    std::vector<TraceEntry> trace;
};

/// Blackbox failure during a hybrid estimate; carries the trace up to the
/// failing sample.
class HybridEvaluationError : public SampleEvaluationError {
public:
    HybridEvaluationError(std::size_t index, const std::string& what, std::exception_ptr cause, HybridReport partial)
        : SampleEvaluationError(index, what, std::move(cause)), partial_(std::move(partial)) {}
    const HybridReport& partial() const { return partial_; }

private:
    HybridReport partial_;
};

/// Joint surrogate input (d1, d2, d3, s, p...).
std::vector<double> joint_input(const DesignVector& x, std::span<const double> p);

/// Hybrid yield estimate over `samples` in index order. Critical samples go
/// to the blackbox and are offered to the surrogate before the next sample.
/// `n_train` only feeds the report's accounting.
HybridReport estimate_yield_hybrid(QoiModel& model, Surrogate& surrogate, const DesignVector& x,
                                   const SampleSet& samples, const PerformanceSpec& pfs, const HybridConfig& cfg,
                                   std::size_t n_train);

/// Convenience overload working on a private copy of `gpr0`.
HybridReport estimate_yield_hybrid(QoiModel& model, const GprModel& gpr0, const DesignVector& x,
                                   const SampleSet& samples, const PerformanceSpec& pfs, const HybridConfig& cfg);

enum class TrainingCase {
    joint,       ///< x uniform over the design box, p uniform over its box
    parameters,  ///< x fixed, p uniform over its box
};

struct TrainingData {
    std::vector<std::vector<double>> inputs;
    std::vector<double> outputs;
};

/// n blackbox evaluations at uniform points of the training box. `fixed_x` is
/// used for TrainingCase::parameters.
TrainingData build_initial_training(const UncertaintySpec& spec, const DesignConstraints& constraints, std::size_t n,
                                    std::uint64_t seed, QoiModel& model, TrainingCase which = TrainingCase::joint,
                                    const DesignVector& fixed_x = DesignVector::nominal());

/// CSV: iteration, sample_index, decision, sigma_gpr, n_online.
void write_trace_csv(const HybridReport& report, const std::filesystem::path& path);

}  // namespace yieldopt
