#pragma once

#include <cstdint>
#include <vector>

#include "yieldopt/design.hpp"
#include "yieldopt/qoi_model.hpp"
#include "yieldopt/sampling.hpp"
#include "yieldopt/uncertainty.hpp"

namespace yieldopt {

/// Fraction of sample points inside the safe domain.
struct YieldEstimate {
    double value = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_accepted = 0;
    double sigma = 0.0;
    std::vector<std::uint8_t> accepted;  ///< per sample, 1 = inside the safe domain
    std::size_t n_blackbox = 0;          ///< blackbox evaluations spent on this estimate
    std::size_t n_surrogate = 0;         ///< surrogate-only classifications

    std::size_t n_rejected() const { return n_samples - n_accepted; }
};

/// Builds value and sigma from per-sample labels.
YieldEstimate make_estimate(std::vector<std::uint8_t> accepted);

/// Standard deviation sqrt(y (1 - y) / n) of the Monte Carlo yield estimator.
double mc_sigma(double yield, std::size_t n);

/// Smallest N with the worst-case bound 0.5 / sqrt(N) <= sigma_target,
/// i.e. ceil(1 / (2 sigma_target)^2).
std::size_t sample_size_for(double sigma_target);

/// Plain Monte Carlo yield: every sample is evaluated on the blackbox.
/// Model failures are rethrown as SampleEvaluationError.
YieldEstimate mc_yield(QoiModel& model, const DesignVector& x, const SampleSet& samples, const PerformanceSpec& pfs);

}  // namespace yieldopt
