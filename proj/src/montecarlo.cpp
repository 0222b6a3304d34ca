#include "yieldopt/montecarlo.hpp"

#include <cmath>
#include <stdexcept>

namespace yieldopt {

YieldEstimate make_estimate(std::vector<std::uint8_t> accepted) {
    YieldEstimate est;
    est.n_samples = accepted.size();
    for (auto a : accepted) est.n_accepted += a ? 1 : 0;
    est.accepted = std::move(accepted);
    if (est.n_samples > 0) {
        est.value = static_cast<double>(est.n_accepted) / static_cast<double>(est.n_samples);
        est.sigma = mc_sigma(est.value, est.n_samples);
    }
    return est;
}

double mc_sigma(double yield, std::size_t n) {
    if (!(yield >= 0.0 && yield <= 1.0)) throw std::invalid_argument("mc_sigma: yield must lie in [0, 1]");
    if (n == 0) throw std::invalid_argument("mc_sigma: need n >= 1");
    return std::sqrt(yield * (1.0 - yield) / static_cast<double>(n));
}

std::size_t sample_size_for(double sigma_target) {
    if (!(sigma_target > 0.0 && sigma_target <= 0.5)) {
        throw std::invalid_argument("sample_size_for: sigma target must lie in (0, 0.5]");
    }
    const double n = 1.0 / ((2.0 * sigma_target) * (2.0 * sigma_target));
    // 1/(2*0.01)^2 evaluates to 2500.0000000000005; do not round that up.
    const double nearest = std::round(n);
    if (std::abs(n - nearest) <= 1e-9 * nearest) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(n));
}

YieldEstimate mc_yield(QoiModel& model, const DesignVector& x, const SampleSet& samples, const PerformanceSpec& pfs) {
    if (samples.empty()) throw std::invalid_argument("mc_yield: empty sample set");
    std::vector<std::uint8_t> accepted(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double q;
        try {
            q = model.evaluate(x, samples[i]);
        } catch (const ModelError& e) {
            throw SampleEvaluationError(i, e.what(), std::current_exception());
        }
        accepted[i] = pfs.satisfied(q) ? 1 : 0;
    }
    auto est = make_estimate(std::move(accepted));
    est.n_blackbox = samples.size();
    return est;
}

}  // namespace yieldopt
