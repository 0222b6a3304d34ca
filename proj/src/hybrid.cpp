#include "yieldopt/hybrid.hpp"

#include <algorithm>
#include <stdexcept>

#include "yieldopt/io.hpp"
#include "yieldopt/random.hpp"

namespace yieldopt {

const char* to_string(Decision d) {
    switch (d) {
        case Decision::surrogate_accept: return "surrogate-accept";
        case Decision::surrogate_reject: return "surrogate-reject";
        case Decision::critical: return "critical";
    }
    return "?";
}

Decision classify(double pred_mean, double pred_std, double c, double gamma) {
    if (pred_mean + gamma * pred_std <= c) return Decision::surrogate_accept;
    if (pred_mean - gamma * pred_std >= c) return Decision::surrogate_reject;
    return Decision::critical;
}

bool GprSurrogate::absorb(std::span<const double> y, double q) {
    if (capacity_ && model_.size() >= *capacity_) {
        if (model_.size() <= initial_) return false;
        const auto drop = static_cast<std::ptrdiff_t>(
            std::min(std::max<std::size_t>(1, (*capacity_ - std::min(initial_, *capacity_)) / 4), model_.size() - initial_));
        const auto keep = static_cast<std::ptrdiff_t>(initial_);
        auto in = model_.inputs();
        auto out = model_.outputs();
        in.erase(in.begin() + keep, in.begin() + keep + drop);
        out.erase(out.begin() + keep, out.begin() + keep + drop);
        GprConfig cfg = model_.config();
        cfg.refit_every = 0;
        try {
            model_ = GprModel::fit(in, out, cfg);
        } catch (const GprError&) {
            model_ = GprModel::fit_fixed(in, out, model_.zeta(), model_.length_scale(), model_.scaling(),
                                         model_.jitter_relative(), cfg);
        }
    }
    if (model_.admission(y) != GprModel::Admission::ok) return false;
    model_.append(y, q);
    return true;
}

std::vector<double> joint_input(const DesignVector& x, std::span<const double> p) {
    std::vector<double> y{x.d1, x.d2, x.d3, x.s};
    y.insert(y.end(), p.begin(), p.end());
    return y;
}

HybridReport estimate_yield_hybrid(QoiModel& model, Surrogate& surrogate, const DesignVector& x,
                                   const SampleSet& samples, const PerformanceSpec& pfs, const HybridConfig& cfg,
                                   std::size_t n_train) {
    if (samples.empty()) throw std::invalid_argument("hybrid: empty sample set");
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("hybrid: gamma must be positive");

    HybridReport rep;
    rep.n_train = n_train;
    rep.trace.reserve(samples.size());
    std::vector<std::uint8_t> accepted(samples.size());
    const double c = pfs.canonical_threshold();
    std::vector<double> y = joint_input(x, samples[0]);

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto p = samples[i];
        std::copy(p.begin(), p.end(), y.begin() + DesignVector::size);
        const GprPrediction pred = surrogate.predict(y);
        TraceEntry t;
        t.index = i;
        t.sigma = pred.std;
        t.decision = classify(pfs.canonical(pred.mean), pred.std, c, cfg.gamma);
        if (t.decision == Decision::critical) {
            double q;
            try {
                q = model.evaluate(x, p);
            } catch (const ModelError& e) {
                rep.n_tot = rep.n_train + rep.n_online;
                throw HybridEvaluationError(i, e.what(), std::current_exception(), std::move(rep));
            }
            ++rep.n_online;
            t.accepted = pfs.satisfied(q);
            t.update_skipped = !surrogate.absorb(y, q);
        } else {
            ++rep.n_gpr;
            t.accepted = t.decision == Decision::surrogate_accept;
        }
        t.n_online = rep.n_online;
        accepted[i] = t.accepted ? 1 : 0;
        rep.trace.push_back(t);
    }

    rep.estimate = make_estimate(std::move(accepted));
    rep.estimate.n_blackbox = rep.n_online;
    rep.estimate.n_surrogate = rep.n_gpr;
    rep.n_tot = rep.n_train + rep.n_online;
    return rep;
}

HybridReport estimate_yield_hybrid(QoiModel& model, const GprModel& gpr0, const DesignVector& x,
                                   const SampleSet& samples, const PerformanceSpec& pfs, const HybridConfig& cfg) {
    GprSurrogate s(gpr0);
    return estimate_yield_hybrid(model, s, x, samples, pfs, cfg, gpr0.size());
}

TrainingData build_initial_training(const UncertaintySpec& spec, const DesignConstraints& constraints, std::size_t n,
                                    std::uint64_t seed, QoiModel& model, TrainingCase which,
                                    const DesignVector& fixed_x) {
    if (n < 2) throw std::invalid_argument("build_initial_training: need n >= 2");
    const DesignBox box = design_box(constraints);
    const auto lo = box.lower.as_array(), hi = box.upper.as_array();
    const std::uint64_t xs = derive_seed(seed, 0x7472'6169'6e78ULL);
    const std::uint64_t ps = derive_seed(seed, 0x7472'6169'6e70ULL);

    TrainingData data;
    for (std::size_t i = 0; i < n; ++i) {
        DesignVector x = fixed_x;
        if (which == TrainingCase::joint) {
            std::array<double, 4> a{};
            for (std::size_t j = 0; j < 4; ++j) a[j] = lo[j] + (hi[j] - lo[j]) * counter_uniform(xs, i, j);
            x = DesignVector::from_array(a);
        }
        std::vector<double> p(spec.dim());
        for (std::size_t j = 0; j < spec.dim(); ++j) {
            const auto& e = spec[j];
            p[j] = e.mean + e.half_width * (2.0 * counter_uniform(ps, i, j) - 1.0);
        }
        data.outputs.push_back(model.evaluate(x, p));
        data.inputs.push_back(joint_input(x, p));
    }
    return data;
}

void write_trace_csv(const HybridReport& report, const std::filesystem::path& path) {
    CsvTable t({"iteration", "sample_index", "decision", "sigma_gpr", "n_online"});
    for (std::size_t k = 0; k < report.trace.size(); ++k) {
        const auto& e = report.trace[k];
        t.row({std::to_string(k + 1), std::to_string(e.index), to_string(e.decision), format_double(e.sigma),
               std::to_string(e.n_online)});
    }
    t.write(path);
}

}  // namespace yieldopt
