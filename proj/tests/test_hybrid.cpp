#include <doctest.h>

#include <vector>

#include "yieldopt/hybrid.hpp"
#include "yieldopt/montecarlo.hpp"
#include "yieldopt/pmsm_constants.hpp"
#include "yieldopt/random.hpp"
#include "yieldopt/sampling.hpp"
#include "yieldopt/synthetic_pmsm.hpp"
#include "yieldopt/yield_problem.hpp"

using namespace yieldopt;

namespace {

const PerformanceSpec spec_pfs{pmsm::default_torque_threshold, Direction::at_least};

// Predicts the synthetic torque exactly with zero spread.
class PerfectSurrogate final : public Surrogate {
public:
    GprPrediction predict(std::span<const double> y) const override {
        const DesignVector x{y[0], y[1], y[2], y[3]};
        return {synthetic_torque(x, y.subspan(4)), 0.0};
    }
    bool absorb(std::span<const double>, double) override { return false; }
    std::size_t size() const override { return 0; }
};

struct Fixture {
    UncertaintySpec spec = UncertaintySpec::pmsm_default();
    DesignConstraints cons = DesignConstraints::defaults();
    SyntheticPmsm model;
    SampleSet samples = sample_uniform(spec, 2500, 31);
};

}  // namespace

TEST_CASE("classification examples") {
    const double c = 3.0;
    CHECK(classify(c - 1, 0.1, c, 2.0) == Decision::surrogate_accept);
    CHECK(classify(c, 0.1, c, 2.0) == Decision::critical);
    CHECK(classify(c + 0.05, 0.02, c, 2.0) == Decision::surrogate_reject);
}

TEST_CASE("critical set grows with gamma") {
    SplitMix64 rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double m = rng.uniform() * 2 - 1, s = rng.uniform() * 0.5;
        const double g1 = rng.uniform() * 3, g2 = g1 + rng.uniform() * 3;
        if (classify(m, s, 0.0, g1) == Decision::critical) CHECK(classify(m, s, 0.0, g2) == Decision::critical);
    }
}

TEST_CASE("perfect surrogate needs no blackbox") {
    Fixture f;
    const DesignVector x{18.0, 7.4, 8.0, 1.0};
    PerfectSurrogate sur;
    HybridConfig hc;
    const auto r = estimate_yield_hybrid(f.model, sur, x, f.samples, spec_pfs, hc, 0);
    CHECK(r.n_online == 0);
    const auto mc = mc_yield(f.model, x, f.samples, spec_pfs);
    CHECK(r.estimate.accepted == mc.accepted);
}

TEST_CASE("hybrid estimate bookkeeping and replay") {
    Fixture f;
    const DesignVector x = DesignVector::nominal();
    const auto d = build_initial_training(f.spec, f.cons, 20, 5, f.model, TrainingCase::parameters, x);
    CHECK(d.inputs.size() == 20);
    CHECK(f.model.evaluation_count() == 20);
    const GprModel g = GprModel::fit(d.inputs, d.outputs);
    HybridConfig hc;
    const auto before = f.model.evaluation_count();
    const auto r = estimate_yield_hybrid(f.model, g, x, f.samples, spec_pfs, hc);
    CHECK(r.n_train == 20);
    CHECK(r.n_online == f.model.evaluation_count() - before);
    CHECK(r.n_online + r.n_gpr == f.samples.size());
    CHECK(r.n_tot == r.n_train + r.n_online);
    CHECK(r.estimate.n_accepted + r.estimate.n_rejected() == f.samples.size());
    CHECK(r.trace.size() == f.samples.size());
    for (const auto& t : r.trace) {
        if (t.decision != Decision::critical) continue;
        const bool truth = spec_pfs.satisfied(synthetic_torque(x, f.samples[t.index]));
        CHECK(t.accepted == truth);
    }
}

TEST_CASE("joint training varies the design") {
    Fixture f;
    const auto d = build_initial_training(f.spec, f.cons, 20, 8, f.model);
    const DesignBox box = design_box(f.cons);
    bool varied = false;
    for (const auto& y : d.inputs) {
        CHECK(y.size() == 16);
        const DesignVector x{y[0], y[1], y[2], y[3]};
        const auto a = x.as_array(), lo = box.lower.as_array(), hi = box.upper.as_array();
        for (int k = 0; k < 4; ++k) CHECK((a[k] >= lo[k] && a[k] <= hi[k]));
        varied = varied || y[0] != d.inputs[0][0];
    }
    CHECK(varied);
    const auto two = build_initial_training(f.spec, f.cons, 2, 8, f.model);
    CHECK_NOTHROW(GprModel::fit(two.inputs, two.outputs));
}

TEST_CASE("surrogate window keeps the initial training set") {
    Fixture f;
    const auto d = build_initial_training(f.spec, f.cons, 20, 3, f.model);
    GprSurrogate sur(GprModel::fit(d.inputs, d.outputs), 40);
    const auto more = build_initial_training(f.spec, f.cons, 60, 4, f.model);
    for (std::size_t i = 0; i < more.inputs.size(); ++i) sur.absorb(more.inputs[i], more.outputs[i]);
    CHECK(sur.size() <= 40);
    const auto kept = sur.model().inputs();
    for (std::size_t i = 0; i < 20; ++i) CHECK(kept[i] == d.inputs[i]);
}

TEST_CASE("evaluator reuses sample sets and counts evaluations") {
    Fixture f;
    YieldEvaluatorConfig cfg;
    cfg.seed = 2;
    YieldEvaluator ev(f.model, f.spec, f.cons, spec_pfs, cfg);
    const auto a = ev.estimate(DesignVector::nominal(), 500);
    const auto b = ev.estimate(DesignVector::nominal(), 500);
    CHECK(a.value == doctest::Approx(b.value).epsilon(0.05));
    CHECK(ev.offline_evaluations() == 20);
    CHECK(ev.blackbox_evaluations() == f.model.evaluation_count());
    CHECK(ev.samples(500) == ev.samples(500));
    CHECK(ev.estimates() == 2);
}
