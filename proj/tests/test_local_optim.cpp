#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "yieldopt/dfo.hpp"
#include "yieldopt/local_optim.hpp"
#include "yieldopt/pmsm_constants.hpp"
#include "yieldopt/random.hpp"
#include "yieldopt/synthetic_pmsm.hpp"
#include "yieldopt/yield_problem.hpp"

using namespace yieldopt;

namespace {

class CostOnly final : public ScalarProblem {
public:
    ProblemValue evaluate(const DesignVector& x, std::size_t) override { return {cost(x), {}}; }
};

class Bowl final : public ScalarProblem {
public:
    DesignVector center{15.0, 6.0, 6.5, 1.0};
    ProblemValue evaluate(const DesignVector& x, std::size_t) override {
        const double f = std::pow(x.d1 - center.d1, 2) + std::pow(x.d2 - center.d2, 2) +
                         std::pow(x.d3 - center.d3, 2) + std::pow(x.s - center.s, 2);
        return {f, {}};
    }
};

// Deterministic pseudo-random landscape: no model ever fits it.
class Rough final : public ScalarProblem {
public:
    ProblemValue evaluate(const DesignVector& x, std::size_t) override {
        std::uint64_t h = 0;
        for (double v : x.as_array()) h = mix64(h ^ static_cast<std::uint64_t>(std::llround(v * 1e9)));
        return {to_unit(h), {}};
    }
};

class Recording final : public ScalarProblem {
public:
    std::vector<std::size_t> fidelities;
    ProblemValue evaluate(const DesignVector& x, std::size_t fidelity) override {
        fidelities.push_back(fidelity);
        return {std::pow(x.d1 - 12.0, 2) + std::pow(x.d2 - 5.0, 2), {}};
    }
};

double grid_min_cost(const DesignConstraints& c) {
    double best = std::numeric_limits<double>::infinity();
    for (double d1 = 10; d1 <= 23.4; d1 += 0.1)
        for (double d2 = 4; d2 <= 11; d2 += 0.1)
            for (double d3 = 4; d3 <= 10; d3 += 0.5)
                for (double s = -5; s <= 5; s += 1)
                    if (check_constraints({d1, d2, d3, s}, c).feasible()) best = std::min(best, d1 * d2);
    return best;
}

}  // namespace

TEST_CASE("delta_f examples") {
    const double a[] = {1, 1, 1, 1, 1}, b[] = {1, 2, 3, 4, 2.5}, c[] = {0, 0, 0, 0, 4};
    CHECK(delta_f(a) == 0.0);
    CHECK(delta_f(b) == 0.0);
    CHECK(delta_f(c) == 4.0);
    const double shifted[] = {101, 102, 103, 104, 110};
    const double plain[] = {1, 2, 3, 4, 10};
    CHECK(delta_f(shifted) == doctest::Approx(delta_f(plain)));
    const double four[] = {1, 2, 3, 4};
    CHECK_THROWS_AS(delta_f(four), std::invalid_argument);
}

TEST_CASE("cost minimization reaches the grid optimum") {
    const auto cons = DesignConstraints::defaults();
    CostOnly p;
    const OptimRun r = dfo_minimize(p, DesignVector::nominal(), cons, DfoOptions{});
    CHECK(r.best.objective <= 1.01 * grid_min_cost(cons));
}

TEST_CASE("interior quadratic minimum") {
    Bowl p;
    DfoOptions o;
    o.max_fev = 300;
    o.delta_f_tol = 0;
    o.radius_end = 1e-7;
    const OptimRun r = dfo_minimize(p, DesignVector::nominal(), DesignConstraints::defaults(), o);
    const auto a = r.best.design.as_array(), b = p.center.as_array();
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-3);
}

TEST_CASE("budget exhaustion") {
    Rough p;
    DfoOptions o;
    o.delta_f_tol = 0;
    o.radius_end = 1e-300;
    const OptimRun r = dfo_minimize(p, DesignVector::nominal(), DesignConstraints::defaults(), o);
    CHECK(r.terminated_by == Termination::max_fev);
    CHECK(r.history.size() == 100);
}

TEST_CASE("solver preconditions") {
    CostOnly p;
    const auto cons = DesignConstraints::defaults();
    CHECK_THROWS_AS(dfo_minimize(p, {20, 7, 4, 0}, cons, DfoOptions{}), std::invalid_argument);
    DfoOptions small;
    small.max_fev = 8;
    CHECK_THROWS_AS(dfo_minimize(p, DesignVector::nominal(), cons, small), std::invalid_argument);
}

TEST_CASE("iterates respect the linear constraints") {
    const auto cons = DesignConstraints::defaults();
    CostOnly p;
    Bowl b;
    b.center = {30, 12, 12, 9};  // outside, pushes against the constraints
    for (ScalarProblem* prob : {static_cast<ScalarProblem*>(&p), static_cast<ScalarProblem*>(&b)}) {
        const OptimRun r = dfo_minimize(*prob, DesignVector::nominal(), cons, DfoOptions{});
        for (const auto& h : r.history) {
            for (double s : check_constraints(h.design, cons).slacks) CHECK(s >= -1e-12);
        }
    }
}

TEST_CASE("single start equals a plain run with a fidelity switch") {
    const auto cons = DesignConstraints::defaults();
    MultiStartConfig cfg;
    cfg.n_starts = 1;
    DfoOptions o;
    o.max_fev = 40;
    Recording a, b;
    const auto ms = multi_start(a, {DesignVector::nominal()}, cons, cfg, o);
    o.fidelity = cfg.low_fidelity_mc;
    FidelitySwitch sw{cfg.exploration_fev, cfg.high_fidelity_mc, "exploitation"};
    const auto plain = dfo_minimize(b, DesignVector::nominal(), cons, o, &sw);
    REQUIRE(ms.run.history.size() == plain.history.size());
    for (std::size_t i = 0; i < plain.history.size(); ++i) {
        CHECK(ms.run.history[i].design == plain.history[i].design);
        CHECK(ms.run.history[i].fidelity == plain.history[i].fidelity);
    }
    CHECK(a.fidelities == b.fidelities);
}

TEST_CASE("latin hypercube starts are feasible and reproducible") {
    const auto cons = DesignConstraints::defaults();
    const auto a = latin_hypercube_starts(cons, 12, 3);
    CHECK(a.size() == 12);
    for (const auto& x : a) CHECK(check_constraints(x, cons).feasible());
    CHECK(a == latin_hypercube_starts(cons, 12, 3));
    CHECK(a != latin_hypercube_starts(cons, 12, 4));
}

TEST_CASE("eps-constraint keeps the cost bound") {
    const auto spec = UncertaintySpec::pmsm_default();
    const auto cons = DesignConstraints::defaults();
    SyntheticPmsm m;
    YieldEvaluatorConfig yc;
    yc.mode = YieldMode::mc;
    yc.seed = 3;
    YieldEvaluator ev(m, spec, cons, {pmsm::default_torque_threshold, Direction::at_least}, yc);
    DfoOptions o;
    o.max_fev = 40;
    const OptimRun r = solve_eps_constraint(ev, cons, DesignVector::nominal(), 125.0, o);
    CHECK(r.best_feasible);
    CHECK(r.best.cost <= 125.0 + 1e-9);
    CHECK(r.history.size() == r.n_fev);
    for (const auto& h : r.history) {
        CHECK(h.yield >= 0.0);
        CHECK(h.cost == doctest::Approx(cost(h.design)));
    }
}

TEST_CASE("runs are deterministic") {
    const auto spec = UncertaintySpec::pmsm_default();
    const auto cons = DesignConstraints::defaults();
    auto once = [&] {
        SyntheticPmsm m;
        YieldEvaluatorConfig yc;
        yc.seed = 8;
        yc.surrogate_capacity = 300;
        YieldEvaluator ev(m, spec, cons, {pmsm::default_torque_threshold, Direction::at_least}, yc);
        DfoOptions o;
        o.max_fev = 30;
        return solve_weighted_sum(ev, cons, DesignVector::nominal(), 2e-3, o);
    };
    const auto a = once(), b = once();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].design == b.history[i].design);
        CHECK(a.history[i].objective == b.history[i].objective);
    }
}
