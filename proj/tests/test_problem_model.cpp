#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "yieldopt/design.hpp"
#include "yieldopt/external_model.hpp"
#include "yieldopt/pmsm_constants.hpp"
#include "yieldopt/synthetic_pmsm.hpp"
#include "yieldopt/uncertainty.hpp"

using namespace yieldopt;

TEST_CASE("cost is the magnet surface") {
    CHECK(cost({0, 7, 7, 0}) == 0.0);
    CHECK(cost(DesignVector::nominal()) == doctest::Approx(133.0));
    CHECK(cost({10, 10, 7, 0}) == doctest::Approx(100.0));
}

TEST_CASE("constraint slacks") {
    const auto c = DesignConstraints::defaults();
    CHECK(check_constraints(DesignVector::nominal(), c).feasible());
    CHECK(check_constraints({19, 8, 7, 0}, c).feasible());  // d2 + d3 = 15
    const auto r = check_constraints({20, 7, 4, 0}, c);
    CHECK_FALSE(r.feasible());
    CHECK(r.violation() == doctest::Approx(2.0));
    CHECK(r.labels.size() == r.slacks.size());
}

TEST_CASE("design box is the bounding box of the polytope") {
    const auto b = design_box(DesignConstraints::defaults());
    CHECK(b.lower.d1 == doctest::Approx(10.0));
    CHECK(b.upper.d1 == doctest::Approx(70.0 / 3.0));
    CHECK(b.upper.d2 == doctest::Approx(11.0));
    CHECK(b.upper.d3 == doctest::Approx(10.0));
    CHECK(b.upper.s == doctest::Approx(5.0));
    DesignConstraints empty;
    empty.linear_rows.push_back({{1, 0, 0, 0}, 5.0, "d1<=5"});
    CHECK_THROWS_AS(design_box(empty), std::invalid_argument);
}

TEST_CASE("uncertainty spec") {
    const auto spec = UncertaintySpec::pmsm_default();
    CHECK(spec.dim() == 12);
    CHECK(spec[0].half_width == doctest::Approx(0.05));
    CHECK(spec[6].half_width == doctest::Approx(3.0));
    CHECK_THROWS_AS(UncertaintySpec({{1.0, 0.0, "bad"}}), std::invalid_argument);
}

TEST_CASE("performance spec canonical form") {
    const PerformanceSpec at_least{10.0, Direction::at_least};
    CHECK(at_least.canonical(11.0) == -11.0);
    CHECK(at_least.satisfied(10.0));
    CHECK_FALSE(at_least.satisfied(9.9));
    const PerformanceSpec at_most{10.0, Direction::at_most};
    CHECK(at_most.satisfied(9.9));
    CHECK(direction_from_string(to_string(Direction::at_least)) == Direction::at_least);
}

TEST_CASE("synthetic torque") {
    const auto mean = UncertaintySpec::pmsm_default().means();
    CHECK(synthetic_torque(DesignVector::nominal(), mean) == doctest::Approx(10.64).epsilon(1e-12));

    auto scaled = mean;
    for (int i = 0; i < 6; ++i) scaled[i] *= 1.03;
    CHECK(synthetic_torque(DesignVector::nominal(), scaled) == doctest::Approx(10.64 * 1.03).epsilon(1e-12));

    auto tilted = mean;
    tilted[6] = 3.0;
    CHECK(synthetic_torque(DesignVector::nominal(), tilted) < synthetic_torque(DesignVector::nominal(), mean));

    CHECK_THROWS_AS(synthetic_torque(DesignVector::nominal(), std::vector<double>(11, 0.9)), std::invalid_argument);
    CHECK(SyntheticPmsm::depth_factor(10.0) == doctest::Approx(1.15));
    CHECK(SyntheticPmsm::skew_factor(pmsm::skew_optimum_deg) == doctest::Approx(1.125));
}

TEST_CASE("models are deterministic and count evaluations") {
    SyntheticPmsm m;
    const auto p = UncertaintySpec::pmsm_default().means();
    const DesignVector x{15.5, 6.1, 8.2, -1.3};
    const double a = m.evaluate(x, p);
    const double b = m.evaluate(x, p);
    CHECK(a == b);
    CHECK(m.evaluation_count() == 2);
}

namespace {

ExternalModelOptions child(const std::string& mode) {
    ExternalModelOptions o;
    o.command = std::string(QOI_CHILD) + " " + mode;
    o.parameter_dim = 3;
    o.timeout = std::chrono::milliseconds(1500);
    return o;
}

}  // namespace

TEST_CASE("external model echoes and caches") {
    ExternalModel m(child("echo"));
    const std::vector<double> p{0.25, 1.0, 2.0};
    CHECK(m.evaluate(DesignVector::nominal(), p) == 0.25);
    CHECK(m.child_requests() == 1);
    CHECK(m.evaluate(DesignVector::nominal(), p) == 0.25);
    CHECK(m.child_requests() == 1);
    CHECK(m.evaluation_count() == 2);
    CHECK_THROWS_AS(m.evaluate(DesignVector::nominal(), std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("external model persistent cache") {
    const auto path = std::filesystem::temp_directory_path() / "yieldopt_test_cache.jsonl";
    std::filesystem::remove(path);
    const std::vector<double> p{0.5, 0.0, 0.0};
    {
        auto o = child("echo");
        o.cache_path = path;
        ExternalModel m(o);
        CHECK(m.evaluate(DesignVector::nominal(), p) == 0.5);
    }
    auto o = child("die");
    o.cache_path = path;
    ExternalModel m(o);
    CHECK(m.evaluate(DesignVector::nominal(), p) == 0.5);
    CHECK(m.child_requests() == 0);
    std::filesystem::remove(path);
}

TEST_CASE("external model failures are distinct") {
    const std::vector<double> p{0.1, 0.2, 0.3};
    {
        ExternalModel m(child("die"));
        CHECK_THROWS_AS(m.evaluate(DesignVector::nominal(), p), ChildExitError);
    }
    {
        ExternalModel m(child("garbage"));
        CHECK_THROWS_AS(m.evaluate(DesignVector::nominal(), p), ProtocolError);
    }
    {
        ExternalModel m(child("silent"));
        CHECK_THROWS_AS(m.evaluate(DesignVector::nominal(), p), TimeoutError);
    }
}

TEST_CASE("evaluation key is canonical") {
    const std::vector<double> p{0.1, 0.2};
    CHECK(evaluation_key(DesignVector::nominal(), p) == evaluation_key(DesignVector::nominal(), p));
    CHECK(evaluation_key(DesignVector::nominal(), p) != evaluation_key({19, 7, 7, 1}, p));
}
