#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "yieldopt/montecarlo.hpp"
#include "yieldopt/pmsm_constants.hpp"
#include "yieldopt/sampling.hpp"
#include "yieldopt/synthetic_pmsm.hpp"

using namespace yieldopt;

namespace {

class FirstParameter final : public QoiModel {
public:
    std::size_t parameter_dim() const override { return 1; }
    std::string name() const override { return "first"; }

protected:
    double do_evaluate(const DesignVector&, std::span<const double> p) override { return p[0]; }
};

class Failing final : public QoiModel {
public:
    std::size_t parameter_dim() const override { return 1; }
    std::string name() const override { return "failing"; }

protected:
    double do_evaluate(const DesignVector&, std::span<const double> p) override {
        if (p[0] > 0.9) throw ModelError("boom");
        return p[0];
    }
};

}  // namespace

TEST_CASE("sample_uniform stays in the box and is reproducible") {
    const auto spec = UncertaintySpec::pmsm_default();
    const SampleSet a = sample_uniform(spec, 1000, 3);
    const SampleSet b = sample_uniform(spec, 1000, 3);
    CHECK(a == b);
    CHECK(a.size() == 1000);
    CHECK(a.dim() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < 12; ++j) {
            CHECK(std::abs(a[i][j] - spec[j].mean) <= spec[j].half_width);
        }
    }
    CHECK_THROWS_AS(sample_uniform(spec, 0, 1), std::invalid_argument);
}

TEST_CASE("sample means converge") {
    const auto spec = UncertaintySpec::pmsm_default();
    const std::size_t n = 100000;
    const SampleSet s = sample_uniform(spec, n, 9);
    for (std::size_t j = 0; j < spec.dim(); ++j) {
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += s[i][j];
        const double se = spec[j].half_width / std::sqrt(3.0 * static_cast<double>(n));
        CHECK(std::abs(sum / static_cast<double>(n) - spec[j].mean) <= 3 * se);
    }
}

TEST_CASE("sample csv round trip") {
    const auto path = std::filesystem::temp_directory_path() / "yieldopt_samples.csv";
    const SampleSet s = sample_uniform(UncertaintySpec::pmsm_default(), 7, 5);
    write_samples_csv(s, path);
    const SampleSet r = read_samples_csv(path, 5);
    CHECK(r == s);
    std::filesystem::remove(path);
}

TEST_CASE("mc_sigma and sample_size_for") {
    CHECK(mc_sigma(0.5, 2500) == doctest::Approx(0.01));
    CHECK(mc_sigma(0.0428, 2500) == doctest::Approx(0.00405).epsilon(2e-3));
    CHECK(mc_sigma(0.0, 17) == 0.0);
    CHECK_THROWS_AS(mc_sigma(1.2, 10), std::invalid_argument);
    CHECK(sample_size_for(0.01) == 2500);
    CHECK(sample_size_for(0.5) == 1);
    CHECK(sample_size_for(0.005) == 10000);
    CHECK_THROWS_AS(sample_size_for(0.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_size_for(0.6), std::invalid_argument);
}

TEST_CASE("mc_yield edge cases") {
    SyntheticPmsm m;
    const SampleSet s = sample_uniform(UncertaintySpec::pmsm_default(), 200, 1);
    const auto x = DesignVector::nominal();
    CHECK(mc_yield(m, x, s, {1e6, Direction::at_least}).value == 0.0);
    const auto all = mc_yield(m, x, s, {0.0, Direction::at_least});
    CHECK(all.value == 1.0);
    CHECK(all.n_blackbox == 200);
    CHECK(all.n_accepted + all.n_rejected() == 200);
}

TEST_CASE("mc_yield of a symmetric indicator") {
    FirstParameter m;
    const UncertaintySpec spec({{2.0, 0.5, "p1"}});
    const SampleSet s = sample_uniform(spec, 100000, 4);
    const auto y = mc_yield(m, DesignVector::nominal(), s, {2.0, Direction::at_least});
    CHECK(std::abs(y.value - 0.5) <= 0.005);
    CHECK(y.value * 100000 == doctest::Approx(static_cast<double>(y.n_accepted)));
}

TEST_CASE("mc_yield reports the failing sample") {
    Failing m;
    const UncertaintySpec spec({{0.5, 0.5, "p1"}});
    const SampleSet s = sample_uniform(spec, 100, 2);
    std::size_t first = 100;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i][0] > 0.9) {
            first = i;
            break;
        }
    }
    REQUIRE(first < 100);
    try {
        mc_yield(m, DesignVector::nominal(), s, {0.5, Direction::at_most});
        FAIL("expected an exception");
    } catch (const SampleEvaluationError& e) {
        CHECK(e.index() == first);
    }
}

TEST_CASE("default threshold puts the nominal yield at 0.04") {
    SyntheticPmsm m;
    const std::size_t n = 1000000;
    const SampleSet s = sample_uniform(UncertaintySpec::pmsm_default(), n, 2024);
    const auto y = mc_yield(m, DesignVector::nominal(), s, {pmsm::default_torque_threshold, Direction::at_least});
    CHECK(std::abs(y.value - 0.04) <= 3 * mc_sigma(0.04, n));
}
