#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "yieldopt/gpr.hpp"
#include "yieldopt/random.hpp"

using namespace yieldopt;

namespace {

std::vector<std::vector<double>> points(std::uint64_t seed, std::size_t n, std::size_t dim) {
    SplitMix64 rng(seed);
    std::vector<std::vector<double>> p(n, std::vector<double>(dim));
    for (auto& v : p)
        for (auto& c : v) c = rng.uniform() * 2 - 1;
    return p;
}

// Closed-form posterior with an explicit inverse.
GprPrediction oracle(const GprModel& g, const std::vector<double>& y) {
    const auto in = g.inputs();
    const auto out = g.outputs();
    const auto n = static_cast<Eigen::Index>(in.size());
    const double z2 = g.zeta() * g.zeta(), l2 = g.length_scale() * g.length_scale();
    Eigen::MatrixXd k(n, n);
    Eigen::VectorXd ks(n), q(n);
    const Eigen::VectorXd zy = g.scaling().apply(y);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd zi = g.scaling().apply(in[static_cast<std::size_t>(i)]);
        ks(i) = z2 * std::exp(-(zi - zy).squaredNorm() / (2 * l2));
        q(i) = out[static_cast<std::size_t>(i)] - g.prior_mean();
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::VectorXd zj = g.scaling().apply(in[static_cast<std::size_t>(j)]);
            k(i, j) = z2 * std::exp(-(zi - zj).squaredNorm() / (2 * l2));
        }
    }
    k.diagonal().array() += g.jitter();
    const Eigen::MatrixXd inv = k.inverse();
    return {g.prior_mean() + ks.dot(inv * q), std::sqrt(std::max(0.0, z2 - ks.dot(inv * ks)))};
}

}  // namespace

TEST_CASE("rbf kernel values") {
    const std::vector<double> a{0.3, -1.0}, b{1.3, 0.0};
    CHECK(rbf_kernel(a, a, 2.0, 0.7) == doctest::Approx(4.0));
    CHECK(rbf_kernel(a, b, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(rbf_kernel(a, b, 1.3, 0.4) == rbf_kernel(b, a, 1.3, 0.4));
    const std::vector<double> far{30.3, -1.0};
    CHECK(rbf_kernel(a, far, 1.0, 1.0) <= std::exp(-50.0));
    CHECK_THROWS(rbf_kernel(a, b, 0.0, 1.0));
}

TEST_CASE("constant outputs predict the constant") {
    const auto in = points(1, 6, 3);
    const std::vector<double> out(6, 4.2);
    const GprModel g = GprModel::fit(in, out);
    const std::vector<double> y{0.1, 0.2, -0.3};
    const auto p = g.predict(y);
    CHECK(p.mean == doctest::Approx(4.2));
    CHECK(p.std <= g.zeta());
}

TEST_CASE("three padded points match the dense oracle") {
    std::vector<std::vector<double>> in{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
    const std::vector<double> out{1.0, 2.0, -0.5};
    in[0][2] = 1.0 + 1e-3;  // keep every coordinate non-degenerate
    const GprModel g = GprModel::fit(in, out);
    const std::vector<double> y{0.4, 0.3, 1.0};
    const auto p = g.predict(y), o = oracle(g, y);
    CHECK(p.mean == doctest::Approx(o.mean).epsilon(1e-10));
    CHECK(p.std == doctest::Approx(o.std).epsilon(1e-8));
}

TEST_CASE("two point case matches the dense oracle") {
    const std::vector<std::vector<double>> in{{0.0, 0.0}, {1.0, 2.0}};
    const std::vector<double> out{3.0, 5.0};
    const GprModel g = GprModel::fit(in, out);
    const std::vector<double> y{0.5, 0.7};
    CHECK(g.predict(y).mean == doctest::Approx(oracle(g, y).mean).epsilon(1e-10));
}

TEST_CASE("interpolation and prior reversion") {
    const auto in = points(2, 20, 16);
    std::vector<double> out(20);
    for (std::size_t i = 0; i < 20; ++i) out[i] = in[i][0] * 3 + std::sin(in[i][5]);
    const GprModel g = GprModel::fit(in, out);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto p = g.predict(in[i]);
        CHECK(p.mean == doctest::Approx(out[i]).epsilon(1e-6));
        CHECK(p.std <= 1e-3 * g.zeta());
    }
    std::vector<double> far(16, 1e4);
    const auto p = g.predict(far);
    CHECK(std::abs(p.mean - g.prior_mean()) <= 1e-6 * g.zeta());
    CHECK(std::abs(p.std - g.zeta()) <= 1e-6 * g.zeta());
}

TEST_CASE("update equals a refit with fixed hyperparameters") {
    GprConfig cfg;
    cfg.refit_every = 0;
    const auto in = points(3, 10, 4);
    std::vector<double> out(10);
    for (std::size_t i = 0; i < 10; ++i) out[i] = in[i][0] - 2 * in[i][1] * in[i][2];
    const std::vector<std::vector<double>> head(in.begin(), in.begin() + 7);
    const std::vector<double> head_out(out.begin(), out.begin() + 7);
    GprModel g = GprModel::fit(head, head_out, cfg);
    for (std::size_t i = 7; i < 10; ++i) g = g.update(in[i], out[i]);
    CHECK(g.predict(in[9]).mean == doctest::Approx(out[9]).epsilon(1e-6));
    const GprModel full =
        GprModel::fit_fixed(in, out, g.zeta(), g.length_scale(), g.scaling(), g.jitter_relative(), cfg);
    for (const auto& y : points(4, 30, 4)) {
        CHECK(std::abs(g.predict(y).mean - full.predict(y).mean) <= 1e-8);
    }
}

TEST_CASE("far update keeps old outputs") {
    const auto in = points(5, 8, 2);
    std::vector<double> out(8);
    for (std::size_t i = 0; i < 8; ++i) out[i] = std::sin(3 * in[i][0]) * std::cos(2 * in[i][1]);
    const GprModel g = GprModel::fit(in, out);
    const GprModel u = g.update(std::vector<double>{50.0, 50.0}, 0.5);
    for (std::size_t i = 0; i < 8; ++i) CHECK(u.predict(in[i]).mean == doctest::Approx(out[i]).epsilon(1e-6));
}

TEST_CASE("duplicates are refused") {
    const auto in = points(6, 5, 2);
    const std::vector<double> out{1, 2, 3, 4, 5};
    const GprModel g = GprModel::fit(in, out);
    CHECK(g.admission(in[2]) == GprModel::Admission::duplicate);
    CHECK_THROWS_AS(g.update(in[2], 3.0), DuplicateInputError);
    auto dup = in;
    dup.push_back(in[0]);
    CHECK_THROWS_AS(GprModel::fit(dup, {1, 2, 3, 4, 5, 1}), DuplicateInputError);
    CHECK_THROWS(GprModel::fit({in[0]}, {1.0}));
}

TEST_CASE("hyperparameters refresh on the configured cadence") {
    GprConfig cfg;
    cfg.refit_every = 3;
    const auto in = points(7, 12, 3);
    std::vector<double> out(12);
    for (std::size_t i = 0; i < 12; ++i) out[i] = std::cos(3 * in[i][0]);
    GprModel g = GprModel::fit({in.begin(), in.begin() + 6}, {out.begin(), out.begin() + 6}, cfg);
    for (std::size_t i = 6; i < 9; ++i) g = g.update(in[i], out[i]);
    CHECK(g.updates_since_refit() == 0);
    g = g.update(in[9], out[9]);
    CHECK(g.updates_since_refit() == 1);
}

TEST_CASE("json snapshot round trip") {
    const auto in = points(8, 9, 5);
    std::vector<double> out(9);
    for (std::size_t i = 0; i < 9; ++i) out[i] = in[i][4];
    const GprModel g = GprModel::fit(in, out);
    const GprModel r = GprModel::from_json(g.to_json());
    const std::vector<double> y{0.1, 0.2, 0.3, 0.4, 0.5};
    CHECK(r.predict(y).mean == g.predict(y).mean);
    CHECK(r.predict(y).std == g.predict(y).std);
    CHECK(r.to_json() == g.to_json());
}
