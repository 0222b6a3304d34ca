#include <doctest.h>

#include <algorithm>
#include <vector>

#include "yieldopt/nsga2.hpp"
#include "yieldopt/pareto.hpp"
#include "yieldopt/random.hpp"

using namespace yieldopt;

TEST_CASE("dominance") {
    const ObjectivePoint a{0.9, 100}, b{0.8, 110}, c{0.9, 100};
    CHECK(dominates(a, b));
    CHECK_FALSE(dominates(b, a));
    CHECK_FALSE(dominates(a, c));
    CHECK_FALSE(dominates(ObjectivePoint{0.9, 120}, ObjectivePoint{0.8, 100}));
}

TEST_CASE("front keeps ties and input order") {
    const std::vector<ObjectivePoint> pts{{0.5, 50}, {0.9, 100}, {0.5, 50}, {0.4, 60}, {1.0, 130}};
    CHECK(pareto_front_indices(pts) == std::vector<std::size_t>{0, 1, 2, 4});
    CHECK(pareto_front(pts).size() == 4);
}

TEST_CASE("weighted sum") {
    CHECK(weighted_sum_objective(0.9, 100, 1e-3) == doctest::Approx(-0.8));
    CHECK_THROWS_AS(weighted_sum_objective(0.9, 100, 0.0), std::invalid_argument);
    const double f[] = {1.0, 2.0}, w[] = {0.5, 0.25};
    CHECK(weighted_sum(f, w) == doctest::Approx(1.0));
    CHECK(eps_feasible(100.0, 100.0));
    CHECK_FALSE(eps_feasible(100.1, 100.0));
}

TEST_CASE("archive stays non-dominated") {
    SplitMix64 rng(4);
    ParetoArchive arch;
    std::vector<ObjectivePoint> all;
    for (int i = 0; i < 500; ++i) {
        const ObjectivePoint p{rng.uniform(), 100 * rng.uniform()};
        all.push_back(p);
        arch.insert(p);
        for (const auto& a : arch.points())
            for (const auto& b : arch.points()) CHECK_FALSE(dominates(a, b));
    }
    CHECK(arch.size() == pareto_front(all).size());
    CHECK_FALSE(arch.insert({-1.0, 1000.0}));
}

TEST_CASE("crowding distance") {
    const std::vector<ObjectivePoint> line{{0.0, 0.0}, {0.5, 50.0}, {1.0, 100.0}};
    const auto d = crowding_distance(line);
    CHECK(d[0] == crowding_infinity);
    CHECK(d[2] == crowding_infinity);
    CHECK(d[1] == doctest::Approx(2.0));

    SplitMix64 rng(2);
    std::vector<ObjectivePoint> front;
    for (int i = 0; i < 12; ++i) {
        const double y = rng.uniform();
        front.push_back({y, 100 * y});
    }
    const auto base = crowding_distance(front);
    std::vector<std::size_t> order(front.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
    std::vector<ObjectivePoint> shuffled;
    for (auto i : order) shuffled.push_back(front[i]);
    const auto perm = crowding_distance(shuffled);
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (base[order[k]] == crowding_infinity) CHECK(perm[k] == crowding_infinity);
        else CHECK(perm[k] == doctest::Approx(base[order[k]]));
    }
}

TEST_CASE("non-dominated sort partitions the points") {
    const std::vector<ObjectivePoint> pts{{0.9, 100}, {0.8, 110}, {0.7, 120}, {1.0, 130}, {0.8, 90}};
    const auto fronts = non_dominated_sort(pts);
    REQUIRE(fronts.size() == 3);
    auto f0 = fronts[0];
    std::sort(f0.begin(), f0.end());
    CHECK(f0 == std::vector<std::size_t>{0, 3, 4});
    CHECK(fronts[1] == std::vector<std::size_t>{1});
    CHECK(fronts[2] == std::vector<std::size_t>{2});
    CHECK(non_dominated_sort({}).empty());
}
