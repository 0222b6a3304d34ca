#include "yieldopt/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "yieldopt/io.hpp"
#include "yieldopt/random.hpp"
#include "yieldopt/yield_problem.hpp"

namespace yieldopt {

void GaConfig::validate() const {
    if (population < 2) throw std::invalid_argument("population must be at least 2");
    if (offspring < 1 || offspring > population) throw std::invalid_argument("offspring must be in [1, population]");
    if (eval_budget < population) throw std::invalid_argument("eval_budget must be at least the population size");
    if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw std::invalid_argument("crossover_prob must be in [0, 1]");
    if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw std::invalid_argument("mutation_prob must be in [0, 1]");
    if (!(crossover_eta >= 0.0) || !(mutation_eta >= 0.0)) throw std::invalid_argument("distribution indices must be >= 0");
}

namespace {

template <class Dominates>
std::vector<std::vector<std::size_t>> sort_fronts(std::size_t n, Dominates dom) {
    std::vector<std::vector<std::size_t>> beats(n);
    std::vector<std::size_t> beaten_by(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dom(i, j)) {
                beats[i].push_back(j);
                ++beaten_by[j];
            } else if (dom(j, i)) {
                beats[j].push_back(i);
                ++beaten_by[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (beaten_by[i] == 0) fronts[0].push_back(i);
    }
    while (!fronts.back().empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : fronts.back()) {
            for (std::size_t j : beats[i]) {
                if (--beaten_by[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

ObjectivePoint as_point(const Individual& ind, std::size_t fidelity) {
    return {ind.yield, ind.cost, ind.design, {ind.n_fev, fidelity}};
}

/// Constraint domination: feasible beats infeasible, infeasible compare by
/// violation, feasible compare by Pareto dominance.
void rank_population(std::vector<Individual>& pop) {
    std::vector<std::size_t> feasible, infeasible;
    for (std::size_t i = 0; i < pop.size(); ++i) (pop[i].feasible ? feasible : infeasible).push_back(i);

    std::vector<ObjectivePoint> pts;
    for (std::size_t i : feasible) pts.push_back(as_point(pop[i], 0));
    const auto fronts = non_dominated_sort(pts);
    std::size_t rank = 0;
    for (const auto& front : fronts) {
        ++rank;
        std::vector<ObjectivePoint> fp;
        for (std::size_t k : front) fp.push_back(pts[k]);
        const auto cd = crowding_distance(fp);
        for (std::size_t k = 0; k < front.size(); ++k) {
            Individual& ind = pop[feasible[front[k]]];
            ind.rank = rank;
            ind.crowding = cd[k];
        }
    }
    std::stable_sort(infeasible.begin(), infeasible.end(),
                     [&](std::size_t a, std::size_t b) { return pop[a].violation < pop[b].violation; });
    double last = -1.0;
    for (std::size_t i : infeasible) {
        if (pop[i].violation != last) ++rank;
        last = pop[i].violation;
        pop[i].rank = rank;
        pop[i].crowding = 0.0;
    }
}

bool better(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

double sbx_spread(double rand, double beta, double eta) {
    const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    return rand <= 1.0 / alpha ? std::pow(rand * alpha, 1.0 / (eta + 1.0))
                               : std::pow(1.0 / (2.0 - rand * alpha), 1.0 / (eta + 1.0));
}

/// Bounded simulated binary crossover.
void crossover(std::array<double, 4>& a, std::array<double, 4>& b, const std::array<double, 4>& lo,
               const std::array<double, 4>& hi, const GaConfig& cfg, SplitMix64& rng) {
    if (rng.uniform() >= cfg.crossover_prob) return;
    for (std::size_t i = 0; i < 4; ++i) {
        if (rng.uniform() >= 0.5 || std::abs(a[i] - b[i]) <= 1e-14) continue;
        const double y1 = std::min(a[i], b[i]), y2 = std::max(a[i], b[i]);
        const double r = rng.uniform();
        double c1 = 0.5 * ((y1 + y2) - sbx_spread(r, 1.0 + 2.0 * (y1 - lo[i]) / (y2 - y1), cfg.crossover_eta) * (y2 - y1));
        double c2 = 0.5 * ((y1 + y2) + sbx_spread(r, 1.0 + 2.0 * (hi[i] - y2) / (y2 - y1), cfg.crossover_eta) * (y2 - y1));
        c1 = std::clamp(c1, lo[i], hi[i]);
        c2 = std::clamp(c2, lo[i], hi[i]);
        if (rng.uniform() < 0.5) std::swap(c1, c2);
        a[i] = c1;
        b[i] = c2;
    }
}

/// Bounded polynomial mutation.
void mutate(std::array<double, 4>& x, const std::array<double, 4>& lo, const std::array<double, 4>& hi,
            const GaConfig& cfg, SplitMix64& rng) {
    const double p = cfg.mutation_prob > 0.0 ? cfg.mutation_prob : 1.0 / 4.0;
    const double pw = 1.0 / (cfg.mutation_eta + 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
        if (rng.uniform() >= p) continue;
        const double span = hi[i] - lo[i];
        if (!(span > 0.0)) continue;
        const double d1 = (x[i] - lo[i]) / span, d2 = (hi[i] - x[i]) / span;
        const double r = rng.uniform();
        double dq;
        if (r < 0.5) {
            const double v = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, cfg.mutation_eta + 1.0);
            dq = std::pow(v, pw) - 1.0;
        } else {
            const double v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, cfg.mutation_eta + 1.0);
            dq = 1.0 - std::pow(v, pw);
        }
        x[i] = std::clamp(x[i] + dq * span, lo[i], hi[i]);
    }
}

}  // namespace

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ObjectivePoint> points) {
    return sort_fronts(points.size(), [&](std::size_t i, std::size_t j) { return dominates(points[i], points[j]); });
}

std::vector<double> crowding_distance(std::span<const ObjectivePoint> front) {
    const std::size_t n = front.size();
    std::vector<double> d(n, 0.0);
    if (n <= 2) {
        std::fill(d.begin(), d.end(), crowding_infinity);
        return d;
    }
    auto accumulate = [&](auto key, auto other) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double ka = key(front[a]), kb = key(front[b]);
            return ka != kb ? ka < kb : other(front[a]) < other(front[b]);
        });
        d[idx.front()] = d[idx.back()] = crowding_infinity;
        const double range = key(front[idx.back()]) - key(front[idx.front()]);
        if (!(range > 0.0)) return;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            d[idx[k]] += (key(front[idx[k + 1]]) - key(front[idx[k - 1]])) / range;
        }
    };
    auto yield = [](const ObjectivePoint& p) { return p.yield; };
    auto cost_of = [](const ObjectivePoint& p) { return p.cost; };
    accumulate(yield, cost_of);
    accumulate(cost_of, yield);
    return d;
}

GaResult nsga2_run(const YieldFunction& yield, const DesignConstraints& constraints, const GaConfig& cfg,
                   std::size_t fidelity) {
    cfg.validate();
    const DesignBox box = design_box(constraints);
    const auto lo = box.lower.as_array(), hi = box.upper.as_array();
    SplitMix64 rng(derive_seed(cfg.seed, 0x6761));
    GaResult out;

    auto make = [&](const std::array<double, 4>& a) {
        Individual ind;
        ind.design = DesignVector::from_array(a);
        ind.cost = cost(ind.design);
        const auto rep = check_constraints(ind.design, constraints);
        ind.feasible = rep.feasible();
        ind.violation = rep.violation();
        if (ind.feasible) {
            ind.yield = yield(ind.design);
            ind.n_fev = ++out.evaluations;
            out.archive.insert(as_point(ind, fidelity));
        }
        return ind;
    };

    std::vector<Individual> pop;
    for (std::size_t draws = 0; pop.size() < cfg.population; ++draws) {
        if (draws > 1000 * cfg.population) throw std::runtime_error("nsga2: feasible set too thin to sample");
        std::array<double, 4> a{};
        for (std::size_t i = 0; i < 4; ++i) a[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
        if (check_constraints(DesignVector::from_array(a), constraints).feasible()) pop.push_back(make(a));
    }
    rank_population(pop);
    out.generations.push_back({0, pop, out.evaluations});

    std::size_t idle = 0;
    while (out.evaluations < cfg.eval_budget) {
        auto tournament = [&]() -> const Individual& {
            const Individual& a = pop[rng.below(pop.size())];
            const Individual& b = pop[rng.below(pop.size())];
            return better(b, a) ? b : a;
        };
        const std::size_t before = out.evaluations;
        std::vector<Individual> children;
        while (children.size() < cfg.offspring && out.evaluations < cfg.eval_budget) {
            auto a = tournament().design.as_array();
            auto b = tournament().design.as_array();
            crossover(a, b, lo, hi, cfg, rng);
            mutate(a, lo, hi, cfg, rng);
            mutate(b, lo, hi, cfg, rng);
            children.push_back(make(a));
            if (children.size() < cfg.offspring && out.evaluations < cfg.eval_budget) children.push_back(make(b));
        }
        idle = out.evaluations == before ? idle + 1 : 0;
        if (idle > 1000) throw std::runtime_error("nsga2: offspring stay infeasible");

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), children.begin(), children.end());
        rank_population(merged);
        std::vector<std::size_t> order(merged.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return better(merged[x], merged[y]); });
        pop.clear();
        for (std::size_t k = 0; k < cfg.population; ++k) pop.push_back(merged[order[k]]);
        // Ranks and crowding of the survivors, as reported for the generation.
        rank_population(pop);
        out.generations.push_back({out.generations.size(), pop, out.evaluations});
    }
    return out;
}

GaResult nsga2_run(YieldEvaluator& evaluator, const DesignConstraints& constraints, const GaConfig& cfg) {
    const std::size_t fidelity = evaluator.config().hybrid.mc_samples;
    return nsga2_run([&](const DesignVector& x) { return evaluator.estimate(x).value; }, constraints, cfg, fidelity);
}

void write_generation_csv(const Generation& g, const std::filesystem::path& path) {
    CsvTable t({"generation", "yield", "cost", "rank", "crowding", "feasible", "d1", "d2", "d3", "s"});
    for (const auto& ind : g.individuals) {
        t.row({std::to_string(g.index), format_double(ind.yield), format_double(ind.cost), std::to_string(ind.rank),
               std::isinf(ind.crowding) ? "inf" : format_double(ind.crowding), ind.feasible ? "1" : "0",
               format_double(ind.design.d1), format_double(ind.design.d2), format_double(ind.design.d3),
               format_double(ind.design.s)});
    }
    t.write(path);
}

}  // namespace yieldopt
