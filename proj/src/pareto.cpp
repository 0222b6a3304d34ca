#include "yieldopt/pareto.hpp"

#include <stdexcept>

#include "yieldopt/io.hpp"

namespace yieldopt {

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
    return a.yield >= b.yield && a.cost <= b.cost && (a.yield > b.yield || a.cost < b.cost);
}

std::vector<std::size_t> pareto_front_indices(std::span<const ObjectivePoint> points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) dominated = j != i && dominates(points[j], points[i]);
        if (!dominated) out.push_back(i);
    }
    return out;
}

std::vector<ObjectivePoint> pareto_front(std::span<const ObjectivePoint> points) {
    std::vector<ObjectivePoint> out;
    for (auto i : pareto_front_indices(points)) out.push_back(points[i]);
    return out;
}

double weighted_sum_objective(double y, double c, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("weighted_sum_objective: weight must be positive");
    return -y + w * c;
}

double weighted_sum(std::span<const double> objectives, std::span<const double> weights) {
    if (objectives.size() != weights.size()) throw std::invalid_argument("weighted_sum: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("weighted_sum: negative weight");
        s += weights[i] * objectives[i];
    }
    return s;
}

bool ParetoArchive::insert(const ObjectivePoint& p) {
    for (const auto& q : points_) {
        if (dominates(q, p)) return false;
    }
    std::erase_if(points_, [&](const ObjectivePoint& q) { return dominates(p, q); });
    points_.push_back(p);
    return true;
}

void write_front_csv(std::span<const ObjectivePoint> points, const std::filesystem::path& path) {
    CsvTable t({"yield", "cost", "d1", "d2", "d3", "s"});
    for (const auto& p : points) {
        t.row({format_double(p.yield), format_double(p.cost), format_double(p.design.d1), format_double(p.design.d2),
               format_double(p.design.d3), format_double(p.design.s)});
    }
    t.write(path);
}

}  // namespace yieldopt
