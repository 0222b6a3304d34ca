#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "yieldopt/design.hpp"

namespace yieldopt {

/// Where an objective pair came from.
struct Provenance {
    std::size_t n_fev = 0;
    std::size_t fidelity = 0;  ///< Monte Carlo sample count of the yield estimate
};

/// Yield (maximized) and cost (minimized) of one design.
struct ObjectivePoint {
    double yield = 0.0;
    double cost = 0.0;
    DesignVector design;
    Provenance provenance;
};

/// a is at least as good in both objectives and strictly better in one.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

/// Indices of the non-dominated points, in input order. Points with identical
/// objective pairs are all kept.
std::vector<std::size_t> pareto_front_indices(std::span<const ObjectivePoint> points);
std::vector<ObjectivePoint> pareto_front(std::span<const ObjectivePoint> points);

/// -y + w c. Throws std::invalid_argument unless w > 0.
double weighted_sum_objective(double y, double c, double w);

/// General form sum_i w_i f_i over objectives that are all minimized.
double weighted_sum(std::span<const double> objectives, std::span<const double> weights);

/// c <= c_max.
inline bool eps_feasible(double c, double c_max) { return c <= c_max; }

/// Non-dominated subset of everything inserted so far.
class ParetoArchive {
public:
    /// Returns false if p is dominated by a member; otherwise adds it and drops
    /// the members it dominates.
    bool insert(const ObjectivePoint& p);
    const std::vector<ObjectivePoint>& points() const { return points_; }
    std::vector<ObjectivePoint> front() const { return points_; }
    std::size_t size() const { return points_.size(); }

private:
    std::vector<ObjectivePoint> points_;
};

/// CSV: yield, cost, d1, d2, d3, s.
void write_front_csv(std::span<const ObjectivePoint> points, const std::filesystem::path& path);

}  // namespace yieldopt
