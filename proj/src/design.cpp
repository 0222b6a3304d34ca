#include "yieldopt/design.hpp"

#include <cmath>
#include <stdexcept>

#include "yieldopt/polytope.hpp"

namespace yieldopt {

bool DesignVector::finite() const {
    return std::isfinite(d1) && std::isfinite(d2) && std::isfinite(d3) && std::isfinite(s);
}

std::vector<LinearRow> DesignConstraints::all_rows() const {
    std::vector<LinearRow> rows;
    const auto lb = lower_bounds.as_array();
    static const char* names[] = {"d1", "d2", "d3", "s"};
    for (std::size_t i = 0; i < 4; ++i) {
        LinearRow r;
        r.coefficients[i] = -1.0;
        r.bound = -lb[i];
        r.label = std::string(names[i]) + ">=lb";
        rows.push_back(r);
    }
    rows.push_back({{0.0, 0.0, 1.0, 0.0}, d3_upper, "d3<=ub"});
    rows.push_back({{0.0, 0.0, 0.0, 1.0}, s_upper, "s<=ub"});
    rows.insert(rows.end(), linear_rows.begin(), linear_rows.end());
    return rows;
}

bool FeasibilityReport::feasible() const {
    for (double s : slacks) {
        if (!(s >= 0.0)) return false;
    }
    return true;
}

double FeasibilityReport::violation() const {
    double v = 0.0;
    for (double s : slacks) {
        if (s < 0.0) v -= s;
    }
    return v;
}

double cost(const DesignVector& x) { return x.d1 * x.d2; }

FeasibilityReport check_constraints(const DesignVector& x, const DesignConstraints& c) {
    FeasibilityReport rep;
    const auto v = x.as_array();
    for (const auto& row : c.all_rows()) {
        double lhs = 0.0;
        for (std::size_t i = 0; i < 4; ++i) lhs += row.coefficients[i] * v[i];
        rep.labels.push_back(row.label);
        rep.slacks.push_back(row.bound - lhs);
    }
    return rep;
}

DesignBox design_box(const DesignConstraints& c) {
    const auto rows = c.all_rows();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 4);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < 4; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].coefficients[j];
        b[static_cast<Eigen::Index>(i)] = rows[i].bound;
    }
    const auto box = Polytope(a, b).bounding_box();
    if (!box) throw std::invalid_argument("design constraints describe an empty or unbounded set");
    const auto& [lo, hi] = *box;
    return {DesignVector{lo[0], lo[1], lo[2], lo[3]}, DesignVector{hi[0], hi[1], hi[2], hi[3]}};
}

}  // namespace yieldopt
