#pragma once

#include <array>
#include <string>
#include <vector>

namespace yieldopt {

/// Deterministic rotor geometry: magnet width d1, magnet height d2,
/// magnet depth d3 (all mm) and skew angle s (deg).
struct DesignVector {
    double d1 = 19.0;
    double d2 = 7.0;
    double d3 = 7.0;
    double s = 0.0;

    static constexpr std::size_t size = 4;

    static DesignVector nominal() { return {}; }
    static DesignVector from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

    std::array<double, 4> as_array() const { return {d1, d2, d3, s}; }
    bool finite() const;

    friend bool operator==(const DesignVector&, const DesignVector&) = default;
};

/// One linear inequality `coefficients . x <= bound` over (d1, d2, d3, s).
struct LinearRow {
    std::array<double, 4> coefficients{};
    double bound = 0.0;
    std::string label;
};

/// Box and linear constraints on the design. Non-strict everywhere.
struct DesignConstraints {
    DesignVector lower_bounds{10.0, 4.0, 4.0, -5.0};
    double d3_upper = 10.0;
    double s_upper = 5.0;
    std::vector<LinearRow> linear_rows{
        {{0.0, 1.0, 1.0, 0.0}, 15.0, "d2+d3<=15"},
        {{3.0, 0.0, -2.0, 0.0}, 50.0, "3d1-2d3<=50"},
    };

    static DesignConstraints defaults() { return {}; }

    /// Every constraint (bounds included) as `a . x <= b`, in report order.
    std::vector<LinearRow> all_rows() const;
};

struct FeasibilityReport {
    std::vector<std::string> labels;
    std::vector<double> slacks;

    bool feasible() const;
    /// Total shortfall of the violated rows, as a positive number (0 when feasible).
    double violation() const;
};

/// Magnet surface d1*d2 in mm^2, proportional to magnet cost.
double cost(const DesignVector& x);

FeasibilityReport check_constraints(const DesignVector& x, const DesignConstraints& c);

/// Axis-aligned bounding box of the feasible polytope.
struct DesignBox {
    DesignVector lower;
    DesignVector upper;
};

/// Throws std::invalid_argument if the feasible set is empty or unbounded.
DesignBox design_box(const DesignConstraints& c);

}  // namespace yieldopt
