#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "yieldopt/design.hpp"
#include "yieldopt/polytope.hpp"

namespace yieldopt {

/// One evaluation of a scalarized problem. Nonlinear constraints are in the
/// form `constraints[k] >= 0`.
struct ProblemValue {
    double objective = 0.0;
    std::vector<double> constraints;
    double yield = std::numeric_limits<double>::quiet_NaN();
    double cost = std::numeric_limits<double>::quiet_NaN();
};

/// Single-objective problem over the design. `fidelity` is the Monte Carlo
/// sample count the caller asks for; deterministic problems may ignore it.
class ScalarProblem {
public:
    virtual ~ScalarProblem() = default;
    virtual ProblemValue evaluate(const DesignVector& x, std::size_t fidelity) = 0;
    virtual std::size_t constraint_count() const { return 0; }
};

enum class Termination { trust_region, delta_f, max_fev };
const char* to_string(Termination t);

struct DfoOptions {
    std::size_t max_fev = 100;
    double radius_start = 0.1;    ///< trust-region radius, standardized coordinates
    double radius_end = 1e-4;
    double radius_max = 0.5;
    double delta_f_tol = 1e-4;    ///< relative to 1 + |f|; 0 disables the rule
    double penalty = 100.0;       ///< merit weight on constraint violation
    std::size_t fidelity = 0;
};

struct HistoryEntry {
    std::size_t n_fev = 0;  ///< 1-based position in the run
    DesignVector design;
    double objective = 0.0;
    double merit = 0.0;
    double yield = std::numeric_limits<double>::quiet_NaN();
    double cost = 0.0;
    bool feasible = true;   ///< nonlinear constraints hold (linear ones always do)
    std::size_t fidelity = 0;
    std::string phase;
    std::size_t start = 0;  ///< multi-start index
};

struct OptimRun {
    std::vector<HistoryEntry> history;
    Termination terminated_by = Termination::max_fev;
    std::size_t n_fev = 0;
    HistoryEntry best;      ///< best feasible evaluation, else lowest merit
    bool best_feasible = false;
};

/// Mean of the previous four values minus the newest, in absolute value.
/// Throws std::invalid_argument for fewer than five values; only the last
/// five are used.
double delta_f(std::span<const double> values);

/// Trust-region method on linear interpolation models in coordinates scaled
/// to the unit box around the feasible design set. Trial points are
/// projected onto the linear constraints; nonlinear constraints enter as
/// linearized rows from a feasible center and through an exact-penalty merit
/// otherwise.
///
/// The solver can be driven in slices (run) and switched to another fidelity
/// between slices, which re-evaluates the interpolation set.
class DfoSolver {
public:
    DfoSolver(ScalarProblem& problem, const DesignVector& x0, const DesignConstraints& constraints,
              const DfoOptions& options, std::string phase = "");

    /// Iterates until a termination rule fires or `fev_limit` evaluations are
    /// spent in total. With `allow_stop` false the early rules are suppressed.
    void run(std::size_t fev_limit, bool allow_stop = true);
    void switch_fidelity(std::size_t fidelity, std::string phase);

    bool finished() const { return finished_; }
    std::size_t n_fev() const { return history_.size(); }
    /// Lowest merit among the current interpolation points.
    double best_merit() const;
    OptimRun result() const;
    const std::vector<HistoryEntry>& history() const { return history_; }

private:
    struct Point {
        Eigen::VectorXd u;
        double f = 0.0;
        Eigen::VectorXd c;
        double merit = 0.0;
    };

    Point evaluate(const Eigen::VectorXd& u);
    double merit(double f, const Eigen::VectorXd& c) const;
    DesignVector to_design(const Eigen::VectorXd& u) const;
    void initialize_next();
    std::size_t center_index() const;
    void iterate(bool allow_stop);
    bool geometry_step(std::size_t center, bool force);
    void insert(Point p, std::size_t center, bool success);
    bool poorly_poised(std::size_t center) const;
    std::optional<Eigen::VectorXd> lagrange_values(const Eigen::VectorXd& u) const;
    Eigen::MatrixXd displacements(std::size_t center) const;
    Eigen::VectorXd path_step(const Polytope& poly, const Eigen::VectorXd& from, const Eigen::VectorXd& uc,
                              const Eigen::VectorXd& g) const;
    bool is_new(const Eigen::VectorXd& u) const;
    void shrink();
    void check_stop(bool allow_stop);

    ScalarProblem& problem_;
    DfoOptions options_;
    std::string phase_;
    std::size_t constraint_count_ = 0;
    Eigen::VectorXd lower_, width_;
    Polytope feasible_;  ///< linear constraints in scaled coordinates
    Eigen::VectorXd start_;
    std::vector<Point> set_;
    std::vector<std::size_t> pending_;  ///< set entries awaiting re-evaluation
    std::vector<HistoryEntry> history_;
    std::vector<double> merits_;        ///< merits at the current fidelity, in order
    double radius_ = 0.1;
    bool geometry_blocked_ = false;
    bool finished_ = false;
    Termination termination_ = Termination::max_fev;
    std::size_t fidelity_ = 0;
};

struct FidelitySwitch {
    std::size_t after_fev = 0;
    std::size_t fidelity = 0;
    std::string phase = "exploitation";
};

/// Runs a DfoSolver to completion. Throws std::invalid_argument when x0 is
/// infeasible or the budget is below 2 * dim + 1.
OptimRun dfo_minimize(ScalarProblem& problem, const DesignVector& x0, const DesignConstraints& constraints,
                      const DfoOptions& options, const FidelitySwitch* fidelity_switch = nullptr,
                      const std::string& phase = "");

/// CSV: n_fev, start, phase, fidelity, yield, cost, objective, feasible, d1, d2, d3, s.
void write_history_csv(std::span<const HistoryEntry> history, const std::filesystem::path& path);

}  // namespace yieldopt
