#pragma once

#include <optional>

#include <Eigen/Dense>

namespace yieldopt {

/// Convex polytope { z : A z <= b } in a small number of dimensions.
///
/// Projection and vertex enumeration walk the subsets of active rows, which
/// is exact and cheap for the handful of rows a design problem carries
/// (a few hundred 4x4 solves), but exponential in general.
class Polytope {
public:
    Polytope() = default;
    Polytope(Eigen::MatrixXd a, Eigen::VectorXd b);

    Eigen::Index dim() const { return a_.cols(); }
    Eigen::Index rows() const { return a_.rows(); }
    const Eigen::MatrixXd& a() const { return a_; }
    const Eigen::VectorXd& b() const { return b_; }

    /// Copy with extra rows appended.
    Polytope with_rows(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const;

    bool contains(const Eigen::VectorXd& z, double tol = 1e-12) const;
    /// Smallest slack b - A z.
    double min_slack(const Eigen::VectorXd& z) const;

    /// Euclidean projection; empty when the polytope is empty.
    std::optional<Eigen::VectorXd> project(const Eigen::VectorXd& y) const;

    /// Bounding box via vertex enumeration. Empty when the polytope is empty
    /// or unbounded.
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> bounding_box() const;

    bool bounded() const;

private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
};

}  // namespace yieldopt
