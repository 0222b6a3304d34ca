#include "yieldopt/polytope.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace yieldopt {

namespace {

// Calls fn(subset) for every subset of {0..n-1} with size in [lo, hi].
void for_each_subset(int n, int lo, int hi, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx;
    std::function<void(int)> rec = [&](int start) {
        const int k = static_cast<int>(idx.size());
        if (k >= lo) fn(idx);
        if (k == hi) return;
        for (int i = start; i < n; ++i) {
            idx.push_back(i);
            rec(i + 1);
            idx.pop_back();
        }
    };
    rec(0);
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    return out;
}

double feasibility_tol(const Eigen::VectorXd& b) {
    return 1e-11 * (1.0 + b.cwiseAbs().maxCoeff());
}

}  // namespace

Polytope::Polytope(Eigen::MatrixXd a, Eigen::VectorXd b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != b_.size()) throw std::invalid_argument("polytope: row count mismatch");
}

Polytope Polytope::with_rows(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) const {
    Eigen::MatrixXd na(a_.rows() + a.rows(), a_.cols());
    na << a_, a;
    Eigen::VectorXd nb(b_.size() + b.size());
    nb << b_, b;
    return {std::move(na), std::move(nb)};
}

bool Polytope::contains(const Eigen::VectorXd& z, double tol) const {
    return rows() == 0 || min_slack(z) >= -tol;
}

double Polytope::min_slack(const Eigen::VectorXd& z) const {
    if (rows() == 0) return std::numeric_limits<double>::infinity();
    return (b_ - a_ * z).minCoeff();
}

std::optional<Eigen::VectorXd> Polytope::project(const Eigen::VectorXd& y) const {
    if (rows() == 0 || contains(y, 0.0)) return y;
    const double tol = feasibility_tol(b_);
    const int n = static_cast<int>(dim());
    std::optional<Eigen::VectorXd> best;
    double best_dist = std::numeric_limits<double>::infinity();

    // The projection is the KKT point of some active set of at most `dim`
    // independent rows; among feasible candidates it has the smallest distance.
    for_each_subset(static_cast<int>(rows()), 1, n, [&](const std::vector<int>& s) {
        const Eigen::MatrixXd as = select_rows(a_, s);
        const Eigen::MatrixXd gram = as * as.transpose();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (lu.rank() < gram.rows()) return;
        const Eigen::VectorXd lambda = lu.solve(as * y - select(b_, s));
        Eigen::VectorXd z = y - as.transpose() * lambda;
        if (min_slack(z) < -tol) return;
        const double d = (z - y).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = std::move(z);
        }
    });
    return best;
}

std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> Polytope::bounding_box() const {
    if (!bounded()) return std::nullopt;
    const int n = static_cast<int>(dim());
    const double tol = feasibility_tol(b_);
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = -lo;
    bool any = false;
    for_each_subset(static_cast<int>(rows()), n, n, [&](const std::vector<int>& s) {
        const Eigen::MatrixXd as = select_rows(a_, s);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(as);
        if (lu.rank() < n) return;
        const Eigen::VectorXd v = lu.solve(select(b_, s));
        if (min_slack(v) < -tol) return;
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
        any = true;
    });
    if (!any) return std::nullopt;
    return std::make_pair(lo, hi);
}

bool Polytope::bounded() const {
    const int n = static_cast<int>(dim());
    if (rows() == 0) return n == 0;
    Eigen::FullPivLU<Eigen::MatrixXd> full(a_);
    if (full.rank() < n) return false;
    if (n == 1) {
        bool pos = false, neg = false;
        for (Eigen::Index i = 0; i < rows(); ++i) {
            pos = pos || a_(i, 0) > 0;
            neg = neg || a_(i, 0) < 0;
        }
        return pos && neg;
    }
    // A pointed recession cone {d : A d <= 0} is nontrivial iff it has an
    // extreme ray, and every extreme ray spans the null space of n-1 rows.
    bool ray = false;
    for_each_subset(static_cast<int>(rows()), n - 1, n - 1, [&](const std::vector<int>& s) {
        if (ray) return;
        const Eigen::MatrixXd as = select_rows(a_, s);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(as);
        if (lu.rank() < n - 1) return;
        const Eigen::VectorXd d = lu.kernel().col(0).normalized();
        for (double sign : {1.0, -1.0}) {
            if ((a_ * (sign * d)).maxCoeff() <= 1e-12) ray = true;
        }
    });
    return !ray;
}

}  // namespace yieldopt
