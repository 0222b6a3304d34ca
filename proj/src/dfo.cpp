#include "yieldopt/dfo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "yieldopt/io.hpp"

namespace yieldopt {

namespace {

constexpr Eigen::Index dim = static_cast<Eigen::Index>(DesignVector::size);

// Gradient of the linear interpolant through the rows of `d` (displacements)
// with value differences `df`; minimum norm if the set is degenerate.
Eigen::VectorXd linear_gradient(const Eigen::MatrixXd& d, const Eigen::VectorXd& df) {
    return d.completeOrthogonalDecomposition().solve(df);
}

}  // namespace

const char* to_string(Termination t) {
    switch (t) {
        case Termination::trust_region: return "trust-region radius";
        case Termination::delta_f: return "delta_f rule";
        case Termination::max_fev: return "max_fev";
    }
    return "?";
}

double delta_f(std::span<const double> values) {
    if (values.size() < 5) throw std::invalid_argument("delta_f: need at least five values");
    const auto tail = values.last(5);
    const double mean = (tail[0] + tail[1] + tail[2] + tail[3]) / 4.0;
    return std::abs(mean - tail[4]);
}

DfoSolver::DfoSolver(ScalarProblem& problem, const DesignVector& x0, const DesignConstraints& constraints,
                     const DfoOptions& options, std::string phase)
    : problem_(problem), options_(options), phase_(std::move(phase)), fidelity_(options.fidelity) {
    if (!x0.finite()) throw std::invalid_argument("dfo: start point is not finite");
    if (!check_constraints(x0, constraints).feasible()) throw std::invalid_argument("dfo: start point is infeasible");
    if (options.max_fev < 2 * DesignVector::size + 1) throw std::invalid_argument("dfo: budget below 2 * dim + 1");
    if (!(options.radius_start > 0.0) || !(options.radius_end > 0.0) || options.radius_max < options.radius_start) {
        throw std::invalid_argument("dfo: inconsistent trust-region radii");
    }
    constraint_count_ = problem.constraint_count();

    const DesignBox box = design_box(constraints);
    lower_.resize(dim);
    width_.resize(dim);
    const auto lo = box.lower.as_array(), hi = box.upper.as_array();
    for (Eigen::Index i = 0; i < dim; ++i) {
        lower_[i] = lo[static_cast<std::size_t>(i)];
        const double w = hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)];
        width_[i] = w > 0.0 ? w : 1.0;
    }

    const auto rows = constraints.all_rows();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), dim);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    Eigen::Index k = 0;
    for (const auto& r : rows) {
        Eigen::VectorXd coef(dim);
        for (Eigen::Index j = 0; j < dim; ++j) coef[j] = r.coefficients[static_cast<std::size_t>(j)];
        Eigen::VectorXd scaled = coef.cwiseProduct(width_);
        const double norm = scaled.norm();
        if (norm == 0.0) continue;
        a.row(k) = scaled.transpose() / norm;
        b[k] = (r.bound - coef.dot(lower_)) / norm;
        ++k;
    }
    feasible_ = Polytope(a.topRows(k), b.head(k));

    const auto x = x0.as_array();
    start_.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start_[i] = (x[static_cast<std::size_t>(i)] - lower_[i]) / width_[i];
    radius_ = options.radius_start;
}

DesignVector DfoSolver::to_design(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd x = lower_ + width_.cwiseProduct(u);
    return {x[0], x[1], x[2], x[3]};
}

double DfoSolver::merit(double f, const Eigen::VectorXd& c) const {
    double v = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) v += std::max(0.0, -c[k]);
    return f + options_.penalty * v;
}

DfoSolver::Point DfoSolver::evaluate(const Eigen::VectorXd& u) {
    const DesignVector x = to_design(u);
    const ProblemValue pv = problem_.evaluate(x, fidelity_);
    if (pv.constraints.size() != constraint_count_) throw std::logic_error("dfo: constraint count changed");
    Point p;
    p.u = u;
    p.f = pv.objective;
    p.c = Eigen::Map<const Eigen::VectorXd>(pv.constraints.data(), static_cast<Eigen::Index>(pv.constraints.size()));
    p.merit = merit(p.f, p.c);

    HistoryEntry h;
    h.n_fev = history_.size() + 1;
    h.design = x;
    h.objective = pv.objective;
    h.merit = p.merit;
    h.yield = pv.yield;
    h.cost = std::isnan(pv.cost) ? cost(x) : pv.cost;
    h.feasible = (p.c.array() >= 0.0).all();
    h.fidelity = fidelity_;
    h.phase = phase_;
    history_.push_back(h);
    merits_.push_back(p.merit);
    return p;
}

bool DfoSolver::is_new(const Eigen::VectorXd& u) const {
    return std::none_of(set_.begin(), set_.end(), [&](const Point& p) { return (p.u - u).norm() < 1e-10; });
}

std::size_t DfoSolver::center_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < set_.size(); ++i) {
        if (set_[i].merit < set_[best].merit) best = i;
    }
    return best;
}

double DfoSolver::best_merit() const { return set_.empty() ? std::numeric_limits<double>::infinity() : set_[center_index()].merit; }

Eigen::MatrixXd DfoSolver::displacements(std::size_t center) const {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(set_.size()) - 1, dim);
    Eigen::Index r = 0;
    for (std::size_t j = 0; j < set_.size(); ++j) {
        if (j != center) d.row(r++) = (set_[j].u - set_[center].u).transpose();
    }
    return d;
}

std::optional<Eigen::VectorXd> DfoSolver::lagrange_values(const Eigen::VectorXd& u) const {
    const auto n = static_cast<Eigen::Index>(set_.size());
    Eigen::MatrixXd m(n, dim + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        m(j, 0) = 1.0;
        m.row(j).tail(dim) = set_[static_cast<std::size_t>(j)].u.transpose();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m.transpose());
    if (lu.rank() < n) return std::nullopt;
    Eigen::VectorXd rhs(dim + 1);
    rhs[0] = 1.0;
    rhs.tail(dim) = u;
    return lu.solve(rhs);
}

bool DfoSolver::poorly_poised(std::size_t center) const {
    const Eigen::MatrixXd d = displacements(center);
    for (Eigen::Index j = 0; j < d.rows(); ++j) {
        if (d.row(j).norm() > 2.0 * radius_) return true;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(d / radius_);
    return svd.singularValues().minCoeff() < 0.2;
}

Eigen::VectorXd DfoSolver::path_step(const Polytope& poly, const Eigen::VectorXd& from, const Eigen::VectorXd& uc,
                                     const Eigen::VectorXd& g) const {
    const double gn = g.norm();
    if (!(gn > 0.0)) return from;
    auto at = [&](double t) -> Eigen::VectorXd {
        const auto z = poly.project(from - t * g);
        return z ? *z : from;
    };
    double hi = radius_ / gn;
    Eigen::VectorXd z = at(hi);
    int grow = 0;
    while ((z - uc).norm() < radius_ * (1.0 - 1e-9) && grow < 40) {
        hi *= 2.0;
        Eigen::VectorXd z2 = at(hi);
        if ((z2 - z).norm() < 1e-14) return z2;  // path has stopped moving
        z = std::move(z2);
        ++grow;
    }
    if ((z - uc).norm() <= radius_) return z;
    double lo = 0.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((at(mid) - uc).norm() > radius_) hi = mid;
        else lo = mid;
    }
    return at(lo);
}

void DfoSolver::initialize_next() {
    if (set_.empty()) {
        set_.push_back(evaluate(start_));
        return;
    }
    // Coordinate steps from the start, keeping the candidate that best
    // preserves linear independence of the displacements.
    const auto k = static_cast<Eigen::Index>(set_.size()) - 1;
    std::optional<Eigen::VectorXd> best;
    double best_score = -1.0;
    for (Eigen::Index trial = 0; trial < 2 * dim; ++trial) {
        const Eigen::Index axis = (k + trial / 2) % dim;
        Eigen::VectorXd u = start_;
        u[axis] += (trial % 2 == 0 ? 1.0 : -1.0) * radius_;
        const auto z = feasible_.project(u);
        if (!z || !is_new(*z)) continue;
        Eigen::MatrixXd d(k + 1, dim);
        for (Eigen::Index j = 0; j < k; ++j) d.row(j) = (set_[static_cast<std::size_t>(j) + 1].u - start_).transpose();
        d.row(k) = (*z - start_).transpose();
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(d / radius_);
        const double score = svd.singularValues().minCoeff();
        if (score > best_score) {
            best_score = score;
            best = z;
        }
        if (score > 0.5) break;
    }
    if (!best) throw std::runtime_error("dfo: cannot build an initial interpolation set");
    set_.push_back(evaluate(*best));
}

bool DfoSolver::geometry_step(std::size_t center, bool force) {
    const Eigen::VectorXd& uc = set_[center].u;
    std::size_t j_far = center;
    double far = 2.0 * radius_;
    for (std::size_t j = 0; j < set_.size(); ++j) {
        const double dj = (set_[j].u - uc).norm();
        if (j != center && dj > far) {
            far = dj;
            j_far = j;
        }
    }

    // Lagrange polynomial gradients: row j of M^-T maps [1, u] to l_j(u).
    const auto n = static_cast<Eigen::Index>(set_.size());
    Eigen::MatrixXd m(n, dim + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        m(j, 0) = 1.0;
        m.row(j).tail(dim) = set_[static_cast<std::size_t>(j)].u.transpose();
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    const bool singular = lu.rank() < n;
    Eigen::MatrixXd coef;  // column j holds the coefficients of l_j
    if (!singular) coef = lu.inverse();

    std::size_t j = j_far;
    if (j == center) {
        double best = -1.0;
        for (std::size_t i = 0; i < set_.size(); ++i) {
            if (i == center) continue;
            const double s = singular ? (set_[i].u - uc).norm() : coef.col(static_cast<Eigen::Index>(i)).tail(dim).norm();
            if (s > best) {
                best = s;
                j = i;
            }
        }
    }

    std::vector<Eigen::VectorXd> dirs;
    if (!singular) {
        const Eigen::VectorXd a = coef.col(static_cast<Eigen::Index>(j)).tail(dim);
        if (a.norm() > 0.0) {
            dirs.push_back(a / a.norm());
            dirs.push_back(-a / a.norm());
        }
    }
    if (force || singular || dirs.empty()) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            dirs.push_back(Eigen::VectorXd::Unit(dim, i));
            dirs.push_back(-Eigen::VectorXd::Unit(dim, i));
        }
    }

    // Score candidates by the determinant ratio after replacing point j.
    std::optional<Eigen::VectorXd> best_u;
    double best_score = -1.0;
    for (const auto& d : dirs) {
        const auto z = feasible_.project(uc + radius_ * d);
        if (!z || !is_new(*z) || (*z - uc).norm() < 1e-3 * radius_) continue;
        double score;
        if (!singular) {
            Eigen::VectorXd e(dim + 1);
            e[0] = 1.0;
            e.tail(dim) = *z;
            score = std::abs(coef.col(static_cast<Eigen::Index>(j)).dot(e));
        } else {
            std::vector<Point> trial = set_;
            trial[j].u = *z;
            Eigen::MatrixXd dd(n - 1, dim);
            Eigen::Index r = 0;
            for (std::size_t i = 0; i < trial.size(); ++i) {
                if (i != center) dd.row(r++) = (trial[i].u - uc).transpose();
            }
            score = Eigen::JacobiSVD<Eigen::MatrixXd>(dd / radius_).singularValues().minCoeff();
        }
        if (score > best_score) {
            best_score = score;
            best_u = z;
        }
    }
    if (!best_u) return false;
    const bool improves = singular || j_far != center || best_score > 1.0;
    if (!improves && !force) return false;
    set_[j] = evaluate(*best_u);
    return true;
}

void DfoSolver::insert(Point p, std::size_t center, bool success) {
    const Eigen::VectorXd anchor = success ? p.u : set_[center].u;
    const auto lag = lagrange_values(p.u);
    std::size_t j_best = set_.size();
    double best = -1.0;
    for (std::size_t j = 0; j < set_.size(); ++j) {
        if (j == center) continue;
        const double dist = (set_[j].u - anchor).norm() / radius_;
        const double weight = std::max(1.0, dist * dist);
        const double score = lag ? std::abs((*lag)[static_cast<Eigen::Index>(j)]) * weight : dist;
        if (score > best) {
            best = score;
            j_best = j;
        }
    }
    if (j_best == set_.size()) return;
    if (success || !lag || best > 1.0) set_[j_best] = std::move(p);
}

void DfoSolver::shrink() {
    radius_ *= 0.5;
    geometry_blocked_ = false;
}

void DfoSolver::check_stop(bool allow_stop) {
    if (!allow_stop || finished_) return;
    if (radius_ < options_.radius_end) {
        finished_ = true;
        termination_ = Termination::trust_region;
        return;
    }
    if (options_.delta_f_tol > 0.0 && merits_.size() >= 5) {
        const double f = merits_.back();
        if (delta_f(merits_) < options_.delta_f_tol * (1.0 + std::abs(f))) {
            finished_ = true;
            termination_ = Termination::delta_f;
        }
    }
}

void DfoSolver::iterate(bool allow_stop) {
    if (radius_ < options_.radius_end) {
        if (allow_stop) {
            check_stop(true);
            return;
        }
        // Stopping is suppressed: keep spending evaluations at the minimum radius.
        radius_ = options_.radius_end;
        const std::size_t c = center_index();
        if (!geometry_step(c, true)) throw std::runtime_error("dfo: no admissible polling point");
        return;
    }

    const std::size_t c = center_index();
    if (!geometry_blocked_ && poorly_poised(c)) {
        if (geometry_step(c, false)) return;
        geometry_blocked_ = true;
    }

    const Point& pc = set_[c];
    const Eigen::MatrixXd d = displacements(c);
    Eigen::VectorXd df(d.rows());
    Eigen::MatrixXd dc(d.rows(), static_cast<Eigen::Index>(constraint_count_));
    Eigen::Index r = 0;
    for (std::size_t j = 0; j < set_.size(); ++j) {
        if (j == c) continue;
        df[r] = set_[j].f - pc.f;
        if (constraint_count_ > 0) dc.row(r) = (set_[j].c - pc.c).transpose();
        ++r;
    }
    const Eigen::VectorXd gf = linear_gradient(d, df);
    Eigen::MatrixXd gc(dim, static_cast<Eigen::Index>(constraint_count_));
    for (Eigen::Index k = 0; k < gc.cols(); ++k) gc.col(k) = linear_gradient(d, dc.col(k));

    const bool feasible_center = (pc.c.array() >= 0.0).all();
    Eigen::VectorXd u_trial;
    bool have_trial = false;
    if (constraint_count_ > 0) {
        // Linearized nonlinear constraints c_k + g_k' (u - uc) >= 0 as extra rows.
        Eigen::MatrixXd a(gc.cols(), dim);
        Eigen::VectorXd b(gc.cols());
        for (Eigen::Index k = 0; k < gc.cols(); ++k) {
            const double nrm = gc.col(k).norm();
            const double s = nrm > 0.0 ? nrm : 1.0;
            a.row(k) = -gc.col(k).transpose() / s;
            b[k] = (pc.c[k] - gc.col(k).dot(pc.u)) / s;
        }
        const Polytope poly = feasible_.with_rows(a, b);
        if (feasible_center) {
            if (poly.contains(pc.u, 1e-9)) {
                u_trial = path_step(poly, pc.u, pc.u, gf);
                have_trial = true;
            }
        } else if (const auto z0 = poly.project(pc.u)) {
            // Restoration: reach the linearized feasible set, then descend
            // inside it if the radius leaves room.
            const Eigen::VectorXd to = *z0 - pc.u;
            if (to.norm() <= radius_) {
                u_trial = path_step(poly, *z0, pc.u, gf);
            } else {
                const auto z = feasible_.project(pc.u + radius_ * to / to.norm());
                u_trial = z ? *z : pc.u;
            }
            have_trial = true;
        }
    }
    if (!have_trial) {
        Eigen::VectorXd g = gf;
        for (Eigen::Index k = 0; k < gc.cols(); ++k) {
            if (pc.c[k] < 0.0) g -= options_.penalty * gc.col(k);
        }
        u_trial = path_step(feasible_, pc.u, pc.u, g);
    }

    const Eigen::VectorXd step = u_trial - pc.u;
    auto model_merit = [&](const Eigen::VectorXd& s) {
        Eigen::VectorXd cm = pc.c;
        if (constraint_count_ > 0) cm += gc.transpose() * s;
        return merit(pc.f + gf.dot(s), cm);
    };
    const double pred = model_merit(Eigen::VectorXd::Zero(dim)) - model_merit(step);
    if (step.norm() < 1e-3 * radius_ || !(pred > 1e-14 * (1.0 + std::abs(pc.merit))) || !is_new(u_trial)) {
        // The model promises nothing inside this radius.
        if (!geometry_blocked_ && poorly_poised(c) && geometry_step(c, false)) return;
        shrink();
        if (radius_ < options_.radius_end) {
            if (allow_stop) check_stop(true);
        }
        return;
    }

    const double merit_c = pc.merit;
    Point p = evaluate(u_trial);
    const double rho = (merit_c - p.merit) / pred;
    const bool success = p.merit < merit_c;
    insert(std::move(p), c, success);
    if (success) geometry_blocked_ = false;

    if (rho >= 0.7 && step.norm() >= 0.99 * radius_) {
        radius_ = std::min(2.0 * radius_, options_.radius_max);
    } else if (rho < 0.1) {
        if (geometry_blocked_ || !poorly_poised(center_index())) shrink();
    }
    check_stop(allow_stop);
}

void DfoSolver::run(std::size_t fev_limit, bool allow_stop) {
    const std::size_t limit = std::min(fev_limit, options_.max_fev);
    while (!finished_ && history_.size() < limit) {
        if (!pending_.empty()) {
            const std::size_t j = pending_.front();
            pending_.erase(pending_.begin());
            set_[j] = evaluate(set_[j].u);
            if (pending_.empty()) check_stop(allow_stop);
            continue;
        }
        if (set_.size() < static_cast<std::size_t>(dim) + 1) {
            initialize_next();
            if (set_.size() == static_cast<std::size_t>(dim) + 1) check_stop(allow_stop);
            continue;
        }
        iterate(allow_stop);
    }
    if (!finished_ && history_.size() >= options_.max_fev) {
        finished_ = true;
        termination_ = Termination::max_fev;
    }
}

void DfoSolver::switch_fidelity(std::size_t fidelity, std::string phase) {
    fidelity_ = fidelity;
    phase_ = std::move(phase);
    merits_.clear();
    finished_ = false;
    pending_.clear();
    for (std::size_t j = 0; j < set_.size(); ++j) pending_.push_back(j);
}

OptimRun DfoSolver::result() const {
    OptimRun run;
    run.history = history_;
    run.n_fev = history_.size();
    run.terminated_by = termination_;
    const HistoryEntry* best = nullptr;
    const HistoryEntry* best_merit = nullptr;
    for (const auto& h : history_) {
        if (h.fidelity != fidelity_) continue;
        if (h.feasible && (!best || h.objective < best->objective)) best = &h;
        if (!best_merit || h.merit < best_merit->merit) best_merit = &h;
    }
    if (best) {
        run.best = *best;
        run.best_feasible = true;
    } else if (best_merit) {
        run.best = *best_merit;
    }
    return run;
}

OptimRun dfo_minimize(ScalarProblem& problem, const DesignVector& x0, const DesignConstraints& constraints,
                      const DfoOptions& options, const FidelitySwitch* fidelity_switch, const std::string& phase) {
    DfoSolver solver(problem, x0, constraints, options, phase);
    if (fidelity_switch) {
        solver.run(fidelity_switch->after_fev, false);
        if (!solver.finished()) solver.switch_fidelity(fidelity_switch->fidelity, fidelity_switch->phase);
    }
    solver.run(options.max_fev, true);
    return solver.result();
}

void write_history_csv(std::span<const HistoryEntry> history, const std::filesystem::path& path) {
    CsvTable t({"n_fev", "start", "phase", "fidelity", "yield", "cost", "objective", "feasible", "d1", "d2", "d3", "s"});
    for (const auto& h : history) {
        t.row({std::to_string(h.n_fev), std::to_string(h.start), h.phase.empty() ? "single" : h.phase, std::to_string(h.fidelity),
               format_double(h.yield), format_double(h.cost), format_double(h.objective), h.feasible ? "1" : "0",
               format_double(h.design.d1), format_double(h.design.d2), format_double(h.design.d3),
               format_double(h.design.s)});
    }
    t.write(path);
}

}  // namespace yieldopt
