#include "yieldopt/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <json.hpp>

namespace yieldopt {

namespace {

constexpr const char* snapshot_format = "yieldopt-gpr";
constexpr int snapshot_version = 1;

Eigen::MatrixXd to_columns(const std::vector<std::vector<double>>& inputs) {
    if (inputs.empty()) return {};
    const auto d = static_cast<Eigen::Index>(inputs.front().size());
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (static_cast<Eigen::Index>(inputs[i].size()) != d) throw std::invalid_argument("gpr: inconsistent input dimension");
        for (Eigen::Index j = 0; j < d; ++j) {
            const double v = inputs[i][static_cast<std::size_t>(j)];
            if (!std::isfinite(v)) throw std::invalid_argument("gpr: non-finite training input");
            m(j, static_cast<Eigen::Index>(i)) = v;
        }
    }
    return m;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& pts) {
    const Eigen::Index n = pts.cols();
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = (pts.col(i) - pts.col(j)).squaredNorm();
            d2(i, j) = v;
            d2(j, i) = v;
        }
    }
    return d2;
}

void check_duplicates(const Eigen::MatrixXd& d2, double tol) {
    const Eigen::Index n = d2.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            if (d2(i, j) < tol * tol) {
                throw DuplicateInputError("gpr: training inputs " + std::to_string(j) + " and " + std::to_string(i) +
                                          " coincide after standardization");
            }
        }
    }
}

struct Factor {
    Eigen::MatrixXd chol;
    double jitter_relative;
};

// Cholesky of (R + j I) for the correlation matrix R, escalating j by 10x.
std::optional<Factor> factor_correlation(const Eigen::MatrixXd& corr, double j_start, double j_max) {
    const Eigen::Index n = corr.rows();
    for (double j = j_start; j <= j_max * (1.0 + 1e-12); j *= 10.0) {
        Eigen::MatrixXd k = corr;
        k.diagonal().array() += j;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd l = llt.matrixL();
        if ((l.diagonal().array() > 0.0).all()) return Factor{std::move(l), j};
        (void)n;
    }
    return std::nullopt;
}

Eigen::MatrixXd correlation(const Eigen::MatrixXd& d2, double length_scale) {
    return (-d2.array() / (2.0 * length_scale * length_scale)).exp().matrix();
}

// Log marginal likelihood of K = zeta^2 (R + j I), from s = r' (R + jI)^-1 r
// and logdet(R + j I).
double lml(double s, double logdet, double zeta, Eigen::Index n) {
    const double nn = static_cast<double>(n);
    return -0.5 * s / (zeta * zeta) - nn * std::log(zeta) - 0.5 * logdet - 0.5 * nn * std::log(2.0 * std::numbers::pi);
}

struct LengthScaleTerms {
    double s;
    double logdet;
    double jitter_relative;
};

std::optional<LengthScaleTerms> terms_for(const Eigen::MatrixXd& d2, const Eigen::VectorXd& r, double length_scale,
                                          const GprConfig& cfg) {
    auto f = factor_correlation(correlation(d2, length_scale), cfg.jitter_start, cfg.jitter_max);
    if (!f) return std::nullopt;
    const Eigen::VectorXd v = f->chol.triangularView<Eigen::Lower>().solve(r);
    return LengthScaleTerms{v.squaredNorm(), 2.0 * f->chol.diagonal().array().log().sum(), f->jitter_relative};
}

// Golden-section maximization of f over [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, int iterations) {
    constexpr double g = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iterations; ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

}  // namespace

double rbf_kernel(std::span<const double> y, std::span<const double> y2, double zeta, double length_scale) {
    if (!(zeta > 0.0) || !(length_scale > 0.0)) throw std::invalid_argument("rbf_kernel: hyperparameters must be positive");
    if (y.size() != y2.size()) throw std::invalid_argument("rbf_kernel: dimension mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y2[i];
        d2 += d * d;
    }
    return zeta * zeta * std::exp(-d2 / (2.0 * length_scale * length_scale));
}

InputScaling InputScaling::from_inputs(const Eigen::MatrixXd& points) {
    InputScaling s;
    s.center = points.rowwise().mean();
    s.scale = points.rowwise().maxCoeff() - points.rowwise().minCoeff();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
        if (!(s.scale[i] > 1e-12 * std::max(1.0, std::abs(s.center[i])))) s.scale[i] = 1.0;
    }
    return s;
}

Eigen::VectorXd InputScaling::apply(std::span<const double> y) const {
    if (static_cast<Eigen::Index>(y.size()) != center.size()) throw std::invalid_argument("gpr: input dimension mismatch");
    Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
    return (v - center).cwiseQuotient(scale);
}

GprModel GprModel::fit(const std::vector<std::vector<double>>& inputs, const std::vector<double>& outputs,
                       const GprConfig& config) {
    if (inputs.size() < 2) throw std::invalid_argument("gpr: need at least two training points");
    if (inputs.size() != outputs.size()) throw std::invalid_argument("gpr: inputs and outputs differ in length");
    Eigen::MatrixXd raw = to_columns(inputs);
    Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
    if (!q.allFinite()) throw std::invalid_argument("gpr: non-finite training output");

    InputScaling scaling = InputScaling::from_inputs(raw);
    Eigen::MatrixXd pts(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.cols(); ++i) pts.col(i) = (raw.col(i) - scaling.center).cwiseQuotient(scaling.scale);
    const Eigen::MatrixXd d2 = squared_distances(pts);
    check_duplicates(d2, config.duplicate_tol);

    const Eigen::Index n = q.size();
    const double m = q.mean();
    const Eigen::VectorXd r = q.array() - m;
    double sd = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    if (!(sd > 0.0)) sd = 1.0;

    std::vector<double> dists;
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) dists.push_back(std::sqrt(d2(i, j)));
    }
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2), dists.end());
    const double dmed = dists[dists.size() / 2];

    const double log_l_lo = std::log(config.length_lower * dmed), log_l_hi = std::log(config.length_upper * dmed);
    const double log_z_lo = std::log(config.zeta_lower * sd), log_z_hi = std::log(config.zeta_upper * sd);
    const std::size_t g = std::max<std::size_t>(config.grid_size, 2);
    const double l_step = (log_l_hi - log_l_lo) / static_cast<double>(g - 1);
    const double z_step = (log_z_hi - log_z_lo) / static_cast<double>(g - 1);

    double best = -std::numeric_limits<double>::infinity();
    double best_log_l = 0.0, best_log_z = 0.0;
    std::optional<LengthScaleTerms> best_terms;
    for (std::size_t a = 0; a < g; ++a) {
        const double log_l = log_l_lo + l_step * static_cast<double>(a);
        const auto t = terms_for(d2, r, std::exp(log_l), config);
        if (!t) continue;
        for (std::size_t b = 0; b < g; ++b) {
            const double log_z = log_z_lo + z_step * static_cast<double>(b);
            const double v = lml(t->s, t->logdet, std::exp(log_z), n);
            if (v > best) {
                best = v;
                best_log_l = log_l;
                best_log_z = log_z;
                best_terms = t;
            }
        }
    }
    if (!best_terms) throw GprError("gpr: kernel matrix not positive definite at any grid length scale");

    for (int round = 0; round < config.refine_rounds; ++round) {
        const double lo = std::max(log_l_lo, best_log_l - l_step), hi = std::min(log_l_hi, best_log_l + l_step);
        const double z = std::exp(best_log_z);
        auto f_l = [&](double log_l) {
            const auto t = terms_for(d2, r, std::exp(log_l), config);
            return t ? lml(t->s, t->logdet, z, n) : -std::numeric_limits<double>::infinity();
        };
        const double cand_l = golden_max(f_l, lo, hi, 10);
        if (const auto t = terms_for(d2, r, std::exp(cand_l), config); t) {
            const double v = lml(t->s, t->logdet, z, n);
            if (v > best) {
                best = v;
                best_log_l = cand_l;
                best_terms = t;
            }
        }
        const auto& t = *best_terms;
        auto f_z = [&](double log_z) { return lml(t.s, t.logdet, std::exp(log_z), n); };
        const double zlo = std::max(log_z_lo, best_log_z - z_step), zhi = std::min(log_z_hi, best_log_z + z_step);
        const double cand_z = golden_max(f_z, zlo, zhi, 20);
        if (const double v = f_z(cand_z); v > best) {
            best = v;
            best_log_z = cand_z;
        }
    }

    return build(std::move(raw), std::move(q), std::exp(best_log_z), std::exp(best_log_l), std::move(scaling),
                 best_terms->jitter_relative, config);
}

GprModel GprModel::fit_fixed(const std::vector<std::vector<double>>& inputs, const std::vector<double>& outputs,
                             double zeta, double length_scale, const InputScaling& scaling, double jitter_relative,
                             const GprConfig& config) {
    if (inputs.empty()) throw std::invalid_argument("gpr: need at least one training point");
    if (inputs.size() != outputs.size()) throw std::invalid_argument("gpr: inputs and outputs differ in length");
    if (!(zeta > 0.0) || !(length_scale > 0.0)) throw std::invalid_argument("gpr: hyperparameters must be positive");
    Eigen::MatrixXd raw = to_columns(inputs);
    Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
    return build(std::move(raw), std::move(q), zeta, length_scale, scaling, jitter_relative, config);
}

GprModel GprModel::build(Eigen::MatrixXd raw, Eigen::VectorXd outputs, double zeta, double length_scale,
                         InputScaling scaling, double jitter_relative, const GprConfig& config) {
    GprModel m;
    m.config_ = config;
    m.raw_ = std::move(raw);
    m.outputs_ = std::move(outputs);
    m.scaling_ = std::move(scaling);
    if (m.scaling_.center.size() != m.raw_.rows()) throw std::invalid_argument("gpr: scaling dimension mismatch");
    m.points_.resize(m.raw_.rows(), m.raw_.cols());
    for (Eigen::Index i = 0; i < m.raw_.cols(); ++i) {
        m.points_.col(i) = (m.raw_.col(i) - m.scaling_.center).cwiseQuotient(m.scaling_.scale);
    }
    check_duplicates(squared_distances(m.points_), config.duplicate_tol);
    m.zeta_ = zeta;
    m.length_scale_ = length_scale;
    m.jitter_relative_ = jitter_relative > 0.0 ? jitter_relative : config.jitter_start;
    m.factorize();
    return m;
}

void GprModel::factorize() {
    const Eigen::Index n = points_.cols();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        k(j, j) = zeta_ * zeta_;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v =
                zeta_ * zeta_ * std::exp(-(points_.col(i) - points_.col(j)).squaredNorm() / (2.0 * length_scale_ * length_scale_));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    for (double j = jitter_relative_; j <= config_.jitter_max * (1.0 + 1e-12) || j == jitter_relative_; j *= 10.0) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += j * zeta_ * zeta_;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd l = llt.matrixL();
            if ((l.diagonal().array() > 0.0).all()) {
                chol_ = std::move(l);
                jitter_relative_ = j;
                solve_weights();
                return;
            }
        }
        if (j > config_.jitter_max) break;
    }
    throw GprError("gpr: factorization failed after jitter escalation");
}

void GprModel::solve_weights() {
    const auto lower = chol_.triangularView<Eigen::Lower>();
    l_inv_q_ = lower.solve(outputs_);
    l_inv_one_ = lower.solve(Eigen::VectorXd::Ones(outputs_.size()));
    prior_mean_ = outputs_.mean();
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(l_inv_q_ - prior_mean_ * l_inv_one_);
}

Eigen::VectorXd GprModel::kernel_column(const Eigen::VectorXd& z) const {
    const double inv = 1.0 / (2.0 * length_scale_ * length_scale_);
    return (zeta_ * zeta_) * (-(points_.colwise() - z).colwise().squaredNorm().array() * inv).exp().matrix().transpose();
}

GprPrediction GprModel::predict(std::span<const double> y) const {
    const Eigen::VectorXd z = scaling_.apply(y);
    const Eigen::VectorXd k = kernel_column(z);
    GprPrediction p;
    p.mean = prior_mean_ + k.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    const double var = zeta_ * zeta_ - v.squaredNorm();
    p.std = var > 0.0 ? std::sqrt(var) : 0.0;
    return p;
}

GprModel::Admission GprModel::admission(std::span<const double> y) const {
    const Eigen::VectorXd z = scaling_.apply(y);
    if (size() > 0) {
        const double dmin = (points_.colwise() - z).colwise().squaredNorm().minCoeff();
        if (dmin < config_.duplicate_tol * config_.duplicate_tol) return Admission::duplicate;
    }
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kernel_column(z));
    const double pivot2 = zeta_ * zeta_ + jitter() - v.squaredNorm();
    return pivot2 > 0.5 * jitter() ? Admission::ok : Admission::degenerate;
}

GprModel GprModel::update(std::span<const double> y, double q) const {
    GprModel next = *this;
    next.append(y, q);
    return next;
}

void GprModel::append(std::span<const double> y, double q) {
    if (!std::isfinite(q)) throw std::invalid_argument("gpr: non-finite training output");
    const Eigen::VectorXd z = scaling_.apply(y);
    const Admission adm = admission(y);
    if (adm == Admission::duplicate) throw DuplicateInputError("gpr: update input duplicates a training point");
    if (adm == Admission::degenerate) throw DuplicateInputError("gpr: update input is numerically a duplicate");

    const Eigen::VectorXd k = kernel_column(z);
    const Eigen::VectorXd row = chol_.triangularView<Eigen::Lower>().solve(k);
    const double pivot = std::sqrt(zeta_ * zeta_ + jitter() - row.squaredNorm());
    const Eigen::Index n = static_cast<Eigen::Index>(size());

    raw_.conservativeResize(Eigen::NoChange, n + 1);
    raw_.col(n) = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    points_.conservativeResize(Eigen::NoChange, n + 1);
    points_.col(n) = z;
    outputs_.conservativeResize(n + 1);
    outputs_[n] = q;

    chol_.conservativeResize(n + 1, n + 1);
    chol_.col(n).setZero();
    chol_.row(n).head(n) = row.transpose();
    chol_(n, n) = pivot;
    l_inv_q_.conservativeResize(n + 1);
    l_inv_q_[n] = (q - row.dot(l_inv_q_.head(n))) / pivot;
    l_inv_one_.conservativeResize(n + 1);
    l_inv_one_[n] = (1.0 - row.dot(l_inv_one_.head(n))) / pivot;
    prior_mean_ = outputs_.mean();
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(l_inv_q_ - prior_mean_ * l_inv_one_);

    ++updates_since_refit_;
    if (config_.refit_every > 0 && updates_since_refit_ >= config_.refit_every) {
        try {
            *this = fit(inputs(), outputs(), config_);
        } catch (const GprError&) {
            // keep the extended factorization and the old hyperparameters
        }
        updates_since_refit_ = 0;
    }
}

double GprModel::log_marginal_likelihood() const {
    const Eigen::VectorXd v = l_inv_q_ - prior_mean_ * l_inv_one_;
    const double logdet = 2.0 * chol_.diagonal().array().log().sum();
    const double n = static_cast<double>(size());
    return -0.5 * v.squaredNorm() - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<std::vector<double>> GprModel::inputs() const {
    std::vector<std::vector<double>> out(size(), std::vector<double>(dim()));
    for (Eigen::Index i = 0; i < raw_.cols(); ++i) {
        for (Eigen::Index j = 0; j < raw_.rows(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = raw_(j, i);
    }
    return out;
}

std::vector<double> GprModel::outputs() const { return {outputs_.data(), outputs_.data() + outputs_.size()}; }

std::string GprModel::to_json() const {
    nlohmann::json j;
    j["format"] = snapshot_format;
    j["version"] = snapshot_version;
    j["zeta"] = zeta_;
    j["length_scale"] = length_scale_;
    j["jitter_relative"] = jitter_relative_;
    j["updates_since_refit"] = updates_since_refit_;
    j["center"] = std::vector<double>(scaling_.center.data(), scaling_.center.data() + scaling_.center.size());
    j["scale"] = std::vector<double>(scaling_.scale.data(), scaling_.scale.data() + scaling_.scale.size());
    j["inputs"] = inputs();
    j["outputs"] = outputs();
    j["config"] = {{"grid_size", config_.grid_size},       {"refine_rounds", config_.refine_rounds},
                   {"jitter_start", config_.jitter_start}, {"jitter_max", config_.jitter_max},
                   {"refit_every", config_.refit_every},   {"duplicate_tol", config_.duplicate_tol},
                   {"zeta_lower", config_.zeta_lower},     {"zeta_upper", config_.zeta_upper},
                   {"length_lower", config_.length_lower}, {"length_upper", config_.length_upper}};
    return j.dump(1);
}

GprModel GprModel::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", std::string()) != snapshot_format) throw GprError("not a GPR snapshot");
    if (j.value("version", 0) != snapshot_version) throw GprError("unsupported GPR snapshot version");
    GprConfig cfg;
    const auto& c = j.at("config");
    cfg.grid_size = c.at("grid_size").get<std::size_t>();
    cfg.refine_rounds = c.at("refine_rounds").get<int>();
    cfg.jitter_start = c.at("jitter_start").get<double>();
    cfg.jitter_max = c.at("jitter_max").get<double>();
    cfg.refit_every = c.at("refit_every").get<std::size_t>();
    cfg.duplicate_tol = c.at("duplicate_tol").get<double>();
    cfg.zeta_lower = c.at("zeta_lower").get<double>();
    cfg.zeta_upper = c.at("zeta_upper").get<double>();
    cfg.length_lower = c.at("length_lower").get<double>();
    cfg.length_upper = c.at("length_upper").get<double>();
    const auto center = j.at("center").get<std::vector<double>>();
    const auto scale = j.at("scale").get<std::vector<double>>();
    InputScaling s;
    s.center = Eigen::Map<const Eigen::VectorXd>(center.data(), static_cast<Eigen::Index>(center.size()));
    s.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
    auto m = fit_fixed(j.at("inputs").get<std::vector<std::vector<double>>>(), j.at("outputs").get<std::vector<double>>(),
                       j.at("zeta").get<double>(), j.at("length_scale").get<double>(), s,
                       j.at("jitter_relative").get<double>(), cfg);
    m.updates_since_refit_ = j.at("updates_since_refit").get<std::size_t>();
    return m;
}

}  // namespace yieldopt
