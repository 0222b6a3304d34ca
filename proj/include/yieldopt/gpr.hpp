#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace yieldopt {

class GprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two training inputs coincide after standardization.
class DuplicateInputError : public GprError {
public:
    using GprError::GprError;
};

struct GprConfig {
    std::size_t grid_size = 7;        ///< log-grid points per hyperparameter
    int refine_rounds = 3;            ///< coordinate refinement sweeps after the grid
    double jitter_start = 1e-10;      ///< relative to zeta^2
    double jitter_max = 1e-4;         ///< relative to zeta^2
    std::size_t refit_every = 10;     ///< hyperparameter refresh cadence of update(); 0 = never
    double duplicate_tol = 1e-9;      ///< in standardized coordinates
    double zeta_lower = 0.1;          ///< zeta search range, in units of the output std
    double zeta_upper = 100.0;
    double length_lower = 0.5;        ///< length scale search range, in units of the
    double length_upper = 20.0;       ///< median pairwise standardized distance
};

/// Squared exponential kernel zeta^2 exp(-|y - y2|^2 / (2 l^2)).
double rbf_kernel(std::span<const double> y, std::span<const double> y2, double zeta, double length_scale);

/// Per-coordinate affine map to zero mean and unit range.
struct InputScaling {
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    static InputScaling from_inputs(const Eigen::MatrixXd& points);  ///< one point per column
    Eigen::VectorXd apply(std::span<const double> y) const;
};

struct GprPrediction {
    double mean = 0.0;
    double std = 0.0;
};

/// Noise-free Gaussian process regression with a constant prior mean (the
/// mean of the training outputs) and an isotropic squared exponential kernel
/// over standardized inputs.
///
/// A fitted model is immutable through its const interface; update() returns
/// a new model. append() is the in-place variant for callers that own the
/// model exclusively.
class GprModel {
public:
    enum class Admission { ok, duplicate, degenerate };

    /// Selects (zeta, l) by maximizing the log marginal likelihood on a log
    /// grid followed by coordinate refinement.
    static GprModel fit(const std::vector<std::vector<double>>& inputs, const std::vector<double>& outputs,
                        const GprConfig& config = {});

    /// Factorizes with the given hyperparameters, scaling and relative jitter
    /// (escalated only if the factorization fails).
    static GprModel fit_fixed(const std::vector<std::vector<double>>& inputs, const std::vector<double>& outputs,
                              double zeta, double length_scale, const InputScaling& scaling, double jitter_relative,
                              const GprConfig& config = {});

    GprPrediction predict(std::span<const double> y) const;

    /// Whether (y, q) can be folded in without breaking the factorization.
    Admission admission(std::span<const double> y) const;

    /// Model with one more training point. Throws DuplicateInputError for a
    /// near-duplicate input. Every `refit_every` updates the hyperparameters
    /// and scaling are re-selected from scratch.
    GprModel update(std::span<const double> y, double q) const;
    void append(std::span<const double> y, double q);

    std::size_t size() const { return static_cast<std::size_t>(outputs_.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(raw_.rows()); }
    double zeta() const { return zeta_; }
    double length_scale() const { return length_scale_; }
    double jitter() const { return jitter_relative_ * zeta_ * zeta_; }
    double jitter_relative() const { return jitter_relative_; }
    double prior_mean() const { return prior_mean_; }
    const InputScaling& scaling() const { return scaling_; }
    const GprConfig& config() const { return config_; }
    std::size_t updates_since_refit() const { return updates_since_refit_; }
    double log_marginal_likelihood() const;

    std::vector<std::vector<double>> inputs() const;
    std::vector<double> outputs() const;

    /// Versioned JSON snapshot (training data, hyperparameters, scaling).
    std::string to_json() const;
    static GprModel from_json(const std::string& text);

private:
    GprModel() = default;

    static GprModel build(Eigen::MatrixXd raw, Eigen::VectorXd outputs, double zeta, double length_scale,
                          InputScaling scaling, double jitter_relative, const GprConfig& config);
    void factorize();
    void solve_weights();
    Eigen::VectorXd kernel_column(const Eigen::VectorXd& z) const;

    GprConfig config_;
    Eigen::MatrixXd raw_;       ///< d x n original inputs
    Eigen::MatrixXd points_;    ///< d x n standardized inputs
    Eigen::VectorXd outputs_;
    InputScaling scaling_;
    double zeta_ = 1.0;
    double length_scale_ = 1.0;
    double jitter_relative_ = 0.0;
    double prior_mean_ = 0.0;
    Eigen::MatrixXd chol_;      ///< lower factor of K + jitter I
    Eigen::VectorXd l_inv_q_;   ///< L^-1 q
    Eigen::VectorXd l_inv_one_; ///< L^-1 1
    Eigen::VectorXd alpha_;     ///< (K + jitter I)^-1 (q - prior_mean)
    std::size_t updates_since_refit_ = 0;
};

}  // namespace yieldopt
