#pragma once

#include "yieldopt/pmsm_constants.hpp"
#include "yieldopt/qoi_model.hpp"

namespace yieldopt {

/// Closed-form stand-in for the finite element average-torque computation.
/// See pmsm_constants.hpp for the formula.
class SyntheticPmsm final : public QoiModel {
public:
    explicit SyntheticPmsm(double tau_nominal = pmsm::tau_nominal) : tau_nominal_(tau_nominal) {}

    std::size_t parameter_dim() const override { return 2 * pmsm::magnet_count; }
    std::string name() const override { return "synthetic"; }

    double tau_nominal() const { return tau_nominal_; }

    // Individual factors, exposed for tests and oracles.
    static double surface_factor(double d1, double d2);
    static double depth_factor(double d3);
    static double skew_factor(double s);
    /// Mean normalized magnet strength (1/6) sum (Br_i/0.94) cos(phi_i).
    static double magnet_factor(std::span<const double> p);

protected:
    double do_evaluate(const DesignVector& x, std::span<const double> p) override;

private:
    double tau_nominal_;
};

/// Average torque of the synthetic model; throws std::invalid_argument on a
/// parameter vector that is not 12-dimensional.
double synthetic_torque(const DesignVector& x, std::span<const double> p);

}  // namespace yieldopt
