#include "yieldopt/synthetic_pmsm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace yieldopt {

double SyntheticPmsm::surface_factor(double d1, double d2) {
    return d1 * d2 / (pmsm::nominal_d1 * pmsm::nominal_d2);
}

double SyntheticPmsm::depth_factor(double d3) {
    const double num = 1.0 - pmsm::depth_beta * std::exp(-d3 / pmsm::depth_length);
    const double den = 1.0 - pmsm::depth_beta * std::exp(-pmsm::nominal_d3 / pmsm::depth_length);
    return num / den;
}

double SyntheticPmsm::skew_factor(double s) {
    const double so = pmsm::skew_optimum_deg;
    const double ds = s - so;
    return std::exp(pmsm::skew_kappa * (so * so - ds * ds));
}

double SyntheticPmsm::magnet_factor(std::span<const double> p) {
    constexpr int n = pmsm::magnet_count;
    if (p.size() != 2 * n) {
        throw std::invalid_argument("synthetic PMSM expects 12 uncertain parameters, got " + std::to_string(p.size()));
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double phi = p[static_cast<std::size_t>(n + i)] * (std::numbers::pi / 180.0);
        sum += (p[static_cast<std::size_t>(i)] / pmsm::remanence_mean) * std::cos(phi);
    }
    return sum / n;
}

double SyntheticPmsm::do_evaluate(const DesignVector& x, std::span<const double> p) {
    const double m = magnet_factor(p);
    return tau_nominal_ * surface_factor(x.d1, x.d2) * depth_factor(x.d3) * skew_factor(x.s) * m;
}

double synthetic_torque(const DesignVector& x, std::span<const double> p) {
    SyntheticPmsm model;
    return model.evaluate(x, p);
}

}  // namespace yieldopt
