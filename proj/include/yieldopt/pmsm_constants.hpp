#pragma once

// Constants of the synthetic surface-magnet PMSM torque model.
//
//   tau(x, p) = tau_nominal * g(d1, d2) * h_depth(d3) * h_skew(s) * m(p)
//
//   g(d1, d2)   = d1 * d2 / (19 * 7)                        magnet surface
//   h_depth(d3) = (1 - beta exp(-d3/lambda)) / (1 - beta exp(-7/lambda))
//   h_skew(s)   = exp(kappa * (s_opt^2 - (s - s_opt)^2))
//   m(p)        = (1/6) sum_i (Br_i / 0.94) cos(phi_i)
//
// Every factor is 1 at the nominal design (19, 7, 7, 0) and mean magnet data,
// so the nominal torque equals tau_nominal exactly. Torque grows linearly
// with magnet surface and mean remanence, saturates with magnet depth, peaks
// at a skew of s_opt, and drops with magnetization misalignment.
//
// Machine data for reference: 1930 rpm rated speed, 3 pole pairs, so one
// electrical period is 60 / (1930 * 3) s ~ 10.36 ms; 36 slots.

namespace yieldopt::pmsm {

inline constexpr int magnet_count = 6;

inline constexpr double tau_nominal = 10.64;  // N m, average torque at nominal design

inline constexpr double remanence_mean = 0.94;         // T
inline constexpr double remanence_half_width = 0.05;   // T
inline constexpr double angle_mean_deg = 0.0;
inline constexpr double angle_half_width_deg = 3.0;

inline constexpr double nominal_d1 = 19.0;  // mm
inline constexpr double nominal_d2 = 7.0;   // mm
inline constexpr double nominal_d3 = 7.0;   // mm
inline constexpr double nominal_s = 0.0;    // deg

// Depth saturation. beta gives h_depth(10) / h_depth(7) = 1.15 exactly:
// beta = 0.15 / (1.15 exp(-1.4) - exp(-2)).
inline constexpr double depth_length = 5.0;  // mm
inline constexpr double depth_beta = 1.0117960219233997;

// Skew response. kappa = ln(1.125) / 4 gives h_skew(s_opt) = 1.125.
inline constexpr double skew_optimum_deg = 2.0;
inline constexpr double skew_kappa = 0.029445758914095864;

// Lower torque bound of the default performance specification. Chosen so that
// a 10^6-sample Monte Carlo run at the nominal design gives a yield of 0.04
// (the 0.96-quantile of tau(x_nom, p)).
inline constexpr double default_torque_threshold = 10.8685;

}  // namespace yieldopt::pmsm
