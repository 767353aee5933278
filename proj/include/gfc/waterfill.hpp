#pragma once

#include <functional>

#include <Eigen/Dense>

#include "gfc/spectrum.hpp"

namespace gfc {

struct WaterfillResult {
  double water_level = 0.0;  // lambda
  double capacity = 0.0;     // nats per symbol
  double power_used = 0.0;
};

// Water-filling on a sampled power spectral density: lambda solves
// P = int (lambda - S_Z)^+ dtheta/2pi by monotone bisection, then
// C = int (1/2) log(max{S_Z, lambda}/S_Z) dtheta/2pi.
WaterfillResult spectral_waterfill(const std::function<double(double)>& psd, double P,
                                   int grid = 8192);
WaterfillResult spectral_waterfill(const RationalSpectrum& spec, double P, int grid = 8192);

struct NBlockNonfeedback {
  Eigen::MatrixXd k_x;   // optimal input covariance
  double value = 0.0;    // C_n, nats per symbol
  double water_level = 0.0;
};

// Finite-block water-filling on the eigenvalues of an SPD noise covariance.
NBlockNonfeedback nblock_nonfeedback(const Eigen::MatrixXd& k_z, double P);

struct WaterfillConditionReport {
  double power_residual = 0.0;       // |tr K_X - nP|
  double waterfill_residual = 0.0;   // tr(K_X (K_Y - lambda_min(K_Y) I))
  bool pass = false;                 // both below 1e-8 n
};

WaterfillConditionReport verify_waterfill_conditions(const Eigen::MatrixXd& k_x,
                                                     const Eigen::MatrixXd& k_z, double P);

}  // namespace gfc
