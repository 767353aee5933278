#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gfc/fbcap.hpp"
#include "gfc/spectrum.hpp"

namespace gfc {

struct SkConfig {
  RationalSpectrum spectrum;
  double power = 1.0;
  FeedbackDesign design;
  int horizon = 400;
  int trials = 10000;
  double rate_nats = 0.0;  // attempted rate for constellation decoding
  std::uint64_t seed = 1;
};

struct SkResult {
  double empirical_rate = 0.0;  // -slope/2 of log E(V - Vhat_n)^2 over the tail half
  double avg_power = 0.0;
  std::vector<double> power_trace;                // per-step sample-mean E X_n^2
  std::vector<double> innovation_variance_trace;  // per-step sample var of Ytilde_n
  long error_count = 0;
  long trials = 0;

  // Deterministic companions from the exact covariance recursion.
  std::vector<double> det_power_trace;
  std::vector<double> det_innovation_trace;
  std::vector<double> det_log_error_trace;  // log E(V - Vhat_n)^2, exact
  std::vector<double> mc_log_error_trace;
  double deterministic_rate = 0.0;
  Eigen::MatrixXd sigma_final;  // state error covariance at the horizon (k x k)

  // Largest |z-score| of sample correlations E[X_n Y_j], j < n, at probed n.
  double max_orthogonality_zscore = 0.0;
};

// Noise-state refinement: the first k symbols carry V^k, afterwards
// X_n = X (S_n - E(S_n | Y^{n-1})). Exact Kalman recursions drive both the
// per-trial simulation and the deterministic covariance traces. White channels
// route through the message-refinement core (there is no state to refine).
SkResult simulate_state_refinement(const SkConfig& cfg);

// Message refinement: X_1 = V, X_n = (sigma x)^{-(n-1)} (V - Vhat_{n-1}),
// simulated in the rescaled coordinates D_n = X_n, which stay O(1) at any
// horizon. Requires channel order <= 1.
SkResult simulate_message_refinement(const SkConfig& cfg);

struct DecodeResult {
  double error_rate = 0.0;
  double bound = 0.0;   // erfc-form bound with fitted c0
  double c0 = 0.0;
  long error_count = 0;
  long trials = 0;
  double delta = 0.0;   // constellation spacing
  long constellation_size = 0;
};

// Equally spaced constellation on [-1, 1], minimum-variance unbiased linear
// estimation, nearest-point decoding.
DecodeResult decode_constellation(const SkConfig& cfg);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gfc
