#pragma once

#include <string>

#include <Eigen/Dense>

namespace gfc {

// Finite-horizon feedback-capacity solution in the Boyd-Ordentlich variables.
struct NBlockSolution {
  Eigen::MatrixXd k_y;      // output covariance
  Eigen::MatrixXd b_lower;  // strictly lower-triangular feedback matrix
  Eigen::MatrixXd k_v;      // K_Y - (I+B) K_Z (I+B)'
  double value = 0.0;       // (1/2n) log det(K_Y)/det(K_Z), nats per symbol
  double kkt_residual = 0.0;
  std::string method;       // "barrier+polish" or "alternation"
};

struct NBlockOptions {
  double mu_min = 1e-9;        // barrier parameter floor (t = 1/mu)
  int newton_max_per_stage = 80;
  int polish_max_iter = 5000;
  double polish_tol_scale = 0.3;  // stop polish at scale * 1e-6 * n
};

// Maximize log det K_Y subject to K_Y >= (I+B) K_Z (I+B)' and the trace
// constraint, by a log-det barrier with damped Newton steps, then an exact
// alternation polish (orthogonalize B at fixed message law / water-fill K_V at
// fixed B). Falls back to the alternation alone if Newton fails.
NBlockSolution nblock_feedback(const Eigen::MatrixXd& k_z, double P,
                               const NBlockOptions& opts = {});

struct NBlockConditionReport {
  double power_residual = 0.0;
  double waterfill_residual = 0.0;
  double orthogonality_residual = 0.0;
  bool pass = false;  // all three below 1e-6 n
};

NBlockConditionReport verify_nblock_conditions(const NBlockSolution& sol,
                                               const Eigen::MatrixXd& k_z, double P);

struct NBlockRankReport {
  int rank_k_v = 0;
  double band_residual = 0.0;  // max |K_Y(i,j)| for |i-j| > k, relative to max |K_Y|
  bool rank_ok = false;
  bool band_ok = false;
};

// For banded (moving-average) noise of bandwidth 2k+1: rank(K_V) <= k and K_Y
// banded with the same bandwidth.
NBlockRankReport nblock_rank_check(const NBlockSolution& sol, int bandwidth_k);

struct FeedbackGain {
  double nonfeedback = 0.0;  // C_n
  double feedback = 0.0;     // C_FB,n
  double gain = 0.0;
  bool k_x_diagonal = false;
};

FeedbackGain feedback_gain(const Eigen::MatrixXd& k_z, double P);

}  // namespace gfc
