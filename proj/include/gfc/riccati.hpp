#pragma once

#include <vector>

#include <Eigen/Dense>

namespace gfc {

// Stabilizing solution of the discrete algebraic Riccati equation
//   Sigma = F Sigma F' + G G'
//           - (F Sigma h' + G)(F Sigma h' + G)' / (1 + h Sigma h')
// for a row vector h (the G = 0 case is the classical output-prediction DARE).
struct DareSolution {
  Eigen::MatrixXd sigma_plus;  // k x k, symmetric PSD
  Eigen::MatrixXd gamma;       // k x 1
  Eigen::MatrixXd closed_loop; // F - gamma * h, spectral radius < 1
  double innovation_variance = 1.0;  // 1 + h Sigma h'
  double residual = 0.0;             // max-norm DARE residual
  long iterations = 0;
};

struct DareOptions {
  double tol = 1e-13;       // iterate delta max-norm, relative to 1 + |Sigma|
  long max_iterations = 1000000;
  Eigen::MatrixXd sigma0;   // warm start; identity when empty
};

// One step of the Riccati map with measurement-noise variance r (r = 1 for the
// textbook recursion). Shared by the recursion, the solver and the simulator.
Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                             const Eigen::MatrixXd& h, const Eigen::MatrixXd& sigma,
                             double r = 1.0);

// Fixed-point iteration from Sigma_0 = I; throws on non-convergence or when
// F - G h carries a unit-circle eigenvalue (margin 1e-8).
DareSolution dare_stabilizing(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                              const Eigen::MatrixXd& h_eff, const DareOptions& opts = {});

std::vector<Eigen::MatrixXd> riccati_recursion(const Eigen::MatrixXd& F,
                                               const Eigen::MatrixXd& G,
                                               const Eigen::MatrixXd& h_eff,
                                               const Eigen::MatrixXd& sigma0, int steps);

struct DareReport {
  bool det_identity_ok = false;      // 1 + h Sigma h' = det(F)/det(F - Gamma h), G = 0 only
  double det_identity_residual = 0.0;
  bool reflection_ok = false;        // eig(F - Gamma h) reflects eig(F - G h) into the disc
  double reflection_residual = 0.0;
  bool rank_ok = false;              // rank(Sigma_+) = #outside-circle eigenvalues of F - G h
  int rank = 0;
  int expected_rank = 0;
};

DareReport verify_dare_properties(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                                  const Eigen::MatrixXd& h_eff, const DareSolution& sol);

double spectral_radius(const Eigen::MatrixXd& M);

// Numerical rank with the scale-free threshold 1e-8 * max(trace, 1).
int psd_rank(const Eigen::MatrixXd& S);

}  // namespace gfc
