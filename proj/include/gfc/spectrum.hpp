#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gfc/poly.hpp"

namespace gfc {

inline constexpr int kDefaultGrid = 4096;          // circle sampling resolution
inline constexpr double kStabilityMargin = 1e-9;   // root moduli must exceed 1 + margin

// Companion-form realization of a rational transfer function P(z)/Q(z):
//   S_{n+1} = F S_n + G U_n,   Z_n = H S_n + U_n
// with H_Z(z) = det(I - z(F - G H)) / det(I - z F) = P(z)/Q(z).
struct StateSpace {
  Eigen::MatrixXd F;  // k x k, top row -q_1..-q_k, subdiagonal ones
  Eigen::MatrixXd G;  // k x 1, first unit vector
  Eigen::MatrixXd H;  // 1 x k, entries p_n - q_n

  int order() const { return static_cast<int>(F.rows()); }
};

// ARMA(k) power spectral density sigma2 * |P(e^{i theta})|^2 / |Q(e^{i theta})|^2
// with P, Q monic (constant term 1), stable (all roots strictly outside the unit
// circle) and co-prime. Immutable after construction.
class RationalSpectrum {
 public:
  // p, q hold (p_1..p_k), (q_1..q_k); trailing zeros are trimmed.
  RationalSpectrum(std::vector<double> p, std::vector<double> q, double sigma2 = 1.0);

  static RationalSpectrum white(double sigma2) { return RationalSpectrum({}, {}, sigma2); }
  static RationalSpectrum arma1(double alpha, double beta, double sigma2 = 1.0) {
    return RationalSpectrum({alpha}, {beta}, sigma2);
  }

  const Poly& p() const { return p_; }  // full polynomial incl. leading 1
  const Poly& q() const { return q_; }
  double sigma2() const { return sigma2_; }
  int order() const { return order_; }
  bool is_white() const { return order_ == 0; }

  double eval(double theta) const;

  StateSpace to_state_space() const;

  // Exact autocovariances R(0..m) from the state-space Lyapunov equation.
  std::vector<double> autocovariances(int m) const;

  Eigen::MatrixXd toeplitz_covariance(int n) const;

  // Differential entropy rate in nats, computed by quadrature of
  // (1/2) log(2 pi e S_Z) and cross-checked against Jensen's formula on the
  // canonical factor; throws if the two disagree beyond 1e-10.
  double entropy_rate(int grid = kDefaultGrid) const;
  double entropy_rate_quadrature(int grid = kDefaultGrid) const;
  double entropy_rate_jensen() const;

  double min_on_grid(int grid = kDefaultGrid) const;
  double max_on_grid(int grid = kDefaultGrid) const;

 private:
  Poly p_, q_;  // coefficient vectors incl. constant 1
  double sigma2_;
  int order_;
};

// PSD value for raw coefficient vectors (p_1..p_k etc.), no stability checks.
// Used by the closed-form ARMA(1) paths which admit |alpha| = 1.
double psd_value(const std::vector<double>& p, const std::vector<double>& q, double sigma2,
                 double theta);

}  // namespace gfc
