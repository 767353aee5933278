#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfc/laurent.hpp"
#include "gfc/riccati.hpp"
#include "gfc/spectrum.hpp"

namespace gfc {

// A feedback design: projection direction X, its Riccati solution, the filter
// B(z) stored through 1 + B(z) = filter_num(z)/filter_den(z), and the output
// spectrum. filter_den is stable; filter_num carries the all-pass zeros inside
// the unit circle that generate the rate (Jensen).
struct FeedbackDesign {
  Eigen::MatrixXd x_direction;  // 1 x k (empty for the white path)
  DareSolution dare;
  double rate = 0.0;   // nats per symbol
  double power = 0.0;
  Poly filter_num{1.0};
  Poly filter_den{1.0};
  std::optional<RationalSpectrum> output_spectrum;
  bool cancellation_warning = false;

  std::complex<double> one_plus_b(double theta) const;      // 1 + B(e^{i theta})
  std::complex<double> b_value(double theta) const;         // B(e^{i theta})
};

// Residuals of the design invariants against a channel (quadrature cross-checks).
struct DesignResiduals {
  double rate_residual = 0.0;      // |rate - int (1/2) log|1+B|^2|
  double power_residual = 0.0;     // |power - int |B|^2 S_Z|
  double spectrum_residual = 0.0;  // sup |S_Y - |1+B|^2 S_Z| on the grid
  double b_at_zero = 0.0;          // |B(0)|
};
DesignResiduals design_residuals(const FeedbackDesign& d, const RationalSpectrum& spec,
                                 int grid = kDefaultGrid);

// ---------------------------------------------------------------------------
// ARMA(1) closed form.

struct Arma1Capacity {
  double x0 = 0.0;       // unique positive root in (0,1)
  double capacity = 0.0; // -log x0, nats
  int sigma = 0;         // sgn(beta - alpha)
};

// alpha in [-1,1], beta in (-1,1), P > 0. x0 solves
//   P x^2 (1 + sigma beta x)^2 = (1 - x^2)(1 + sigma alpha x)^2.
Arma1Capacity arma1_capacity(double alpha, double beta, double P);

// Optimal ARMA(1) filter B(z) = (1+beta z)/(1+alpha z) * y z/(1 - sigma x z);
// requires alpha != beta and |alpha| < 1. White inputs belong to
// white_blaschke_filter instead.
FeedbackDesign arma1_filter(double alpha, double beta, double P);

// ---------------------------------------------------------------------------
// ARMA(k) via the DARE-coupled search over the projection direction X.

struct ArmakOptions {
  int random_starts = 64;
  std::uint64_t seed = 1;
  int nm_max_iter = 400;          // Nelder-Mead iterations per penalty stage
  double power_activation_tol = 1e-8;  // relative, |X Sigma X' - P| <= tol * P
  int grid = kDefaultGrid;
};

struct ArmakStartLog {
  Eigen::MatrixXd x_start;
  Eigen::MatrixXd x_final;
  double rate = 0.0;
  double power = 0.0;
  bool feasible = false;
  std::string label;
};

struct ArmakResult {
  FeedbackDesign design;
  std::vector<ArmakStartLog> starts;
};

ArmakResult armak_capacity(const RationalSpectrum& spec, double P,
                           const ArmakOptions& opts = {});

// Assembles the rational filter and output spectrum for a direction X with its
// stabilizing DARE solution: 1 + B(z) as a ratio of the four characteristic
// polynomials, S_Y = sigma^2 |R/Q|^2.
FeedbackDesign build_filter(const RationalSpectrum& spec, const Eigen::MatrixXd& X,
                            const DareSolution& dare);

// All-pass filter family for the white channel; requires prod a_i^2 = N/(P+N).
FeedbackDesign white_blaschke_filter(double noise_power, double P, const BlaschkeProduct& b);

// ---------------------------------------------------------------------------
// Optimality-condition verifiers.

struct SufficiencyReport {
  double power_residual = 0.0;      // |int |B|^2 S_Z - P|
  double lambda = 0.0;              // certificate level fitted from the causal coefficients
  double lambda_margin = 0.0;       // grid min of S_Y minus lambda; must be >= -tol
  double anticausal_residual = 0.0; // causal-part residual of lambda/(1+B(1/z)) - B(z) S_Z(z)
  bool pass = false;
};

SufficiencyReport verify_sufficiency(const FeedbackDesign& d, const RationalSpectrum& spec,
                                     double P, int grid = kDefaultGrid);

struct NecessaryReport {
  double power_residual = 0.0;
  double waterfill_residual = 0.0;     // sup |S_V (S_Y - lambda*)|
  double orthogonality_residual = 0.0; // causal-part residual of S_V + B S_Z (1 + B(1/z))
  bool power_ok = false;
  bool waterfill_ok = false;
  bool orthogonality_ok = false;
};

// s_v holds samples of S_V on the uniform grid theta_t = 2 pi t / grid.
NecessaryReport verify_necessary(const std::vector<double>& s_v, const FeedbackDesign& d,
                                 const RationalSpectrum& spec, double P);

struct ArmakSufficiencyReport {
  double power_residual = 0.0;
  std::vector<std::complex<double>> eigenvalues;  // of F - G(X+H)
  double min_modulus = 0.0;
  double min_separation = 0.0;
  double spectrum_spread = 0.0;   // max |S_Y(a_i) - S_Y(a_j)|
  double circle_margin = 0.0;     // min_circle S_Y - max_i S_Y(a_i)
  bool pass = false;
};

ArmakSufficiencyReport verify_armak_sufficiency(const FeedbackDesign& d,
                                                const RationalSpectrum& spec, double P,
                                                int grid = kDefaultGrid);

}  // namespace gfc
