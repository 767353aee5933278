#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "gfc/poly.hpp"

namespace gfc {

// Truncated two-sided Fourier expansion sum_{|j| <= m} c_j e^{i j theta}.
struct LaurentSeries {
  std::vector<double> coeffs;  // index j + m, j in [-m, m]
  int truncation_order = 0;    // m
  double aliasing_bound = 0.0; // magnitude of the largest retained tail coefficient
  int grid = 0;                // sampling resolution used

  double at(int j) const {
    if (j < -truncation_order || j > truncation_order) return 0.0;
    return coeffs[static_cast<size_t>(j + truncation_order)];
  }
};

// Fourier coefficients c_j = int f(e^{i theta}) e^{-i j theta} dtheta / 2pi for
// |j| <= m, by FFT on an N-point grid with N >= 8m (rounded up to a power of two).
// The imaginary parts of the coefficients are folded into the aliasing bound.
LaurentSeries laurent_coeffs(const std::function<std::complex<double>(double)>& f, int m,
                             int min_grid = 0);

// Rational-symbol overload with pole-on-circle detection: rejects when the
// denominator magnitude on the grid drops below 1e-8.
LaurentSeries laurent_coeffs_rational(const Poly& num, const Poly& den, int m,
                                      int min_grid = 0);

struct AnticausalReport {
  bool anticausal = false;
  double residual = 0.0;  // max_{j>=1} |c_j|, normalized per the predicate below
};

// True iff max_{j>=1} |c_j| <= tol * (sum_j |c_j| + 1).
AnticausalReport is_anticausal(const LaurentSeries& s, double tol);

struct SpectralFactor {
  Poly r;         // monic stable polynomial R(z), constant term 1
  double sigma2;  // scale with sigma2 R(z) R(1/z) = sum c_j z^j
};

// Canonical factorization of a nonnegative symmetric Laurent polynomial
// c_{-k}..c_k (passed as c[0..k] = c_0..c_k). Rejects symbols that dip
// negative on the grid or carry roots on the unit circle.
SpectralFactor factor_laurent_polynomial(const std::vector<double>& c_half);

// Normalized Blaschke product prod_i (1 - a_i^{-1} z^{j_i}) / (1 - a_i z^{j_i}),
// an all-pass filter with |b(e^{i theta})| = prod 1/|a_i|.
struct BlaschkeProduct {
  std::vector<double> zeros;   // a_i, |a_i| < 1
  std::vector<int> delays;     // j_i >= 1

  std::complex<double> eval(std::complex<double> z) const;
  double modulus_on_circle() const;  // prod 1/|a_i|
  // Numerator/denominator polynomials of the product, expanded.
  Poly numerator() const;
  Poly denominator() const;
  // Max deviation of |b|^2 from prod 1/a_i^2 over a sample grid.
  double modulus_constancy_residual(int grid = 1024) const;
};

BlaschkeProduct make_blaschke(std::vector<double> zeros, std::vector<int> delays);

}  // namespace gfc
