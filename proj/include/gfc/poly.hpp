#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace gfc {

// Real polynomials in z stored by coefficient vector c[0] + c[1] z + ... + c[n] z^n.
// Channel polynomials follow the convention c[0] = 1 ("monic" at z = 0).
using Poly = std::vector<double>;

// Drops trailing coefficients below `tol` in magnitude; keeps at least the constant term.
Poly trim(Poly c, double tol = 0.0);

int degree(const Poly& c);

std::complex<double> eval(const Poly& c, std::complex<double> z);

// Value on the unit circle at angle theta.
std::complex<double> eval_circle(const Poly& c, double theta);

Poly multiply(const Poly& a, const Poly& b);

// Roots via the companion-matrix eigenvalues of the monic-normalized polynomial.
// Degenerate (constant) polynomials have no roots.
std::vector<std::complex<double>> roots(const Poly& c);

// Expands prod_i (1 - z / zeros[i]) into real coefficients. Complex zeros must
// come in conjugate pairs; imaginary residue is checked and discarded.
Poly from_reciprocal_roots(const std::vector<std::complex<double>>& zeros);

// Coefficients of det(I - z M) = 1 + c1 z + ... + ck z^k for a real square matrix M,
// from the eigenvalues of M: det(I - zM) = prod_i (1 - lambda_i z).
Poly char_poly_z(const Eigen::MatrixXd& M);

// Smallest root modulus; +inf for constants.
double min_root_modulus(const Poly& c);

}  // namespace gfc
