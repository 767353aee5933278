#include "gfc/poly.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfc {

Poly trim(Poly c, double tol) {
  while (c.size() > 1 && std::abs(c.back()) <= tol) c.pop_back();
  if (c.empty()) c.push_back(0.0);
  return c;
}

int degree(const Poly& c) {
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
    if (c[static_cast<size_t>(i)] != 0.0) return i;
  return 0;
}

std::complex<double> eval(const Poly& c, std::complex<double> z) {
  std::complex<double> acc(0.0, 0.0);
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
    acc = acc * z + c[static_cast<size_t>(i)];
  return acc;
}

std::complex<double> eval_circle(const Poly& c, double theta) {
  return eval(c, std::polar(1.0, theta));
}

Poly multiply(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<std::complex<double>> roots(const Poly& poly) {
  Poly c = trim(poly, 0.0);
  int n = degree(c);
  if (n == 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) comp(0, i) = -c[static_cast<size_t>(n - 1 - i)] / c[static_cast<size_t>(n)];
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return out;
}

Poly from_reciprocal_roots(const std::vector<std::complex<double>>& zeros) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& zr : zeros) {
    if (zr == std::complex<double>(0.0, 0.0))
      throw std::invalid_argument("from_reciprocal_roots: zero root");
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    const std::complex<double> a = -1.0 / zr;
    for (size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] += c[i] * a;
    }
    c.swap(next);
  }
  Poly out(c.size());
  for (size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

Poly char_poly_z(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return {1.0};
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> c{1.0};
  for (int i = 0; i < M.rows(); ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (size_t j = 0; j < c.size(); ++j) {
      next[j] += c[j];
      next[j + 1] -= c[j] * lam;
    }
    c.swap(next);
  }
  Poly out(c.size());
  for (size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

double min_root_modulus(const Poly& c) {
  auto rs = roots(c);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rs) m = std::min(m, std::abs(r));
  return m;
}

}  // namespace gfc
