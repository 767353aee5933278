#include "gfc/laurent.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace gfc {

namespace {

int grid_for_order(int m, int min_grid) {
  int want = std::max(std::max(8 * m, min_grid), 64);
  int n = 1;
  while (n < want) n <<= 1;
  return n;
}

LaurentSeries coeffs_from_samples(const std::vector<std::complex<double>>& samples, int m) {
  const int n = static_cast<int>(samples.size());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> in(samples), out;
  fft.fwd(out, in);
  // Sampling at theta_t = 2 pi t / N gives c_j = (1/N) sum_t f(theta_t) e^{-i j theta_t},
  // i.e. DFT bin j (negative j wrap to N + j).
  LaurentSeries s;
  s.truncation_order = m;
  s.grid = n;
  s.coeffs.assign(static_cast<size_t>(2 * m + 1), 0.0);
  double alias = 0.0;
  for (int j = -m; j <= m; ++j) {
    const int bin = (j >= 0) ? j : n + j;
    const std::complex<double> c = out[static_cast<size_t>(bin)] / static_cast<double>(n);
    s.coeffs[static_cast<size_t>(j + m)] = c.real();
    alias = std::max(alias, std::abs(c.imag()));
  }
  // Unretained band as an aliasing indicator: the largest coefficient just past m.
  for (int j = m + 1; j <= std::min(m + 8, n / 2 - 1); ++j) {
    alias = std::max(alias, std::abs(out[static_cast<size_t>(j)]) / n);
    alias = std::max(alias, std::abs(out[static_cast<size_t>(n - j)]) / n);
  }
  s.aliasing_bound = alias;
  return s;
}

}  // namespace

LaurentSeries laurent_coeffs(const std::function<std::complex<double>(double)>& f, int m,
                             int min_grid) {
  const int n = grid_for_order(m, min_grid);
  std::vector<std::complex<double>> samples(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    const double theta = 2.0 * std::numbers::pi * t / n;
    samples[static_cast<size_t>(t)] = f(theta);
    if (!std::isfinite(samples[static_cast<size_t>(t)].real()) ||
        !std::isfinite(samples[static_cast<size_t>(t)].imag()))
      throw std::runtime_error("laurent_coeffs: non-finite sample on the circle");
  }
  return coeffs_from_samples(samples, m);
}

LaurentSeries laurent_coeffs_rational(const Poly& num, const Poly& den, int m, int min_grid) {
  const int n = grid_for_order(m, min_grid);
  std::vector<std::complex<double>> samples(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    const double theta = 2.0 * std::numbers::pi * t / n;
    const std::complex<double> d = eval_circle(den, theta);
    if (std::abs(d) < 1e-8)
      throw std::runtime_error("laurent_coeffs_rational: pole on the unit circle");
    samples[static_cast<size_t>(t)] = eval_circle(num, theta) / d;
  }
  return coeffs_from_samples(samples, m);
}

AnticausalReport is_anticausal(const LaurentSeries& s, double tol) {
  double sum = 0.0;
  for (double c : s.coeffs) sum += std::abs(c);
  double causal = 0.0;
  for (int j = 1; j <= s.truncation_order; ++j) causal = std::max(causal, std::abs(s.at(j)));
  AnticausalReport rep;
  rep.residual = causal;
  rep.anticausal = causal <= tol * (sum + 1.0);
  return rep;
}

SpectralFactor factor_laurent_polynomial(const std::vector<double>& c_half) {
  if (c_half.empty()) throw std::invalid_argument("factor: empty coefficients");
  const int k = static_cast<int>(c_half.size()) - 1;

  // Positivity of the symbol on a grid.
  const int grid = std::max(1024, 16 * (k + 1));
  for (int t = 0; t < grid; ++t) {
    const double theta = 2.0 * std::numbers::pi * t / grid;
    double v = c_half[0];
    for (int j = 1; j <= k; ++j) v += 2.0 * c_half[static_cast<size_t>(j)] * std::cos(j * theta);
    if (v < -1e-12 * (std::abs(c_half[0]) + 1.0))
      throw std::invalid_argument("factor: symbol negative on the circle");
  }

  int kk = k;
  while (kk > 0 && c_half[static_cast<size_t>(kk)] == 0.0) --kk;
  if (kk == 0) {
    if (c_half[0] <= 0.0) throw std::invalid_argument("factor: degenerate symbol");
    return {Poly{1.0}, c_half[0]};
  }

  // z^k * symbol(z) is a degree-2k polynomial whose roots come in (rho, 1/rho)
  // pairs; the stable factor keeps the roots outside the unit circle.
  Poly full(static_cast<size_t>(2 * kk + 1));
  for (int j = -kk; j <= kk; ++j) full[static_cast<size_t>(j + kk)] = c_half[static_cast<size_t>(std::abs(j))];
  std::vector<std::complex<double>> outside;
  for (const auto& r : roots(full)) {
    const double mod = std::abs(r);
    if (std::abs(mod - 1.0) < 1e-7)
      throw std::invalid_argument("factor: root on the unit circle (degenerate spectrum)");
    if (mod > 1.0) outside.push_back(r);
  }
  if (static_cast<int>(outside.size()) != kk)
    throw std::runtime_error("factor: root pairing failed");

  SpectralFactor f;
  f.r = from_reciprocal_roots(outside);
  double denom = 0.0;
  for (double ri : f.r) denom += ri * ri;
  f.sigma2 = c_half[0] / denom;

  // Re-expansion check against the input band.
  for (int j = 0; j <= kk; ++j) {
    double cj = 0.0;
    for (size_t i = 0; i + static_cast<size_t>(j) < f.r.size(); ++i)
      cj += f.r[i] * f.r[i + static_cast<size_t>(j)];
    cj *= f.sigma2;
    if (std::abs(cj - c_half[static_cast<size_t>(j)]) > 1e-8 * (1.0 + std::abs(c_half[0])))
      throw std::runtime_error("factor: re-expansion mismatch");
  }
  return f;
}

std::complex<double> BlaschkeProduct::eval(std::complex<double> z) const {
  std::complex<double> acc(1.0, 0.0);
  for (size_t i = 0; i < zeros.size(); ++i) {
    const std::complex<double> zj = std::pow(z, delays[i]);
    acc *= (1.0 - zj / zeros[i]) / (1.0 - zeros[i] * zj);
  }
  return acc;
}

double BlaschkeProduct::modulus_on_circle() const {
  double m = 1.0;
  for (double a : zeros) m /= std::abs(a);
  return m;
}

Poly BlaschkeProduct::numerator() const {
  Poly num{1.0};
  for (size_t i = 0; i < zeros.size(); ++i) {
    Poly factor(static_cast<size_t>(delays[i]) + 1, 0.0);
    factor[0] = 1.0;
    factor[static_cast<size_t>(delays[i])] = -1.0 / zeros[i];
    num = multiply(num, factor);
  }
  return num;
}

Poly BlaschkeProduct::denominator() const {
  Poly den{1.0};
  for (size_t i = 0; i < zeros.size(); ++i) {
    Poly factor(static_cast<size_t>(delays[i]) + 1, 0.0);
    factor[0] = 1.0;
    factor[static_cast<size_t>(delays[i])] = -zeros[i];
    den = multiply(den, factor);
  }
  return den;
}

double BlaschkeProduct::modulus_constancy_residual(int grid) const {
  const double target = modulus_on_circle() * modulus_on_circle();
  double worst = 0.0;
  for (int t = 0; t < grid; ++t) {
    const double theta = 2.0 * std::numbers::pi * t / grid;
    const double v = std::norm(eval(std::polar(1.0, theta)));
    worst = std::max(worst, std::abs(v - target));
  }
  return worst;
}

BlaschkeProduct make_blaschke(std::vector<double> zeros, std::vector<int> delays) {
  if (zeros.size() != delays.size())
    throw std::invalid_argument("blaschke: zeros/delays size mismatch");
  for (double a : zeros)
    if (!(std::abs(a) < 1.0) || a == 0.0)
      throw std::invalid_argument("blaschke: zeros must satisfy 0 < |a| < 1");
  for (int j : delays)
    if (j < 1) throw std::invalid_argument("blaschke: delays must be positive");
  return BlaschkeProduct{std::move(zeros), std::move(delays)};
}

}  // namespace gfc
