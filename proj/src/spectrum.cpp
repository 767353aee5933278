#include "gfc/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gfc {

namespace {

Poly with_leading_one(const std::vector<double>& tail) {
  Poly c(tail.size() + 1);
  c[0] = 1.0;
  for (size_t i = 0; i < tail.size(); ++i) c[i + 1] = tail[i];
  return trim(std::move(c), 0.0);
}

void check_stable(const Poly& c, const char* name) {
  for (const auto& r : roots(c)) {
    if (std::abs(r) < 1.0 + kStabilityMargin)
      throw std::invalid_argument(std::string(name) +
                                  ": root modulus below stability margin");
  }
}

void check_coprime(const Poly& p, const Poly& q) {
  for (const auto& rp : roots(p))
    for (const auto& rq : roots(q))
      if (std::abs(rp - rq) < 1e-9)
        throw std::invalid_argument("P and Q share a root (not co-prime)");
}

}  // namespace

double psd_value(const std::vector<double>& p, const std::vector<double>& q, double sigma2,
                 double theta) {
  const Poly pc = with_leading_one(p);
  const Poly qc = with_leading_one(q);
  const double np = std::norm(eval_circle(pc, theta));
  const double dq = std::norm(eval_circle(qc, theta));
  return sigma2 * np / dq;
}

RationalSpectrum::RationalSpectrum(std::vector<double> p, std::vector<double> q, double sigma2)
    : p_(with_leading_one(p)), q_(with_leading_one(q)), sigma2_(sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  check_stable(p_, "P");
  check_stable(q_, "Q");
  check_coprime(p_, q_);
  order_ = std::max(degree(p_), degree(q_));
}

double RationalSpectrum::eval(double theta) const {
  const double np = std::norm(eval_circle(p_, theta));
  const double dq = std::norm(eval_circle(q_, theta));
  return sigma2_ * np / dq;
}

StateSpace RationalSpectrum::to_state_space() const {
  const int k = order_;
  StateSpace ss;
  ss.F = Eigen::MatrixXd::Zero(k, k);
  ss.G = Eigen::MatrixXd::Zero(k, 1);
  ss.H = Eigen::MatrixXd::Zero(1, k);
  if (k == 0) return ss;
  for (int i = 0; i < k; ++i) {
    const double qi = (i + 1 < static_cast<int>(q_.size())) ? q_[static_cast<size_t>(i + 1)] : 0.0;
    const double pi = (i + 1 < static_cast<int>(p_.size())) ? p_[static_cast<size_t>(i + 1)] : 0.0;
    ss.F(0, i) = -qi;
    ss.H(0, i) = pi - qi;
  }
  for (int i = 1; i < k; ++i) ss.F(i, i - 1) = 1.0;
  ss.G(0, 0) = 1.0;
  return ss;
}

std::vector<double> RationalSpectrum::autocovariances(int m) const {
  std::vector<double> r(static_cast<size_t>(m) + 1, 0.0);
  if (is_white()) {
    r[0] = sigma2_;
    return r;
  }
  const StateSpace ss = to_state_space();
  const int k = order_;
  // State covariance Pi = F Pi F' + G G' via vectorization (k <= 8 at desk scale).
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(k * k, k * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) A(i * k + j, a * k + b) -= ss.F(i, a) * ss.F(j, b);
  Eigen::VectorXd rhs(k * k);
  const Eigen::MatrixXd GG = ss.G * ss.G.transpose();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) rhs(i * k + j) = GG(i, j);
  const Eigen::VectorXd v = A.partialPivLu().solve(rhs);
  Eigen::MatrixXd Pi(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) Pi(i, j) = v(i * k + j);

  r[0] = sigma2_ * ((ss.H * Pi * ss.H.transpose())(0, 0) + 1.0);
  Eigen::MatrixXd Fm = Eigen::MatrixXd::Identity(k, k);
  for (int lag = 1; lag <= m; ++lag) {
    // R(lag) = H F^lag Pi H' + H F^{lag-1} G
    const Eigen::MatrixXd Fprev = Fm;  // F^{lag-1}
    Fm = ss.F * Fm;
    const double val =
        (ss.H * Fm * Pi * ss.H.transpose())(0, 0) + (ss.H * Fprev * ss.G)(0, 0);
    r[static_cast<size_t>(lag)] = sigma2_ * val;
  }
  return r;
}

Eigen::MatrixXd RationalSpectrum::toeplitz_covariance(int n) const {
  if (n < 1) throw std::invalid_argument("toeplitz_covariance: n must be >= 1");
  const std::vector<double> r = autocovariances(n - 1);
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = r[static_cast<size_t>(std::abs(i - j))];
  return K;
}

double RationalSpectrum::entropy_rate_quadrature(int grid) const {
  const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
  double acc = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double theta = -std::numbers::pi + 2.0 * std::numbers::pi * i / grid;
    acc += 0.5 * std::log(two_pi_e * eval(theta));
  }
  return acc / grid;
}

double RationalSpectrum::entropy_rate_jensen() const {
  // log-integral of |P/Q|^2 equals -2 sum log|beta_j| over zeros of P inside the
  // unit circle; stability excludes such zeros, but the general formula is kept.
  double log_int = std::log(sigma2_);
  for (const auto& root : roots(p_)) {
    if (std::abs(root) < 1.0) log_int += 2.0 * std::log(1.0 / std::abs(root));
  }
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) + 0.5 * log_int;
}

double RationalSpectrum::entropy_rate(int grid) const {
  const double hq = entropy_rate_quadrature(grid);
  const double hj = entropy_rate_jensen();
  if (std::abs(hq - hj) > 1e-10)
    throw std::runtime_error("entropy_rate: quadrature and Jensen methods disagree");
  return hj;
}

double RationalSpectrum::min_on_grid(int grid) const {
  double m = eval(-std::numbers::pi);
  for (int i = 1; i < grid; ++i)
    m = std::min(m, eval(-std::numbers::pi + 2.0 * std::numbers::pi * i / grid));
  return m;
}

double RationalSpectrum::max_on_grid(int grid) const {
  double m = eval(-std::numbers::pi);
  for (int i = 1; i < grid; ++i)
    m = std::max(m, eval(-std::numbers::pi + 2.0 * std::numbers::pi * i / grid));
  return m;
}

}  // namespace gfc
