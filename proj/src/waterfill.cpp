#include "gfc/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace gfc {

namespace {

struct SampledPsd {
  std::vector<double> theta;
  std::vector<double> value;
  std::vector<double> weight;  // quadrature weights summing to 1
};

// Uniform trapezoidal grid over [-pi, pi) with one refinement pass that doubles
// resolution where |S - lambda| is within a grid-scale band of the kink.
SampledPsd sample_psd(const std::function<double(double)>& psd, int grid, double lambda) {
  SampledPsd s;
  const double h = 2.0 * std::numbers::pi / grid;
  s.theta.reserve(static_cast<size_t>(grid) * 2);
  for (int i = 0; i < grid; ++i) {
    const double t = -std::numbers::pi + h * i;
    const double v = psd(t);
    s.theta.push_back(t);
    s.value.push_back(v);
    s.weight.push_back(1.0 / grid);
    if (std::abs(v - lambda) < 4.0 * h * (1.0 + std::abs(v))) {
      // split the cell around the kink
      s.theta.back() = t;  // keep order irrelevant; weights carry the measure
      s.weight.back() = 0.5 / grid;
      const double t2 = t + 0.5 * h;
      s.theta.push_back(t2);
      s.value.push_back(psd(t2));
      s.weight.push_back(0.5 / grid);
    }
  }
  return s;
}

double power_at(const SampledPsd& s, double lambda) {
  double p = 0.0;
  for (size_t i = 0; i < s.value.size(); ++i)
    p += std::max(0.0, lambda - s.value[i]) * s.weight[i];
  return p;
}

double capacity_at(const SampledPsd& s, double lambda) {
  double c = 0.0;
  for (size_t i = 0; i < s.value.size(); ++i)
    c += 0.5 * std::log(std::max(s.value[i], lambda) / s.value[i]) * s.weight[i];
  return c;
}

}  // namespace

WaterfillResult spectral_waterfill(const std::function<double(double)>& psd, double P,
                                   int grid) {
  if (P < 0.0) throw std::invalid_argument("spectral_waterfill: negative power");
  SampledPsd coarse = sample_psd(psd, grid, -1.0);
  double lo = *std::min_element(coarse.value.begin(), coarse.value.end());
  double hi = *std::max_element(coarse.value.begin(), coarse.value.end()) + P + 1.0;

  WaterfillResult res;
  if (P == 0.0) {
    res.water_level = lo;
    res.capacity = 0.0;
    res.power_used = 0.0;
    return res;
  }

  double lambda = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    lambda = 0.5 * (lo + hi);
    const SampledPsd s = sample_psd(psd, grid, lambda);
    const double p = power_at(s, lambda);
    if (std::abs(p - P) < 1e-12 * (1.0 + P)) break;
    if (p < P)
      lo = lambda;
    else
      hi = lambda;
  }
  const SampledPsd s = sample_psd(psd, grid, lambda);
  res.water_level = lambda;
  res.power_used = power_at(s, lambda);
  res.capacity = capacity_at(s, lambda);
  return res;
}

WaterfillResult spectral_waterfill(const RationalSpectrum& spec, double P, int grid) {
  return spectral_waterfill([&spec](double t) { return spec.eval(t); }, P, grid);
}

NBlockNonfeedback nblock_nonfeedback(const Eigen::MatrixXd& k_z, double P) {
  const int n = static_cast<int>(k_z.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(k_z);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("nblock_nonfeedback: K_Z is not positive definite");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_z);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double target = n * P;

  double lo = lam.minCoeff();
  double hi = lam.maxCoeff() + target + 1.0;
  double level = lo;
  auto filled = [&](double lv) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::max(0.0, lv - lam(i));
    return s;
  };
  if (target > 0.0) {
    for (int it = 0; it < 200; ++it) {
      level = 0.5 * (lo + hi);
      const double f = filled(level);
      if (std::abs(f - target) < 1e-12 * (1.0 + target)) break;
      if (f < target)
        lo = level;
      else
        hi = level;
    }
  }

  Eigen::VectorXd fill(n);
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    fill(i) = std::max(0.0, level - lam(i));
    value += 0.5 * std::log(std::max(lam(i), level) / lam(i));
  }
  NBlockNonfeedback out;
  out.k_x = es.eigenvectors() * fill.asDiagonal() * es.eigenvectors().transpose();
  out.k_x = 0.5 * (out.k_x + out.k_x.transpose());
  out.value = value / n;
  out.water_level = level;
  return out;
}

WaterfillConditionReport verify_waterfill_conditions(const Eigen::MatrixXd& k_x,
                                                     const Eigen::MatrixXd& k_z, double P) {
  const int n = static_cast<int>(k_z.rows());
  if (k_x.rows() != n || k_x.cols() != n)
    throw std::invalid_argument("verify_waterfill_conditions: shape mismatch");
  const Eigen::MatrixXd k_y = k_x + k_z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_y);
  const double lam_min = es.eigenvalues().minCoeff();

  WaterfillConditionReport rep;
  rep.power_residual = std::abs(k_x.trace() - n * P);
  rep.waterfill_residual =
      std::abs((k_x * (k_y - lam_min * Eigen::MatrixXd::Identity(n, n))).trace());
  rep.pass = rep.power_residual < 1e-8 * n && rep.waterfill_residual < 1e-8 * n;
  return rep;
}

}  // namespace gfc
