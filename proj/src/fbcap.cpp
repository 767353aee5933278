#include "gfc/fbcap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace gfc {

namespace {

constexpr double kPi = std::numbers::pi;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double quad_mean(const std::function<double(double)>& f, int grid) {
  double acc = 0.0;
  for (int t = 0; t < grid; ++t) acc += f(2.0 * kPi * t / grid);
  return acc / grid;
}

}  // namespace

std::complex<double> FeedbackDesign::one_plus_b(double theta) const {
  return eval_circle(filter_num, theta) / eval_circle(filter_den, theta);
}

std::complex<double> FeedbackDesign::b_value(double theta) const {
  return one_plus_b(theta) - 1.0;
}

DesignResiduals design_residuals(const FeedbackDesign& d, const RationalSpectrum& spec,
                                 int grid) {
  DesignResiduals r;
  const double rate_quad =
      quad_mean([&](double t) { return 0.5 * std::log(std::norm(d.one_plus_b(t))); }, grid);
  const double power_quad =
      quad_mean([&](double t) { return std::norm(d.b_value(t)) * spec.eval(t); }, grid);
  r.rate_residual = std::abs(d.rate - rate_quad);
  r.power_residual = std::abs(d.power - power_quad);
  if (d.output_spectrum) {
    double worst = 0.0;
    for (int t = 0; t < grid; ++t) {
      const double theta = 2.0 * kPi * t / grid;
      const double sy = d.output_spectrum->eval(theta);
      const double direct = std::norm(d.one_plus_b(theta)) * spec.eval(theta);
      worst = std::max(worst, std::abs(sy - direct));
    }
    r.spectrum_residual = worst;
  }
  r.b_at_zero = std::abs(eval(d.filter_num, 0.0) / eval(d.filter_den, 0.0) - 1.0);
  return r;
}

// ---------------------------------------------------------------------------
// ARMA(1)

Arma1Capacity arma1_capacity(double alpha, double beta, double P) {
  if (!(P > 0.0)) throw std::invalid_argument("arma1_capacity: P must be positive");
  if (!(alpha >= -1.0 && alpha <= 1.0) || !(beta > -1.0 && beta < 1.0))
    throw std::invalid_argument("arma1_capacity: parameter out of range");
  const double sigma = sgn(beta - alpha);
  auto phi = [&](double x) {
    const double a = 1.0 + sigma * alpha * x;
    const double b = 1.0 + sigma * beta * x;
    return P * x * x * b * b - (1.0 - x * x) * a * a;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16) break;
  }
  Arma1Capacity out;
  out.x0 = 0.5 * (lo + hi);
  out.capacity = -std::log(out.x0);
  out.sigma = static_cast<int>(sigma);
  return out;
}

FeedbackDesign arma1_filter(double alpha, double beta, double P) {
  if (alpha == beta) throw std::invalid_argument("arma1_filter: white channel");
  if (!(std::abs(alpha) < 1.0))
    throw std::invalid_argument("arma1_filter: |alpha| must be < 1 for the filter path");
  const Arma1Capacity cap = arma1_capacity(alpha, beta, P);
  const double sigma = cap.sigma;
  const double x = cap.x0;
  const double sx = sigma * x;
  const double y = (x * x - 1.0) / sx * (1.0 + alpha * sx) / (1.0 + beta * sx);
  const double r = sx * (beta * y - alpha * sx);
  if (!(std::abs(r) < 1.0)) throw std::runtime_error("arma1_filter: |r| >= 1");

  FeedbackDesign d;
  d.filter_num = multiply({1.0, -r}, {1.0, -1.0 / sx});
  d.filter_den = multiply({1.0, alpha}, {1.0, -sx});
  d.output_spectrum = RationalSpectrum({-r}, {beta}, 1.0 / (x * x));

  // Factorization consistency: (1 - r z)(1 - z/(sx)) must reproduce
  // 1 + (alpha - sx + y) z + (beta y - alpha sx) z^2.
  const double c1 = alpha - sx + y;
  const double c2 = beta * y - alpha * sx;
  if (std::abs(d.filter_num[1] - c1) > 1e-9 * (1.0 + std::abs(c1)) ||
      std::abs(d.filter_num[2] - c2) > 1e-9 * (1.0 + std::abs(c2)))
    throw std::runtime_error("arma1_filter: factorization mismatch");

  // Projection direction chi with chi + alpha = -1/(sigma x); the DARE then
  // reproduces rate and power.
  const double chi = -(1.0 + alpha * sx) / sx;
  d.x_direction = Eigen::MatrixXd::Constant(1, 1, chi);
  Eigen::MatrixXd F = Eigen::MatrixXd::Constant(1, 1, -beta);
  Eigen::MatrixXd G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd h = Eigen::MatrixXd::Constant(1, 1, chi + alpha - beta);
  d.dare = dare_stabilizing(F, G, h);
  d.rate = -std::log(x);
  d.power = (d.x_direction * d.dare.sigma_plus * d.x_direction.transpose())(0, 0);

  const double rate_dare = 0.5 * std::log(d.dare.innovation_variance);
  if (std::abs(rate_dare - d.rate) > 1e-9)
    throw std::runtime_error("arma1_filter: DARE rate mismatch");
  if (std::abs(d.power - P) > 1e-8 * (1.0 + P))
    throw std::runtime_error("arma1_filter: DARE power mismatch");
  return d;
}

// ---------------------------------------------------------------------------
// Filter assembly for a direction X.

FeedbackDesign build_filter(const RationalSpectrum& spec, const Eigen::MatrixXd& X,
                            const DareSolution& dare) {
  const StateSpace ss = spec.to_state_space();
  const Eigen::MatrixXd h_eff = X + ss.H;

  const Poly a = char_poly_z(ss.F - ss.G * h_eff);        // det(I - z(F - G(X+H)))
  const Poly a_sharp = char_poly_z(dare.closed_loop);     // det(I - z(F - Gamma(X+H)))
  const Poly r = char_poly_z(ss.F - dare.gamma * ss.H);   // det(I - z(F - Gamma H))

  FeedbackDesign d;
  d.x_direction = X;
  d.dare = dare;
  Poly num = multiply(a, r);
  Poly den = multiply(a_sharp, spec.p());

  // Conservative common-factor cancellation: only unambiguous root pairs
  // matching within 1e-7.
  {
    auto num_roots = roots(num);
    auto den_roots = roots(den);
    std::vector<std::complex<double>> keep_den;
    bool cancelled = false, ambiguous = false;
    for (const auto& dr : den_roots) {
      int matches = 0;
      size_t match_idx = 0;
      for (size_t i = 0; i < num_roots.size(); ++i) {
        if (std::abs(num_roots[i] - dr) < 1e-7 * (1.0 + std::abs(dr))) {
          ++matches;
          match_idx = i;
        }
      }
      if (matches == 1) {
        num_roots.erase(num_roots.begin() + static_cast<long>(match_idx));
        cancelled = true;
      } else {
        if (matches > 1) ambiguous = true;
        keep_den.push_back(dr);
      }
    }
    if (ambiguous) {
      d.cancellation_warning = true;
    } else if (cancelled) {
      num = from_reciprocal_roots(num_roots);
      den = from_reciprocal_roots(keep_den);
    }
  }
  d.filter_num = num;
  d.filter_den = den;
  d.rate = 0.5 * std::log(dare.innovation_variance);
  // X Sigma X' is in unit-innovation scale; real-unit power carries sigma2.
  d.power =
      (X.rows() > 0) ? (X * dare.sigma_plus * X.transpose())(0, 0) * spec.sigma2() : 0.0;

  // Output spectrum sigma^2 |R/Q|^2; R is the canonical factor at the optimum.
  // Away from it R can pick up inside-circle roots, in which case the band is
  // re-factored into its stable form.
  std::vector<double> r_tail(r.begin() + 1, r.end());
  std::vector<double> q_tail(spec.q().begin() + 1, spec.q().end());
  try {
    d.output_spectrum =
        RationalSpectrum(r_tail, q_tail, dare.innovation_variance * spec.sigma2());
  } catch (const std::exception&) {
    const int kr = degree(r);
    std::vector<double> band(static_cast<size_t>(kr) + 1, 0.0);
    for (int j = 0; j <= kr; ++j)
      for (size_t i = 0; i + static_cast<size_t>(j) < r.size(); ++i)
        band[static_cast<size_t>(j)] += r[i] * r[i + static_cast<size_t>(j)];
    for (auto& c : band) c *= dare.innovation_variance * spec.sigma2();
    const SpectralFactor f = factor_laurent_polynomial(band);
    std::vector<double> f_tail(f.r.begin() + 1, f.r.end());
    d.output_spectrum = RationalSpectrum(f_tail, q_tail, f.sigma2);
  }
  return d;
}

// ---------------------------------------------------------------------------
// White channel: Blaschke-product filter family.

FeedbackDesign white_blaschke_filter(double noise_power, double P, const BlaschkeProduct& b) {
  if (!(noise_power > 0.0) || P < 0.0)
    throw std::invalid_argument("white_blaschke_filter: bad powers");
  double prod = 1.0;
  for (double a : b.zeros) prod *= a * a;
  if (std::abs(prod - noise_power / (P + noise_power)) > 1e-10)
    throw std::invalid_argument("white_blaschke_filter: product constraint violated");

  FeedbackDesign d;
  d.filter_num = b.numerator();
  d.filter_den = b.denominator();
  d.rate = 0.5 * std::log(1.0 + P / noise_power);
  d.power = P;
  d.output_spectrum = RationalSpectrum::white(P + noise_power);
  d.dare.innovation_variance = 1.0 + P / noise_power;
  d.dare.sigma_plus = Eigen::MatrixXd();
  d.x_direction = Eigen::MatrixXd();

  const int grid = kDefaultGrid;
  const double rate_quad =
      quad_mean([&](double t) { return 0.5 * std::log(std::norm(d.one_plus_b(t))); }, grid);
  const double power_quad =
      quad_mean([&](double t) { return std::norm(d.b_value(t)) * noise_power; }, grid);
  double flat = 0.0;
  for (int t = 0; t < grid; ++t) {
    const double theta = 2.0 * kPi * t / grid;
    flat = std::max(flat,
                    std::abs(std::norm(d.one_plus_b(theta)) * noise_power - (P + noise_power)));
  }
  if (std::abs(rate_quad - d.rate) > 1e-8 || std::abs(power_quad - P) > 1e-8 * (1.0 + P) ||
      flat > 1e-8 * (P + noise_power))
    throw std::runtime_error("white_blaschke_filter: numerical verification failed");
  return d;
}

// ---------------------------------------------------------------------------
// Verifiers.

SufficiencyReport verify_sufficiency(const FeedbackDesign& d, const RationalSpectrum& spec,
                                     double P, int grid) {
  SufficiencyReport rep;
  if (spec.min_on_grid(grid) <= 0.0)
    throw std::invalid_argument("verify_sufficiency: spectrum not bounded away from zero");

  const double power_quad =
      quad_mean([&](double t) { return std::norm(d.b_value(t)) * spec.eval(t); }, grid);
  rep.power_residual = std::abs(power_quad - P);

  double sy_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < grid; ++t) {
    const double theta = 2.0 * kPi * t / grid;
    sy_min = std::min(sy_min, std::norm(d.one_plus_b(theta)) * spec.eval(theta));
  }

  // Pole-on-circle guard for 1/(1 + B(z^{-1})).
  double min_num = std::numeric_limits<double>::infinity();
  for (int t = 0; t < grid; ++t)
    min_num = std::min(min_num, std::abs(eval_circle(d.filter_num, 2.0 * kPi * t / grid)));
  if (min_num < 1e-8)
    throw std::runtime_error("verify_sufficiency: 1 + B has a zero on the unit circle");

  // lambda/(1 + B(1/z)) - B(z) S_Z(z) must be anticausal for SOME lambda not
  // exceeding ess inf S_Y; the causal coefficients are linear in lambda, so the
  // certificate lambda comes from least squares on them.
  const int m =
      8 * (degree(d.filter_num) + degree(d.filter_den) + 2 * spec.order() + 2);
  const LaurentSeries u_series = laurent_coeffs(
      [&](double theta) { return 1.0 / d.one_plus_b(-theta); }, m, grid);
  const LaurentSeries v_series = laurent_coeffs(
      [&](double theta) { return d.b_value(theta) * spec.eval(theta); }, m, grid);
  double uu = 0.0, uv = 0.0;
  for (int j = 1; j <= m; ++j) {
    uu += u_series.at(j) * u_series.at(j);
    uv += u_series.at(j) * v_series.at(j);
  }
  const double lambda = (uu > 1e-14) ? uv / uu : sy_min;
  double causal = 0.0, total = 1.0;
  for (int j = 1; j <= m; ++j)
    causal = std::max(causal, std::abs(lambda * u_series.at(j) - v_series.at(j)));
  for (int j = -m; j <= m; ++j)
    total += std::abs(lambda * u_series.at(j) - v_series.at(j));
  (void)total;

  rep.lambda = lambda;
  rep.lambda_margin = sy_min - lambda;
  rep.anticausal_residual = causal;
  rep.pass = rep.power_residual < 1e-8 * (1.0 + P) && rep.anticausal_residual < 1e-9 &&
             rep.lambda_margin > -1e-7 * (1.0 + std::abs(lambda));
  return rep;
}

NecessaryReport verify_necessary(const std::vector<double>& s_v, const FeedbackDesign& d,
                                 const RationalSpectrum& spec, double P) {
  const int grid = static_cast<int>(s_v.size());
  if (grid < 64) throw std::invalid_argument("verify_necessary: too few S_V samples");
  for (double v : s_v)
    if (v < 0.0) throw std::invalid_argument("verify_necessary: S_V must be nonnegative");

  NecessaryReport rep;
  double sv_mean = 0.0;
  for (double v : s_v) sv_mean += v;
  sv_mean /= grid;
  const double power_quad =
      quad_mean([&](double t) { return std::norm(d.b_value(t)) * spec.eval(t); }, grid);
  rep.power_residual = std::abs(sv_mean + power_quad - P);

  std::vector<double> s_y(static_cast<size_t>(grid));
  double lambda_star = std::numeric_limits<double>::infinity();
  for (int t = 0; t < grid; ++t) {
    const double theta = 2.0 * kPi * t / grid;
    s_y[static_cast<size_t>(t)] =
        s_v[static_cast<size_t>(t)] + std::norm(d.one_plus_b(theta)) * spec.eval(theta);
    lambda_star = std::min(lambda_star, s_y[static_cast<size_t>(t)]);
  }
  double wf = 0.0;
  for (int t = 0; t < grid; ++t)
    wf = std::max(wf, std::abs(s_v[static_cast<size_t>(t)] *
                               (s_y[static_cast<size_t>(t)] - lambda_star)));
  rep.waterfill_residual = wf;

  const int m = 8 * (degree(d.filter_num) + degree(d.filter_den) + 2 * spec.order() + 2);
  auto f = [&](double theta) -> std::complex<double> {
    const int t = static_cast<int>(std::llround(theta * grid / (2.0 * kPi))) % grid;
    const std::complex<double> b = d.b_value(theta);
    const std::complex<double> opb_conj = d.one_plus_b(-theta);
    return s_v[static_cast<size_t>(t)] + b * spec.eval(theta) * opb_conj;
  };
  const LaurentSeries series = laurent_coeffs(f, m, grid);
  rep.orthogonality_residual = is_anticausal(series, 1e-9).residual;

  rep.power_ok = rep.power_residual < 1e-8 * (1.0 + P);
  rep.waterfill_ok = rep.waterfill_residual < 1e-8 * (1.0 + lambda_star);
  rep.orthogonality_ok = rep.orthogonality_residual < 1e-9;
  return rep;
}

ArmakSufficiencyReport verify_armak_sufficiency(const FeedbackDesign& d,
                                                const RationalSpectrum& spec, double P,
                                                int grid) {
  ArmakSufficiencyReport rep;
  const StateSpace ss = spec.to_state_space();
  const int k = ss.order();
  if (d.x_direction.cols() != k)
    throw std::invalid_argument("verify_armak_sufficiency: design/channel order mismatch");

  rep.power_residual = std::abs(d.power - P);

  const Eigen::MatrixXd M = ss.F - ss.G * (d.x_direction + ss.H);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  rep.min_modulus = std::numeric_limits<double>::infinity();
  rep.min_separation = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    rep.eigenvalues.push_back(es.eigenvalues()(i));
    rep.min_modulus = std::min(rep.min_modulus, std::abs(es.eigenvalues()(i)));
    for (int j = 0; j < i; ++j)
      rep.min_separation =
          std::min(rep.min_separation, std::abs(es.eigenvalues()(i) - es.eigenvalues()(j)));
  }
  if (k == 1) rep.min_separation = std::numeric_limits<double>::infinity();

  if (!d.output_spectrum)
    throw std::invalid_argument("verify_armak_sufficiency: design lacks output spectrum");
  const RationalSpectrum& sy = *d.output_spectrum;
  auto sy_at = [&](std::complex<double> z) {
    return sy.sigma2() * eval(sy.p(), z) * eval(sy.p(), 1.0 / z) /
           (eval(sy.q(), z) * eval(sy.q(), 1.0 / z));
  };
  std::vector<std::complex<double>> vals;
  for (const auto& a : rep.eigenvalues) vals.push_back(sy_at(a));
  double spread = 0.0;
  double max_val = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < vals.size(); ++i) {
    spread = std::max(spread, std::abs(vals[i].imag()));
    max_val = std::max(max_val, vals[i].real());
    for (size_t j = 0; j < i; ++j) spread = std::max(spread, std::abs(vals[i] - vals[j]));
  }
  rep.spectrum_spread = spread;
  rep.circle_margin = sy.min_on_grid(grid) - max_val;

  rep.pass = rep.power_residual < 1e-7 && rep.min_modulus > 1.0 + 1e-8 &&
             rep.min_separation > 1e-6 && rep.spectrum_spread < 1e-7 * (1.0 + std::abs(max_val)) &&
             rep.circle_margin > -1e-7 * (1.0 + std::abs(max_val));
  return rep;
}

// ---------------------------------------------------------------------------
// ARMA(k) search.

namespace {

struct CandidateEval {
  double rate = -std::numeric_limits<double>::infinity();
  double power = 0.0;
  bool feasible = false;
};

class DirectionEvaluator {
 public:
  DirectionEvaluator(const StateSpace& ss, double P) : ss_(ss), P_(P) {}

  CandidateEval operator()(const Eigen::RowVectorXd& x) const {
    CandidateEval out;
    const int k = ss_.order();
    DareOptions opts;
    opts.tol = 1e-13;
    opts.max_iterations = 50000;
    // Sigma = 0 solves the drifted DARE but is not always the stabilizing
    // solution, so warm starts must stay strictly positive definite.
    if (warm_.rows() == k)
      opts.sigma0 = warm_ + 1e-4 * Eigen::MatrixXd::Identity(k, k);
    try {
      const DareSolution sol = dare_stabilizing(ss_.F, ss_.G, x + ss_.H, opts);
      warm_ = sol.sigma_plus;
      out.rate = 0.5 * std::log(sol.innovation_variance);
      out.power = (x * sol.sigma_plus * x.transpose())(0, 0);
      out.feasible = true;
      return out;
    } catch (const std::exception&) {
    }
    try {
      const DareSolution sol = dare_stabilizing(ss_.F, ss_.G, x + ss_.H);
      warm_ = sol.sigma_plus;
      out.rate = 0.5 * std::log(sol.innovation_variance);
      out.power = (x * sol.sigma_plus * x.transpose())(0, 0);
      out.feasible = true;
    } catch (const std::exception&) {
      out.feasible = false;
    }
    return out;
  }

  DareSolution solve_full(const Eigen::RowVectorXd& x) const {
    return dare_stabilizing(ss_.F, ss_.G, x + ss_.H);
  }

  double P() const { return P_; }

 private:
  StateSpace ss_;
  double P_;
  mutable Eigen::MatrixXd warm_;
};

double penalized_objective(const DirectionEvaluator& ev, const Eigen::RowVectorXd& x,
                           double weight) {
  const CandidateEval c = ev(x);
  if (!c.feasible) return 1e50;
  const double viol = std::max(0.0, c.power - ev.P()) / (1.0 + ev.P());
  return -c.rate + weight * viol * viol;
}

// Deterministic Nelder-Mead on R^k.
Eigen::RowVectorXd nelder_mead(const DirectionEvaluator& ev, Eigen::RowVectorXd x0,
                               double weight, int max_iter) {
  const int k = static_cast<int>(x0.cols());
  std::vector<Eigen::RowVectorXd> pts(static_cast<size_t>(k) + 1, x0);
  std::vector<double> vals(static_cast<size_t>(k) + 1);
  for (int i = 0; i < k; ++i)
    pts[static_cast<size_t>(i) + 1](i) += 0.1 * (1.0 + std::abs(x0(i)));
  for (size_t i = 0; i < pts.size(); ++i) vals[i] = penalized_objective(ev, pts[i], weight);

  auto order = [&]() {
    std::vector<size_t> idx(pts.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    std::vector<Eigen::RowVectorXd> p2;
    std::vector<double> v2;
    for (size_t i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts.swap(p2);
    vals.swap(v2);
  };

  for (int it = 0; it < max_iter; ++it) {
    order();
    if (std::abs(vals.back() - vals.front()) < 1e-13 * (1.0 + std::abs(vals.front()))) break;
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(k);
    for (size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
    centroid /= k;

    const Eigen::RowVectorXd refl = centroid + (centroid - pts.back());
    const double f_refl = penalized_objective(ev, refl, weight);
    if (f_refl < vals.front()) {
      const Eigen::RowVectorXd expa = centroid + 2.0 * (centroid - pts.back());
      const double f_expa = penalized_objective(ev, expa, weight);
      if (f_expa < f_refl) {
        pts.back() = expa;
        vals.back() = f_expa;
      } else {
        pts.back() = refl;
        vals.back() = f_refl;
      }
    } else if (f_refl < vals[vals.size() - 2]) {
      pts.back() = refl;
      vals.back() = f_refl;
    } else {
      const Eigen::RowVectorXd contr = centroid + 0.5 * (pts.back() - centroid);
      const double f_contr = penalized_objective(ev, contr, weight);
      if (f_contr < vals.back()) {
        pts.back() = contr;
        vals.back() = f_contr;
      } else {
        for (size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts.front() + 0.5 * (pts[i] - pts.front());
          vals[i] = penalized_objective(ev, pts[i], weight);
        }
      }
    }
  }
  order();
  return pts.front();
}

// Scales x along its ray to put the power constraint on the boundary.
Eigen::RowVectorXd activate_power(const DirectionEvaluator& ev, Eigen::RowVectorXd x,
                                  double P, double rel_tol) {
  CandidateEval c = ev(x);
  // A start sitting on an excluded unit-circle set is nudged off it.
  if (!c.feasible) {
    for (double jitter : {1.02, 0.98, 1.07, 0.93, 1.19}) {
      c = ev((jitter * x).eval());
      if (c.feasible) {
        x *= jitter;
        break;
      }
    }
    if (!c.feasible) return x;
  }
  double t_lo = 0.0, t_hi = 1.0;
  if (c.power < P) {
    double t = 1.0;
    bool bracketed = false;
    for (int i = 0; i < 60 && !bracketed; ++i) {
      t *= 1.9;
      const CandidateEval ce = ev((t * x).eval());
      if (ce.feasible && ce.power >= P) bracketed = true;
    }
    if (!bracketed) return x;  // cannot activate along this ray
    t_hi = t;
  }
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (t_lo + t_hi);
    const CandidateEval ce = ev((t * x).eval());
    const double p = ce.feasible ? ce.power : std::numeric_limits<double>::infinity();
    if (std::abs(p - P) <= rel_tol * P) return t * x;
    if (p < P)
      t_lo = t;
    else
      t_hi = t;
  }
  return 0.5 * (t_lo + t_hi) * x;
}

bool lex_less(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  for (int i = 0; i < a.cols(); ++i) {
    if (a(0, i) < b(0, i)) return true;
    if (a(0, i) > b(0, i)) return false;
  }
  return false;
}

}  // namespace

ArmakResult armak_capacity(const RationalSpectrum& spec, double P, const ArmakOptions& opts) {
  if (!(P > 0.0)) throw std::invalid_argument("armak_capacity: P must be positive");

  ArmakResult result;
  if (spec.is_white()) {
    // Search precondition excludes white channels; the Blaschke family attains
    // the (equal) nonfeedback capacity there.
    const double N = spec.sigma2();
    const BlaschkeProduct b = make_blaschke({std::sqrt(N / (P + N))}, {1});
    result.design = white_blaschke_filter(N, P, b);
    return result;
  }
  if (spec.min_on_grid(opts.grid) <= 0.0)
    throw std::invalid_argument("armak_capacity: spectrum must be positive on the grid");
  const int k = spec.order();
  if (k > 8) throw std::invalid_argument("armak_capacity: order above desk scale (k <= 8)");

  // The state-space model carries unit innovations; a sigma2 scale on the
  // spectrum rescales the admissible input power instead.
  const double p_unit = P / spec.sigma2();
  const StateSpace ss = spec.to_state_space();
  DirectionEvaluator ev(ss, p_unit);

  std::vector<std::pair<Eigen::RowVectorXd, std::string>> starts;
  starts.emplace_back(Eigen::RowVectorXd::Zero(k), "origin");
  starts.emplace_back(activate_power(ev, ss.H, p_unit, 0.25), "H-aligned");
  starts.emplace_back(activate_power(ev, (-1.0 * ss.H).eval(), p_unit, 0.25), "negative-H");
  if (k == 1) {
    const double alpha = spec.p().size() > 1 ? spec.p()[1] : 0.0;
    const double beta = spec.q().size() > 1 ? spec.q()[1] : 0.0;
    if (std::abs(alpha) < 1.0 && alpha != beta) {
      const Arma1Capacity cap = arma1_capacity(alpha, beta, p_unit);
      const double sx = cap.sigma * cap.x0;
      Eigen::RowVectorXd chi(1);
      chi(0) = -(1.0 + alpha * sx) / sx;
      starts.emplace_back(chi, "arma1-closed-form");
    }
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    Eigen::RowVectorXd u(k);
    for (int i = 0; i < k; ++i) u(i) = gauss(rng);
    const double nrm = u.norm();
    if (nrm == 0.0) continue;
    u *= (0.4 + std::abs(gauss(rng))) / nrm;  // random radius off the unit sphere
    starts.emplace_back(activate_power(ev, u, p_unit, 0.25), "random");
  }

  bool have_best = false;
  Eigen::RowVectorXd best_x;
  double best_rate = -std::numeric_limits<double>::infinity();

  for (const auto& [x0, label] : starts) {
    Eigen::RowVectorXd x = nelder_mead(ev, x0, 1e4, opts.nm_max_iter);
    x = nelder_mead(ev, x, 1e7, opts.nm_max_iter);
    x = activate_power(ev, x, p_unit, opts.power_activation_tol);
    const CandidateEval ce = ev(x);

    ArmakStartLog log;
    log.x_start = x0;
    log.x_final = x;
    log.rate = ce.feasible ? ce.rate : 0.0;
    log.power = ce.power;
    log.feasible = ce.feasible && ce.power <= p_unit * (1.0 + 1e-6);
    log.label = label;
    result.starts.push_back(log);

    if (!log.feasible) continue;
    if (!have_best || ce.rate > best_rate + 1e-12 ||
        (std::abs(ce.rate - best_rate) <= 1e-12 && lex_less(x, best_x))) {
      have_best = true;
      best_rate = ce.rate;
      best_x = x;
    }
  }
  if (!have_best) throw std::runtime_error("armak_capacity: no feasible start");

  const DareSolution final_sol = ev.solve_full(best_x);
  result.design = build_filter(spec, best_x, final_sol);
  return result;
}

}  // namespace gfc
