#include "gfc/sksim.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

#include "gfc/riccati.hpp"

namespace gfc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 trial_rng(std::uint64_t seed, long trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial))));
}

int thread_count() {
  if (const char* env = std::getenv("GFC_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

constexpr long kBlock = 256;  // trials per reduction block, fixed for determinism

double logaddexp(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Per-step deterministic filter data shared by all trials.
struct FilterPlan {
  // Augmented state (message part, channel state part), unit-noise model.
  std::vector<Eigen::RowVectorXd> h;      // measurement rows
  std::vector<double> cross_scale;        // 1 if U_n feeds the state, 0 otherwise
  std::vector<double> innov_var;          // h Sigma h' + r
  std::vector<Eigen::VectorXd> gain;      // (T Sigma h' + G r_cross)/innov_var
  std::vector<Eigen::MatrixXd> sigma;     // prior covariances, 1..horizon+1
  Eigen::MatrixXd T;                      // transition (constant here)
  Eigen::VectorXd G;                      // unit-noise input column
};

struct TrialSums {
  std::vector<double> power;     // sum of X_n^2
  std::vector<double> innov2;    // sum of Ytilde_n^2
  std::vector<double> err;       // sum of |V - Vhat_n|^2 (state) or D_{n+1}^2 (message)
  std::vector<double> xy;        // orthogonality sums, flattened per probe
  std::vector<double> y2;        // sum of Y_j^2 for probed j
  double x2probe = 0.0;          // sum of X_n^2 at probes (per probe)
  std::vector<double> x2p;
  long count = 0;

  void init(int horizon, size_t probe_pairs, size_t probes) {
    power.assign(static_cast<size_t>(horizon), 0.0);
    innov2.assign(static_cast<size_t>(horizon), 0.0);
    err.assign(static_cast<size_t>(horizon), 0.0);
    xy.assign(probe_pairs, 0.0);
    y2.assign(probe_pairs, 0.0);
    x2p.assign(probes, 0.0);
  }
  void add(const TrialSums& o) {
    for (size_t i = 0; i < power.size(); ++i) power[i] += o.power[i];
    for (size_t i = 0; i < innov2.size(); ++i) innov2[i] += o.innov2[i];
    for (size_t i = 0; i < err.size(); ++i) err[i] += o.err[i];
    for (size_t i = 0; i < xy.size(); ++i) xy[i] += o.xy[i];
    for (size_t i = 0; i < y2.size(); ++i) y2[i] += o.y2[i];
    for (size_t i = 0; i < x2p.size(); ++i) x2p[i] += o.x2p[i];
    count += o.count;
  }
};

// Deterministic block-parallel reduction over trials.
template <typename TrialFn>
TrialSums run_trials(long trials, int horizon, size_t probe_pairs, size_t probes,
                     const TrialFn& fn) {
  const long nblocks = (trials + kBlock - 1) / kBlock;
  std::vector<TrialSums> block_sums(static_cast<size_t>(nblocks));
  const int nthreads = std::min<long>(thread_count(), nblocks);
  auto worker = [&](int tid) {
    for (long b = tid; b < nblocks; b += nthreads) {
      TrialSums& s = block_sums[static_cast<size_t>(b)];
      s.init(horizon, probe_pairs, probes);
      const long lo = b * kBlock;
      const long hi = std::min(trials, lo + kBlock);
      for (long t = lo; t < hi; ++t) {
        fn(t, &s);
        ++s.count;
      }
    }
  };
  if (nthreads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  TrialSums total;
  total.init(horizon, probe_pairs, probes);
  for (const auto& s : block_sums) total.add(s);
  return total;
}

std::vector<int> probe_steps(int horizon) {
  std::vector<int> p;
  if (horizon >= 6) p.push_back(5);
  if (horizon >= 12) p.push_back(horizon / 2);
  return p;
}

double tail_slope(const std::vector<double>& logerr) {
  const int n = static_cast<int>(logerr.size());
  std::vector<double> xs, ys;
  for (int i = n / 2; i < n; ++i) {
    if (!std::isfinite(logerr[static_cast<size_t>(i)])) continue;
    xs.push_back(i + 1.0);
    ys.push_back(logerr[static_cast<size_t>(i)]);
  }
  if (xs.size() < 2) return 0.0;
  return fit_slope(xs, ys);
}

}  // namespace

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Noise-state refinement.

SkResult simulate_state_refinement(const SkConfig& cfg) {
  const int k = cfg.spectrum.order();
  if (k == 0) return simulate_message_refinement(cfg);
  if (cfg.design.x_direction.cols() != k)
    throw std::invalid_argument("simulate_state_refinement: design/channel order mismatch");
  if (spectral_radius(cfg.design.dare.closed_loop) >= 1.0)
    throw std::invalid_argument("simulate_state_refinement: design not stabilizing");

  const StateSpace ss = cfg.spectrum.to_state_space();
  const double unit_scale = cfg.spectrum.sigma2();    // real units = unit model * sigma
  const double p_eff = cfg.power / unit_scale;
  const Eigen::RowVectorXd X = cfg.design.x_direction;
  const int horizon = cfg.horizon;
  const double v0 = std::min(p_eff, 4.0 * p_eff);      // per-step burst cap

  // Plain state recursion (bit-identical to riccati_step usage elsewhere) and
  // the augmented (V, S) recursion for the message error.
  FilterPlan plan;
  const int ka = 2 * k;
  plan.T = Eigen::MatrixXd::Zero(ka, ka);
  plan.T.topLeftCorner(k, k).setIdentity();
  plan.T.bottomRightCorner(k, k) = ss.F;
  plan.G = Eigen::VectorXd::Zero(ka);
  plan.G.tail(k) = ss.G;

  SkResult res;
  res.trials = cfg.trials;
  res.det_power_trace.resize(static_cast<size_t>(horizon));
  res.det_innovation_trace.resize(static_cast<size_t>(horizon));
  res.det_log_error_trace.resize(static_cast<size_t>(horizon));

  Eigen::MatrixXd sigma_s = Eigen::MatrixXd::Zero(k, k);  // cov(S_1 | -) = 0
  Eigen::MatrixXd sigma_a = Eigen::MatrixXd::Zero(ka, ka);
  sigma_a.topLeftCorner(k, k) = v0 * Eigen::MatrixXd::Identity(k, k);

  plan.sigma.reserve(static_cast<size_t>(horizon) + 1);
  for (int n = 1; n <= horizon; ++n) {
    Eigen::RowVectorXd h(ka);
    h.setZero();
    if (n <= k) {
      h(n - 1) = 1.0;
      h.tail(k) = ss.H;
    } else {
      h.tail(k) = X + ss.H;
    }
    plan.h.push_back(h);
    plan.sigma.push_back(sigma_a);
    const double innov = (h * sigma_a * h.transpose())(0, 0) + 1.0;
    plan.innov_var.push_back(innov);
    plan.gain.push_back((plan.T * sigma_a * h.transpose() + plan.G) / innov);

    res.det_innovation_trace[static_cast<size_t>(n - 1)] = innov * unit_scale;
    res.det_power_trace[static_cast<size_t>(n - 1)] =
        unit_scale * ((n <= k) ? v0 : (X * sigma_s * X.transpose())(0, 0));

    // Advance both recursions.
    if (n <= k) {
      sigma_s = riccati_step(ss.F, ss.G, ss.H, sigma_s, 1.0 + v0);
    } else {
      sigma_s = riccati_step(ss.F, ss.G, (X + ss.H).eval(), sigma_s, 1.0);
    }
    sigma_a = riccati_step(plan.T, Eigen::MatrixXd(plan.G), Eigen::MatrixXd(h), sigma_a, 1.0);
    res.det_log_error_trace[static_cast<size_t>(n - 1)] =
        std::log(std::max(sigma_a.topLeftCorner(k, k).trace(), 1e-300));
  }
  res.sigma_final = sigma_s;
  res.deterministic_rate = -0.5 * tail_slope(res.det_log_error_trace);

  const std::vector<int> probes = probe_steps(horizon);
  size_t probe_pairs = 0;
  for (int p : probes) probe_pairs += static_cast<size_t>(p - 1);

  const TrialSums sums = run_trials(
      cfg.trials, horizon, probe_pairs, probes.size(), [&](long trial, TrialSums* s) {
        std::mt19937_64 rng = trial_rng(cfg.seed, trial);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd V(k);
        for (int i = 0; i < k; ++i) V(i) = std::sqrt(v0) * gauss(rng);
        Eigen::VectorXd state = Eigen::VectorXd::Zero(k);
        Eigen::VectorXd ahat = Eigen::VectorXd::Zero(2 * k);
        std::vector<double> ys(static_cast<size_t>(horizon));
        for (int n = 1; n <= horizon; ++n) {
          const double u = gauss(rng);
          const Eigen::VectorXd shat = ahat.tail(k);
          const double x_n =
              (n <= k) ? V(n - 1) : (X * (state - shat))(0, 0);
          const double z_n = (ss.H * state)(0, 0) + u;
          const double y_n = x_n + z_n;
          ys[static_cast<size_t>(n - 1)] = y_n;
          const double w_n = (n <= k) ? y_n : y_n + (X * shat)(0, 0);
          const double innov = w_n - (plan.h[static_cast<size_t>(n - 1)] * ahat)(0, 0);
          ahat = plan.T * ahat + plan.gain[static_cast<size_t>(n - 1)] * innov;
          state = ss.F * state + ss.G * u;

          s->power[static_cast<size_t>(n - 1)] += x_n * x_n;
          s->innov2[static_cast<size_t>(n - 1)] += innov * innov;
          const Eigen::VectorXd vhat = ahat.head(k);
          s->err[static_cast<size_t>(n - 1)] += (V - vhat).squaredNorm();

          for (size_t pi = 0; pi < probes.size(); ++pi) {
            if (n == probes[pi]) {
              size_t base = 0;
              for (size_t q = 0; q < pi; ++q) base += static_cast<size_t>(probes[q] - 1);
              for (int j = 0; j < n - 1; ++j) {
                s->xy[base + static_cast<size_t>(j)] += x_n * ys[static_cast<size_t>(j)];
                s->y2[base + static_cast<size_t>(j)] +=
                    ys[static_cast<size_t>(j)] * ys[static_cast<size_t>(j)];
              }
              s->x2p[pi] += x_n * x_n;
            }
          }
        }
      });

  res.power_trace.resize(static_cast<size_t>(horizon));
  res.innovation_variance_trace.resize(static_cast<size_t>(horizon));
  res.mc_log_error_trace.resize(static_cast<size_t>(horizon));
  double avg = 0.0;
  for (int n = 0; n < horizon; ++n) {
    res.power_trace[static_cast<size_t>(n)] = unit_scale * sums.power[static_cast<size_t>(n)] / cfg.trials;
    res.innovation_variance_trace[static_cast<size_t>(n)] =
        unit_scale * sums.innov2[static_cast<size_t>(n)] / cfg.trials;
    res.mc_log_error_trace[static_cast<size_t>(n)] =
        std::log(std::max(sums.err[static_cast<size_t>(n)] / cfg.trials, 1e-300));
    avg += res.power_trace[static_cast<size_t>(n)];
  }
  res.avg_power = avg / horizon;
  res.empirical_rate = -0.5 * tail_slope(res.mc_log_error_trace);

  double worst_z = 0.0;
  size_t base = 0;
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    const int n = probes[pi];
    const double x2 = sums.x2p[pi] / cfg.trials;
    for (int j = 0; j < n - 1; ++j) {
      const double xy = sums.xy[base + static_cast<size_t>(j)] / cfg.trials;
      const double y2 = sums.y2[base + static_cast<size_t>(j)] / cfg.trials;
      const double z = xy / std::sqrt(std::max(x2 * y2, 1e-300) / cfg.trials);
      worst_z = std::max(worst_z, std::abs(z));
    }
    base += static_cast<size_t>(n - 1);
  }
  res.max_orthogonality_zscore = worst_z;
  return res;
}

// ---------------------------------------------------------------------------
// Message refinement in rescaled coordinates D_n = X_n.

SkResult simulate_message_refinement(const SkConfig& cfg) {
  const int k = cfg.spectrum.order();
  if (k > 1)
    throw std::invalid_argument("simulate_message_refinement: channel order must be <= 1");
  const double unit_scale = cfg.spectrum.sigma2();
  const double alpha = cfg.spectrum.p().size() > 1 ? cfg.spectrum.p()[1] : 0.0;
  const double beta = cfg.spectrum.q().size() > 1 ? cfg.spectrum.q()[1] : 0.0;
  const double x0 = std::exp(-cfg.design.rate);
  double s_sign = beta > alpha ? 1.0 : (beta < alpha ? -1.0 : 1.0);
  const double sx = s_sign * x0;
  const int horizon = cfg.horizon;

  const int ka = 1 + k;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(ka, ka);
  T(0, 0) = 1.0 / sx;
  Eigen::VectorXd G = Eigen::VectorXd::Zero(ka);
  Eigen::RowVectorXd h(ka);
  h(0) = 1.0;
  if (k == 1) {
    T(1, 1) = -beta;
    G(1) = 1.0;
    h(1) = alpha - beta;
  }

  SkResult res;
  res.trials = cfg.trials;
  res.det_power_trace.resize(static_cast<size_t>(horizon));
  res.det_innovation_trace.resize(static_cast<size_t>(horizon));
  res.det_log_error_trace.resize(static_cast<size_t>(horizon));

  // Deterministic covariance plan.
  std::vector<Eigen::MatrixXd> sigmas;
  std::vector<Eigen::VectorXd> post_gain;   // Sigma h' / innov
  std::vector<Eigen::VectorXd> prior_gain;  // (T Sigma h' + G)/innov
  std::vector<double> innovs;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(ka, ka);
  sigma(0, 0) = 1.0;  // D_1 = V ~ N(0,1)
  for (int n = 1; n <= horizon + 1; ++n) {
    sigmas.push_back(sigma);
    const double innov = (h * sigma * h.transpose())(0, 0) + 1.0;
    innovs.push_back(innov);
    post_gain.push_back(sigma * h.transpose() / innov);
    prior_gain.push_back((T * sigma * h.transpose() + G) / innov);
    if (n <= horizon) {
      res.det_innovation_trace[static_cast<size_t>(n - 1)] = innov * unit_scale;
      res.det_power_trace[static_cast<size_t>(n - 1)] = sigma(0, 0) * unit_scale;
      sigma = riccati_step(T, Eigen::MatrixXd(G), Eigen::MatrixXd(h), sigma, 1.0);
      res.det_log_error_trace[static_cast<size_t>(n - 1)] =
          2.0 * n * std::log(x0) + std::log(std::max(sigma(0, 0), 1e-300));
    }
  }
  res.sigma_final = sigmas.back().bottomRightCorner(k, k);
  res.deterministic_rate = -0.5 * tail_slope(res.det_log_error_trace);

  const std::vector<int> probes = probe_steps(horizon);
  size_t probe_pairs = 0;
  for (int p : probes) probe_pairs += static_cast<size_t>(p - 1);

  const TrialSums sums = run_trials(
      cfg.trials, horizon, probe_pairs, probes.size(), [&](long trial, TrialSums* s) {
        std::mt19937_64 rng = trial_rng(cfg.seed, trial);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(ka);  // (D_n, S_n)
        a(0) = gauss(rng);                              // V
        Eigen::VectorXd ahat = Eigen::VectorXd::Zero(ka);
        std::vector<double> ys(static_cast<size_t>(horizon));
        for (int n = 1; n <= horizon; ++n) {
          const double u = gauss(rng);
          const double y = (h * a)(0, 0) + u;
          ys[static_cast<size_t>(n - 1)] = y;
          const double innov_sample = y - (h * ahat)(0, 0);
          const Eigen::VectorXd apost =
              ahat + post_gain[static_cast<size_t>(n - 1)] * innov_sample;
          const double dhat = apost(0);

          s->power[static_cast<size_t>(n - 1)] += a(0) * a(0);
          s->innov2[static_cast<size_t>(n - 1)] += innov_sample * innov_sample;

          for (size_t pi = 0; pi < probes.size(); ++pi) {
            if (n == probes[pi]) {
              size_t base = 0;
              for (size_t q = 0; q < pi; ++q) base += static_cast<size_t>(probes[q] - 1);
              for (int j = 0; j < n - 1; ++j) {
                s->xy[base + static_cast<size_t>(j)] += a(0) * ys[static_cast<size_t>(j)];
                s->y2[base + static_cast<size_t>(j)] +=
                    ys[static_cast<size_t>(j)] * ys[static_cast<size_t>(j)];
              }
              s->x2p[pi] += a(0) * a(0);
            }
          }

          // Advance the true state and the filter.
          Eigen::VectorXd anext(ka);
          anext(0) = (a(0) - dhat) / sx;
          if (k == 1) anext(1) = T(1, 1) * a(1) + u;
          const double uhat = innov_sample / innovs[static_cast<size_t>(n - 1)];
          Eigen::VectorXd ahat_next = T * apost + G * uhat;
          ahat_next(0) = 0.0;  // E(D_{n+1} | Y^n) vanishes by construction
          a = anext;
          ahat = ahat_next;
          s->err[static_cast<size_t>(n - 1)] += a(0) * a(0);  // D_{n+1}^2
        }
      });

  res.power_trace.resize(static_cast<size_t>(horizon));
  res.innovation_variance_trace.resize(static_cast<size_t>(horizon));
  res.mc_log_error_trace.resize(static_cast<size_t>(horizon));
  double avg = 0.0;
  for (int n = 0; n < horizon; ++n) {
    res.power_trace[static_cast<size_t>(n)] =
        unit_scale * sums.power[static_cast<size_t>(n)] / cfg.trials;
    res.innovation_variance_trace[static_cast<size_t>(n)] =
        unit_scale * sums.innov2[static_cast<size_t>(n)] / cfg.trials;
    res.mc_log_error_trace[static_cast<size_t>(n)] =
        2.0 * (n + 1) * std::log(x0) +
        std::log(std::max(sums.err[static_cast<size_t>(n)] / cfg.trials, 1e-300));
    avg += res.power_trace[static_cast<size_t>(n)];
  }
  res.avg_power = avg / horizon;
  res.empirical_rate = -0.5 * tail_slope(res.mc_log_error_trace);

  double worst_z = 0.0;
  size_t base = 0;
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    const int n = probes[pi];
    const double x2 = sums.x2p[pi] / cfg.trials;
    for (int j = 0; j < n - 1; ++j) {
      const double xy = sums.xy[base + static_cast<size_t>(j)] / cfg.trials;
      const double y2 = sums.y2[base + static_cast<size_t>(j)] / cfg.trials;
      const double z = xy / std::sqrt(std::max(x2 * y2, 1e-300) / cfg.trials);
      worst_z = std::max(worst_z, std::abs(z));
    }
    base += static_cast<size_t>(n - 1);
  }
  res.max_orthogonality_zscore = worst_z;
  return res;
}

// ---------------------------------------------------------------------------
// Constellation decoding.

DecodeResult decode_constellation(const SkConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("decode_constellation: zero trials");
  const int k = cfg.spectrum.order();
  if (k > 1) throw std::invalid_argument("decode_constellation: channel order must be <= 1");
  const double alpha = cfg.spectrum.p().size() > 1 ? cfg.spectrum.p()[1] : 0.0;
  const double beta = cfg.spectrum.q().size() > 1 ? cfg.spectrum.q()[1] : 0.0;
  const double x0 = std::exp(-cfg.design.rate);
  const double s_sign = beta > alpha ? 1.0 : (beta < alpha ? -1.0 : 1.0);
  const double sx = s_sign * x0;
  const int n_len = cfg.horizon;

  const long m = std::max<long>(2, std::llround(std::exp(n_len * cfg.rate_nats)));
  const double delta = 2.0 / (m - 1);

  const int ka = 1 + k;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(ka, ka);
  T(0, 0) = 1.0 / sx;
  Eigen::VectorXd G = Eigen::VectorXd::Zero(ka);
  Eigen::RowVectorXd h(ka);
  h(0) = 1.0;
  if (k == 1) {
    T(1, 1) = -beta;
    G(1) = 1.0;
    h(1) = alpha - beta;
  }

  std::vector<Eigen::VectorXd> post_gain;
  std::vector<double> innovs;
  std::vector<double> log_est_var;  // log of unbiased-estimator variance per step
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(ka, ka);
  sigma(0, 0) = 1.0;
  double e_final = 0.0;
  for (int n = 1; n <= n_len; ++n) {
    const double innov = (h * sigma * h.transpose())(0, 0) + 1.0;
    innovs.push_back(innov);
    post_gain.push_back(sigma * h.transpose() / innov);
    sigma = riccati_step(T, Eigen::MatrixXd(G), Eigen::MatrixXd(h), sigma, 1.0);
    const double log_e = 2.0 * n * std::log(x0) + std::log(std::max(sigma(0, 0), 1e-300));
    const double e_n = std::exp(log_e);
    log_est_var.push_back(log_e - std::log(std::max(1.0 - e_n, 1e-300)));
    if (n == n_len) e_final = e_n;
  }

  // c0 fit: log(est var) ~ log c + 2 n log x0 over the tail half.
  double log_c = 0.0;
  int cnt = 0;
  for (int n = n_len / 2; n < n_len; ++n) {
    log_c += log_est_var[static_cast<size_t>(n)] - 2.0 * (n + 1) * std::log(x0);
    ++cnt;
  }
  log_c /= std::max(cnt, 1);
  const double log_c0 = -std::log(2.0) - log_c;

  DecodeResult out;
  out.c0 = std::exp(log_c0);
  out.delta = delta;
  out.constellation_size = m;
  out.trials = cfg.trials;
  // bound = erfc(sqrt(c0 x0^{-2n} / 2^{2 n R_bits})); 2^{2nR_bits} = e^{2 n R_nats}.
  const double log_arg = log_c0 - 2.0 * n_len * std::log(x0) - 2.0 * n_len * cfg.rate_nats;
  out.bound = std::erfc(std::sqrt(std::exp(0.5 * log_arg) * std::exp(0.5 * log_arg)));

  const double scale_back = std::pow(sx, n_len);
  const double unbias = 1.0 / (1.0 - e_final);

  long errors = 0;
  for (long trial = 0; trial < cfg.trials; ++trial) {
    std::mt19937_64 rng = trial_rng(cfg.seed, trial);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<long> pick(0, m - 1);
    const long idx = pick(rng);
    const double theta = -1.0 + delta * idx;

    Eigen::VectorXd a = Eigen::VectorXd::Zero(ka);
    a(0) = theta;
    Eigen::VectorXd ahat = Eigen::VectorXd::Zero(ka);
    for (int n = 1; n <= n_len; ++n) {
      const double u = gauss(rng);
      const double y = (h * a)(0, 0) + u;
      const double innov_sample = y - (h * ahat)(0, 0);
      const Eigen::VectorXd apost = ahat + post_gain[static_cast<size_t>(n - 1)] * innov_sample;
      Eigen::VectorXd anext(ka);
      anext(0) = (a(0) - apost(0)) / sx;
      if (k == 1) anext(1) = T(1, 1) * a(1) + u;
      const double uhat = innov_sample / innovs[static_cast<size_t>(n - 1)];
      Eigen::VectorXd ahat_next = T * apost + G * uhat;
      ahat_next(0) = 0.0;
      a = anext;
      ahat = ahat_next;
    }
    const double vhat = theta - scale_back * a(0);
    const double theta_hat = vhat * unbias;
    long decoded = std::llround((theta_hat + 1.0) / delta);
    decoded = std::max(0L, std::min(m - 1, decoded));
    if (decoded != idx) ++errors;
  }
  out.error_count = errors;
  out.error_rate = static_cast<double>(errors) / cfg.trials;
  return out;
}

}  // namespace gfc
