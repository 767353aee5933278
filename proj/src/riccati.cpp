#include "gfc/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace gfc {

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  double r = 0.0;
  for (int i = 0; i < M.rows(); ++i) r = std::max(r, std::abs(es.eigenvalues()(i)));
  return r;
}

int psd_rank(const Eigen::MatrixXd& S) {
  if (S.rows() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double thresh = 1e-8 * std::max(S.trace(), 1.0);
  int rank = 0;
  for (int i = 0; i < S.rows(); ++i)
    if (es.eigenvalues()(i) > thresh) ++rank;
  return rank;
}

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                             const Eigen::MatrixXd& h, const Eigen::MatrixXd& sigma,
                             double r) {
  const Eigen::MatrixXd cross = F * sigma * h.transpose() + G;  // k x 1
  const double denom = r + (h * sigma * h.transpose())(0, 0);
  Eigen::MatrixXd next =
      F * sigma * F.transpose() + G * G.transpose() - (cross * cross.transpose()) / denom;
  return 0.5 * (next + next.transpose());
}

static void check_unit_circle(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                              const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd M = F - G * h;
  if (M.rows() == 0) return;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  for (int i = 0; i < M.rows(); ++i) {
    const double mod = std::abs(es.eigenvalues()(i));
    if (mod > 1.0 - 1e-8 && mod < 1.0 + 1e-8)
      throw std::invalid_argument("dare: F - G h has a unit-circle eigenvalue");
  }
}

DareSolution dare_stabilizing(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                              const Eigen::MatrixXd& h_eff, const DareOptions& opts) {
  const int k = static_cast<int>(F.rows());
  if (k == 0) {
    DareSolution trivial;
    trivial.sigma_plus = Eigen::MatrixXd();
    trivial.gamma = Eigen::MatrixXd();
    trivial.closed_loop = Eigen::MatrixXd();
    return trivial;
  }
  check_unit_circle(F, G, h_eff);

  Eigen::MatrixXd sigma =
      (opts.sigma0.rows() == k && opts.sigma0.cols() == k) ? opts.sigma0
                                                           : Eigen::MatrixXd::Identity(k, k);
  long it = 0;
  bool converged = false;
  double best_delta = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_sigma = sigma;
  long best_it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd next = riccati_step(F, G, h_eff, sigma);
    const double delta = (next - sigma).cwiseAbs().maxCoeff();
    const double scale = 1.0 + next.cwiseAbs().maxCoeff();
    sigma = next;
    if (delta < best_delta) {
      best_delta = delta;
      best_sigma = sigma;
      best_it = it;
    }
    if (delta < opts.tol * scale) {
      converged = true;
      break;
    }
    // Chatter at the floating-point floor: keep the best iterate and let the
    // direct-substitution residual check decide.
    if (it > 500 && it - best_it > 200) break;
  }
  if (!converged) {
    if (best_delta == std::numeric_limits<double>::infinity())
      throw std::runtime_error("dare: fixed-point iteration did not converge");
    sigma = best_sigma;
  }

  DareSolution sol;
  sol.sigma_plus = sigma;
  const double denom = 1.0 + (h_eff * sigma * h_eff.transpose())(0, 0);
  sol.gamma = (F * sigma * h_eff.transpose() + G) / denom;
  sol.closed_loop = F - sol.gamma * h_eff;
  sol.innovation_variance = denom;
  sol.iterations = it + 1;
  const Eigen::MatrixXd res = riccati_step(F, G, h_eff, sigma) - sigma;
  sol.residual = (k == 0) ? 0.0 : res.cwiseAbs().maxCoeff();

  const double scale = 1.0 + (k == 0 ? 0.0 : sigma.cwiseAbs().maxCoeff());
  if (sol.residual > 1e-10 * scale)
    throw std::runtime_error("dare: residual check failed");
  if (spectral_radius(sol.closed_loop) >= 1.0)
    throw std::runtime_error("dare: converged iterate is not stabilizing");
  return sol;
}

std::vector<Eigen::MatrixXd> riccati_recursion(const Eigen::MatrixXd& F,
                                               const Eigen::MatrixXd& G,
                                               const Eigen::MatrixXd& h_eff,
                                               const Eigen::MatrixXd& sigma0, int steps) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<size_t>(steps) + 1);
  out.push_back(sigma0);
  for (int i = 0; i < steps; ++i) out.push_back(riccati_step(F, G, h_eff, out.back()));
  return out;
}

namespace {

// Multiset distance between the eigenvalues of M and a target list, by greedy
// nearest matching (adequate at desk scale with well-separated spectra).
double multiset_distance(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b) {
  double worst = 0.0;
  while (!a.empty()) {
    size_t bi = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < b.size(); ++j) {
      const double d = std::abs(a.back() - b[j]);
      if (d < best) {
        best = d;
        bi = j;
      }
    }
    worst = std::max(worst, best);
    a.pop_back();
    b.erase(b.begin() + static_cast<long>(bi));
  }
  return worst;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
  std::vector<std::complex<double>> out;
  if (M.rows() == 0) return out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  for (int i = 0; i < M.rows(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

}  // namespace

DareReport verify_dare_properties(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                                  const Eigen::MatrixXd& h_eff, const DareSolution& sol) {
  DareReport rep;
  const bool g_zero = G.rows() == 0 || G.cwiseAbs().maxCoeff() == 0.0;

  // Determinant identity 1 + h Sigma h' = det(F)/det(F - Gamma h), G = 0 and F invertible.
  if (g_zero && F.rows() > 0 && std::abs(F.determinant()) > 1e-12) {
    const double lhs = sol.innovation_variance;
    const double rhs = F.determinant() / sol.closed_loop.determinant();
    rep.det_identity_residual = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    rep.det_identity_ok = rep.det_identity_residual < 1e-9;
  }

  // Eigenvalues of the closed loop are the into-the-disc reflections of the
  // eigenvalues of F - G h (of F itself when G = 0).
  std::vector<std::complex<double>> target;
  int outside = 0;
  for (const auto& lam : eigenvalues(F - G * h_eff)) {
    if (std::abs(lam) > 1.0) {
      target.push_back(1.0 / lam);
      ++outside;
    } else {
      target.push_back(lam);
    }
  }
  rep.reflection_residual = multiset_distance(eigenvalues(sol.closed_loop), target);
  rep.reflection_ok = rep.reflection_residual < 1e-8;

  rep.rank = psd_rank(sol.sigma_plus);
  rep.expected_rank = outside;
  rep.rank_ok = rep.rank == rep.expected_rank;
  return rep;
}

}  // namespace gfc
