#include "gfc/nblock.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gfc/waterfill.hpp"

namespace gfc {

namespace {

double logdet_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Water-fills K_V against a (PSD-regularized) modified noise covariance.
Eigen::MatrixXd waterfill_kv(const Eigen::MatrixXd& noise, double budget) {
  const int n = static_cast<int>(noise.rows());
  if (budget <= 0.0) return Eigen::MatrixXd::Zero(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise);
  const Eigen::VectorXd lam = es.eigenvalues();
  double lo = lam.minCoeff(), hi = lam.maxCoeff() + budget + 1.0;
  double level = hi;
  for (int it = 0; it < 300; ++it) {
    level = 0.5 * (lo + hi);
    double f = 0.0;
    for (int i = 0; i < n; ++i) f += std::max(0.0, level - lam(i));
    if (std::abs(f - budget) < 1e-14 * (1.0 + budget)) break;
    if (f < budget)
      lo = level;
    else
      hi = level;
  }
  Eigen::VectorXd fill(n);
  for (int i = 0; i < n; ++i) fill(i) = std::max(0.0, level - lam(i));
  Eigen::MatrixXd kv = es.eigenvectors() * fill.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (kv + kv.transpose());
}

// Minimum-power feedback rewrite at a fixed message law: given the covariance
// K of the innovations-form message V-tilde, returns X = M V + N Z with
// X_i = V_i - E(V_i | Y^{i-1}), Y = X + Z. M is lower unitriangular, N strictly
// lower; the output law (hence the rate) is unchanged.
void orthogonalize(const Eigen::MatrixXd& k_til, const Eigen::MatrixXd& k_z,
                   Eigen::MatrixXd* M, Eigen::MatrixXd* N) {
  const int n = static_cast<int>(k_z.rows());
  // Coordinates: (V-part, Z-part) with Gram J = blkdiag(k_til, k_z).
  Eigen::MatrixXd q_v = Eigen::MatrixXd::Zero(n, n);  // V-coords of the orthonormal basis
  Eigen::MatrixXd q_z = Eigen::MatrixXd::Zero(n, n);
  *M = Eigen::MatrixXd::Zero(n, n);
  *N = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    // Project e_i (V side) on the first i basis vectors: coeff_j = <e_i^V, q_j>.
    Eigen::VectorXd xv = Eigen::VectorXd::Unit(n, i);
    Eigen::VectorXd xz = Eigen::VectorXd::Zero(n);
    if (i > 0) {
      const Eigen::VectorXd coeff =
          q_v.leftCols(i).transpose() * (k_til * xv);  // J-inner products
      xv -= q_v.leftCols(i) * coeff;
      xz -= q_z.leftCols(i) * coeff;
    }
    M->row(i) = xv.transpose();
    N->row(i) = xz.transpose();
    // Output coordinate y_i = x_i + e_i^Z, then Gram-Schmidt.
    Eigen::VectorXd yv = xv, yz = xz;
    yz(i) += 1.0;
    if (i > 0) {
      const Eigen::VectorXd coeff =
          q_v.leftCols(i).transpose() * (k_til * yv) + q_z.leftCols(i).transpose() * (k_z * yz);
      yv -= q_v.leftCols(i) * coeff;
      yz -= q_z.leftCols(i) * coeff;
    }
    const double norm2 = yv.dot(k_til * yv) + yz.dot(k_z * yz);
    if (!(norm2 > 0.0)) throw std::runtime_error("orthogonalize: degenerate innovation");
    const double inv = 1.0 / std::sqrt(norm2);
    q_v.col(i) = yv * inv;
    q_z.col(i) = yz * inv;
  }
  // Clean numerical dust above the diagonals.
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) (*N)(i, j) = 0.0;
}

struct AlternationState {
  Eigen::MatrixXd b;
  Eigen::MatrixXd k_v;
};

void alternation_step(const Eigen::MatrixXd& k_z, double nP, AlternationState* st) {
  const int n = static_cast<int>(k_z.rows());
  const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) + st->b;
  // Message law in innovations form.
  const Eigen::MatrixXd ib_inv = ib.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd k_til = ib_inv * st->k_v * ib_inv.transpose();
  k_til = 0.5 * (k_til + k_til.transpose());
  Eigen::MatrixXd M, N;
  orthogonalize(k_til, k_z, &M, &N);
  st->b = N;
  st->k_v = M * k_til * M.transpose();
  st->k_v = 0.5 * (st->k_v + st->k_v.transpose());
  // Water-fill under the refreshed budget.
  const Eigen::MatrixXd ib2 = Eigen::MatrixXd::Identity(n, n) + st->b;
  const double budget = nP - (st->b * k_z * st->b.transpose()).trace();
  Eigen::MatrixXd noise = ib2 * k_z * ib2.transpose();
  noise = 0.5 * (noise + noise.transpose());
  st->k_v = waterfill_kv(noise, budget);
}

// ---------------------------------------------------------------------------
// Barrier Newton machinery. Variables: K_Y lower triangle (incl. diagonal),
// then B strict lower triangle, both row-major by (a, b).

struct VarMap {
  int n = 0;
  int m_y = 0;
  int m_b = 0;
  std::vector<std::pair<int, int>> y_idx;
  std::vector<std::pair<int, int>> b_idx;

  explicit VarMap(int n_) : n(n_) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b <= a; ++b) y_idx.emplace_back(a, b);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < a; ++b) b_idx.emplace_back(a, b);
    m_y = static_cast<int>(y_idx.size());
    m_b = static_cast<int>(b_idx.size());
  }

  void unpack(const Eigen::VectorXd& x, Eigen::MatrixXd* k_y, Eigen::MatrixXd* b) const {
    *k_y = Eigen::MatrixXd::Zero(n, n);
    *b = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < m_y; ++i) {
      const auto [a, c] = y_idx[static_cast<size_t>(i)];
      (*k_y)(a, c) = x(i);
      (*k_y)(c, a) = x(i);
    }
    for (int i = 0; i < m_b; ++i) {
      const auto [a, c] = b_idx[static_cast<size_t>(i)];
      (*b)(a, c) = x(m_y + i);
    }
  }

  Eigen::VectorXd pack(const Eigen::MatrixXd& k_y, const Eigen::MatrixXd& b) const {
    Eigen::VectorXd x(m_y + m_b);
    for (int i = 0; i < m_y; ++i) {
      const auto [a, c] = y_idx[static_cast<size_t>(i)];
      x(i) = k_y(a, c);
    }
    for (int i = 0; i < m_b; ++i) {
      const auto [a, c] = b_idx[static_cast<size_t>(i)];
      x(m_y + i) = b(a, c);
    }
    return x;
  }
};

struct BarrierEval {
  bool feasible = false;
  double value = 0.0;
  double logdet_ky = 0.0;
};

class BarrierProblem {
 public:
  BarrierProblem(const Eigen::MatrixXd& k_z, double P)
      : k_z_(k_z), n_(static_cast<int>(k_z.rows())), nP_(P * k_z.rows()), vm_(n_) {}

  const VarMap& vm() const { return vm_; }

  BarrierEval eval(const Eigen::VectorXd& x, double t) const {
    BarrierEval out;
    Eigen::MatrixXd k_y, b;
    vm_.unpack(x, &k_y, &b);
    Eigen::LLT<Eigen::MatrixXd> llt_y(k_y);
    if (llt_y.info() != Eigen::Success) return out;
    const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n_, n_) + b;
    Eigen::MatrixXd s = k_y - ib * k_z_ * ib.transpose();
    s = 0.5 * (s + s.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt_s(s);
    if (llt_s.info() != Eigen::Success) return out;
    const double c = nP_ + k_z_.trace() + 2.0 * (b * k_z_).trace() - k_y.trace();
    if (!(c > 0.0)) return out;
    out.feasible = true;
    out.logdet_ky = logdet_llt(llt_y);
    out.value = -t * out.logdet_ky - logdet_llt(llt_s) - std::log(c);
    return out;
  }

  // Gradient and Hessian of the barrier objective at a strictly feasible x.
  void derivatives(const Eigen::VectorXd& x, double t, Eigen::VectorXd* grad,
                   Eigen::MatrixXd* hess) const {
    Eigen::MatrixXd k_y, b;
    vm_.unpack(x, &k_y, &b);
    const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n_, n_) + b;
    const Eigen::MatrixXd T = ib * k_z_;  // columns feed the rank-2 S-derivatives
    Eigen::MatrixXd s = k_y - ib * k_z_ * ib.transpose();
    s = 0.5 * (s + s.transpose());
    const Eigen::MatrixXd wy = k_y.llt().solve(Eigen::MatrixXd::Identity(n_, n_));
    const Eigen::MatrixXd ws = s.llt().solve(Eigen::MatrixXd::Identity(n_, n_));
    const double c = nP_ + k_z_.trace() + 2.0 * (b * k_z_).trace() - k_y.trace();
    const Eigen::MatrixXd wst = ws * T;
    const Eigen::MatrixXd twst = T.transpose() * wst;

    const int m = vm_.m_y + vm_.m_b;
    grad->resize(m);
    hess->resize(m, m);

    const Eigen::MatrixXd gy = -t * wy - ws + (1.0 / c) * Eigen::MatrixXd::Identity(n_, n_);
    for (int i = 0; i < vm_.m_y; ++i) {
      const auto [a, bb] = vm_.y_idx[static_cast<size_t>(i)];
      (*grad)(i) = (a == bb) ? gy(a, a) : 2.0 * gy(a, bb);
    }
    for (int i = 0; i < vm_.m_b; ++i) {
      const auto [a, bb] = vm_.b_idx[static_cast<size_t>(i)];
      (*grad)(vm_.m_y + i) = 2.0 * wst(a, bb) - 2.0 * k_z_(a, bb) / c;
    }

    // K_Y x K_Y block: t * tr(Wy E_i Wy E_j) + tr(Ws E_i Ws E_j) + c_i c_j / c^2.
    for (int i = 0; i < vm_.m_y; ++i) {
      const auto [a, bb] = vm_.y_idx[static_cast<size_t>(i)];
      for (int j = i; j < vm_.m_y; ++j) {
        const auto [cc, dd] = vm_.y_idx[static_cast<size_t>(j)];
        auto pair_term = [&](const Eigen::MatrixXd& w) {
          if (a == bb && cc == dd) return w(a, cc) * w(a, cc);
          if (a == bb) return 2.0 * w(a, cc) * w(a, dd);
          if (cc == dd) return 2.0 * w(cc, a) * w(cc, bb);
          return 2.0 * (w(bb, cc) * w(a, dd) + w(bb, dd) * w(a, cc));
        };
        double v = t * pair_term(wy) + pair_term(ws);
        const double ci = (a == bb) ? -1.0 : 0.0;
        const double cj = (cc == dd) ? -1.0 : 0.0;
        v += ci * cj / (c * c);
        (*hess)(i, j) = v;
        (*hess)(j, i) = v;
      }
    }

    // K_Y x B block.
    for (int i = 0; i < vm_.m_y; ++i) {
      const auto [a, bb] = vm_.y_idx[static_cast<size_t>(i)];
      for (int j = 0; j < vm_.m_b; ++j) {
        const auto [cc, dd] = vm_.b_idx[static_cast<size_t>(j)];
        double v = -(ws(bb, cc) * wst(a, dd) + wst(bb, dd) * ws(a, cc));
        if (a != bb) v += -(ws(a, cc) * wst(bb, dd) + wst(a, dd) * ws(bb, cc));
        const double ci = (a == bb) ? -1.0 : 0.0;
        const double cj = 2.0 * k_z_(cc, dd);
        v += ci * cj / (c * c);
        (*hess)(i, vm_.m_y + j) = v;
        (*hess)(vm_.m_y + j, i) = v;
      }
    }

    // B x B block.
    for (int i = 0; i < vm_.m_b; ++i) {
      const auto [a, bb] = vm_.b_idx[static_cast<size_t>(i)];
      for (int j = i; j < vm_.m_b; ++j) {
        const auto [cc, dd] = vm_.b_idx[static_cast<size_t>(j)];
        double v = 2.0 * wst(a, dd) * wst(cc, bb) + 2.0 * ws(a, cc) * twst(bb, dd) +
                   2.0 * k_z_(bb, dd) * ws(a, cc);
        v += (2.0 * k_z_(a, bb)) * (2.0 * k_z_(cc, dd)) / (c * c);
        (*hess)(vm_.m_y + i, vm_.m_y + j) = v;
        (*hess)(vm_.m_y + j, vm_.m_y + i) = v;
      }
    }
  }

 private:
  Eigen::MatrixXd k_z_;
  int n_;
  double nP_;
  VarMap vm_;
};

}  // namespace

NBlockSolution nblock_feedback(const Eigen::MatrixXd& k_z, double P,
                               const NBlockOptions& opts) {
  const int n = static_cast<int>(k_z.rows());
  if (n < 1 || k_z.rows() != k_z.cols())
    throw std::invalid_argument("nblock_feedback: bad K_Z shape");
  Eigen::LLT<Eigen::MatrixXd> llt(k_z);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("nblock_feedback: K_Z must be positive definite");
  if (!(P > 0.0)) throw std::invalid_argument("nblock_feedback: P must be positive");
  const double logdet_kz = logdet_llt(llt);

  NBlockSolution sol;
  sol.method = "barrier+polish";

  BarrierProblem prob(k_z, P);
  const VarMap& vm = prob.vm();

  // Strictly feasible start: B = 0, K_Y = K_Z + (P - eps) I.
  const double eps = 1e-6 * P;
  Eigen::MatrixXd k_y = k_z + (P - eps) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd x = vm.pack(k_y, b);

  bool newton_ok = true;
  try {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    for (double t = 1.0; t < 1.0 / opts.mu_min * 10.0; t *= 10.0) {
      for (int step = 0; step < opts.newton_max_per_stage; ++step) {
        prob.derivatives(x, t, &grad, &hess);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success) throw std::runtime_error("newton: LDLT failed");
        const Eigen::VectorXd dx = ldlt.solve(-grad);
        const double decrement = -grad.dot(dx);
        if (!(decrement > 0.0)) throw std::runtime_error("newton: non-descent direction");
        if (decrement < 1e-11 * (1.0 + t)) break;
        const BarrierEval f0 = prob.eval(x, t);
        double tau = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
          const BarrierEval f1 = prob.eval(x + tau * dx, t);
          if (f1.feasible && f1.value <= f0.value - 0.25 * tau * decrement) {
            x += tau * dx;
            moved = true;
            break;
          }
          tau *= 0.5;
        }
        if (!moved) break;
      }
    }
    prob.derivatives(x, 1.0 / opts.mu_min, &grad, &hess);
    sol.kkt_residual = grad.cwiseAbs().maxCoeff() * opts.mu_min;
  } catch (const std::exception&) {
    newton_ok = false;
    sol.method = "alternation";
  }

  AlternationState st;
  if (newton_ok) {
    vm.unpack(x, &k_y, &b);
    const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) + b;
    st.b = b;
    st.k_v = k_y - ib * k_z * ib.transpose();
    st.k_v = 0.5 * (st.k_v + st.k_v.transpose());
    // Clip away barrier slack so the polish starts from a PSD message law.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(st.k_v);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    st.k_v = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  } else {
    st.b = Eigen::MatrixXd::Zero(n, n);
    st.k_v = waterfill_kv(k_z, n * P);
  }

  const double tol = opts.polish_tol_scale * 1e-6 * n;
  for (int it = 0; it < opts.polish_max_iter; ++it) {
    alternation_step(k_z, n * P, &st);
    // Orthogonality is the one condition the water-fill step can disturb.
    const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) + st.b;
    const Eigen::MatrixXd orth = st.k_v + st.b * k_z * ib.transpose();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(orth(i, j)));
    sol.kkt_residual = worst;
    if (worst < tol) break;
  }

  const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) + st.b;
  sol.b_lower = st.b;
  sol.k_v = st.k_v;
  sol.k_y = st.k_v + ib * k_z * ib.transpose();
  sol.k_y = 0.5 * (sol.k_y + sol.k_y.transpose());
  sol.value = (logdet_llt(sol.k_y.llt()) - logdet_kz) / (2.0 * n);
  return sol;
}

NBlockConditionReport verify_nblock_conditions(const NBlockSolution& sol,
                                               const Eigen::MatrixXd& k_z, double P) {
  const int n = static_cast<int>(k_z.rows());
  NBlockConditionReport rep;
  rep.power_residual =
      std::abs((sol.k_v + sol.b_lower * k_z * sol.b_lower.transpose()).trace() - n * P);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.k_y);
  const double lam_min = es.eigenvalues().minCoeff();
  rep.waterfill_residual = std::abs(
      (sol.k_v * (sol.k_y - lam_min * Eigen::MatrixXd::Identity(n, n))).trace());
  const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) + sol.b_lower;
  const Eigen::MatrixXd orth = sol.k_v + sol.b_lower * k_z * ib.transpose();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(orth(i, j)));
  rep.orthogonality_residual = worst;
  const double tol = 1e-6 * n;
  rep.pass = rep.power_residual < tol && rep.waterfill_residual < tol &&
             rep.orthogonality_residual < tol;
  return rep;
}

NBlockRankReport nblock_rank_check(const NBlockSolution& sol, int bandwidth_k) {
  NBlockRankReport rep;
  const int n = static_cast<int>(sol.k_v.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.k_v);
  const double thresh = 1e-6 * std::max(sol.k_v.trace(), 0.0);
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > thresh) ++rep.rank_k_v;
  rep.rank_ok = rep.rank_k_v <= bandwidth_k || bandwidth_k == 0;

  const double scale = sol.k_y.cwiseAbs().maxCoeff();
  double off = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(i - j) > bandwidth_k) off = std::max(off, std::abs(sol.k_y(i, j)));
  rep.band_residual = off / scale;
  rep.band_ok = rep.band_residual < 1e-6;
  return rep;
}

FeedbackGain feedback_gain(const Eigen::MatrixXd& k_z, double P) {
  FeedbackGain out;
  const NBlockNonfeedback nf = nblock_nonfeedback(k_z, P);
  const NBlockSolution fb = nblock_feedback(k_z, P);
  out.nonfeedback = nf.value;
  out.feedback = fb.value;
  out.gain = fb.value - nf.value;
  double offdiag = 0.0;
  for (int i = 0; i < k_z.rows(); ++i)
    for (int j = 0; j < k_z.cols(); ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(nf.k_x(i, j)));
  out.k_x_diagonal = offdiag < 1e-8 * std::max(1.0, nf.k_x.trace());
  return out;
}

}  // namespace gfc
