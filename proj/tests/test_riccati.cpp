#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gfc/riccati.hpp"
#include "gfc/spectrum.hpp"

namespace {

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// Companion matrix with prescribed eigenvalues (real).
Eigen::MatrixXd companion_from_eigs(const std::vector<double>& eigs) {
  std::vector<double> coeff{1.0};
  for (double e : eigs) {
    std::vector<double> next(coeff.size() + 1, 0.0);
    for (size_t i = 0; i < coeff.size(); ++i) {
      next[i] += coeff[i];
      next[i + 1] -= coeff[i] * e;
    }
    coeff = next;  // monic in t: prod (t - e)
  }
  const int k = static_cast<int>(eigs.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) f(0, i) = -coeff[static_cast<size_t>(i + 1)];
  for (int i = 1; i < k; ++i) f(i, i - 1) = 1.0;
  return f;
}

}  // namespace

TEST_CASE("dare scalar closed forms") {
  // F stable, G = 0: stabilizing solution vanishes.
  const gfc::DareSolution s0 = gfc::dare_stabilizing(m1(0.7), m1(0.0), m1(1.0));
  CHECK(s0.sigma_plus(0, 0) == doctest::Approx(0.0).epsilon(1e-11));
  CHECK(s0.innovation_variance == doctest::Approx(1.0));

  // Scalar F = 2, G = 0, H = 1: sigma = F^2 - 1 = 3.
  const gfc::DareSolution s1 = gfc::dare_stabilizing(m1(2.0), m1(0.0), m1(1.0));
  CHECK(s1.sigma_plus(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s1.closed_loop(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s1.innovation_variance == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s1.residual < 1e-10 * 4.0);

  const gfc::DareReport rep = gfc::verify_dare_properties(m1(2.0), m1(0.0), m1(1.0), s1);
  CHECK(rep.det_identity_ok);
  CHECK(rep.reflection_ok);
  CHECK(rep.rank_ok);
  CHECK(rep.rank == 1);

  // Unit-circle eigenvalue of F - G h is rejected.
  CHECK_THROWS(gfc::dare_stabilizing(m1(1.0), m1(0.0), m1(1.0)));
}

TEST_CASE("dare arma1 closed form") {
  // ARMA(1): F = -beta, G = 1, h = chi + alpha - beta.
  const double alpha = 0.0, beta = 0.5, P = 1.0;
  const double sigma = 1.0;  // sgn(beta - alpha)
  // Solve the capacity quartic by brute-force scan + refinement.
  double x = 0.0;
  for (double t = 1e-6; t < 1.0; t += 1e-6) {
    const double lhs = P * t * t * std::pow(1.0 + sigma * beta * t, 2);
    const double rhs = (1.0 - t * t) * std::pow(1.0 + sigma * alpha * t, 2);
    if (lhs >= rhs) {
      x = t;
      break;
    }
  }
  const double chi = (1.0 + sigma * beta * x) / (sigma * x);
  const double h = chi + alpha - beta;
  const gfc::DareSolution sol = gfc::dare_stabilizing(m1(-beta), m1(1.0), m1(h));
  const double expect = (std::pow(chi + alpha, 2) - 1.0) / (h * h);
  CHECK(sol.sigma_plus(0, 0) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("riccati recursion lemma") {
  // Zero start stays zero when G = 0.
  const auto zeros =
      gfc::riccati_recursion(m1(2.0), m1(0.0), m1(1.0), Eigen::MatrixXd::Zero(1, 1), 20);
  for (const auto& s : zeros) CHECK(s(0, 0) == 0.0);

  // Tiny positive start converges to the stabilizing solution.
  const auto traj = gfc::riccati_recursion(m1(2.0), m1(0.0), m1(1.0),
                                           1e-6 * Eigen::MatrixXd::Identity(1, 1), 400);
  CHECK(traj.back()(0, 0) == doctest::Approx(3.0).epsilon(1e-10));

  // Monotonicity: sigma0 >= sigma0' >= 0 implies ordering along the whole path.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        a(i, j) = g(rng);
        b(i, j) = g(rng);
      }
    const Eigen::MatrixXd s_small = b * b.transpose();
    const Eigen::MatrixXd s_big = s_small + a * a.transpose();
    const Eigen::MatrixXd f = companion_from_eigs({1.7, 0.4});
    Eigen::MatrixXd h(1, 2);
    h << 1.0, 0.3;
    const auto big = gfc::riccati_recursion(f, Eigen::MatrixXd::Zero(2, 1), h, s_big, 30);
    const auto small = gfc::riccati_recursion(f, Eigen::MatrixXd::Zero(2, 1), h, s_small, 30);
    for (size_t i = 0; i < big.size(); ++i) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(big[i] - small[i]);
      CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
  }
}

TEST_CASE("dare rank rule on mixed spectra") {
  const Eigen::MatrixXd f = companion_from_eigs({1.5, 0.5});
  Eigen::MatrixXd h(1, 2);
  h << 1.0, 0.3;
  const gfc::DareSolution sol =
      gfc::dare_stabilizing(f, Eigen::MatrixXd::Zero(2, 1), h);
  const gfc::DareReport rep =
      gfc::verify_dare_properties(f, Eigen::MatrixXd::Zero(2, 1), h, sol);
  CHECK(rep.rank == 1);
  CHECK(rep.rank_ok);
  CHECK(rep.reflection_ok);
  CHECK(rep.det_identity_ok);
}

TEST_CASE("dare maximality under perturbation") {
  const Eigen::MatrixXd f = companion_from_eigs({1.5, 0.5});
  Eigen::MatrixXd h(1, 2);
  h << 1.0, 0.3;
  const gfc::DareSolution sol = gfc::dare_stabilizing(f, Eigen::MatrixXd::Zero(2, 1), h);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a(i, j) = g(rng);
    gfc::DareOptions opts;
    opts.sigma0 = sol.sigma_plus + a * a.transpose();
    const gfc::DareSolution again =
        gfc::dare_stabilizing(f, Eigen::MatrixXd::Zero(2, 1), h, opts);
    CHECK((again.sigma_plus - sol.sigma_plus).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("entropy rate identity") {
  // h sigma2 identity: 1/2 log(2 pi e sigma^2) equals 1/2 log 2 pi e plus the
  // log-integral of |det(I - zF)/det(I - z(F - GH))|^2, F anti-stable, G chosen
  // to stabilize F - GH.
  const Eigen::MatrixXd f = companion_from_eigs({1.8, 1.3});
  Eigen::MatrixXd h(1, 2);
  h << 1.0, 0.4;
  const gfc::DareSolution sol = gfc::dare_stabilizing(f, Eigen::MatrixXd::Zero(2, 1), h);

  // Quadrature of the log ratio (the innovations filter is all-pass so the
  // integral reduces to log prod |outside eigenvalues|^2 / 2).
  const int grid = 8192;
  double acc = 0.0;
  const Eigen::MatrixXd fgh = f - sol.gamma * h;  // stable by construction
  for (int i = 0; i < grid; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / grid;
    const std::complex<double> z = std::polar(1.0, theta);
    const Eigen::MatrixXcd a =
        Eigen::MatrixXcd::Identity(2, 2) - z * f.cast<std::complex<double>>();
    const Eigen::MatrixXcd b =
        Eigen::MatrixXcd::Identity(2, 2) - z * fgh.cast<std::complex<double>>();
    acc += 0.5 * std::log(std::norm(a.determinant() / b.determinant()));
  }
  acc /= grid;
  CHECK(0.5 * std::log(sol.innovation_variance) == doctest::Approx(acc).epsilon(1e-8));
}

TEST_CASE("entropy rate boost example") {
  // Y'_n = U_n + alpha U_{n-1}, |alpha| = 1.5: zero start keeps unit innovation
  // variance; any positive start converges to alpha^2.
  const double alpha = 1.5;
  const Eigen::MatrixXd f = m1(-alpha);
  const Eigen::MatrixXd h = m1(1.0);
  const auto frozen =
      gfc::riccati_recursion(f, m1(0.0), h, Eigen::MatrixXd::Zero(1, 1), 50);
  for (const auto& s : frozen) CHECK(1.0 + s(0, 0) == doctest::Approx(1.0));
  const auto boosted = gfc::riccati_recursion(f, m1(0.0), h,
                                              1e-6 * Eigen::MatrixXd::Identity(1, 1), 2000);
  CHECK(1.0 + boosted.back()(0, 0) == doctest::Approx(alpha * alpha).epsilon(1e-9));
}

TEST_CASE("dare random property suite") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mod_out(1.25, 3.0);
  std::uniform_real_distribution<double> mod_in(0.2, 0.8);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> coin(0, 1);
  std::normal_distribution<double> g(0.0, 1.0);

  for (int trial = 0; trial < 100; ++trial) {
    const int k = dim(rng);
    std::vector<double> eigs;
    int outside = 0;
    for (int i = 0; i < k; ++i) {
      for (;;) {
        const bool out = coin(rng) == 1;
        double m = out ? mod_out(rng) : mod_in(rng);
        if (coin(rng) == 1) m = -m;
        bool separated = true;
        for (double e : eigs) separated = separated && std::abs(e - m) > 0.05;
        if (!separated) continue;
        eigs.push_back(m);
        if (out) ++outside;
        break;
      }
    }
    const Eigen::MatrixXd f = companion_from_eigs(eigs);
    // Observation rows bounded away from zero keep the system clearly
    // detectable; near-unobservable modes push Sigma_+ beyond double range.
    Eigen::MatrixXd h(1, k);
    for (int i = 0; i < k; ++i) {
      const double mag = 0.3 + 1.7 * std::abs(g(rng)) / 3.0;
      h(0, i) = (coin(rng) == 1 ? mag : -mag);
    }

    const gfc::DareSolution sol =
        gfc::dare_stabilizing(f, Eigen::MatrixXd::Zero(k, 1), h);
    CHECK(sol.residual < 1e-10 * (1.0 + sol.sigma_plus.cwiseAbs().maxCoeff()));
    const gfc::DareReport rep =
        gfc::verify_dare_properties(f, Eigen::MatrixXd::Zero(k, 1), h, sol);
    CHECK(rep.reflection_residual < 1e-8);
    CHECK(rep.rank == outside);
    CHECK(rep.det_identity_residual < 1e-9);
  }
}
