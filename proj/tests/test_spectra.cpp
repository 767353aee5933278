#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gfc/spectrum.hpp"
#include "gfc/waterfill.hpp"

using gfc::RationalSpectrum;

namespace {
constexpr double kPi = std::numbers::pi;

double quadrature_autocov(const RationalSpectrum& s, int lag, int grid = 16384) {
  double acc = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double theta = -kPi + 2.0 * kPi * i / grid;
    acc += s.eval(theta) * std::cos(lag * theta);
  }
  return acc / grid;
}
}  // namespace

TEST_CASE("psd evaluation") {
  const double N = 2.5;
  const RationalSpectrum white = RationalSpectrum::white(N);
  CHECK(white.eval(0.0) == doctest::Approx(N).epsilon(1e-14));
  CHECK(white.eval(1.3) == doctest::Approx(N).epsilon(1e-14));

  // |1 + e^{i theta}|^2 endpoints, via the unchecked helper (root on the circle).
  CHECK(gfc::psd_value({1.0}, {}, 1.0, 0.0) == doctest::Approx(4.0));
  CHECK(gfc::psd_value({1.0}, {}, 1.0, kPi) == doctest::Approx(0.0).epsilon(1e-12));

  const RationalSpectrum ar = RationalSpectrum::arma1(0.0, 0.5);
  CHECK(ar.eval(0.0) == doctest::Approx(1.0 / 2.25).epsilon(1e-12));

  // Evenness in theta.
  const RationalSpectrum mixed({0.3, 0.1}, {-0.2, 0.05});
  for (double t : {0.3, 1.1, 2.9}) CHECK(mixed.eval(t) == doctest::Approx(mixed.eval(-t)));
}

TEST_CASE("construction invariants") {
  CHECK_THROWS(RationalSpectrum({1.0}, {}));         // root on the circle
  CHECK_THROWS(RationalSpectrum({}, {1.2}));         // unstable denominator
  CHECK_THROWS(RationalSpectrum({0.5}, {0.5}));      // common root
  CHECK_THROWS(RationalSpectrum({}, {}, -1.0));      // bad scale
  // Trailing zeros trimmed: this is white, order 0.
  CHECK(RationalSpectrum({0.0, 0.0}, {0.0}).is_white());
}

TEST_CASE("state-space realization") {
  const RationalSpectrum arma = RationalSpectrum::arma1(0.3, -0.4);
  const gfc::StateSpace ss = arma.to_state_space();
  CHECK(ss.F(0, 0) == doctest::Approx(0.4));
  CHECK(ss.G(0, 0) == doctest::Approx(1.0));
  CHECK(ss.H(0, 0) == doctest::Approx(0.7));

  // H vanishes when P = Q.
  const gfc::StateSpace w = RationalSpectrum({}, {}).to_state_space();
  CHECK(w.order() == 0);

  const RationalSpectrum two({0.3, 0.1}, {-0.2, 0.05});
  const gfc::StateSpace ss2 = two.to_state_space();
  CHECK(ss2.F(0, 0) == doctest::Approx(0.2));
  CHECK(ss2.F(0, 1) == doctest::Approx(-0.05));
  CHECK(ss2.F(1, 0) == doctest::Approx(1.0));
  CHECK(ss2.H(0, 0) == doctest::Approx(0.5));
  CHECK(ss2.H(0, 1) == doctest::Approx(0.05));

  // Transfer-function identity det(I - z(F-GH))/det(I - zF) = P(z)/Q(z).
  for (double theta : {0.0, 0.7, 2.1}) {
    const std::complex<double> z = std::polar(1.0, theta);
    const Eigen::MatrixXcd zf =
        Eigen::MatrixXcd::Identity(2, 2) - z * ss2.F.cast<std::complex<double>>();
    const Eigen::MatrixXcd zfgh =
        Eigen::MatrixXcd::Identity(2, 2) -
        z * (ss2.F - ss2.G * ss2.H).cast<std::complex<double>>();
    const std::complex<double> hz = zfgh.determinant() / zf.determinant();
    const std::complex<double> ref =
        gfc::eval(two.p(), z) / gfc::eval(two.q(), z);
    CHECK(std::abs(hz - ref) < 1e-12);
  }
}

TEST_CASE("toeplitz covariance") {
  const double N = 3.0;
  const Eigen::MatrixXd kw = RationalSpectrum::white(N).toeplitz_covariance(4);
  CHECK((kw - N * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);

  // MA(1): R(0) = 1 + a^2, R(1) = a.
  const double a = 0.4;
  const Eigen::MatrixXd kma = RationalSpectrum({a}, {}).toeplitz_covariance(3);
  CHECK(kma(0, 0) == doctest::Approx(1.0 + a * a).epsilon(1e-12));
  CHECK(kma(0, 1) == doctest::Approx(a).epsilon(1e-12));
  CHECK(kma(0, 2) == doctest::Approx(0.0).epsilon(1e-12));

  // AR(1): R(m) = (-b)^{|m|}/(1 - b^2), cross-checked against quadrature.
  const double b = 0.5;
  const RationalSpectrum ar({}, {b});
  const Eigen::MatrixXd kar = ar.toeplitz_covariance(4);
  for (int m = 0; m < 4; ++m) {
    const double expect = std::pow(-b, m) / (1.0 - b * b);
    CHECK(kar(0, m) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(kar(0, m) == doctest::Approx(quadrature_autocov(ar, m)).epsilon(1e-9));
  }

  // Leading principal submatrix nesting is exact.
  const RationalSpectrum mixed({0.3, 0.1}, {-0.2, 0.05});
  const Eigen::MatrixXd k5 = mixed.toeplitz_covariance(5);
  const Eigen::MatrixXd k4 = mixed.toeplitz_covariance(4);
  CHECK((k5.topLeftCorner(4, 4) - k4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("entropy rate") {
  const double two_pi_e = 2.0 * kPi * std::numbers::e;
  CHECK(RationalSpectrum::white(1.0).entropy_rate() ==
        doctest::Approx(0.5 * std::log(two_pi_e)).epsilon(1e-13));
  CHECK(RationalSpectrum::white(4.0).entropy_rate() ==
        doctest::Approx(0.5 * std::log(two_pi_e * 4.0)).epsilon(1e-13));
  // Stable monic ARMA has canonical factor with H_Z(0) = 1: Jensen integral 0.
  CHECK(RationalSpectrum::arma1(0.3, -0.5).entropy_rate() ==
        doctest::Approx(0.5 * std::log(two_pi_e)).epsilon(1e-13));

  // Quadrature and Jensen agree to 1e-10 (the accessor enforces it).
  for (double beta : {-0.7, 0.2, 0.9}) {
    const RationalSpectrum s({0.4}, {beta});
    CHECK(std::abs(s.entropy_rate_quadrature() - s.entropy_rate_jensen()) < 1e-10);
  }
}

TEST_CASE("szego convergence") {
  const std::vector<RationalSpectrum> specs = {
      RationalSpectrum({}, {0.5}),
      RationalSpectrum({0.5}, {}),
      RationalSpectrum({0.3, 0.1}, {-0.2, 0.05}),
  };
  for (const auto& s : specs) {
    REQUIRE(s.min_on_grid() >= 0.1);
    const double target = 2.0 * (s.entropy_rate() -
                                 0.5 * std::log(2.0 * kPi * std::numbers::e));
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {32, 64, 128, 256, 512}) {
      const Eigen::MatrixXd k = s.toeplitz_covariance(n);
      const double val = std::log(k.llt().matrixL().determinant()) * 2.0 / n;
      CHECK(val <= prev + 1e-12);  // nonincreasing in n
      prev = val;
      if (n == 512) CHECK(std::abs(val - target) < 1e-2);
    }
  }
}
