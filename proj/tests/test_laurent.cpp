#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "gfc/laurent.hpp"
#include "gfc/spectrum.hpp"

using gfc::LaurentSeries;

TEST_CASE("laurent coefficients") {
  // f(z) = z on the circle.
  const LaurentSeries s =
      gfc::laurent_coeffs([](double t) { return std::polar(1.0, t); }, 4);
  CHECK(s.at(1) == doctest::Approx(1.0).epsilon(1e-13));
  for (int j : {-4, -1, 0, 2, 3}) CHECK(std::abs(s.at(j)) < 1e-13);

  // Geometric series 1/(1 - a z) -> c_j = a^j for j >= 0.
  const double a = 0.6;
  const LaurentSeries g = gfc::laurent_coeffs(
      [a](double t) { return 1.0 / (1.0 - a * std::polar(1.0, t)); }, 12);
  for (int j = 0; j <= 12; ++j)
    CHECK(g.at(j) == doctest::Approx(std::pow(a, j)).epsilon(1e-10));
  for (int j = 1; j <= 12; ++j) CHECK(std::abs(g.at(-j)) < 1e-10);

  // MA(1) spectrum band.
  const double al = 0.45;
  const gfc::RationalSpectrum ma({al}, {});
  const LaurentSeries b = gfc::laurent_coeffs(
      [&ma](double t) { return std::complex<double>(ma.eval(t), 0.0); }, 3);
  CHECK(b.at(0) == doctest::Approx(1.0 + al * al).epsilon(1e-12));
  CHECK(b.at(1) == doctest::Approx(al).epsilon(1e-12));
  CHECK(b.at(-1) == doctest::Approx(al).epsilon(1e-12));
  CHECK(std::abs(b.at(2)) < 1e-12);
}

TEST_CASE("laurent round trip") {
  // Reconstruction from coefficients matches the source on the grid.
  const gfc::RationalSpectrum s({0.3, 0.1}, {-0.2, 0.05});
  const int m = 40;
  const LaurentSeries ls = gfc::laurent_coeffs(
      [&s](double t) { return std::complex<double>(s.eval(t), 0.0); }, m);
  for (int i = 0; i < 64; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / 64;
    std::complex<double> acc = 0.0;
    for (int j = -m; j <= m; ++j) acc += ls.at(j) * std::polar(1.0, j * theta);
    CHECK(std::abs(acc - s.eval(theta)) < 1e-10);
  }
}

TEST_CASE("pole on circle rejected") {
  CHECK_THROWS(gfc::laurent_coeffs_rational({1.0}, {1.0, -1.0}, 4, 64));
}

TEST_CASE("anticausality predicate") {
  LaurentSeries s;
  s.truncation_order = 2;
  s.coeffs = {0.5, 1.0, 2.0, 0.0, 0.0};  // c_{-2}, c_{-1}, c_0, c_1, c_2
  CHECK(gfc::is_anticausal(s, 1e-9).anticausal);

  LaurentSeries z;
  z.truncation_order = 1;
  z.coeffs = {0.0, 0.0, 1.0};  // f(z) = z
  const auto rep = gfc::is_anticausal(z, 1e-9);
  CHECK_FALSE(rep.anticausal);
  CHECK(rep.residual == doctest::Approx(1.0));
}

TEST_CASE("canonical factorization") {
  const double a = 0.45;
  const gfc::SpectralFactor f1 = gfc::factor_laurent_polynomial({1.0 + a * a, a});
  REQUIRE(f1.r.size() == 2);
  CHECK(f1.r[1] == doctest::Approx(a).epsilon(1e-10));
  CHECK(f1.sigma2 == doctest::Approx(1.0).epsilon(1e-10));

  const gfc::SpectralFactor f2 = gfc::factor_laurent_polynomial({2.0});
  CHECK(f2.r.size() == 1);
  CHECK(f2.sigma2 == doctest::Approx(2.0));

  // c_0 = 2.5, c_{+-1} = 1 -> R = 1 + 0.5 z, sigma2 = 2.
  const gfc::SpectralFactor f3 = gfc::factor_laurent_polynomial({2.5, 1.0});
  REQUIRE(f3.r.size() == 2);
  CHECK(f3.r[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(f3.sigma2 == doctest::Approx(2.0).epsilon(1e-10));

  // Negative symbol rejected; root on the circle rejected.
  CHECK_THROWS(gfc::factor_laurent_polynomial({1.0, 1.0}));   // 1 + 2cos dips negative
  CHECK_THROWS(gfc::factor_laurent_polynomial({2.0, 1.0}));   // zero at theta = pi
}

TEST_CASE("blaschke modulus constancy") {
  const gfc::BlaschkeProduct b = gfc::make_blaschke({0.5, -0.3}, {1, 2});
  CHECK(b.modulus_constancy_residual() < 1e-10);
  CHECK(b.modulus_on_circle() == doctest::Approx(1.0 / (0.5 * 0.3)));
  CHECK_THROWS(gfc::make_blaschke({1.5}, {1}));
  CHECK_THROWS(gfc::make_blaschke({0.5}, {0}));
}
