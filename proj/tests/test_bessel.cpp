#include "clusterdist/bessel.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <doctest.h>
#include <numbers>
#include <stdexcept>

using namespace clusterdist;

TEST_SUITE("bessel") {

TEST_CASE("half-integer orders have closed forms") {
  for (double x : {1e-3, 0.1, 1.0, 2.5, 10.0, 80.0}) {
    const double half = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    CHECK(bessel_k(0.5, x) == doctest::Approx(half).epsilon(1e-13));
    CHECK(bessel_k(1.5, x) == doctest::Approx(half * (1.0 + 1.0 / x)).epsilon(1e-13));
    CHECK(bessel_k(2.5, x) ==
          doctest::Approx(half * (1.0 + 3.0 / x + 3.0 / (x * x))).epsilon(1e-13));
  }
  CHECK(bessel_k(0.5, 1.0) == doctest::Approx(0.4610685).epsilon(1e-6));
}

TEST_CASE("order symmetry") {
  for (double nu : {0.3, 1.0, 2.7, 11.5, 40.0})
    for (double x : {1e-4, 0.7, 3.0, 50.0})
      CHECK(log_bessel_k(-nu, x) == log_bessel_k(nu, x));
}

TEST_CASE("three-term recurrence") {
  for (double nu : {-7.3, -1.0, 0.0, 0.25, 1.0, 4.4, 19.0})
    for (double x : {0.05, 0.9, 2.0, 7.5, 120.0}) {
      const double lhs = bessel_k(nu + 1.0, x);
      const double rhs = bessel_k(nu - 1.0, x) + 2.0 * nu / x * bessel_k(nu, x);
      CHECK(std::abs(lhs - rhs) <= 1e-8 * std::abs(lhs));
    }
}

TEST_CASE("agrees with an independent implementation over the working range") {
  double worst = 0.0;
  int compared = 0;
  for (double nu = -50.0; nu <= 50.0; nu += 1.37) {
    for (double lx = -6.0; lx <= std::log10(700.0); lx += 0.173) {
      const double x = std::pow(10.0, lx);
      double ref = 0.0;
      try {
        ref = boost::math::cyl_bessel_k(nu, x);
      } catch (const std::exception &) {
        continue; // overflow in the reference
      }
      if (!std::isfinite(ref) || ref <= 0.0 || ref < 1e-300)
        continue;
      const double rel = std::abs(std::expm1(log_bessel_k(nu, x) - std::log(ref)));
      worst = std::max(worst, rel);
      ++compared;
    }
  }
  CHECK(compared > 2000);
  CHECK(worst <= 1e-10);
}

TEST_CASE("log scale stays finite where the value overflows") {
  const double v = log_bessel_k(50.0, 1e-6);
  CHECK(std::isfinite(v));
  CHECK(v > 700.0);
  CHECK(std::isfinite(log_bessel_k(0.0, 700.0)));
}

TEST_CASE("non-positive arguments are rejected") {
  CHECK_THROWS_AS((void)log_bessel_k(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS((void)log_bessel_k(1.0, -2.0), std::domain_error);
  CHECK_THROWS_AS((void)log_bessel_k(1.0, std::nan("")), std::domain_error);
}

TEST_CASE("ratio helper") {
  const double r = bessel_k_ratio(1.0, 1.0, 1.0);
  CHECK(r == doctest::Approx(boost::math::cyl_bessel_k(2.0, 1.0) /
                             boost::math::cyl_bessel_k(1.0, 1.0))
                 .epsilon(1e-12));
}
}
