#include "clusterdist/bessel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace clusterdist {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// Taylor coefficients of 1/Gamma(z) = sum_k c[k-1] z^k (Abramowitz & Stegun 6.1.34).
constexpr std::array<double, 26> kRecipGamma = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
};

struct TemmeGammas {
  double gam1;  // (1/G(1-mu) - 1/G(1+mu)) / (2 mu)
  double gam2;  // (1/G(1-mu) + 1/G(1+mu)) / 2
  double gampl; // 1/G(1+mu)
  double gammi; // 1/G(1-mu)
};

// |mu| <= 1/2. 1/G(1+mu) = sum_k c[k] mu^k, so the odd and even parts give
// gam1 and gam2 without the cancellation of the direct difference.
TemmeGammas temme_gammas(double mu) {
  const double mu2 = mu * mu;
  double gam1 = 0.0;
  double gam2 = 0.0;
  double pw = 1.0;
  for (std::size_t k = 0; k + 1 < kRecipGamma.size(); k += 2) {
    gam2 += kRecipGamma[k] * pw;
    gam1 -= kRecipGamma[k + 1] * pw;
    pw *= mu2;
  }
  return {gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1};
}

struct LogPair {
  // K_mu(x) = k0 * exp(log_scale), K_{mu+1}(x) = k1 * exp(log_scale)
  double k0;
  double k1;
  double log_scale;
};

LogPair temme_series(double mu, double x) {
  const double x2 = 0.5 * x;
  const double pimu = std::numbers::pi * mu;
  const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
  const auto g = temme_gammas(mu);
  double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / g.gampl;
  double q = 0.5 / (e * g.gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIter; ++i) {
    ff = (i * ff + p + q) / (i * i - mu2);
    c *= d / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    sum1 += c * (p - i * ff);
    if (std::abs(del) < std::abs(sum) * kEps)
      break;
  }
  return {sum, sum1 * 2.0 / x, 0.0};
}

LogPair steed_fraction(double mu, double x) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps)
      break;
  }
  h = a1 * h;
  // exp(x)-scaled values; the exponential goes into log_scale.
  const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  const double k1 = k0 * (mu + x + 0.5 - h) / x;
  return {k0, k1, -x};
}

} // namespace

double log_bessel_k(double order, double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("log_bessel_k: argument must be positive and finite, got " +
                            std::to_string(x));
  if (!std::isfinite(order))
    throw std::domain_error("log_bessel_k: order must be finite");
  const double nu = std::abs(order);
  const int steps = static_cast<int>(nu + 0.5);
  const double mu = nu - steps;

  LogPair pair = x < 2.0 ? temme_series(mu, x) : steed_fraction(mu, x);
  double k0 = pair.k0;
  double k1 = pair.k1;
  double log_scale = pair.log_scale;
  const double two_over_x = 2.0 / x;
  for (int i = 1; i <= steps; ++i) {
    const double next = (mu + i) * two_over_x * k1 + k0;
    k0 = k1;
    k1 = next;
    if (k1 > 1e250) {
      log_scale += std::log(k1);
      k0 /= k1;
      k1 = 1.0;
    }
  }
  return std::log(k0) + log_scale;
}

double bessel_k(double order, double x) { return std::exp(log_bessel_k(order, x)); }

double bessel_k_ratio(double order, double shift, double x) {
  return std::exp(log_bessel_k(order + shift, x) - log_bessel_k(order, x));
}

} // namespace clusterdist
