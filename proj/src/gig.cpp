#include "clusterdist/gig.hpp"

#include "clusterdist/bessel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clusterdist {
namespace {

// Mode of the standardized density x^(lambda-1) exp(-omega/2 (x + 1/x)).
double standard_mode(double lambda, double omega) {
  if (lambda >= 1.0)
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) /
           omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

double rou_no_shift(double lambda, double omega, Rng &rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = standard_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym =
      ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * uniform_open(rng);
    const double v = uniform_open(rng);
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc)
      return x;
  }
}

double rou_shift(double lambda, double omega, Rng &rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = standard_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Extremes of (x - xm) sqrt(f(x)) are the real roots of a cubic.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);
  for (;;) {
    const double u = uminus + uniform_open(rng) * (uplus - uminus);
    const double v = uniform_open(rng);
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc)
      return x;
  }
}

// 0 <= lambda < 1 with small omega: the density is not T_{-1/2}-concave, so
// sample from a three-piece hat (constant, power, exponential).
double piecewise_hat(double lambda, double omega, Rng &rng) {
  const double lm1 = lambda - 1.0;
  const double xm = standard_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp(lm1 * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  const double a0 = k0 * x0;
  double k1 = 0.0;
  double a1 = 0.0;
  double k2 = 0.0;
  double a2 = 0.0;
  if (x0 >= 2.0 / omega) {
    k2 = std::pow(x0, lm1);
    a2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    a1 = lambda == 0.0
             ? k1 * std::log(2.0 / (omega * omega))
             : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lm1);
    a2 = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = a0 + a1 + a2;
  for (;;) {
    double v = total * uniform_open(rng);
    double x = 0.0;
    double hx = 0.0;
    if (v <= a0) {
      x = x0 * v / a0;
      hx = k0;
    } else if ((v -= a0) <= a1) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
        hx = k1 * std::pow(x, lm1);
      }
    } else {
      v -= a1;
      const double lo = x0 > 2.0 / omega ? x0 : 2.0 / omega;
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = uniform_open(rng) * hx;
    if (std::log(u) <= lm1 * std::log(x) - omega / 2.0 * (x + 1.0 / x))
      return x;
  }
}

} // namespace

void GigParams::validate() const {
  if (!(chi > 0.0) || !(psi > 0.0) || !std::isfinite(chi) || !std::isfinite(psi))
    throw std::invalid_argument("GIG: chi and psi must be positive and finite");
  if (!std::isfinite(index))
    throw std::invalid_argument("GIG: index must be finite");
}

Eigen::VectorXd gig_sample(const GigParams &p, Rng &rng, std::size_t n) {
  p.validate();
  // W = alpha * Y with Y ~ GIG(lambda, omega, omega); negative index via 1/Y.
  const double omega = std::sqrt(p.chi * p.psi);
  const double alpha = std::sqrt(p.chi / p.psi);
  const double lambda = std::abs(p.index);
  const bool invert = p.index < 0.0;

  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double y = 0.0;
    if (lambda > 2.0 || omega > 3.0)
      y = rou_shift(lambda, omega, rng);
    else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2)
      y = rou_no_shift(lambda, omega, rng);
    else
      y = piecewise_hat(lambda, omega, rng);
    out[i] = invert ? alpha / y : alpha * y;
  }
  return out;
}

Eigen::VectorXd gig_sample(double index, double chi, double psi, Rng &rng, std::size_t n) {
  return gig_sample(GigParams{index, chi, psi}, rng, n);
}

double gig_moment(const GigParams &p, double order) {
  p.validate();
  const double omega = std::sqrt(p.chi * p.psi);
  return std::exp(0.5 * order * std::log(p.chi / p.psi) +
                  log_bessel_k(p.index + order, omega) - log_bessel_k(p.index, omega));
}

double gig_variance(const GigParams &p) {
  const double m1 = gig_moment(p, 1.0);
  return gig_moment(p, 2.0) - m1 * m1;
}

} // namespace clusterdist
