#include "clusterdist/distributions.hpp"

#include "clusterdist/bessel.hpp"
#include "clusterdist/gig.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace clusterdist {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require_dim(Eigen::Index expected, Eigen::Index got, const char *what) {
  if (expected != got)
    throw std::invalid_argument(
        fmt::format("{}: dimension mismatch (expected {}, got {})", what, expected, got));
}

Eigen::MatrixXd standard_normals(Rng &rng, std::size_t n, Eigen::Index d) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      z(i, j) = normal(rng);
  return z;
}

double log_det_from_cholesky(const Eigen::MatrixXd &l) {
  return 2.0 * l.diagonal().array().log().sum();
}

} // namespace

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd &spd, const char *what) {
  if (spd.rows() != spd.cols() || spd.rows() == 0)
    throw std::invalid_argument(fmt::format("{}: matrix must be square and non-empty", what));
  if (!spd.allFinite())
    throw FactorizationError(fmt::format("{}: matrix has non-finite entries", what));
  const double tol = 1e-10 * std::max(1.0, spd.cwiseAbs().maxCoeff());
  if ((spd - spd.transpose()).cwiseAbs().maxCoeff() > tol)
    throw FactorizationError(fmt::format("{}: matrix is not symmetric", what));
  Eigen::LLT<Eigen::MatrixXd> llt(spd);
  if (llt.info() != Eigen::Success)
    throw FactorizationError(fmt::format("{}: Cholesky factorization failed", what));
  Eigen::MatrixXd l = llt.matrixL();
  if (!(l.diagonal().array() > 0.0).all() || !l.allFinite())
    throw FactorizationError(fmt::format("{}: matrix is not positive definite", what));
  return l;
}

// ---------------------------------------------------------------------------
// Gaussian

Gaussian::Gaussian(GaussianParams params) : params_(std::move(params)) {
  if (params_.mean.size() < 1)
    throw std::invalid_argument("Gaussian: dimension must be at least 1");
  require_dim(params_.mean.size(), params_.covariance.rows(), "Gaussian covariance");
  chol_ = cholesky_lower(params_.covariance, "Gaussian covariance");
  log_norm_ = -0.5 * static_cast<double>(dim()) * kLog2Pi - 0.5 * log_det_from_cholesky(chol_);
}

double Gaussian::log_density(const Eigen::Ref<const Eigen::VectorXd> &x) const {
  require_dim(dim(), x.size(), "gaussian log_density");
  const Eigen::VectorXd z =
      chol_.triangularView<Eigen::Lower>().solve(x - params_.mean);
  return log_norm_ - 0.5 * z.squaredNorm();
}

Eigen::VectorXd Gaussian::log_density_rows(const Eigen::MatrixXd &x) const {
  require_dim(dim(), x.cols(), "gaussian log_density");
  Eigen::MatrixXd centered = (x.rowwise() - params_.mean.transpose()).transpose();
  chol_.triangularView<Eigen::Lower>().solveInPlace(centered);
  return (log_norm_ - 0.5 * centered.colwise().squaredNorm().array()).matrix().transpose();
}

Eigen::MatrixXd Gaussian::sample(Rng &rng, std::size_t n) const {
  Eigen::MatrixXd x = standard_normals(rng, n, dim()) * chol_.transpose();
  x.rowwise() += params_.mean.transpose();
  return x;
}

// ---------------------------------------------------------------------------
// Generalized hyperbolic

GeneralizedHyperbolic::GeneralizedHyperbolic(GHParams params) : params_(std::move(params)) {
  const auto d = params_.location.size();
  if (d < 1)
    throw std::invalid_argument("GeneralizedHyperbolic: dimension must be at least 1");
  require_dim(d, params_.scale.rows(), "GeneralizedHyperbolic scale");
  require_dim(d, params_.skewness.size(), "GeneralizedHyperbolic skewness");
  if (!(params_.concentration > 0.0) || !std::isfinite(params_.concentration))
    throw std::invalid_argument("GeneralizedHyperbolic: concentration must be positive");
  if (!std::isfinite(params_.index))
    throw std::invalid_argument("GeneralizedHyperbolic: index must be finite");
  if (!params_.location.allFinite() || !params_.skewness.allFinite())
    throw std::invalid_argument("GeneralizedHyperbolic: non-finite location or skewness");

  chol_ = cholesky_lower(params_.scale, "GeneralizedHyperbolic scale");
  whitened_skew_ = chol_.triangularView<Eigen::Lower>().solve(params_.skewness);
  skew_quad_ = whitened_skew_.squaredNorm();
  const double omega = params_.concentration;
  log_const_ = -0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * log_det_from_cholesky(chol_) -
               log_bessel_k(params_.index, omega);

  const GigParams mixing{params_.index, omega, omega};
  w_mean_ = gig_mean(mixing);
  w_var_ = gig_variance(mixing);
}

Eigen::VectorXd GeneralizedHyperbolic::mean() const {
  return params_.location + w_mean_ * params_.skewness;
}

Eigen::MatrixXd GeneralizedHyperbolic::covariance() const {
  return w_mean_ * params_.scale + w_var_ * params_.skewness * params_.skewness.transpose();
}

double GeneralizedHyperbolic::log_density(const Eigen::Ref<const Eigen::VectorXd> &x) const {
  require_dim(dim(), x.size(), "gh log_density");
  const Eigen::VectorXd z =
      chol_.triangularView<Eigen::Lower>().solve(x - params_.location);
  const double q = z.squaredNorm();
  const double omega = params_.concentration;
  const double v = params_.index - 0.5 * static_cast<double>(dim());
  const double a = omega + q;
  const double b = omega + skew_quad_;
  return log_const_ + z.dot(whitened_skew_) + 0.5 * v * (std::log(a) - std::log(b)) +
         log_bessel_k(v, std::sqrt(a * b));
}

Eigen::VectorXd GeneralizedHyperbolic::log_density_rows(const Eigen::MatrixXd &x) const {
  require_dim(dim(), x.cols(), "gh log_density");
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out[i] = log_density(x.row(i).transpose());
  return out;
}

Eigen::MatrixXd GeneralizedHyperbolic::sample(Rng &rng, std::size_t n) const {
  const double omega = params_.concentration;
  const Eigen::VectorXd w = gig_sample(params_.index, omega, omega, rng, n);
  Eigen::MatrixXd x = standard_normals(rng, n, dim()) * chol_.transpose();
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    x.row(i) = params_.location.transpose() + w[i] * params_.skewness.transpose() +
               std::sqrt(w[i]) * x.row(i);
  return x;
}

// ---------------------------------------------------------------------------
// ClusterModel dispatch

Eigen::Index dimension(const ClusterModel &m) {
  return std::visit([](const auto &c) { return c.dim(); }, m);
}

double log_density(const ClusterModel &m, const Eigen::Ref<const Eigen::VectorXd> &x) {
  return std::visit([&](const auto &c) { return c.log_density(x); }, m);
}

Eigen::VectorXd log_density_rows(const ClusterModel &m, const Eigen::MatrixXd &x) {
  return std::visit([&](const auto &c) { return c.log_density_rows(x); }, m);
}

Eigen::MatrixXd sample(const ClusterModel &m, Rng &rng, std::size_t n) {
  return std::visit([&](const auto &c) { return c.sample(rng, n); }, m);
}

Eigen::VectorXd model_mean(const ClusterModel &m) {
  return std::visit([](const auto &c) { return c.mean(); }, m);
}

Eigen::MatrixXd model_covariance(const ClusterModel &m) {
  return std::visit([](const auto &c) { return c.covariance(); }, m);
}

bool is_gaussian(const ClusterModel &m) noexcept {
  return std::holds_alternative<Gaussian>(m);
}

double gaussian_log_density(const GaussianParams &p, const Eigen::Ref<const Eigen::VectorXd> &x) {
  return Gaussian(p).log_density(x);
}

Eigen::MatrixXd gaussian_sample(const GaussianParams &p, Rng &rng, std::size_t n) {
  if (n < 1)
    throw std::invalid_argument("gaussian_sample: n must be at least 1");
  return Gaussian(p).sample(rng, n);
}

double gh_log_density(const GHParams &p, const Eigen::Ref<const Eigen::VectorXd> &x) {
  return GeneralizedHyperbolic(p).log_density(x);
}

Eigen::MatrixXd gh_sample(const GHParams &p, Rng &rng, std::size_t n) {
  if (n < 1)
    throw std::invalid_argument("gh_sample: n must be at least 1");
  return GeneralizedHyperbolic(p).sample(rng, n);
}

} // namespace clusterdist
