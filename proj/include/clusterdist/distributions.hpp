#pragma once

#include "clusterdist/random.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <stdexcept>
#include <variant>

namespace clusterdist {

/// Raised when a matrix that must be symmetric positive definite is not.
class FactorizationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Lower Cholesky factor of an SPD matrix. Never regularizes.
[[nodiscard]] Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd &spd, const char *what);

struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Generalized hyperbolic parameters in the normal mean-variance mixture form
///   X = location + W * skewness + sqrt(W) * scale^{1/2} Z,
///   W ~ GIG(index, chi = concentration, psi = concentration).
struct GHParams {
  Eigen::VectorXd location;
  Eigen::MatrixXd scale;
  Eigen::VectorXd skewness;
  double index = 1.0;
  double concentration = 1.0;
};

/// Multivariate normal with a cached Cholesky factor.
class Gaussian {
public:
  explicit Gaussian(GaussianParams params);

  [[nodiscard]] const GaussianParams &params() const noexcept { return params_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return params_.mean.size(); }
  [[nodiscard]] const Eigen::MatrixXd &cholesky() const noexcept { return chol_; }
  [[nodiscard]] Eigen::VectorXd mean() const { return params_.mean; }
  [[nodiscard]] Eigen::MatrixXd covariance() const { return params_.covariance; }

  [[nodiscard]] double log_density(const Eigen::Ref<const Eigen::VectorXd> &x) const;
  /// Row-wise log densities of an N x d matrix.
  [[nodiscard]] Eigen::VectorXd log_density_rows(const Eigen::MatrixXd &x) const;
  [[nodiscard]] Eigen::MatrixXd sample(Rng &rng, std::size_t n) const;

private:
  GaussianParams params_;
  Eigen::MatrixXd chol_;
  double log_norm_ = 0.0;
};

/// Multivariate generalized hyperbolic law. The density is
///   exp((x-mu)' S^-1 delta) (A/B)^{v/2} K_v(sqrt(A B)) / ((2pi)^{d/2} |S|^{1/2} K_index(omega))
/// with v = index - d/2, A = omega + q(x), B = omega + delta' S^-1 delta.
class GeneralizedHyperbolic {
public:
  explicit GeneralizedHyperbolic(GHParams params);

  [[nodiscard]] const GHParams &params() const noexcept { return params_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return params_.location.size(); }
  [[nodiscard]] double mixing_mean() const noexcept { return w_mean_; }
  [[nodiscard]] double mixing_variance() const noexcept { return w_var_; }
  [[nodiscard]] Eigen::VectorXd mean() const;
  [[nodiscard]] Eigen::MatrixXd covariance() const;

  [[nodiscard]] double log_density(const Eigen::Ref<const Eigen::VectorXd> &x) const;
  [[nodiscard]] Eigen::VectorXd log_density_rows(const Eigen::MatrixXd &x) const;
  [[nodiscard]] Eigen::MatrixXd sample(Rng &rng, std::size_t n) const;

private:
  GHParams params_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd whitened_skew_; // L^-1 delta
  double skew_quad_ = 0.0;        // delta' S^-1 delta
  double log_const_ = 0.0;
  double w_mean_ = 0.0;
  double w_var_ = 0.0;
};

using ClusterModel = std::variant<Gaussian, GeneralizedHyperbolic>;

[[nodiscard]] Eigen::Index dimension(const ClusterModel &m);
[[nodiscard]] double log_density(const ClusterModel &m, const Eigen::Ref<const Eigen::VectorXd> &x);
[[nodiscard]] Eigen::VectorXd log_density_rows(const ClusterModel &m, const Eigen::MatrixXd &x);
[[nodiscard]] Eigen::MatrixXd sample(const ClusterModel &m, Rng &rng, std::size_t n);
[[nodiscard]] Eigen::VectorXd model_mean(const ClusterModel &m);
[[nodiscard]] Eigen::MatrixXd model_covariance(const ClusterModel &m);
[[nodiscard]] bool is_gaussian(const ClusterModel &m) noexcept;

// Parameter-level entry points.
[[nodiscard]] double gaussian_log_density(const GaussianParams &p,
                                          const Eigen::Ref<const Eigen::VectorXd> &x);
[[nodiscard]] Eigen::MatrixXd gaussian_sample(const GaussianParams &p, Rng &rng, std::size_t n);
[[nodiscard]] double gh_log_density(const GHParams &p, const Eigen::Ref<const Eigen::VectorXd> &x);
[[nodiscard]] Eigen::MatrixXd gh_sample(const GHParams &p, Rng &rng, std::size_t n);

} // namespace clusterdist
