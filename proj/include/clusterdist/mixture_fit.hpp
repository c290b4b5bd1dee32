#pragma once

#include "clusterdist/distributions.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace clusterdist {

struct MixtureComponent {
  double weight = 1.0;
  GaussianParams params;
};

/// K-component multivariate normal mixture with full covariances.
struct GaussianMixture {
  std::vector<MixtureComponent> components;

  [[nodiscard]] std::size_t k() const noexcept { return components.size(); }
  [[nodiscard]] Eigen::Index dim() const;
  /// Weights in (0, 1] summing to 1 (within 1e-9) and SPD covariances.
  void validate() const;
};

struct EmConfig {
  double tol = 1e-8;          // relative log-likelihood change
  std::size_t max_iter = 500;
  std::size_t n_init = 10;
  std::uint64_t seed = 0;
  double ridge_factor = 1e-6; // ridge = ridge_factor * tr(S) / d after a collapse
};

struct FitResult {
  GaussianMixture model;
  double log_likelihood = 0.0;
  double bic = 0.0;
  double aic = 0.0;
  double icl = 0.0;
  std::vector<int> assignments;     // 1-based MAP labels
  Eigen::MatrixXd responsibilities; // N x K
  std::size_t iterations = 0;
  bool converged = false;
  bool regularized = false;
  std::vector<double> log_likelihood_trace;
};

/// All restarts collapsed even with the ridge.
class DegenerateFitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// EM for a K-component full-covariance normal mixture: k-means++ seeding on
/// standardized data, a hard-assignment M-step, then EM; best of n_init runs.
[[nodiscard]] FitResult fit_gmm(const Eigen::MatrixXd &data, std::size_t k,
                                const EmConfig &config = {});

/// EM from a given starting mixture (no restarts).
[[nodiscard]] FitResult fit_gmm_from(const Eigen::MatrixXd &data, GaussianMixture initial,
                                     const EmConfig &config = {});

struct InformationCriteria {
  double bic = 0.0;
  double aic = 0.0;
  double icl = 0.0;
};

/// Free parameters of a full-covariance mixture: K-1 + K d + K d(d+1)/2.
[[nodiscard]] std::size_t free_parameters(std::size_t k, Eigen::Index d);

/// Smaller is better for all three: BIC = -2 L + m ln N, AIC = -2 L + 2m,
/// ICL = BIC - 2 sum_i ln r_{i, MAP(i)}.
[[nodiscard]] InformationCriteria information_criteria(const FitResult &fr, std::size_t n);

struct MapAssignment {
  std::vector<int> labels; // 1-based, ties to the lowest component index
  Eigen::MatrixXd responsibilities;
  double log_likelihood = 0.0;
};

[[nodiscard]] MapAssignment map_assign(const GaussianMixture &model, const Eigen::MatrixXd &data);

} // namespace clusterdist
