#pragma once

#include "clusterdist/distributions.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>

namespace clusterdist {

enum class Measure { MD, BA, HD, JSD, JSDe, WD, AB, SI };

[[nodiscard]] std::string_view to_string(Measure m) noexcept;

/// Monte Carlo settings shared by the density-based estimators.
struct EstimatorSettings {
  std::size_t mc_samples = 1000;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;

  void validate() const;
};

struct DivergenceValue {
  double value = 0.0;
  double std_error = 0.0; // spread of replicate estimates / sqrt(replicates); 0 for one replicate
  Measure measure = Measure::HD;
  std::size_t excluded = 0; // non-finite log-ratio terms dropped (plug-in JSD only)
};

/// Mahalanobis distance between the means under the weighted pooled covariance.
[[nodiscard]] DivergenceValue mahalanobis(const GaussianParams &f, const GaussianParams &g,
                                          std::pair<double, double> weights = {0.5, 0.5});

/// Bhattacharyya affinity by sampling U from the equal mixture (f+g)/2 and
/// averaging 1/cosh(log(f/g)/2) = 2 sqrt(fg)/(f+g). Each term lies in [0,1].
[[nodiscard]] DivergenceValue bhattacharyya_mc(const ClusterModel &f, const ClusterModel &g,
                                               const EstimatorSettings &s);

/// sqrt(1 - BA) per replicate.
[[nodiscard]] DivergenceValue hellinger(const ClusterModel &f, const ClusterModel &g,
                                        const EstimatorSettings &s);

/// Plug-in Jensen-Shannon distance (log base 2): X_i ~ f, Y_i ~ g, and
///   JS = 1/2 mean log2(2f(X)/(f+g)(X)) + 1/2 mean log2(2g(Y)/(f+g)(Y)).
/// The estimate of JS can come out negative; the reported distance is then
/// the signed root -sqrt(|JS|) so the sign survives.
[[nodiscard]] DivergenceValue jsd_plugin(const ClusterModel &f, const ClusterModel &g,
                                         const EstimatorSettings &s);

/// Extended Jensen-Shannon distance from mixture draws. With a = 2f/(f+g) and
/// b = 2 - a, every term a log2 a + b log2 b is in [0, 2], so the root is real
/// and the value lies in [0, 1].
[[nodiscard]] DivergenceValue jsd_extended(const ClusterModel &f, const ClusterModel &g,
                                           const EstimatorSettings &s);

/// 2 sqrt(fg)/(f+g) from log densities.
[[nodiscard]] double affinity_term(double log_f, double log_g) noexcept;
/// a log2 a + b log2 b with a = 2f/(f+g), b = 2g/(f+g).
[[nodiscard]] double extended_js_term(double log_f, double log_g) noexcept;
/// log2(2 h / (h + k)) for the density h that generated the point.
[[nodiscard]] double plugin_js_term(double log_self, double log_other) noexcept;

/// N draws from (f+g)/2: T_i ~ Bernoulli(1/2) picks the component for each row.
[[nodiscard]] Eigen::MatrixXd sample_equal_mixture(const ClusterModel &f, const ClusterModel &g,
                                                   Rng &rng, std::size_t n);

} // namespace clusterdist
