#pragma once

#include "clusterdist/random.hpp"

#include <Eigen/Core>
#include <cstddef>

namespace clusterdist {

/// Generalized inverse Gaussian law with density proportional to
/// w^(index-1) exp(-(chi/w + psi*w)/2) on w > 0.
struct GigParams {
  double index = 1.0;
  double chi = 1.0;
  double psi = 1.0;

  /// Throws std::invalid_argument unless chi > 0, psi > 0 and index is finite.
  void validate() const;
};

/// n i.i.d. draws via the Hörmann-Leydold ratio-of-uniforms family: mode-shifted
/// ROU for index > 2 or omega > 3, plain ROU for moderate shapes, and a
/// piecewise dominating density for the non-T-concave corner.
[[nodiscard]] Eigen::VectorXd gig_sample(double index, double chi, double psi, Rng &rng,
                                         std::size_t n);
[[nodiscard]] Eigen::VectorXd gig_sample(const GigParams &p, Rng &rng, std::size_t n);

/// E[W^order] = (chi/psi)^(order/2) K_{index+order}(omega) / K_index(omega).
[[nodiscard]] double gig_moment(const GigParams &p, double order);
[[nodiscard]] inline double gig_mean(const GigParams &p) { return gig_moment(p, 1.0); }
[[nodiscard]] double gig_variance(const GigParams &p);

} // namespace clusterdist
