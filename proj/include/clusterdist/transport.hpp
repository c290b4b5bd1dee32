#pragma once

#include "clusterdist/distributions.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace clusterdist {

/// Discrete measure: one point per row with a nonnegative mass.
struct PointCloud {
  Eigen::MatrixXd points;
  Eigen::VectorXd masses;

  /// Every point gets mass 1/N.
  [[nodiscard]] static PointCloud uniform(Eigen::MatrixXd points);
  /// Throws std::invalid_argument on empty clouds, negative masses or a mass
  /// sum further than 1e-9 from 1.
  void validate() const;
  [[nodiscard]] bool has_uniform_masses() const;
};

struct Coupling {
  Eigen::Index source = 0;
  Eigen::Index target = 0;
  double mass = 0.0;
};

/// Sparse optimal coupling. `cost` is sum(mass * |x - y|^p), before the p-th root.
struct TransportPlan {
  std::vector<Coupling> couplings;
  double cost = 0.0;
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
};

/// Exact p-Wasserstein distance between two discrete measures. Equal-size
/// uniform clouds are solved as a linear assignment problem; anything else
/// goes through the transportation simplex.
[[nodiscard]] TransportResult wasserstein(const PointCloud &a, const PointCloud &b,
                                          double p = 2.0);

/// Draws n points from each model (mass 1/n each) and returns their exact
/// p-Wasserstein distance.
[[nodiscard]] double wasserstein_between_models(const ClusterModel &f, const ClusterModel &g,
                                                std::size_t n, double p, std::uint64_t seed);

/// |x_i - y_j|^p for every pair of rows.
[[nodiscard]] Eigen::MatrixXd pairwise_cost(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y,
                                            double p);

struct Assignment {
  std::vector<Eigen::Index> row_to_col;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (shortest augmenting
/// paths after column reduction, O(n^3) worst case).
[[nodiscard]] Assignment solve_assignment(const Eigen::MatrixXd &cost);

/// Minimum-cost transportation plan between supplies and demands of equal
/// total mass. Spanning-tree (network) simplex on the dense bipartite graph.
[[nodiscard]] TransportPlan solve_transportation(const Eigen::VectorXd &supply,
                                                 const Eigen::VectorXd &demand,
                                                 const Eigen::MatrixXd &cost);

} // namespace clusterdist
