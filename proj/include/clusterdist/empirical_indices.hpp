#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace clusterdist {

/// Observations (one per row) with integer cluster labels.
struct LabeledDataset {
  Eigen::MatrixXd data;
  std::vector<int> labels;

  void validate() const;
  /// Sorted distinct labels.
  [[nodiscard]] std::vector<int> distinct_labels() const;
  [[nodiscard]] Eigen::MatrixXd members(int label) const;
};

/// Column-wise standardization to mean 0 and sample standard deviation 1
/// (denominator N - 1). Throws on a zero-variance column or N < 2.
[[nodiscard]] Eigen::MatrixXd scale_columns(const Eigen::MatrixXd &data);

/// Mean Euclidean distance over all pairs (i in A, j in B).
[[nodiscard]] double average_between(const LabeledDataset &ds, int cluster_a, int cluster_b);

/// Every point of A and B gets its distance to the nearest point of the other
/// cluster; returns the mean of the smallest ceil(proportion * (n_A + n_B)).
[[nodiscard]] double separation_index(const LabeledDataset &ds, int cluster_a, int cluster_b,
                                      double proportion = 0.10);

/// Adjusted Rand index from the pair-counting contingency table.
[[nodiscard]] double adjusted_rand(std::span<const int> labels_a, std::span<const int> labels_b);

enum class RecoveryBand { Poor, Moderate, Good, Excellent };

/// Poor below 0.65, Moderate below 0.80, Good below 0.90, Excellent otherwise.
[[nodiscard]] RecoveryBand recovery_band(double ari);
[[nodiscard]] const char *to_string(RecoveryBand band) noexcept;

} // namespace clusterdist
