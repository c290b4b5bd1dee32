#include "clusterdist/empirical_indices.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <stdexcept>

namespace clusterdist {
namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

void require_label(const LabeledDataset &ds, int label) {
  if (std::find(ds.labels.begin(), ds.labels.end(), label) == ds.labels.end())
    throw std::invalid_argument(fmt::format("unknown cluster label {}", label));
}

} // namespace

void LabeledDataset::validate() const {
  if (data.rows() < 2)
    throw std::invalid_argument("LabeledDataset: at least two observations are required");
  if (static_cast<Eigen::Index>(labels.size()) != data.rows())
    throw std::invalid_argument(fmt::format("LabeledDataset: {} labels for {} rows",
                                            labels.size(), data.rows()));
}

std::vector<int> LabeledDataset::distinct_labels() const {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::MatrixXd LabeledDataset::members(int label) const {
  const auto count = std::count(labels.begin(), labels.end(), label);
  Eigen::MatrixXd out(count, data.cols());
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label)
      out.row(k++) = data.row(static_cast<Eigen::Index>(i));
  return out;
}

Eigen::MatrixXd scale_columns(const Eigen::MatrixXd &data) {
  if (data.rows() < 2)
    throw std::invalid_argument("scale_columns: at least two rows are required");
  Eigen::MatrixXd out = data;
  const double denom = static_cast<double>(data.rows() - 1);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double mean = data.col(j).mean();
    out.col(j).array() -= mean;
    const double sd = std::sqrt(out.col(j).squaredNorm() / denom);
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw std::invalid_argument(fmt::format("scale_columns: column {} has zero variance", j));
    out.col(j) /= sd;
  }
  return out;
}

double average_between(const LabeledDataset &ds, int cluster_a, int cluster_b) {
  ds.validate();
  require_label(ds, cluster_a);
  require_label(ds, cluster_b);
  const Eigen::MatrixXd a = ds.members(cluster_a);
  const Eigen::MatrixXd b = ds.members(cluster_b);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      sum += (a.row(i) - b.row(j)).norm();
  return sum / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double separation_index(const LabeledDataset &ds, int cluster_a, int cluster_b,
                        double proportion) {
  ds.validate();
  if (!(proportion > 0.0) || proportion > 1.0)
    throw std::invalid_argument("separation_index: proportion must lie in (0, 1]");
  require_label(ds, cluster_a);
  require_label(ds, cluster_b);
  if (cluster_a == cluster_b)
    throw std::invalid_argument("separation_index: the two clusters must differ");
  const Eigen::MatrixXd a = ds.members(cluster_a);
  const Eigen::MatrixXd b = ds.members(cluster_b);

  std::vector<double> nearest_a(a.rows(), std::numeric_limits<double>::infinity());
  std::vector<double> nearest_b(b.rows(), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double dist = (a.row(i) - b.row(j)).norm();
      nearest_a[i] = std::min(nearest_a[i], dist);
      nearest_b[j] = std::min(nearest_b[j], dist);
    }
  }
  std::vector<double> pooled = std::move(nearest_a);
  pooled.insert(pooled.end(), nearest_b.begin(), nearest_b.end());
  // Guard against proportion * n landing a rounding error above an integer.
  const auto k = static_cast<std::size_t>(
      std::max(1.0, std::ceil(proportion * static_cast<double>(pooled.size()) - 1e-9)));
  std::partial_sort(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(k),
                    pooled.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    sum += pooled[i];
  return sum / static_cast<double>(k);
}

double adjusted_rand(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size())
    throw std::invalid_argument(fmt::format("adjusted_rand: length mismatch ({} vs {})",
                                            labels_a.size(), labels_b.size()));
  const auto n = static_cast<double>(labels_a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < labels_a.size(); ++i) {
    table[{labels_a[i], labels_b[i]}] += 1.0;
    rows[labels_a[i]] += 1.0;
    cols[labels_b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto &[key, count] : table)
    index += choose2(count);
  double sum_rows = 0.0;
  for (const auto &[key, count] : rows)
    sum_rows += choose2(count);
  double sum_cols = 0.0;
  for (const auto &[key, count] : cols)
    sum_cols += choose2(count);
  const double total = choose2(n);
  if (total <= 0.0)
    return 1.0;
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  // Both partitions trivial (all singletons or one block): agreement is perfect.
  if (maximum == expected)
    return 1.0;
  return (index - expected) / (maximum - expected);
}

RecoveryBand recovery_band(double ari) {
  if (!(ari >= -1.0 && ari <= 1.0))
    throw std::invalid_argument(fmt::format("recovery_band: ARI {} outside [-1, 1]", ari));
  if (ari < 0.65)
    return RecoveryBand::Poor;
  if (ari < 0.80)
    return RecoveryBand::Moderate;
  if (ari < 0.90)
    return RecoveryBand::Good;
  return RecoveryBand::Excellent;
}

const char *to_string(RecoveryBand band) noexcept {
  switch (band) {
  case RecoveryBand::Poor: return "Poor";
  case RecoveryBand::Moderate: return "Moderate";
  case RecoveryBand::Good: return "Good";
  case RecoveryBand::Excellent: return "Excellent";
  }
  return "?";
}

} // namespace clusterdist
