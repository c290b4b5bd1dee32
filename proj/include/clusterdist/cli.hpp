#pragma once

#include "clusterdist/divergences.hpp"
#include "clusterdist/empirical_indices.hpp"
#include "clusterdist/io.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace clusterdist {

/// Pooled covariance weights for MD: 1/2 each, or the pair's mixture weights.
enum class MdWeighting { Equal, Mixture };

struct DistanceSettings {
  std::size_t mc_samples = 1000;
  std::size_t wd_samples = 1000;
  double p = 2.0;
  double si_proportion = 0.10;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  bool scale = true; // standardize columns before AB/SI
  MdWeighting md_weighting = MdWeighting::Mixture;
};

struct DistanceEntry {
  Measure measure = Measure::HD;
  double value = 0.0;
  double std_error = 0.0;
};

struct PairDistances {
  std::size_t first = 0; // 1-based component numbers, first < second
  std::size_t second = 0;
  std::vector<DistanceEntry> entries;
};

struct DistanceReport {
  std::string model_label;
  std::size_t k = 0;
  DistanceSettings settings;
  std::vector<PairDistances> pairs;
  std::optional<FitSummary> fit;
  std::optional<double> ari; // MAP labels of the model against the given labels
  std::size_t n_rows = 0;    // data rows used for AB/SI, 0 without data
};

/// Every pair j < k: HD, JSD_e and WD from the model; MD when every component
/// is Gaussian; AB and SI when `data` (labels = component numbers) is given.
[[nodiscard]] DistanceReport compute_distance_report(const ModelFile &model,
                                                     const LabeledDataset *data,
                                                     const DistanceSettings &settings,
                                                     std::string label = "model");

[[nodiscard]] std::string report_to_json(const DistanceReport &report);
/// Header and rows of the flat pair, measure, value, stderr table.
[[nodiscard]] std::vector<std::string> report_csv_header();
[[nodiscard]] std::vector<std::vector<std::string>> report_csv_rows(const DistanceReport &report);

struct DensityGridOptions {
  Eigen::Index dim_x = 0; // 0-based
  Eigen::Index dim_y = 1;
  std::optional<std::array<double, 4>> range; // x0, x1, y0, y1; empty: automatic
  std::size_t resolution = 200;
};

struct DensityCell {
  double x = 0.0;
  double y = 0.0;
  std::size_t component = 0; // 1-based
  double density = 0.0;
  const char *method = "";
};

/// Component densities at cell centres of a res x res grid over two
/// coordinates. Gaussian components use the exact bivariate marginal; GH
/// components in more than two dimensions are sliced with the remaining
/// coordinates held at the component location ("conditional_slice").
[[nodiscard]] std::vector<DensityCell> density_grid(const ModelFile &model,
                                                    const DensityGridOptions &options);

/// The `clusterdist` command line. Returns 0 on success, 2 for bad arguments
/// or unusable input, 1 for other failures (message on standard error).
int run_cli(int argc, const char *const *argv);

} // namespace clusterdist
