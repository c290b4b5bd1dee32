#pragma once

#include "clusterdist/distributions.hpp"
#include "clusterdist/divergences.hpp"
#include "clusterdist/empirical_indices.hpp"
#include "clusterdist/mixture_fit.hpp"

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace clusterdist {

enum class Scenario { MeanShift = 1, ScaleShift = 2, SkewRotation = 3 };

[[nodiscard]] std::string_view to_string(Scenario s) noexcept;

/// One grid point. `value` is the mean offset (MeanShift), the variance
/// ratio sigma^2 (ScaleShift) or the rotation step in 22.5 degree units
/// (SkewRotation); `skew` is the skewness magnitude for SkewRotation only.
struct GridPoint {
  double value = 0.0;
  double skew = 0.0;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::MeanShift;
  std::vector<GridPoint> grid; // empty: default_grid(scenario)
  std::size_t n_per_cluster = 500;
  std::size_t replications = 100;
  std::uint64_t seed = 0;
  std::size_t mc_samples = 1000; // HD / JSD / JSD_e draws
  std::size_t wd_samples = 1000; // points per cloud for WD
  double p = 2.0;
  double si_proportion = 0.10;
  bool scale_true_indices = true;
  bool scale_estimated_indices = true;
  EmConfig em;

  void validate() const;
};

/// mu in {0, 0.5, ..., 6}; sigma^2 in {1, 2, ..., 512}; d in {2, 4, 6} x 9 rotations.
[[nodiscard]] std::vector<GridPoint> default_grid(Scenario s);

/// N2((0,0), 0.3 I) and N2((mu,mu), 0.3 I).
[[nodiscard]] std::pair<ClusterModel, ClusterModel> scenario1_models(double mu);
/// N2(0, 0.3 I) and N2(0, 0.3 sigma2 I).
[[nodiscard]] std::pair<ClusterModel, ClusterModel> scenario2_models(double sigma2);
/// Bivariate GH clusters with location 0, scale [[4, 1.2], [1.2, 4]], index 1,
/// concentration 1; skewness (d, d) and (d, d) turned clockwise by
/// angle_index * 22.5 degrees.
[[nodiscard]] std::pair<ClusterModel, ClusterModel> scenario3_models(double d, int angle_index);
[[nodiscard]] std::pair<ClusterModel, ClusterModel> scenario_models(Scenario s,
                                                                    const GridPoint &point);

struct TrueValue {
  Measure measure = Measure::MD;
  double value = 0.0;
  double std_error = 0.0;
  bool applicable = true;
};

struct EmpiricalValue {
  Measure measure = Measure::MD;
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n_valid = 0;
  bool applicable = true;
};

struct GridPointResult {
  GridPoint point;
  std::vector<TrueValue> truth;
  bool empirical_applicable = false;
  std::vector<EmpiricalValue> empirical;
  double mean_ari = 0.0;
  double sd_ari = 0.0;
  RecoveryBand band = RecoveryBand::Poor;
  std::size_t fits_ok = 0;
  std::size_t fits_failed = 0;

  [[nodiscard]] const TrueValue &true_value(Measure m) const;
  [[nodiscard]] const EmpiricalValue &empirical_value(Measure m) const;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<GridPointResult> points;
};

/// Measures reported per grid point, in output order.
[[nodiscard]] const std::vector<Measure> &true_measures();
[[nodiscard]] const std::vector<Measure> &empirical_measures();

/// True distances from the generating parameters (AB/SI averaged over
/// simulated labeled datasets) plus, for the normal scenarios, distances from
/// K = 2 mixture fits with ARI against the generating labels.
[[nodiscard]] ScenarioResult run_scenario(const ScenarioConfig &cfg);

/// n_per_cluster draws from each model, stacked, labels 1 and 2.
[[nodiscard]] LabeledDataset simulate_dataset(const ClusterModel &f, const ClusterModel &g,
                                              std::size_t n_per_cluster, Rng &rng);

} // namespace clusterdist
