#include "clusterdist/scenarios.hpp"

#include "clusterdist/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <optional>

namespace clusterdist {
namespace {

constexpr double kBaseVariance = 0.30;
constexpr double kScenario3Nu = 4.0;

// Seed namespaces under the scenario seed.
enum SeedTag : std::uint64_t { kTruthMc = 0, kTruthWd = 1, kDataset = 2, kFit = 3, kEmpMc = 4 };

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

Moments moments(const std::vector<double> &xs) {
  Moments m;
  for (double x : xs) {
    if (std::isfinite(x)) {
      m.mean += x;
      ++m.n;
    }
  }
  if (m.n == 0)
    return {std::numeric_limits<double>::quiet_NaN(), 0.0, 0};
  m.mean /= static_cast<double>(m.n);
  if (m.n >= 2) {
    double ss = 0.0;
    for (double x : xs)
      if (std::isfinite(x))
        ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(m.n - 1));
  }
  return m;
}

std::size_t measure_slot(Measure m) { return static_cast<std::size_t>(m); }
constexpr std::size_t kMeasureCount = 8;

struct Replication {
  double true_ab = std::numeric_limits<double>::quiet_NaN();
  double true_si = std::numeric_limits<double>::quiet_NaN();
  bool fit_ok = false;
  double ari = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kMeasureCount> empirical{};
};

LabeledDataset maybe_scaled(const LabeledDataset &ds, bool scale) {
  if (!scale)
    return ds;
  return {scale_columns(ds.data), ds.labels};
}

} // namespace

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
  case Scenario::MeanShift: return "mean_shift";
  case Scenario::ScaleShift: return "scale_shift";
  case Scenario::SkewRotation: return "skew_rotation";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  if (n_per_cluster < 2)
    throw std::invalid_argument("ScenarioConfig: n_per_cluster must be at least 2");
  if (replications < 1)
    throw std::invalid_argument("ScenarioConfig: replications must be at least 1");
  if (mc_samples < 2 || wd_samples < 2)
    throw std::invalid_argument("ScenarioConfig: sample counts must be at least 2");
  if (!(si_proportion > 0.0) || si_proportion > 1.0)
    throw std::invalid_argument("ScenarioConfig: SI proportion must lie in (0, 1]");
  for (const auto &gp : grid)
    (void)scenario_models(scenario, gp);
}

std::vector<GridPoint> default_grid(Scenario s) {
  std::vector<GridPoint> grid;
  switch (s) {
  case Scenario::MeanShift:
    for (int i = 0; i <= 12; ++i)
      grid.push_back({0.5 * i, 0.0});
    break;
  case Scenario::ScaleShift:
    for (int i = 0; i <= 9; ++i)
      grid.push_back({std::ldexp(1.0, i), 0.0});
    break;
  case Scenario::SkewRotation:
    for (double d : {2.0, 4.0, 6.0})
      for (int k = 0; k <= 8; ++k)
        grid.push_back({static_cast<double>(k), d});
    break;
  }
  return grid;
}

std::pair<ClusterModel, ClusterModel> scenario1_models(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("scenario1_models: mu must be a finite value >= 0");
  const Eigen::MatrixXd c = kBaseVariance * Eigen::MatrixXd::Identity(2, 2);
  return {Gaussian({Eigen::Vector2d::Zero(), c}), Gaussian({Eigen::Vector2d(mu, mu), c})};
}

std::pair<ClusterModel, ClusterModel> scenario2_models(double sigma2) {
  if (!(sigma2 >= 1.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("scenario2_models: sigma^2 must be a finite value >= 1");
  const Eigen::MatrixXd c = kBaseVariance * Eigen::MatrixXd::Identity(2, 2);
  return {Gaussian({Eigen::Vector2d::Zero(), c}), Gaussian({Eigen::Vector2d::Zero(), sigma2 * c})};
}

std::pair<ClusterModel, ClusterModel> scenario3_models(double d, int angle_index) {
  if (!(d > 0.0) || !std::isfinite(d))
    throw std::invalid_argument("scenario3_models: skew magnitude must be positive");
  if (angle_index < 0 || angle_index > 8)
    throw std::invalid_argument(
        fmt::format("scenario3_models: angle index {} outside 0..8", angle_index));
  Eigen::Matrix2d scale;
  scale << kScenario3Nu, 0.3 * kScenario3Nu, 0.3 * kScenario3Nu, kScenario3Nu;
  const Eigen::Vector2d skew1(d, d);
  // Clockwise turn; multiples of 90 degrees are exact.
  const double theta = angle_index * 22.5 * std::numbers::pi / 180.0;
  double c = std::cos(theta);
  double s = std::sin(theta);
  if (angle_index % 4 == 0) {
    c = angle_index == 4 ? 0.0 : (angle_index == 8 ? -1.0 : 1.0);
    s = angle_index == 4 ? 1.0 : 0.0;
  }
  const Eigen::Vector2d skew2(c * d + s * d, -s * d + c * d);
  return {GeneralizedHyperbolic({Eigen::Vector2d::Zero(), scale, skew1, 1.0, 1.0}),
          GeneralizedHyperbolic({Eigen::Vector2d::Zero(), scale, skew2, 1.0, 1.0})};
}

std::pair<ClusterModel, ClusterModel> scenario_models(Scenario s, const GridPoint &point) {
  switch (s) {
  case Scenario::MeanShift: return scenario1_models(point.value);
  case Scenario::ScaleShift: return scenario2_models(point.value);
  case Scenario::SkewRotation: {
    const double k = std::round(point.value);
    if (k != point.value)
      throw std::invalid_argument("scenario3: angle index must be an integer");
    return scenario3_models(point.skew, static_cast<int>(k));
  }
  }
  throw std::invalid_argument("unknown scenario");
}

const std::vector<Measure> &true_measures() {
  static const std::vector<Measure> m{Measure::MD,  Measure::HD, Measure::JSD, Measure::JSDe,
                                      Measure::WD,  Measure::AB, Measure::SI};
  return m;
}

const std::vector<Measure> &empirical_measures() {
  static const std::vector<Measure> m{Measure::MD, Measure::HD, Measure::JSDe,
                                      Measure::WD, Measure::AB, Measure::SI};
  return m;
}

const TrueValue &GridPointResult::true_value(Measure m) const {
  for (const auto &t : truth)
    if (t.measure == m)
      return t;
  throw std::out_of_range(fmt::format("no true value for {}", to_string(m)));
}

const EmpiricalValue &GridPointResult::empirical_value(Measure m) const {
  for (const auto &e : empirical)
    if (e.measure == m)
      return e;
  throw std::out_of_range(fmt::format("no empirical value for {}", to_string(m)));
}

LabeledDataset simulate_dataset(const ClusterModel &f, const ClusterModel &g,
                                std::size_t n_per_cluster, Rng &rng) {
  const auto n = static_cast<Eigen::Index>(n_per_cluster);
  LabeledDataset ds;
  ds.data.resize(2 * n, dimension(f));
  ds.data.topRows(n) = sample(f, rng, n_per_cluster);
  ds.data.bottomRows(n) = sample(g, rng, n_per_cluster);
  ds.labels.assign(n_per_cluster, 1);
  ds.labels.insert(ds.labels.end(), n_per_cluster, 2);
  return ds;
}

ScenarioResult run_scenario(const ScenarioConfig &input) {
  ScenarioConfig cfg = input;
  if (cfg.grid.empty())
    cfg.grid = default_grid(cfg.scenario);
  cfg.validate();

  const bool gaussian_scenario = cfg.scenario != Scenario::SkewRotation;
  ScenarioResult result;
  result.config = cfg;
  result.points.resize(cfg.grid.size());

  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    const GridPoint &gp = cfg.grid[gi];
    const auto [f, g] = scenario_models(cfg.scenario, gp);
    GridPointResult &out = result.points[gi];
    out.point = gp;
    out.empirical_applicable = gaussian_scenario;

    // Truth: the same MC streams at every grid point keep the curves smooth.
    auto mc = [&](Measure m) {
      return EstimatorSettings{cfg.mc_samples,
                               derive_seed(cfg.seed, {kTruthMc, measure_slot(m)}), 1};
    };
    if (gaussian_scenario) {
      const auto &gf = std::get<Gaussian>(f).params();
      const auto &gg = std::get<Gaussian>(g).params();
      out.truth.push_back({Measure::MD, mahalanobis(gf, gg, {0.5, 0.5}).value, 0.0, true});
    } else {
      out.truth.push_back({Measure::MD, std::numeric_limits<double>::quiet_NaN(), 0.0, false});
    }
    const auto hd = hellinger(f, g, mc(Measure::HD));
    out.truth.push_back({Measure::HD, hd.value, hd.std_error, true});
    const auto jsd = jsd_plugin(f, g, mc(Measure::JSD));
    out.truth.push_back({Measure::JSD, jsd.value, jsd.std_error, true});
    const auto jsde = jsd_extended(f, g, mc(Measure::JSDe));
    out.truth.push_back({Measure::JSDe, jsde.value, jsde.std_error, true});
    out.truth.push_back({Measure::WD,
                         wasserstein_between_models(f, g, cfg.wd_samples, cfg.p,
                                                    derive_seed(cfg.seed, {kTruthWd})),
                         0.0, true});

    std::vector<Replication> reps(cfg.replications);
    parallel_for(cfg.replications, [&](std::size_t r) {
      Replication &rep = reps[r];
      Rng data_rng = make_rng(derive_seed(cfg.seed, {kDataset, gi, r}));
      const LabeledDataset ds = simulate_dataset(f, g, cfg.n_per_cluster, data_rng);
      const LabeledDataset truth_view = maybe_scaled(ds, cfg.scale_true_indices);
      rep.true_ab = average_between(truth_view, 1, 2);
      rep.true_si = separation_index(truth_view, 1, 2, cfg.si_proportion);
      rep.empirical.fill(std::numeric_limits<double>::quiet_NaN());
      if (!gaussian_scenario)
        return;

      EmConfig em = cfg.em;
      em.seed = derive_seed(cfg.seed, {kFit, gi, r});
      std::optional<FitResult> fit;
      try {
        fit = fit_gmm(ds.data, 2, em);
      } catch (const DegenerateFitError &) {
        return;
      }
      rep.fit_ok = true;
      rep.ari = adjusted_rand(ds.labels, fit->assignments);

      const auto &c1 = fit->model.components[0];
      const auto &c2 = fit->model.components[1];
      const ClusterModel f_hat = Gaussian(c1.params);
      const ClusterModel g_hat = Gaussian(c2.params);
      const std::uint64_t emp_seed = derive_seed(cfg.seed, {kEmpMc, gi, r});
      const EstimatorSettings es{cfg.mc_samples, emp_seed, 1};
      rep.empirical[measure_slot(Measure::MD)] =
          mahalanobis(c1.params, c2.params, {c1.weight, c2.weight}).value;
      rep.empirical[measure_slot(Measure::HD)] = hellinger(f_hat, g_hat, es).value;
      rep.empirical[measure_slot(Measure::JSDe)] = jsd_extended(f_hat, g_hat, es).value;
      rep.empirical[measure_slot(Measure::WD)] =
          wasserstein_between_models(f_hat, g_hat, cfg.wd_samples, cfg.p, emp_seed);

      const LabeledDataset fitted{ds.data, fit->assignments};
      const auto present = fitted.distinct_labels();
      if (present.size() == 2) {
        const LabeledDataset view = maybe_scaled(fitted, cfg.scale_estimated_indices);
        rep.empirical[measure_slot(Measure::AB)] = average_between(view, 1, 2);
        rep.empirical[measure_slot(Measure::SI)] =
            separation_index(view, 1, 2, cfg.si_proportion);
      }
    });

    std::vector<double> ab(reps.size());
    std::vector<double> si(reps.size());
    for (std::size_t r = 0; r < reps.size(); ++r) {
      ab[r] = reps[r].true_ab;
      si[r] = reps[r].true_si;
    }
    const auto mab = moments(ab);
    const auto msi = moments(si);
    const double root_n = std::sqrt(static_cast<double>(reps.size()));
    out.truth.push_back({Measure::AB, mab.mean, mab.sd / root_n, true});
    out.truth.push_back({Measure::SI, msi.mean, msi.sd / root_n, true});

    for (Measure m : empirical_measures()) {
      EmpiricalValue ev;
      ev.measure = m;
      ev.applicable = gaussian_scenario;
      if (gaussian_scenario) {
        std::vector<double> xs;
        for (const auto &rep : reps)
          if (rep.fit_ok)
            xs.push_back(rep.empirical[measure_slot(m)]);
        const auto mm = moments(xs);
        ev.mean = mm.mean;
        ev.sd = mm.sd;
        ev.n_valid = mm.n;
      } else {
        ev.mean = std::numeric_limits<double>::quiet_NaN();
      }
      out.empirical.push_back(ev);
    }
    if (gaussian_scenario) {
      std::vector<double> aris;
      for (const auto &rep : reps) {
        if (rep.fit_ok) {
          aris.push_back(rep.ari);
          ++out.fits_ok;
        } else {
          ++out.fits_failed;
        }
      }
      const auto ma = moments(aris);
      out.mean_ari = ma.mean;
      out.sd_ari = ma.sd;
      out.band = std::isfinite(ma.mean) ? recovery_band(std::clamp(ma.mean, -1.0, 1.0))
                                        : RecoveryBand::Poor;
    }
  }
  return result;
}

} // namespace clusterdist
