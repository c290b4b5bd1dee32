#include "clusterdist/cli.hpp"

#include "clusterdist/mixture_fit.hpp"
#include "clusterdist/scenarios.hpp"
#include "clusterdist/transport.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <json.hpp>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace clusterdist {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::uint64_t slot(Measure m) { return static_cast<std::uint64_t>(m); }

const char *to_string(MdWeighting w) { return w == MdWeighting::Equal ? "equal" : "mixture"; }

// NaN and infinities become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t> &seed) {
  if (seed)
    return *seed;
  const std::uint64_t s = fresh_seed();
  std::cerr << fmt::format("no --seed given; using {}\n", s);
  return s;
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

// ---------------------------------------------------------------------------
// scenario

struct ScenarioArgs {
  int which = 1;
  std::size_t reps = 100;
  std::size_t n = 500;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t mc_n = 1000;
  std::size_t wd_n = 1000;
  double p = 2.0;
  double si_prop = 0.10;
  std::size_t em_starts = 10;
  bool no_scale = false;
};

int cmd_scenario(const ScenarioArgs &a) {
  ScenarioConfig cfg;
  cfg.scenario = static_cast<Scenario>(a.which);
  cfg.replications = a.reps;
  cfg.n_per_cluster = a.n;
  cfg.seed = resolve_seed(a.seed);
  cfg.mc_samples = a.mc_n;
  cfg.wd_samples = a.wd_n;
  cfg.p = a.p;
  cfg.si_proportion = a.si_prop;
  cfg.em.n_init = a.em_starts;
  cfg.scale_true_indices = !a.no_scale;
  cfg.scale_estimated_indices = !a.no_scale;
  cfg.validate();

  const ScenarioResult res = run_scenario(cfg);
  const fs::path dir(a.out);
  ensure_dir(dir);
  const std::string sc = std::to_string(a.which);

  std::vector<std::vector<std::string>> true_rows;
  for (const auto &pt : res.points)
    for (const auto &t : pt.truth)
      true_rows.push_back({sc, format_double(pt.point.value), format_double(pt.point.skew),
                           std::string(to_string(t.measure)),
                           t.applicable ? format_double(t.value) : "NA",
                           t.applicable ? format_double(t.std_error) : "NA",
                           t.applicable ? "true" : "false"});
  write_csv(dir / "true.csv", {"scenario", "param", "skew", "measure", "value", "std_error",
                               "applicable"},
            true_rows);

  const bool empirical = cfg.scenario != Scenario::SkewRotation;
  if (empirical) {
    std::vector<std::vector<std::string>> rows;
    for (const auto &pt : res.points) {
      const std::string band = to_string(pt.band);
      for (const auto &e : pt.empirical)
        rows.push_back({sc, format_double(pt.point.value), std::string(to_string(e.measure)),
                        format_double(e.mean), format_double(e.sd), std::to_string(e.n_valid),
                        band});
      rows.push_back({sc, format_double(pt.point.value), "ARI", format_double(pt.mean_ari),
                      format_double(pt.sd_ari), std::to_string(pt.fits_ok), band});
    }
    write_csv(dir / "empirical.csv",
              {"scenario", "param", "measure", "mean", "sd", "n_valid", "band"}, rows);
  } else {
    std::error_code ec;
    fs::remove(dir / "empirical.csv", ec);
  }

  json j;
  j["scenario"] = a.which;
  j["name"] = std::string(to_string(cfg.scenario));
  j["seed"] = cfg.seed;
  j["replications"] = cfg.replications;
  j["n_per_cluster"] = cfg.n_per_cluster;
  j["mc_samples"] = cfg.mc_samples;
  j["wd_samples"] = cfg.wd_samples;
  j["p"] = cfg.p;
  j["si_proportion"] = cfg.si_proportion;
  j["em_starts"] = cfg.em.n_init;
  j["scaled_indices"] = !a.no_scale;
  if (empirical) {
    j["empirical"] = "computed";
  } else {
    j["empirical"] = "not_applicable";
    j["empirical_note"] =
        "no mixture fitter for generalized hyperbolic clusters; only true distances are "
        "reported, and MD is not applicable to skewed clusters";
  }
  json points = json::array();
  for (const auto &pt : res.points) {
    json p;
    p["param"] = pt.point.value;
    if (cfg.scenario == Scenario::SkewRotation) {
      p["skew"] = pt.point.skew;
      p["angle_deg"] = pt.point.value * 22.5;
    }
    json truth;
    for (const auto &t : pt.truth)
      truth[std::string(to_string(t.measure))] =
          t.applicable ? json{{"value", num(t.value)}, {"std_error", num(t.std_error)}}
                       : json("not_applicable");
    p["true"] = std::move(truth);
    if (empirical) {
      json emp;
      for (const auto &e : pt.empirical)
        emp[std::string(to_string(e.measure))] = {
            {"mean", num(e.mean)}, {"sd", num(e.sd)}, {"n_valid", e.n_valid}};
      p["empirical"] = std::move(emp);
      p["mean_ari"] = num(pt.mean_ari);
      p["sd_ari"] = num(pt.sd_ari);
      p["band"] = to_string(pt.band);
      p["fits_ok"] = pt.fits_ok;
      p["fits_failed"] = pt.fits_failed;
    } else {
      p["empirical"] = "not_applicable";
    }
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  write_text(dir / "summary.json", j.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  std::size_t kmin = 1;
  std::size_t kmax = 5;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t em_starts = 10;
  std::size_t max_iter = 500;
  double tol = 1e-8;
};

int cmd_fit(const FitArgs &a) {
  if (a.kmin < 1 || a.kmax < a.kmin)
    throw DataError(fmt::format("need 1 <= kmin <= kmax (got {} and {})", a.kmin, a.kmax));
  const NumericTable table = read_numeric_csv(a.data);
  const auto n = static_cast<std::size_t>(table.values.rows());
  const auto d = static_cast<std::size_t>(table.values.cols());
  if (n <= a.kmax * d)
    throw DataError(fmt::format("{} rows is too few for K = {} in {} dimensions (need more than {})",
                                n, a.kmax, d, a.kmax * d));
  const std::uint64_t seed = resolve_seed(a.seed);

  std::vector<std::vector<std::string>> rows;
  std::optional<FitResult> best;
  std::uint64_t best_seed = 0;
  for (std::size_t k = a.kmin; k <= a.kmax; ++k) {
    EmConfig em;
    em.seed = derive_seed(seed, {k});
    em.n_init = a.em_starts;
    em.max_iter = a.max_iter;
    em.tol = a.tol;
    try {
      FitResult fr = fit_gmm(table.values, k, em);
      rows.push_back({std::to_string(k), format_double(fr.log_likelihood), format_double(fr.bic),
                      format_double(fr.aic), format_double(fr.icl),
                      std::to_string(free_parameters(k, static_cast<Eigen::Index>(d))),
                      std::to_string(fr.iterations), fr.converged ? "true" : "false",
                      fr.regularized ? "true" : "false", "ok"});
      if (!best || fr.bic < best->bic) {
        best = std::move(fr);
        best_seed = em.seed;
      }
    } catch (const DegenerateFitError &e) {
      std::cerr << fmt::format("K = {}: {}\n", k, e.what());
      rows.push_back({std::to_string(k), "NA", "NA", "NA", "NA",
                      std::to_string(free_parameters(k, static_cast<Eigen::Index>(d))), "NA", "NA",
                      "NA", "failed"});
    }
  }
  if (!best)
    throw std::runtime_error("every K failed to fit");

  const fs::path dir(a.out);
  ensure_dir(dir);
  write_csv(dir / "criteria.csv",
            {"k", "log_likelihood", "bic", "aic", "icl", "n_parameters", "iterations", "converged",
             "regularized", "status"},
            rows);
  FitSummary fs_sum;
  fs_sum.k = best->model.k();
  fs_sum.n = n;
  fs_sum.log_likelihood = best->log_likelihood;
  fs_sum.bic = best->bic;
  fs_sum.aic = best->aic;
  fs_sum.icl = best->icl;
  fs_sum.seed = best_seed;
  write_model(dir / "model.json", model_file_from(best->model, table.header, fs_sum));

  std::vector<std::vector<std::string>> assign;
  assign.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    assign.push_back({std::to_string(i + 1), std::to_string(best->assignments[i]),
                      format_double(best->responsibilities.row(r).maxCoeff())});
  }
  write_csv(dir / "assignments.csv", {"row", "label", "max_resp"}, assign);
  std::cerr << fmt::format("selected K = {} (BIC {:.6g}); seed {}\n", best->model.k(), best->bic,
                           seed);
  return 0;
}

// ---------------------------------------------------------------------------
// dist

struct DistArgs {
  std::string model;
  std::string data;
  std::string labels;
  std::size_t mc_n = 1000;
  std::size_t wd_n = 1000;
  double p = 2.0;
  double si_prop = 0.10;
  std::optional<std::uint64_t> seed;
  std::size_t replicates = 1;
  std::string md_weights = "mixture";
  bool no_scale = false;
  std::string out;
};

int cmd_dist(const DistArgs &a) {
  if (a.data.empty() != a.labels.empty())
    throw DataError("AB and SI need both --data and --labels");
  const ModelFile model = read_model(a.model);
  DistanceSettings s;
  s.mc_samples = a.mc_n;
  s.wd_samples = a.wd_n;
  s.p = a.p;
  s.si_proportion = a.si_prop;
  s.replicates = a.replicates;
  s.scale = !a.no_scale;
  s.md_weighting = a.md_weights == "equal" ? MdWeighting::Equal : MdWeighting::Mixture;
  s.seed = resolve_seed(a.seed);

  std::optional<LabeledDataset> ds;
  if (!a.data.empty()) {
    const NumericTable table = read_numeric_csv(a.data);
    if (table.values.cols() != model.dimension())
      throw DataError(fmt::format("{} has {} columns but the model has dimension {}", a.data,
                                  table.values.cols(), model.dimension()));
    std::vector<int> labels = read_labels_csv(a.labels);
    if (labels.size() != static_cast<std::size_t>(table.values.rows()))
      throw DataError(fmt::format("{} has {} labels for {} data rows", a.labels, labels.size(),
                                  table.values.rows()));
    ds = LabeledDataset{table.values, std::move(labels)};
  }
  const DistanceReport report =
      compute_distance_report(model, ds ? &*ds : nullptr, s, fs::path(a.model).filename().string());
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_text(dir / "distances.json", report_to_json(report));
  write_csv(dir / "distances.csv", report_csv_header(), report_csv_rows(report));
  return 0;
}

// ---------------------------------------------------------------------------
// grid

struct GridArgs {
  std::string model;
  std::string dims = "1,2";
  std::string range = "auto";
  std::size_t res = 200;
  std::string out;
};

std::vector<double> parse_number_list(const std::string &text, const char *what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v))
        throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception &) {
      throw DataError(fmt::format("{}: \"{}\" is not a number", what, item));
    }
  }
  return out;
}

int cmd_grid(const GridArgs &a) {
  const ModelFile model = read_model(a.model);
  const Eigen::Index d = model.dimension();
  const auto dims = parse_number_list(a.dims, "--dims");
  if (dims.size() != 2 || dims[0] != std::round(dims[0]) || dims[1] != std::round(dims[1]))
    throw DataError(fmt::format("--dims needs two 1-based column numbers, got \"{}\"", a.dims));
  DensityGridOptions opt;
  opt.dim_x = static_cast<Eigen::Index>(dims[0]) - 1;
  opt.dim_y = static_cast<Eigen::Index>(dims[1]) - 1;
  if (opt.dim_x < 0 || opt.dim_y < 0 || opt.dim_x >= d || opt.dim_y >= d || opt.dim_x == opt.dim_y)
    throw DataError(
        fmt::format("--dims {}: need two different columns in 1..{}", a.dims, d));
  if (a.range != "auto") {
    const auto r = parse_number_list(a.range, "--range");
    if (r.size() != 4 || !(r[0] < r[1]) || !(r[2] < r[3]))
      throw DataError("--range must be auto or x0,x1,y0,y1 with x0 < x1 and y0 < y1");
    opt.range = std::array<double, 4>{r[0], r[1], r[2], r[3]};
  }
  opt.resolution = a.res;
  const auto cells = density_grid(model, opt);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(cells.size());
  for (const auto &c : cells)
    rows.push_back({format_double(c.x), format_double(c.y), std::to_string(c.component),
                    format_double(c.density), c.method});
  const fs::path out(a.out);
  if (out.has_parent_path())
    ensure_dir(out.parent_path());
  write_csv(out, {"x", "y", "component", "density", "method"}, rows);
  return 0;
}

} // namespace

// ---------------------------------------------------------------------------

DistanceReport compute_distance_report(const ModelFile &model, const LabeledDataset *data,
                                       const DistanceSettings &s, std::string label) {
  if (s.wd_samples < 2)
    throw std::invalid_argument("WD sample size must be at least 2");
  if (!(s.si_proportion > 0.0) || s.si_proportion > 1.0)
    throw std::invalid_argument("SI proportion must lie in (0, 1]");
  EstimatorSettings{s.mc_samples, s.seed, s.replicates}.validate();

  DistanceReport r;
  r.model_label = std::move(label);
  r.k = model.components.size();
  r.settings = s;
  r.fit = model.fit;
  const bool gaussian = model.all_gaussian();

  std::optional<LabeledDataset> view;
  if (data) {
    data->validate();
    r.n_rows = static_cast<std::size_t>(data->data.rows());
    view = s.scale ? LabeledDataset{scale_columns(data->data), data->labels} : *data;
    if (gaussian) {
      const auto assigned = map_assign(model.as_gaussian_mixture(), data->data);
      r.ari = adjusted_rand(data->labels, assigned.labels);
    }
  }

  for (std::size_t j = 0; j < r.k; ++j) {
    for (std::size_t k = j + 1; k < r.k; ++k) {
      const auto &cj = model.components[j];
      const auto &ck = model.components[k];
      PairDistances pd{j + 1, k + 1, {}};
      auto es = [&](Measure m) {
        return EstimatorSettings{s.mc_samples, derive_seed(s.seed, {j + 1, k + 1, slot(m)}),
                                 s.replicates};
      };
      if (gaussian) {
        const double wsum = cj.weight + ck.weight;
        const std::pair<double, double> w = s.md_weighting == MdWeighting::Equal
                                                ? std::pair{0.5, 0.5}
                                                : std::pair{cj.weight / wsum, ck.weight / wsum};
        const auto md = mahalanobis(std::get<Gaussian>(cj.model).params(),
                                    std::get<Gaussian>(ck.model).params(), w);
        pd.entries.push_back({Measure::MD, md.value, 0.0});
      }
      const auto hd = hellinger(cj.model, ck.model, es(Measure::HD));
      pd.entries.push_back({Measure::HD, hd.value, hd.std_error});
      const auto jsde = jsd_extended(cj.model, ck.model, es(Measure::JSDe));
      pd.entries.push_back({Measure::JSDe, jsde.value, jsde.std_error});
      const double wd = wasserstein_between_models(
          cj.model, ck.model, s.wd_samples, s.p, derive_seed(s.seed, {j + 1, k + 1, slot(Measure::WD)}));
      pd.entries.push_back({Measure::WD, wd, 0.0});
      if (view) {
        const int a = static_cast<int>(j + 1);
        const int b = static_cast<int>(k + 1);
        const bool both = view->members(a).rows() > 0 && view->members(b).rows() > 0;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        pd.entries.push_back({Measure::AB, both ? average_between(*view, a, b) : nan, 0.0});
        pd.entries.push_back(
            {Measure::SI, both ? separation_index(*view, a, b, s.si_proportion) : nan, 0.0});
      }
      r.pairs.push_back(std::move(pd));
    }
  }
  return r;
}

std::string report_to_json(const DistanceReport &r) {
  json j;
  j["model"] = r.model_label;
  j["k"] = r.k;
  j["settings"] = {{"mc_samples", r.settings.mc_samples},
                   {"wd_samples", r.settings.wd_samples},
                   {"p", r.settings.p},
                   {"si_proportion", r.settings.si_proportion},
                   {"seed", r.settings.seed},
                   {"replicates", r.settings.replicates},
                   {"scaled_indices", r.settings.scale},
                   {"md_weights", to_string(r.settings.md_weighting)}};
  if (r.fit) {
    const auto &f = *r.fit;
    j["fit"] = {{"k", f.k},     {"n", f.n},     {"log_likelihood", num(f.log_likelihood)},
                {"bic", num(f.bic)}, {"aic", num(f.aic)}, {"icl", num(f.icl)},
                {"seed", f.seed}, {"criterion", f.criterion}};
  } else {
    j["fit"] = nullptr;
  }
  j["ari"] = r.ari ? num(*r.ari) : json(nullptr);
  j["n_rows"] = r.n_rows;
  json pairs = json::array();
  for (const auto &p : r.pairs) {
    json pj;
    pj["pair"] = fmt::format("{}-{}", p.first, p.second);
    pj["first"] = p.first;
    pj["second"] = p.second;
    json m;
    for (const auto &e : p.entries)
      m[std::string(to_string(e.measure))] = {{"value", num(e.value)},
                                              {"stderr", num(e.std_error)}};
    pj["measures"] = std::move(m);
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

std::vector<std::string> report_csv_header() { return {"pair", "measure", "value", "stderr"}; }

std::vector<std::vector<std::string>> report_csv_rows(const DistanceReport &r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto &p : r.pairs)
    for (const auto &e : p.entries)
      rows.push_back({fmt::format("{}-{}", p.first, p.second), std::string(to_string(e.measure)),
                      format_double(e.value), format_double(e.std_error)});
  return rows;
}

std::vector<DensityCell> density_grid(const ModelFile &model, const DensityGridOptions &o) {
  const Eigen::Index d = model.dimension();
  if (o.dim_x < 0 || o.dim_y < 0 || o.dim_x >= d || o.dim_y >= d || o.dim_x == o.dim_y)
    throw std::invalid_argument("density_grid: need two different dimensions in range");
  if (o.resolution < 1)
    throw std::invalid_argument("density_grid: resolution must be at least 1");

  std::array<double, 4> box{};
  if (o.range) {
    box = *o.range;
  } else {
    box = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto &c : model.components) {
      const Eigen::VectorXd m = model_mean(c.model);
      const Eigen::MatrixXd cov = model_covariance(c.model);
      const double sx = std::sqrt(cov(o.dim_x, o.dim_x));
      const double sy = std::sqrt(cov(o.dim_y, o.dim_y));
      box[0] = std::min(box[0], m(o.dim_x) - 4.0 * sx);
      box[1] = std::max(box[1], m(o.dim_x) + 4.0 * sx);
      box[2] = std::min(box[2], m(o.dim_y) - 4.0 * sy);
      box[3] = std::max(box[3], m(o.dim_y) + 4.0 * sy);
    }
  }
  const double hx = (box[1] - box[0]) / static_cast<double>(o.resolution);
  const double hy = (box[3] - box[2]) / static_cast<double>(o.resolution);

  std::vector<DensityCell> cells;
  cells.reserve(model.components.size() * o.resolution * o.resolution);
  for (std::size_t ci = 0; ci < model.components.size(); ++ci) {
    const ClusterModel &cm = model.components[ci].model;
    std::function<double(double, double)> density;
    const char *method = nullptr;
    if (const auto *g = std::get_if<Gaussian>(&cm)) {
      const std::array<Eigen::Index, 2> ix{o.dim_x, o.dim_y};
      Eigen::Vector2d m;
      Eigen::Matrix2d cov;
      for (int a = 0; a < 2; ++a) {
        m(a) = g->params().mean(ix[a]);
        for (int b = 0; b < 2; ++b)
          cov(a, b) = g->params().covariance(ix[a], ix[b]);
      }
      auto marginal = std::make_shared<Gaussian>(GaussianParams{m, cov});
      density = [marginal](double x, double y) {
        return std::exp(marginal->log_density(Eigen::Vector2d(x, y)));
      };
      method = "exact_marginal";
    } else {
      const auto &gh = std::get<GeneralizedHyperbolic>(cm);
      auto base = std::make_shared<Eigen::VectorXd>(gh.params().location);
      density = [&gh, base, &o](double x, double y) {
        Eigen::VectorXd pt = *base;
        pt(o.dim_x) = x;
        pt(o.dim_y) = y;
        return std::exp(gh.log_density(pt));
      };
      method = d == 2 ? "exact_marginal" : "conditional_slice";
    }
    for (std::size_t iy = 0; iy < o.resolution; ++iy) {
      const double y = box[2] + (static_cast<double>(iy) + 0.5) * hy;
      for (std::size_t ix = 0; ix < o.resolution; ++ix) {
        const double x = box[0] + (static_cast<double>(ix) + 0.5) * hx;
        cells.push_back({x, y, ci + 1, density(x, y), method});
      }
    }
  }
  return cells;
}

int run_cli(int argc, const char *const *argv) {
  CLI::App app{"Distances between cluster distributions: scenario replication, mixture fitting, "
               "pairwise distance reports and density grids."};
  app.name("clusterdist");
  app.require_subcommand(1);

  ScenarioArgs sa;
  auto *sc = app.add_subcommand("scenario", "Run a simulation scenario");
  sc->add_option("--which", sa.which, "Scenario: 1 mean shift, 2 scale shift, 3 skew rotation")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  sc->add_option("--reps", sa.reps, "Replications per grid point")->check(CLI::PositiveNumber);
  sc->add_option("--n", sa.n, "Points per cluster")->check(CLI::Range(2, 10000000));
  sc->add_option("--seed", sa.seed, "Seed (generated and recorded if absent)");
  sc->add_option("--out", sa.out, "Output directory")->required();
  sc->add_option("--mc-n", sa.mc_n, "Monte Carlo draws for HD, JSD, JSD_e")
      ->check(CLI::Range(2, 100000000));
  sc->add_option("--wd-n", sa.wd_n, "Points per cloud for WD")->check(CLI::Range(2, 100000));
  sc->add_option("--p", sa.p, "Wasserstein order")->check(CLI::Range(1.0, 1e6));
  sc->add_option("--si-prop", sa.si_prop, "SI proportion")->check(CLI::Range(1e-12, 1.0));
  sc->add_option("--em-starts", sa.em_starts, "EM restarts")->check(CLI::PositiveNumber);
  sc->add_flag("--no-scale", sa.no_scale, "Do not standardize columns before AB and SI");

  FitArgs fa;
  auto *fit = app.add_subcommand("fit", "Fit normal mixtures over a range of K");
  fit->add_option("--data", fa.data, "CSV with a header row")->required();
  fit->add_option("--kmin", fa.kmin, "Smallest K");
  fit->add_option("--kmax", fa.kmax, "Largest K");
  fit->add_option("--seed", fa.seed, "Seed (generated and recorded if absent)");
  fit->add_option("--out", fa.out, "Output directory")->required();
  fit->add_option("--em-starts", fa.em_starts, "EM restarts per K")->check(CLI::PositiveNumber);
  fit->add_option("--max-iter", fa.max_iter, "EM iteration cap")->check(CLI::PositiveNumber);
  fit->add_option("--tol", fa.tol, "Relative log-likelihood tolerance")
      ->check(CLI::PositiveNumber);

  DistArgs da;
  auto *dist = app.add_subcommand("dist", "Pairwise distances between model components");
  dist->add_option("--model", da.model, "model.json")->required();
  dist->add_option("--data", da.data, "Data CSV for AB and SI");
  dist->add_option("--labels", da.labels, "Labels CSV (a label column or a single column)");
  dist->add_option("--mc-n", da.mc_n, "Monte Carlo draws for HD and JSD_e")
      ->check(CLI::Range(2, 100000000));
  dist->add_option("--wd-n", da.wd_n, "Points per cloud for WD")->check(CLI::Range(2, 100000));
  dist->add_option("--p", da.p, "Wasserstein order")->check(CLI::Range(1.0, 1e6));
  dist->add_option("--si-prop", da.si_prop, "SI proportion")->check(CLI::Range(1e-12, 1.0));
  dist->add_option("--seed", da.seed, "Seed (generated and recorded if absent)");
  dist->add_option("--replicates", da.replicates, "Monte Carlo replicates")
      ->check(CLI::PositiveNumber);
  dist->add_option("--md-weights", da.md_weights, "Pooled covariance weights for MD")
      ->check(CLI::IsMember({"equal", "mixture"}));
  dist->add_flag("--no-scale", da.no_scale, "Do not standardize columns before AB and SI");
  dist->add_option("--out", da.out, "Output directory")->required();

  GridArgs ga;
  auto *grid = app.add_subcommand("grid", "Density grid over two coordinates");
  grid->add_option("--model", ga.model, "model.json")->required();
  grid->add_option("--dims", ga.dims, "Two 1-based coordinates, e.g. 1,2");
  grid->add_option("--range", ga.range, "auto or x0,x1,y0,y1");
  grid->add_option("--res", ga.res, "Cells per axis")->check(CLI::Range(1, 5000));
  grid->add_option("--out", ga.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sc)
      return cmd_scenario(sa);
    if (*fit)
      return cmd_fit(fa);
    if (*dist)
      return cmd_dist(da);
    if (*grid)
      return cmd_grid(ga);
  } catch (const DataError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace clusterdist
