#include "clusterdist/mixture_fit.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <optional>

namespace clusterdist {
namespace {

struct Degenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Standardize columns for seeding; constant columns are only centered.
Eigen::MatrixXd seeding_space(const Eigen::MatrixXd &data) {
  Eigen::MatrixXd out = data.rowwise() - data.colwise().mean();
  if (data.rows() < 2)
    return out;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(data.rows() - 1));
    if (sd > 0.0)
      out.col(j) /= sd;
  }
  return out;
}

Eigen::MatrixXd kmeanspp_responsibilities(const Eigen::MatrixXd &scaled, std::size_t k,
                                          Rng &rng) {
  const Eigen::Index n = scaled.rows();
  std::vector<Eigen::Index> centers;
  centers.push_back(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    const auto &c = scaled.row(centers.back());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (scaled.row(i) - c).squaredNorm());
      total += d2[i];
    }
    Eigen::Index next = 0;
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> pick(d2.begin(), d2.end());
      next = pick(rng);
    } else {
      next = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    }
    centers.push_back(next);
  }
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double dist = (scaled.row(i) - scaled.row(centers[c])).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = static_cast<Eigen::Index>(c);
      }
    }
    resp(i, best) = 1.0;
  }
  return resp;
}

GaussianMixture m_step(const Eigen::MatrixXd &data, const Eigen::MatrixXd &resp, double ridge) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  GaussianMixture mix;
  for (Eigen::Index k = 0; k < resp.cols(); ++k) {
    const double nk = resp.col(k).sum();
    if (!(nk > 1e-10))
      throw Degenerate(fmt::format("component {} has no mass", k + 1));
    const Eigen::VectorXd mean = data.transpose() * resp.col(k) / nk;
    const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();
    Eigen::MatrixXd cov =
        centered.transpose() * (centered.array().colwise() * resp.col(k).array()).matrix() / nk;
    cov = 0.5 * (cov + cov.transpose());
    if (ridge > 0.0)
      cov.diagonal().array() += ridge;
    mix.components.push_back({nk / static_cast<double>(n), {mean, cov}});
  }
  (void)d;
  return mix;
}

MapAssignment e_step(const GaussianMixture &model, const Eigen::MatrixXd &data) {
  const Eigen::Index n = data.rows();
  const auto k = static_cast<Eigen::Index>(model.k());
  Eigen::MatrixXd logp(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto &comp = model.components[static_cast<std::size_t>(c)];
    const Gaussian g(comp.params);
    logp.col(c) = g.log_density_rows(data).array() + std::log(comp.weight);
  }
  MapAssignment out;
  out.labels.resize(static_cast<std::size_t>(n));
  out.responsibilities.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    const double mx = logp.row(i).maxCoeff(&arg);
    const double lse = mx + std::log((logp.row(i).array() - mx).exp().sum());
    out.responsibilities.row(i) = (logp.row(i).array() - lse).exp();
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg) + 1;
    out.log_likelihood += lse;
  }
  return out;
}

FitResult run_em(const Eigen::MatrixXd &data, GaussianMixture params, const EmConfig &config,
                 double ridge) {
  FitResult fr;
  fr.regularized = ridge > 0.0;
  double previous = -std::numeric_limits<double>::infinity();
  MapAssignment current;
  for (std::size_t it = 0;; ++it) {
    try {
      current = e_step(params, data);
    } catch (const FactorizationError &e) {
      throw Degenerate(e.what());
    }
    if (!std::isfinite(current.log_likelihood))
      throw Degenerate("non-finite log-likelihood");
    fr.log_likelihood_trace.push_back(current.log_likelihood);
    if (it > 0 &&
        std::abs(current.log_likelihood - previous) <= config.tol * std::abs(previous)) {
      fr.converged = true;
      break;
    }
    if (it == config.max_iter)
      break;
    params = m_step(data, current.responsibilities, ridge);
    previous = current.log_likelihood;
    fr.iterations = it + 1;
  }
  fr.model = std::move(params);
  fr.log_likelihood = current.log_likelihood;
  fr.assignments = std::move(current.labels);
  fr.responsibilities = std::move(current.responsibilities);
  const auto ic = information_criteria(fr, static_cast<std::size_t>(data.rows()));
  fr.bic = ic.bic;
  fr.aic = ic.aic;
  fr.icl = ic.icl;
  return fr;
}

double ridge_for(const Eigen::MatrixXd &data, double factor) {
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const double trace = centered.squaredNorm() / static_cast<double>(data.rows());
  const double ridge = factor * trace / static_cast<double>(data.cols());
  return ridge > 0.0 ? ridge : factor;
}

void require_fit_input(const Eigen::MatrixXd &data, std::size_t k) {
  if (k < 1)
    throw std::invalid_argument("fit_gmm: K must be at least 1");
  if (data.cols() < 1)
    throw std::invalid_argument("fit_gmm: data has no columns");
  if (static_cast<double>(data.rows()) <= static_cast<double>(k) * static_cast<double>(data.cols()))
    throw std::invalid_argument(fmt::format(
        "fit_gmm: need more than K*d = {} observations, got {}", k * data.cols(), data.rows()));
  if (!data.allFinite())
    throw std::invalid_argument("fit_gmm: data contains non-finite values");
}

} // namespace

Eigen::Index GaussianMixture::dim() const {
  return components.empty() ? 0 : components.front().params.mean.size();
}

void GaussianMixture::validate() const {
  if (components.empty())
    throw std::invalid_argument("GaussianMixture: no components");
  double total = 0.0;
  for (const auto &c : components) {
    if (!(c.weight > 0.0) || c.weight > 1.0)
      throw std::invalid_argument("GaussianMixture: weights must lie in (0, 1]");
    if (c.params.mean.size() != dim())
      throw std::invalid_argument("GaussianMixture: components differ in dimension");
    (void)Gaussian(c.params);
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(fmt::format("GaussianMixture: weights sum to {}", total));
}

std::size_t free_parameters(std::size_t k, Eigen::Index d) {
  const auto dd = static_cast<std::size_t>(d);
  return (k - 1) + k * dd + k * dd * (dd + 1) / 2;
}

InformationCriteria information_criteria(const FitResult &fr, std::size_t n) {
  const auto m = static_cast<double>(free_parameters(fr.model.k(), fr.model.dim()));
  InformationCriteria ic;
  ic.bic = -2.0 * fr.log_likelihood + m * std::log(static_cast<double>(n));
  ic.aic = -2.0 * fr.log_likelihood + 2.0 * m;
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < fr.responsibilities.rows(); ++i) {
    const double r = fr.responsibilities(i, fr.assignments[static_cast<std::size_t>(i)] - 1);
    if (r > 0.0)
      entropy -= std::log(r);
  }
  ic.icl = ic.bic + 2.0 * entropy;
  return ic;
}

MapAssignment map_assign(const GaussianMixture &model, const Eigen::MatrixXd &data) {
  model.validate();
  if (data.cols() != model.dim())
    throw std::invalid_argument("map_assign: dimension mismatch");
  return e_step(model, data);
}

FitResult fit_gmm_from(const Eigen::MatrixXd &data, GaussianMixture initial,
                       const EmConfig &config) {
  require_fit_input(data, initial.k());
  initial.validate();
  try {
    return run_em(data, initial, config, 0.0);
  } catch (const Degenerate &) {
  }
  try {
    return run_em(data, std::move(initial), config, ridge_for(data, config.ridge_factor));
  } catch (const Degenerate &e) {
    throw DegenerateFitError(fmt::format("fit_gmm_from: degenerate fit ({})", e.what()));
  }
}

FitResult fit_gmm(const Eigen::MatrixXd &data, std::size_t k, const EmConfig &config) {
  require_fit_input(data, k);
  if (config.n_init < 1)
    throw std::invalid_argument("fit_gmm: n_init must be at least 1");
  const Eigen::MatrixXd scaled = seeding_space(data);
  const double ridge = ridge_for(data, config.ridge_factor);

  std::vector<std::optional<FitResult>> runs(config.n_init);
  parallel_for(config.n_init, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(config.seed, {r}));
    const Eigen::MatrixXd resp = kmeanspp_responsibilities(scaled, k, rng);
    for (double rr : {0.0, ridge}) {
      try {
        runs[r] = run_em(data, m_step(data, resp, rr), config, rr);
        return;
      } catch (const Degenerate &) {
      }
    }
  });

  std::optional<FitResult> best;
  for (auto &run : runs) {
    if (run && (!best || run->log_likelihood > best->log_likelihood))
      best = std::move(run);
  }
  if (!best)
    throw DegenerateFitError(
        fmt::format("fit_gmm: all {} restarts degenerate for K = {}", config.n_init, k));
  return std::move(*best);
}

} // namespace clusterdist
