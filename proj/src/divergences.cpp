#include "clusterdist/divergences.hpp"

#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <numbers>
#include <vector>

namespace clusterdist {
namespace {

void require_same_dim(const ClusterModel &f, const ClusterModel &g) {
  if (dimension(f) != dimension(g))
    throw std::invalid_argument(fmt::format("dimension mismatch between clusters ({} vs {})",
                                            dimension(f), dimension(g)));
}

struct Replicated {
  double mean = 0.0;
  double std_error = 0.0;
};

Replicated summarize(const std::vector<double> &values) {
  Replicated out;
  for (double v : values)
    out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.std_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

// One estimate per replicate on its own derived stream, merged by index.
Replicated replicate(const EstimatorSettings &s,
                     const std::function<double(Rng &, std::size_t)> &estimate_once) {
  s.validate();
  std::vector<double> values(s.replicates);
  parallel_for(s.replicates, [&](std::size_t r) {
    Rng rng = make_rng(derive_seed(s.seed, {r}));
    values[r] = estimate_once(rng, r);
  });
  return summarize(values);
}

double mean_affinity(const ClusterModel &f, const ClusterModel &g, Rng &rng, std::size_t n) {
  const Eigen::MatrixXd u = sample_equal_mixture(f, g, rng, n);
  const Eigen::VectorXd lf = log_density_rows(f, u);
  const Eigen::VectorXd lg = log_density_rows(g, u);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    sum += affinity_term(lf[i], lg[i]);
  return std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
}

} // namespace

std::string_view to_string(Measure m) noexcept {
  switch (m) {
  case Measure::MD: return "MD";
  case Measure::BA: return "BA";
  case Measure::HD: return "HD";
  case Measure::JSD: return "JSD";
  case Measure::JSDe: return "JSDe";
  case Measure::WD: return "WD";
  case Measure::AB: return "AB";
  case Measure::SI: return "SI";
  }
  return "?";
}

void EstimatorSettings::validate() const {
  if (mc_samples < 2)
    throw std::invalid_argument("EstimatorSettings: mc_samples must be at least 2");
  if (replicates < 1)
    throw std::invalid_argument("EstimatorSettings: replicates must be at least 1");
}

double affinity_term(double log_f, double log_g) noexcept {
  // 1/cosh(t) = 2 e^{-|t|} / (1 + e^{-2|t|})
  const double t = 0.5 * std::abs(log_f - log_g);
  if (std::isnan(t))
    return 0.0;
  const double e = std::exp(-t);
  return 2.0 * e / (1.0 + e * e);
}

double extended_js_term(double log_f, double log_g) noexcept {
  const double delta = log_f - log_g;
  if (std::isnan(delta))
    return 0.0;
  // a = 2 sigmoid(delta), b = 2 sigmoid(-delta); x log2 x -> 0 as x -> 0.
  auto piece = [](double z) {
    const double x = 2.0 / (1.0 + std::exp(-z));
    if (x == 0.0)
      return 0.0;
    return x * std::log2(x);
  };
  return std::max(0.0, piece(delta) + piece(-delta));
}

double plugin_js_term(double log_self, double log_other) noexcept {
  const double delta = log_self - log_other;
  if (delta == 0.0)
    return 0.0;
  // log2(2 / (1 + e^{-delta}))
  if (delta > 0.0)
    return 1.0 - std::log1p(std::exp(-delta)) / std::numbers::ln2;
  return 1.0 - (-delta + std::log1p(std::exp(delta))) / std::numbers::ln2;
}

Eigen::MatrixXd sample_equal_mixture(const ClusterModel &f, const ClusterModel &g, Rng &rng,
                                     std::size_t n) {
  require_same_dim(f, g);
  std::bernoulli_distribution coin(0.5);
  std::vector<char> from_f(n);
  std::size_t n_f = 0;
  for (std::size_t i = 0; i < n; ++i) {
    from_f[i] = coin(rng) ? 1 : 0;
    n_f += static_cast<std::size_t>(from_f[i]);
  }
  const Eigen::MatrixXd xf = n_f > 0 ? sample(f, rng, n_f) : Eigen::MatrixXd(0, dimension(f));
  const Eigen::MatrixXd xg =
      n > n_f ? sample(g, rng, n - n_f) : Eigen::MatrixXd(0, dimension(g));
  Eigen::MatrixXd u(static_cast<Eigen::Index>(n), dimension(f));
  Eigen::Index jf = 0;
  Eigen::Index jg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    u.row(row) = from_f[i] ? xf.row(jf++) : xg.row(jg++);
  }
  return u;
}

DivergenceValue mahalanobis(const GaussianParams &f, const GaussianParams &g,
                            std::pair<double, double> weights) {
  if (f.mean.size() != g.mean.size())
    throw std::invalid_argument("mahalanobis: dimension mismatch");
  const auto [wf, wg] = weights;
  if (wf < 0.0 || wg < 0.0 || !(wf + wg > 0.0))
    throw std::invalid_argument("mahalanobis: weights must be nonnegative with positive sum");
  const Eigen::MatrixXd pooled = (wf * f.covariance + wg * g.covariance) / (wf + wg);
  const Eigen::MatrixXd l = cholesky_lower(pooled, "pooled covariance");
  const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(f.mean - g.mean);
  return {z.norm(), 0.0, Measure::MD, 0};
}

DivergenceValue bhattacharyya_mc(const ClusterModel &f, const ClusterModel &g,
                                 const EstimatorSettings &s) {
  require_same_dim(f, g);
  const auto r = replicate(s, [&](Rng &rng, std::size_t) { return mean_affinity(f, g, rng, s.mc_samples); });
  return {r.mean, r.std_error, Measure::BA, 0};
}

DivergenceValue hellinger(const ClusterModel &f, const ClusterModel &g,
                          const EstimatorSettings &s) {
  require_same_dim(f, g);
  const auto r = replicate(s, [&](Rng &rng, std::size_t) {
    return std::sqrt(1.0 - mean_affinity(f, g, rng, s.mc_samples));
  });
  return {r.mean, r.std_error, Measure::HD, 0};
}

DivergenceValue jsd_plugin(const ClusterModel &f, const ClusterModel &g,
                           const EstimatorSettings &s) {
  require_same_dim(f, g);
  s.validate();
  auto half = [](const ClusterModel &self, const ClusterModel &other, Rng &rng, std::size_t n,
                 std::size_t &dropped) {
    const Eigen::MatrixXd x = sample(self, rng, n);
    const Eigen::VectorXd ls = log_density_rows(self, x);
    const Eigen::VectorXd lo = log_density_rows(other, x);
    double sum = 0.0;
    std::size_t used = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double t = plugin_js_term(ls[i], lo[i]);
      if (!std::isfinite(t)) {
        ++dropped;
        continue;
      }
      sum += t;
      ++used;
    }
    return used > 0 ? sum / static_cast<double>(used) : 0.0;
  };
  std::vector<std::size_t> excluded(s.replicates, 0);
  const auto r = replicate(s, [&](Rng &rng, std::size_t rep) {
    const double js = 0.5 * half(f, g, rng, s.mc_samples, excluded[rep]) +
                      0.5 * half(g, f, rng, s.mc_samples, excluded[rep]);
    return std::copysign(std::sqrt(std::abs(js)), js);
  });
  DivergenceValue out{r.mean, r.std_error, Measure::JSD, 0};
  for (auto e : excluded)
    out.excluded += e;
  return out;
}

DivergenceValue jsd_extended(const ClusterModel &f, const ClusterModel &g,
                             const EstimatorSettings &s) {
  require_same_dim(f, g);
  const auto r = replicate(s, [&](Rng &rng, std::size_t) {
    const Eigen::MatrixXd u = sample_equal_mixture(f, g, rng, s.mc_samples);
    const Eigen::VectorXd lf = log_density_rows(f, u);
    const Eigen::VectorXd lg = log_density_rows(g, u);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      sum += extended_js_term(lf[i], lg[i]);
    const double js = sum / (2.0 * static_cast<double>(s.mc_samples));
    return std::sqrt(std::clamp(js, 0.0, 1.0));
  });
  return {r.mean, r.std_error, Measure::JSDe, 0};
}

} // namespace clusterdist
