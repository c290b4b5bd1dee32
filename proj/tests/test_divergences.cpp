#include "clusterdist/divergences.hpp"
#include "clusterdist/scenarios.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <doctest.h>

using namespace clusterdist;

namespace {

GaussianParams iso(Eigen::Vector2d mean, double var = 0.3) {
  return {mean, var * Eigen::Matrix2d::Identity()};
}

ClusterModel gauss(Eigen::Vector2d mean, double var = 0.3) { return Gaussian(iso(mean, var)); }

// exp(-MD^2 / 8) for a common covariance.
double gaussian_ba(const GaussianParams &f, const GaussianParams &g) {
  const Eigen::VectorXd diff = f.mean - g.mean;
  return std::exp(-0.125 * diff.dot(f.covariance.inverse() * diff));
}

} // namespace

TEST_SUITE("divergences") {

TEST_CASE("Mahalanobis reference values and symmetry") {
  const auto f = iso({1.0, 1.0});
  const auto g = iso({0.0, 0.0});
  CHECK(mahalanobis(f, g).value == doctest::Approx(std::sqrt(2.0 / 0.3)).epsilon(1e-12));
  CHECK(mahalanobis(f, g).value == doctest::Approx(2.582).epsilon(1e-3));
  CHECK(mahalanobis(f, g).value == mahalanobis(g, f).value);
  const GaussianParams h{Eigen::Vector2d(0.0, 0.0), Eigen::Matrix2d{{5.0, 1.0}, {1.0, 2.0}}};
  CHECK(mahalanobis(g, h).value == 0.0);
  CHECK(mahalanobis(iso({0, 0}), iso({0, 0}, 512 * 0.3)).value == 0.0);
}

TEST_CASE("Mahalanobis pooled covariance weights") {
  const GaussianParams f{Eigen::Vector2d(2.0, 0.0), Eigen::Matrix2d::Identity()};
  const GaussianParams g{Eigen::Vector2d(0.0, 0.0), 3.0 * Eigen::Matrix2d::Identity()};
  // Pooled variance 0.25 * 1 + 0.75 * 3 = 2.5.
  CHECK(mahalanobis(f, g, {0.25, 0.75}).value == doctest::Approx(2.0 / std::sqrt(2.5)).epsilon(1e-12));
  CHECK(mahalanobis(f, g, {1.0, 3.0}).value == doctest::Approx(2.0 / std::sqrt(2.5)).epsilon(1e-12));
  CHECK_THROWS_AS((void)mahalanobis(f, g, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)mahalanobis(f, g, {-1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("per-sample terms are bounded") {
  for (double df : {-800.0, -30.0, -1.0, 0.0, 1e-12, 2.0, 40.0, 900.0}) {
    const double a = affinity_term(df, 0.0);
    const double e = extended_js_term(df, 0.0);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    CHECK(e >= 0.0);
    CHECK(e <= 2.0);
    CHECK(std::isfinite(plugin_js_term(df, 0.0)));
    CHECK(plugin_js_term(df, 0.0) <= 1.0);
  }
  CHECK(affinity_term(0.3, 0.3) == 1.0);
  CHECK(extended_js_term(0.3, 0.3) == 0.0);
  // Direct forms at moderate ratios.
  const double f = 0.7, g = 0.2;
  CHECK(affinity_term(std::log(f), std::log(g)) ==
        doctest::Approx(2.0 * std::sqrt(f * g) / (f + g)).epsilon(1e-14));
  const double a = 2 * f / (f + g), b = 2 * g / (f + g);
  CHECK(extended_js_term(std::log(f), std::log(g)) ==
        doctest::Approx(a * std::log2(a) + b * std::log2(b)).epsilon(1e-13));
  CHECK(plugin_js_term(std::log(f), std::log(g)) == doctest::Approx(std::log2(a)).epsilon(1e-13));
}

TEST_CASE("identical models give exact zeros") {
  const EstimatorSettings s{2000, 9, 3};
  for (const ClusterModel &m :
       {gauss({1.0, 2.0}), scenario3_models(4.0, 0).first}) {
    const auto ba = bhattacharyya_mc(m, m, s);
    CHECK(ba.value == 1.0);
    CHECK(ba.std_error == 0.0);
    const auto hd = hellinger(m, m, s);
    CHECK(hd.value == 0.0);
    CHECK(hd.std_error == 0.0);
    const auto je = jsd_extended(m, m, s);
    CHECK(je.value == 0.0);
    CHECK(je.std_error == 0.0);
    CHECK(std::abs(jsd_plugin(m, m, s).value) < 0.02);
  }
}

TEST_CASE("Bhattacharyya and Hellinger against the Gaussian closed form") {
  const auto f = iso({1.0, 1.0});
  const auto g = iso({0.0, 0.0});
  const double ba = gaussian_ba(f, g);
  CHECK(ba == doctest::Approx(0.4346).epsilon(1e-3));
  const EstimatorSettings s{10000, 4, 1};
  CHECK(std::abs(bhattacharyya_mc(Gaussian(f), Gaussian(g), s).value - ba) < 0.03);
  CHECK(std::abs(hellinger(Gaussian(f), Gaussian(g), s).value - std::sqrt(1.0 - ba)) < 0.02);

  const auto far = gauss({6.0, 6.0});
  CHECK(bhattacharyya_mc(far, Gaussian(g), s).value < 0.001);
  CHECK(hellinger(far, Gaussian(g), s).value > 0.999);
}

TEST_CASE("Hellinger matches the closed form within three standard errors") {
  Rng rng = make_rng(404);
  std::normal_distribution<double> z;
  int within = 0;
  const int pairs = 20;
  for (int t = 0; t < pairs; ++t) {
    const Eigen::Index d = 1 + t % 3;
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        a(i, j) = z(rng);
    const Eigen::MatrixXd c = a * a.transpose() + 0.3 * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd m1(d), m2(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      m1(i) = z(rng);
      m2(i) = m1(i) + 0.8 * z(rng);
    }
    const GaussianParams f{m1, c}, g{m2, c};
    const double truth = std::sqrt(1.0 - gaussian_ba(f, g));
    const auto est = hellinger(Gaussian(f), Gaussian(g), {5000, derive_seed(1, {std::uint64_t(t)}), 5});
    if (std::abs(est.value - truth) <= 3.0 * est.std_error)
      ++within;
  }
  CHECK(within >= 17);
}

TEST_CASE("symmetry in distribution") {
  const auto f = gauss({0.0, 0.0});
  const auto g = gauss({0.7, -0.3}, 0.8);
  const EstimatorSettings s{4000, 12, 5};
  auto overlap = [](const DivergenceValue &a, const DivergenceValue &b) {
    return std::abs(a.value - b.value) <= 3.0 * std::hypot(a.std_error, b.std_error) + 1e-12;
  };
  CHECK(overlap(hellinger(f, g, s), hellinger(g, f, s)));
  CHECK(overlap(jsd_extended(f, g, s), jsd_extended(g, f, s)));
  CHECK(overlap(jsd_plugin(f, g, s), jsd_plugin(g, f, s)));
  CHECK(mahalanobis(std::get<Gaussian>(f).params(), std::get<Gaussian>(g).params()).value ==
        mahalanobis(std::get<Gaussian>(g).params(), std::get<Gaussian>(f).params()).value);
}

TEST_CASE("extended JSD: range and large-sample self-consistency") {
  const auto f = gauss({1.0, 1.0});
  const auto g = gauss({0.0, 0.0});
  const double ref = jsd_extended(f, g, {1000000, 123, 1}).value;
  const double est = jsd_extended(f, g, {1000, 5, 1}).value;
  CHECK(est > 0.0);
  CHECK(est < 1.0);
  CHECK(std::abs(est - ref) < 0.03);
}

TEST_CASE("plug-in JSD approaches one bit for far-apart Gaussians") {
  const auto f = gauss({0.0, 0.0});
  const auto g = gauss({8.0, 8.0});
  CHECK(jsd_plugin(f, g, {5000, 2, 1}).value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(jsd_extended(f, g, {5000, 2, 1}).value == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("extended JSD is non-negative on every skew-rotation configuration") {
  for (double d : {2.0, 4.0, 6.0})
    for (int k = 0; k <= 8; ++k) {
      const auto [f, g] = scenario3_models(d, k);
      const auto v = jsd_extended(f, g, {2000, derive_seed(3, {std::uint64_t(k)}), 2});
      CHECK(v.value >= 0.0);
      CHECK(v.value <= 1.0);
    }
}

TEST_CASE("HD and JSD_e increase with the mean gap") {
  std::vector<double> hd, je;
  for (int i = 0; i <= 12; ++i) {
    const auto [f, g] = scenario1_models(0.5 * i);
    hd.push_back(hellinger(f, g, {1000, 77, 20}).value);
    je.push_back(jsd_extended(f, g, {1000, 78, 20}).value);
  }
  for (std::size_t i = 1; i < hd.size(); ++i) {
    CHECK(hd[i] >= hd[i - 1] - 0.005);
    CHECK(je[i] >= je[i - 1] - 0.005);
  }
}

TEST_CASE("replicate standard error and determinism") {
  const auto f = gauss({0.0, 0.0});
  const auto g = gauss({1.0, 0.0});
  const auto a = hellinger(f, g, {1000, 8, 4});
  const auto b = hellinger(f, g, {1000, 8, 4});
  CHECK(a.value == b.value);
  CHECK(a.std_error > 0.0);
  CHECK(hellinger(f, g, {1000, 8, 1}).std_error == 0.0);
  CHECK_THROWS_AS((void)hellinger(f, g, {1, 8, 1}), std::invalid_argument);
  CHECK_THROWS_AS((void)hellinger(f, g, {10, 8, 0}), std::invalid_argument);
}

TEST_CASE("mixture sampler draws each component about half the time") {
  const auto f = gauss({-50.0, 0.0});
  const auto g = gauss({50.0, 0.0});
  Rng rng = make_rng(1);
  const Eigen::MatrixXd u = sample_equal_mixture(f, g, rng, 20000);
  const double share = (u.col(0).array() < 0.0).cast<double>().mean();
  CHECK(std::abs(share - 0.5) < 0.015);
}

TEST_CASE("dimension mismatch is rejected") {
  const ClusterModel a = Gaussian({Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()});
  const ClusterModel b = Gaussian({Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity()});
  CHECK_THROWS_AS((void)hellinger(a, b, {}), std::invalid_argument);
}
}
