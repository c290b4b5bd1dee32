#include "cli_support.hpp"
#include "clusterdist/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <doctest.h>
#include <json.hpp>

using namespace clusterdist;
using cli_support::fresh_dir;
using cli_support::run;
using cli_support::slurp;

namespace {

// Two unit-variance blobs centred at (0, 0) and (3, 3), 200 rows each.
Eigen::MatrixXd blobs(std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const Gaussian a({Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()});
  const Gaussian b({Eigen::Vector2d(3, 3), Eigen::Matrix2d::Identity()});
  Eigen::MatrixXd x(400, 2);
  x.topRows(200) = a.sample(rng, 200);
  x.bottomRows(200) = b.sample(rng, 200);
  return x;
}

void write_matrix(const std::filesystem::path &p, const Eigen::MatrixXd &x) {
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    rows.push_back({format_double(x(i, 0)), format_double(x(i, 1))});
  write_csv(p, {"x", "y"}, rows);
}

ModelFile gaussian_model(const std::vector<Eigen::Vector2d> &means) {
  GaussianMixture mix;
  for (const auto &m : means)
    mix.components.push_back({1.0 / static_cast<double>(means.size()),
                              {m, Eigen::Matrix2d::Identity()}});
  return model_file_from(mix, {"x", "y"});
}

double entry(const nlohmann::json &pair, const std::string &measure) {
  return pair["measures"][measure]["value"].get<double>();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("argument and input errors exit with 2") {
  const auto dir = fresh_dir("cli_errors");
  CHECK(run("scenario --which 9 --out \"" + (dir / "s").string() + "\"", dir) == 2);
  CHECK(run("no-such-command", dir) == 2);
  write_text(dir / "empty.csv", "");
  CHECK(run("fit --data \"" + (dir / "empty.csv").string() + "\" --out \"" +
                (dir / "f").string() + "\"",
            dir) == 2);
  CHECK(slurp(dir / "stderr.txt").find("empty") != std::string::npos);
  write_text(dir / "text.csv", "x,y\n1,2\n3,oops\n4,5\n");
  CHECK(run("fit --data \"" + (dir / "text.csv").string() + "\" --out \"" +
                (dir / "f").string() + "\"",
            dir) == 2);
  CHECK(slurp(dir / "stderr.txt").find("row 3") != std::string::npos);
  write_text(dir / "tiny.csv", "x,y\n1,2\n3,4\n5,7\n");
  CHECK(run("fit --data \"" + (dir / "tiny.csv").string() + "\" --kmax 3 --out \"" +
                (dir / "f").string() + "\"",
            dir) == 2);
  CHECK(run("grid --model \"" + (dir / "missing.json").string() + "\" --out \"" +
                (dir / "g.csv").string() + "\"",
            dir) == 2);
}

TEST_CASE("scenario output is reproducible") {
  const auto dir = fresh_dir("cli_scenario");
  const std::string common = " --reps 2 --n 60 --mc-n 200 --wd-n 60 --em-starts 2 --seed 17";
  REQUIRE(run("scenario --which 1 --out \"" + (dir / "a").string() + "\"" + common, dir) == 0);
  REQUIRE(run("scenario --which 1 --out \"" + (dir / "b").string() + "\"" + common, dir) == 0);
  for (const char *f : {"true.csv", "empirical.csv", "summary.json"}) {
    CHECK(std::filesystem::exists(dir / "a" / f));
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["seed"] == 17);
  CHECK(summary["points"].size() == 13);

  REQUIRE(run("scenario --which 3 --reps 1 --n 40 --mc-n 200 --wd-n 40 --seed 5 --out \"" +
                  (dir / "c").string() + "\"",
              dir) == 0);
  CHECK(std::filesystem::exists(dir / "c" / "true.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "c" / "empirical.csv"));
  const auto s3 = nlohmann::json::parse(slurp(dir / "c" / "summary.json"));
  CHECK(s3["empirical"] == "not_applicable");
  CHECK(s3["points"][0]["true"]["MD"] == "not_applicable");
}

TEST_CASE("missing seed is generated and recorded") {
  const auto dir = fresh_dir("cli_seed");
  REQUIRE(run("scenario --which 2 --reps 1 --n 30 --mc-n 50 --wd-n 30 --em-starts 1 --out \"" +
                  (dir / "a").string() + "\"",
              dir) == 0);
  CHECK(slurp(dir / "stderr.txt").find("seed") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
  CHECK(summary["seed"].is_number_unsigned());
}

TEST_CASE("fit selects two blobs") {
  const auto dir = fresh_dir("cli_fit");
  const Eigen::MatrixXd x = blobs(1);
  write_matrix(dir / "blobs.csv", x);
  REQUIRE(run("fit --data \"" + (dir / "blobs.csv").string() + "\" --kmin 1 --kmax 4 --seed 3 "
                  "--out \"" + (dir / "out").string() + "\"",
              dir) == 0);
  const auto model = read_model(dir / "out" / "model.json");
  CHECK(model.components.size() == 2);
  REQUIRE(model.fit.has_value());
  CHECK(model.fit->k == 2);
  CHECK(model.columns == std::vector<std::string>{"x", "y"});
  const auto criteria = slurp(dir / "out" / "criteria.csv");
  CHECK(std::count(criteria.begin(), criteria.end(), '\n') == 5);
  const auto assignments = slurp(dir / "out" / "assignments.csv");
  CHECK(std::count(assignments.begin(), assignments.end(), '\n') == 401);

  REQUIRE(run("fit --data \"" + (dir / "blobs.csv").string() + "\" --kmin 1 --kmax 1 --seed 3 "
                  "--out \"" + (dir / "one").string() + "\"",
              dir) == 0);
  const auto one = read_model(dir / "one" / "model.json").as_gaussian_mixture();
  REQUIRE(one.k() == 1);
  const Eigen::Vector2d mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::Matrix2d cov = centered.transpose() * centered / 400.0;
  CHECK((one.components[0].params.mean - mean).norm() < 1e-10);
  CHECK((one.components[0].params.covariance - cov).norm() < 1e-9);
}

TEST_CASE("dist reports every pair") {
  const auto dir = fresh_dir("cli_dist");
  write_model(dir / "two.json", gaussian_model({{0, 0}, {3, 3}}));
  REQUIRE(run("dist --model \"" + (dir / "two.json").string() + "\" --seed 4 --out \"" +
                  (dir / "two").string() + "\"",
              dir) == 0);
  const auto two = nlohmann::json::parse(slurp(dir / "two" / "distances.json"));
  REQUIRE(two["pairs"].size() == 1);
  CHECK(entry(two["pairs"][0], "MD") == doctest::Approx(std::sqrt(18.0)).epsilon(1e-12));
  CHECK(entry(two["pairs"][0], "WD") == doctest::Approx(std::sqrt(18.0)).epsilon(0.10));

  write_model(dir / "three.json", gaussian_model({{0, 0}, {0, 0}, {5, 0}}));
  REQUIRE(run("dist --model \"" + (dir / "three.json").string() + "\" --seed 4 --out \"" +
                  (dir / "three").string() + "\"",
              dir) == 0);
  const auto three = nlohmann::json::parse(slurp(dir / "three" / "distances.json"));
  REQUIRE(three["pairs"].size() == 3);
  const auto &same = three["pairs"][0];
  CHECK(same["first"] == 1);
  CHECK(same["second"] == 2);
  CHECK(entry(same, "MD") == 0.0);
  CHECK(entry(same, "HD") == 0.0);
  CHECK(entry(same, "JSDe") == 0.0);
  const auto csv = slurp(dir / "three" / "distances.csv");
  CHECK(csv.rfind("pair,measure,value,stderr\n", 0) == 0);

  // Labels without data (or the reverse) are rejected.
  write_text(dir / "labels.csv", "label\n1\n2\n");
  CHECK(run("dist --model \"" + (dir / "two.json").string() + "\" --labels \"" +
                (dir / "labels.csv").string() + "\" --out \"" + (dir / "x").string() + "\"",
            dir) == 2);
}

TEST_CASE("dist with data adds the empirical indices") {
  const auto dir = fresh_dir("cli_dist_data");
  const Eigen::MatrixXd x = blobs(2);
  write_matrix(dir / "blobs.csv", x);
  std::string labels = "label\n";
  for (int i = 0; i < 400; ++i)
    labels += i < 200 ? "1\n" : "2\n";
  write_text(dir / "labels.csv", labels);
  write_model(dir / "m.json", gaussian_model({{0, 0}, {3, 3}}));
  REQUIRE(run("dist --model \"" + (dir / "m.json").string() + "\" --data \"" +
                  (dir / "blobs.csv").string() + "\" --labels \"" +
                  (dir / "labels.csv").string() + "\" --seed 1 --out \"" +
                  (dir / "out").string() + "\"",
              dir) == 0);
  const auto rep = nlohmann::json::parse(slurp(dir / "out" / "distances.json"));
  CHECK(entry(rep["pairs"][0], "AB") > 0.0);
  CHECK(entry(rep["pairs"][0], "SI") > 0.0);
  CHECK(rep["ari"].get<double>() > 0.9);
}

TEST_CASE("grid densities") {
  const auto dir = fresh_dir("cli_grid");
  GaussianMixture mix;
  mix.components.push_back({1.0, {Eigen::Vector2d(1.0, -2.0), Eigen::Matrix2d{{2.0, 0.6}, {0.6, 1.0}}}});
  write_model(dir / "m.json", model_file_from(mix, {"x", "y"}));

  REQUIRE(run("grid --model \"" + (dir / "m.json").string() + "\" --res 1 --out \"" +
                  (dir / "one.csv").string() + "\"",
              dir) == 0);
  const auto one = slurp(dir / "one.csv");
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);

  REQUIRE(run("grid --model \"" + (dir / "m.json").string() + "\" --res 101 --out \"" +
                  (dir / "g.csv").string() + "\"",
              dir) == 0);
  std::ifstream in(dir / "g.csv");
  const auto rec = parse_csv_records(in);
  REQUIRE(rec.size() == 1 + 101 * 101);
  CHECK(rec[0] == std::vector<std::string>{"x", "y", "component", "density", "method"});
  std::set<double> xs, ys;
  double best = -1.0, best_x = 0.0, best_y = 0.0, total = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    const double x = std::stod(rec[i][0]), y = std::stod(rec[i][1]), f = std::stod(rec[i][3]);
    CHECK(rec[i][4] == "exact_marginal");
    xs.insert(x);
    ys.insert(y);
    total += f;
    if (f > best) {
      best = f;
      best_x = x;
      best_y = y;
    }
  }
  REQUIRE(xs.size() == 101);
  REQUIRE(ys.size() == 101);
  CHECK(best_x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(best_y == doctest::Approx(-2.0).epsilon(1e-9));
  const double dx = *std::next(xs.begin()) - *xs.begin();
  const double dy = *std::next(ys.begin()) - *ys.begin();
  CHECK(total * dx * dy == doctest::Approx(1.0).epsilon(0.02));

  CHECK(run("grid --model \"" + (dir / "m.json").string() + "\" --dims 1,3 --out \"" +
                (dir / "bad.csv").string() + "\"",
            dir) == 2);
}
}
