#include "clusterdist/io.hpp"

#include <cmath>
#include <doctest.h>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <sstream>

using namespace clusterdist;

namespace {

NumericTable parse(const std::string &text) {
  std::istringstream in(text);
  return parse_numeric_csv(in, "input.csv");
}

std::string parse_error(const std::string &text) {
  try {
    (void)parse(text);
  } catch (const DataError &e) {
    return e.what();
  }
  return "";
}

std::filesystem::path tmp_dir() {
  const std::filesystem::path dir = std::filesystem::path(CLUSTERDIST_TEST_TMP) / "io";
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("csv records with quotes and line ends") {
  std::istringstream in("\xEF\xBB\xBF"
                        "a,\"b,c\",\"say \"\"hi\"\"\"\r\n"
                        "1,\"multi\nline\",\r\n");
  const auto rec = parse_csv_records(in);
  REQUIRE(rec.size() == 2);
  CHECK(rec[0] == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  CHECK(rec[1] == std::vector<std::string>{"1", "multi\nline", ""});
}

TEST_CASE("numeric csv") {
  const auto t = parse("x,y\n1,2.5\n-3e2, 4\n");
  CHECK(t.header == std::vector<std::string>{"x", "y"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(0, 1) == 2.5);
  CHECK(t.values(1, 0) == -300.0);
  CHECK(t.values(1, 1) == 4.0);
}

TEST_CASE("numeric csv errors locate the cell") {
  const auto msg = parse_error("x,y\n1,2\n3,abc\n");
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(msg.find("column 2") != std::string::npos);
  CHECK(msg.find("\"y\"") != std::string::npos);
  CHECK(parse_error("").find("empty") != std::string::npos);
  CHECK_FALSE(parse_error("x,y\n1,2,3\n").empty());
  CHECK_FALSE(parse_error("x,y\n1,nan\n").empty());
  CHECK_FALSE(parse_error("x,y\n1,inf\n").empty());
  CHECK_FALSE(parse_error("x,y\n1,\n").empty());
  CHECK_FALSE(parse_error("x,y\n").empty());
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)})
    CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "NA");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "NA");
}

TEST_CASE("labels") {
  const auto dir = tmp_dir();
  write_text(dir / "labels.csv", "row,label\n1,2\n2,1\n3,2\n");
  CHECK(read_labels_csv(dir / "labels.csv") == std::vector<int>{2, 1, 2});
  write_text(dir / "single.csv", "cluster\n3\n1\n");
  CHECK(read_labels_csv(dir / "single.csv") == std::vector<int>{3, 1});
  write_text(dir / "bad.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS((void)read_labels_csv(dir / "bad.csv"), DataError);
  write_text(dir / "frac.csv", "label\n1.5\n");
  CHECK_THROWS_AS((void)read_labels_csv(dir / "frac.csv"), DataError);
  CHECK_THROWS_AS((void)read_text(dir / "missing.csv"), DataError);
}

TEST_CASE("write_csv quotes only when needed") {
  const auto dir = tmp_dir();
  write_csv(dir / "out.csv", {"a", "b"}, {{"1", "x,y"}, {"say \"hi\"", "plain"}});
  CHECK(read_text(dir / "out.csv") == "a,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",plain\n");
}

TEST_CASE("model file round trip keeps every double") {
  GaussianMixture mix;
  mix.components.push_back(
      {1.0 / 3.0, {Eigen::Vector2d(0.1, -1.0 / 7.0), Eigen::Matrix2d{{2.0 / 3.0, 0.1}, {0.1, 1.7}}}});
  mix.components.push_back(
      {2.0 / 3.0, {Eigen::Vector2d(5.0, 1e-12), Eigen::Matrix2d{{1.0, -0.3}, {-0.3, 0.9}}}});
  FitSummary fit{2, 100, -123.456, 1.5, 2.5, 3.5, 42, "bic"};
  const auto file = model_file_from(mix, {"x", "y"}, fit);
  const auto back = model_from_json(model_to_json(file));
  CHECK(back.columns == file.columns);
  REQUIRE(back.fit.has_value());
  CHECK(back.fit->log_likelihood == fit.log_likelihood);
  CHECK(back.fit->seed == 42);
  const auto m2 = back.as_gaussian_mixture();
  REQUIRE(m2.k() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(m2.components[c].weight == mix.components[c].weight);
    CHECK(m2.components[c].params.mean == mix.components[c].params.mean);
    CHECK(m2.components[c].params.covariance == mix.components[c].params.covariance);
  }
  CHECK(model_to_json(back) == model_to_json(file));
}

TEST_CASE("skewed components in model files") {
  ModelFile f;
  f.columns = {"a", "b"};
  GHParams p{Eigen::Vector2d(0, 1), Eigen::Matrix2d{{4, 1.2}, {1.2, 4}}, Eigen::Vector2d(2, -2),
             1.0, 1.0};
  f.components.push_back({0.5, GeneralizedHyperbolic(p)});
  f.components.push_back({0.5, Gaussian({Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()})});
  const auto back = model_from_json(model_to_json(f));
  CHECK_FALSE(back.all_gaussian());
  CHECK_THROWS_AS((void)back.as_gaussian_mixture(), DataError);
  const auto &q = std::get<GeneralizedHyperbolic>(back.components[0].model).params();
  CHECK(q.skewness == p.skewness);
  CHECK(q.scale == p.scale);
}

TEST_CASE("malformed model files") {
  CHECK_THROWS_AS((void)model_from_json("not json"), DataError);
  CHECK_THROWS_AS((void)model_from_json("{}"), DataError);
  GaussianMixture mix;
  mix.components.push_back({1.0, {Eigen::Vector2d(0, 0), Eigen::Matrix2d::Identity()}});
  const auto good = nlohmann::json::parse(model_to_json(model_file_from(mix, {"x", "y"})));
  CHECK_NOTHROW((void)model_from_json(good.dump()));
  auto bad = good;
  bad["components"][0]["weight"] = 0.5;
  CHECK_THROWS_AS((void)model_from_json(bad.dump()), DataError);
  bad = good;
  bad["components"][0]["covariance"] = {1.0, 2.0, 2.0, 1.0};
  CHECK_THROWS_AS((void)model_from_json(bad.dump()), DataError);
  bad = good;
  bad["components"][0]["family"] = "cauchy";
  CHECK_THROWS_AS((void)model_from_json(bad.dump()), DataError);
  bad = good;
  bad["components"][0]["mean"] = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS((void)model_from_json(bad.dump()), DataError);
  bad = good;
  bad["version"] = 99;
  CHECK_THROWS_AS((void)model_from_json(bad.dump()), DataError);
}
}
