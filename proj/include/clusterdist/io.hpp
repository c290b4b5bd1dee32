#pragma once

#include "clusterdist/distributions.hpp"
#include "clusterdist/mixture_fit.hpp"

#include <Eigen/Core>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace clusterdist {

/// Malformed or unusable input (bad CSV cell, wrong shape, bad model file).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// RFC 4180 records: comma separated, optional double quotes with "" escapes,
/// LF or CRLF line ends. A leading UTF-8 byte order mark is dropped.
[[nodiscard]] std::vector<std::vector<std::string>> parse_csv_records(std::istream &in);

struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values; // rows x header.size()
};

/// Header row then numeric rows. Errors name the 1-based line and column.
[[nodiscard]] NumericTable parse_numeric_csv(std::istream &in, const std::string &source);
[[nodiscard]] NumericTable read_numeric_csv(const std::filesystem::path &path);

/// Integer labels from the `label` column, or from the only column.
[[nodiscard]] std::vector<int> read_labels_csv(const std::filesystem::path &path);

/// 17 significant digits (reads back to the same double); non-finite values as "NA".
[[nodiscard]] std::string format_double(double x);

/// Fields are quoted only when they contain a comma, quote or line break.
void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows);

struct FitSummary {
  std::size_t k = 0;
  std::size_t n = 0;
  double log_likelihood = 0.0;
  double bic = 0.0;
  double aic = 0.0;
  double icl = 0.0;
  std::uint64_t seed = 0;
  std::string criterion = "bic";
};

struct ModelComponent {
  double weight = 1.0;
  ClusterModel model;
};

/// Contents of model.json.
struct ModelFile {
  std::vector<std::string> columns;
  std::vector<ModelComponent> components;
  std::optional<FitSummary> fit;

  [[nodiscard]] Eigen::Index dimension() const;
  [[nodiscard]] bool all_gaussian() const;
  /// Throws DataError unless every component is Gaussian.
  [[nodiscard]] GaussianMixture as_gaussian_mixture() const;
};

[[nodiscard]] ModelFile model_file_from(const GaussianMixture &mixture,
                                        std::vector<std::string> columns,
                                        std::optional<FitSummary> fit = std::nullopt);

[[nodiscard]] std::string model_to_json(const ModelFile &model);
[[nodiscard]] ModelFile model_from_json(const std::string &text);
void write_model(const std::filesystem::path &path, const ModelFile &model);
[[nodiscard]] ModelFile read_model(const std::filesystem::path &path);

/// Whole file as a string; DataError if it cannot be opened.
[[nodiscard]] std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace clusterdist
