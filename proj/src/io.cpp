#include "clusterdist/io.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace clusterdist {
namespace {

using json = nlohmann::ordered_json;

constexpr const char *kFormatName = "clusterdist-model";
constexpr int kFormatVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double &out) {
  text = trim(text);
  if (text.empty())
    return false;
  if (text.front() == '+')
    text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_int(std::string_view text, int &out) {
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec == std::errc() && ptr == text.data() + text.size())
    return true;
  // Accept integral floats such as "2.0".
  double d = 0.0;
  if (parse_double(text, d) && d == std::round(d) && std::abs(d) < 1e9) {
    out = static_cast<int>(d);
    return true;
  }
  return false;
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"')
      q += '"';
    q += c;
  }
  return q + '"';
}

json vector_json(const Eigen::VectorXd &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

json matrix_json(const Eigen::MatrixXd &m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      a.push_back(m(i, j));
  return a;
}

const json &field(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key))
    throw DataError(fmt::format("model file: {} is missing \"{}\"", where, key));
  return obj.at(key);
}

double number(const json &obj, const char *key, const std::string &where) {
  const json &v = field(obj, key, where);
  if (!v.is_number())
    throw DataError(fmt::format("model file: {}.{} must be a number", where, key));
  return v.get<double>();
}

Eigen::VectorXd vector_from(const json &obj, const char *key, Eigen::Index d,
                            const std::string &where) {
  const json &v = field(obj, key, where);
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != d)
    throw DataError(fmt::format("model file: {}.{} must be an array of {} numbers", where, key, d));
  Eigen::VectorXd out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number())
      throw DataError(fmt::format("model file: {}.{}[{}] is not a number", where, key, i));
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

Eigen::MatrixXd matrix_from(const json &obj, const char *key, Eigen::Index d,
                            const std::string &where) {
  const Eigen::VectorXd flat = vector_from(obj, key, d * d, where);
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      m(i, j) = flat(i * d + j);
  return m;
}

} // namespace

std::vector<std::vector<std::string>> parse_csv_records(std::istream &in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (text.rfind("\xEF\xBB\xBF", 0) == 0)
    text.erase(0, 3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  bool any = false; // current record has content
  std::size_t i = 0;
  std::size_t line = 1;
  auto end_record = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    if (any || record.size() > 1 || !record.front().empty())
      records.push_back(std::move(record));
    record.clear();
    any = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        if (c == '\n')
          ++line;
        cell += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      if (!trim(cell).empty())
        throw DataError(fmt::format("CSV line {}: quote inside an unquoted field", line));
      cell.clear();
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the '\n' branch
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      cell += c;
    }
    ++i;
  }
  if (quoted)
    throw DataError(fmt::format("CSV line {}: unterminated quoted field", line));
  if (any || !cell.empty())
    end_record();
  return records;
}

NumericTable parse_numeric_csv(std::istream &in, const std::string &source) {
  const auto records = parse_csv_records(in);
  if (records.empty())
    throw DataError(fmt::format("{}: empty file (a header row is required)", source));
  NumericTable t;
  for (const auto &h : records.front())
    t.header.emplace_back(trim(h));
  const std::size_t cols = t.header.size();
  const std::size_t rows = records.size() - 1;
  if (rows == 0)
    throw DataError(fmt::format("{}: no data rows after the header", source));
  t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto &rec = records[r + 1];
    if (rec.size() != cols)
      throw DataError(fmt::format("{}: row {} has {} fields, header has {}", source, r + 2,
                                  rec.size(), cols));
    for (std::size_t c = 0; c < cols; ++c) {
      double v = 0.0;
      if (!parse_double(rec[c], v))
        throw DataError(fmt::format("{}: row {}, column {} (\"{}\"): not a finite number: \"{}\"",
                                    source, r + 2, c + 1, t.header[c], rec[c]));
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return t;
}

NumericTable read_numeric_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(fmt::format("cannot open {}", path.string()));
  return parse_numeric_csv(in, path.string());
}

std::vector<int> read_labels_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(fmt::format("cannot open {}", path.string()));
  const auto records = parse_csv_records(in);
  if (records.size() < 2)
    throw DataError(fmt::format("{}: expected a header and at least one label", path.string()));
  const auto &header = records.front();
  std::size_t col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (trim(header[c]) == "label")
      col = c;
  if (col == header.size()) {
    if (header.size() != 1)
      throw DataError(fmt::format("{}: no \"label\" column", path.string()));
    col = 0;
  }
  std::vector<int> labels;
  for (std::size_t r = 1; r < records.size(); ++r) {
    int v = 0;
    if (col >= records[r].size() || !parse_int(records[r][col], v))
      throw DataError(fmt::format("{}: row {}, column {}: not an integer label", path.string(),
                                  r + 1, col + 1));
    labels.push_back(v);
  }
  return labels;
}

std::string format_double(double x) {
  if (!std::isfinite(x))
    return "NA";
  return fmt::format("{:.17g}", x);
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows) {
  std::string out;
  auto line = [&](const std::vector<std::string> &fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i)
        out += ',';
      out += csv_field(fields[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto &r : rows)
    line(r);
  write_text(path, out);
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out)
    throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

Eigen::Index ModelFile::dimension() const {
  if (components.empty())
    throw DataError("model has no components");
  return clusterdist::dimension(components.front().model);
}

bool ModelFile::all_gaussian() const {
  for (const auto &c : components)
    if (!is_gaussian(c.model))
      return false;
  return true;
}

GaussianMixture ModelFile::as_gaussian_mixture() const {
  GaussianMixture gm;
  for (const auto &c : components) {
    if (!is_gaussian(c.model))
      throw DataError("model has non-Gaussian components");
    gm.components.push_back({c.weight, std::get<Gaussian>(c.model).params()});
  }
  return gm;
}

ModelFile model_file_from(const GaussianMixture &mixture, std::vector<std::string> columns,
                          std::optional<FitSummary> fit) {
  ModelFile mf;
  mf.columns = std::move(columns);
  for (const auto &c : mixture.components)
    mf.components.push_back({c.weight, Gaussian(c.params)});
  mf.fit = std::move(fit);
  return mf;
}

std::string model_to_json(const ModelFile &model) {
  json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["dimension"] = model.dimension();
  j["k"] = model.components.size();
  j["columns"] = model.columns;
  json comps = json::array();
  for (const auto &c : model.components) {
    json e;
    e["weight"] = c.weight;
    if (const auto *g = std::get_if<Gaussian>(&c.model)) {
      e["family"] = "gaussian";
      e["mean"] = vector_json(g->params().mean);
      e["covariance"] = matrix_json(g->params().covariance);
    } else {
      const auto &p = std::get<GeneralizedHyperbolic>(c.model).params();
      e["family"] = "generalized_hyperbolic";
      e["location"] = vector_json(p.location);
      e["scale"] = matrix_json(p.scale);
      e["skewness"] = vector_json(p.skewness);
      e["index"] = p.index;
      e["concentration"] = p.concentration;
    }
    comps.push_back(std::move(e));
  }
  j["components"] = std::move(comps);
  if (model.fit) {
    const auto &f = *model.fit;
    j["fit"] = {{"k", f.k},     {"n", f.n},     {"log_likelihood", f.log_likelihood},
                {"bic", f.bic}, {"aic", f.aic}, {"icl", f.icl},
                {"seed", f.seed}, {"criterion", f.criterion}};
  }
  return j.dump(2) + "\n";
}

ModelFile model_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw DataError(fmt::format("model file: invalid JSON: {}", e.what()));
  }
  if (!j.is_object() || j.value("format", std::string{}) != kFormatName)
    throw DataError(fmt::format("model file: \"format\" must be \"{}\"", kFormatName));
  if (j.value("version", 0) != kFormatVersion)
    throw DataError(fmt::format("model file: unsupported version (expected {})", kFormatVersion));
  const json &dj = field(j, "dimension", "root");
  if (!dj.is_number_integer() || dj.get<long long>() < 1)
    throw DataError("model file: \"dimension\" must be a positive integer");
  const auto d = static_cast<Eigen::Index>(dj.get<long long>());
  const json &comps = field(j, "components", "root");
  if (!comps.is_array() || comps.empty())
    throw DataError("model file: \"components\" must be a non-empty array");
  if (j.contains("k") && j["k"] != comps.size())
    throw DataError("model file: \"k\" does not match the number of components");

  ModelFile mf;
  if (j.contains("columns")) {
    for (const auto &c : j["columns"]) {
      if (!c.is_string())
        throw DataError("model file: \"columns\" must hold strings");
      mf.columns.push_back(c.get<std::string>());
    }
    if (!mf.columns.empty() && static_cast<Eigen::Index>(mf.columns.size()) != d)
      throw DataError("model file: \"columns\" length differs from \"dimension\"");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const json &c = comps[i];
    const std::string where = fmt::format("components[{}]", i);
    const double w = number(c, "weight", where);
    if (!(w > 0.0) || w > 1.0)
      throw DataError(fmt::format("model file: {}.weight must lie in (0, 1]", where));
    total += w;
    const json &fam = field(c, "family", where);
    try {
      if (fam == "gaussian") {
        mf.components.push_back(
            {w, Gaussian({vector_from(c, "mean", d, where), matrix_from(c, "covariance", d, where)})});
      } else if (fam == "generalized_hyperbolic") {
        GHParams p;
        p.location = vector_from(c, "location", d, where);
        p.scale = matrix_from(c, "scale", d, where);
        p.skewness = vector_from(c, "skewness", d, where);
        p.index = number(c, "index", where);
        p.concentration = number(c, "concentration", where);
        mf.components.push_back({w, GeneralizedHyperbolic(p)});
      } else {
        throw DataError(fmt::format("model file: {}.family \"{}\" is not supported", where,
                                    fam.is_string() ? fam.get<std::string>() : fam.dump()));
      }
    } catch (const FactorizationError &e) {
      throw DataError(fmt::format("model file: {}: {}", where, e.what()));
    } catch (const std::invalid_argument &e) {
      throw DataError(fmt::format("model file: {}: {}", where, e.what()));
    }
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw DataError(fmt::format("model file: weights sum to {}, not 1", total));
  if (j.contains("fit") && j["fit"].is_object()) {
    const json &f = j["fit"];
    FitSummary s;
    s.k = f.value("k", std::size_t{0});
    s.n = f.value("n", std::size_t{0});
    s.log_likelihood = f.value("log_likelihood", 0.0);
    s.bic = f.value("bic", 0.0);
    s.aic = f.value("aic", 0.0);
    s.icl = f.value("icl", 0.0);
    s.seed = f.value("seed", std::uint64_t{0});
    s.criterion = f.value("criterion", std::string("bic"));
    mf.fit = s;
  }
  return mf;
}

void write_model(const std::filesystem::path &path, const ModelFile &model) {
  write_text(path, model_to_json(model));
}

ModelFile read_model(const std::filesystem::path &path) { return model_from_json(read_text(path)); }

} // namespace clusterdist
