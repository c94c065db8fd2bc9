#include "mnar/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mnar/error.hpp"

namespace mnar {

namespace {

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw std::invalid_argument("bad number");
  }
  return value;
}

[[noreturn]] void parse_failure(Index row, std::string_view column,
                                std::string_view what) {
  std::ostringstream msg;
  msg << "row " << row << ", column '" << column << "': " << what;
  throw Error(ErrorCode::kParse, msg.str());
}

}  // namespace

Dataset::Dataset(std::vector<int> r, std::vector<std::optional<double>> y,
                 Eigen::MatrixXd x, std::vector<std::string> covariate_names)
    : r_(std::move(r)), y_(std::move(y)), x_(std::move(x)),
      names_(std::move(covariate_names)) {
  const auto n = static_cast<std::size_t>(x_.rows());
  if (n == 0) throw Error(ErrorCode::kUsage, "dataset must have at least one row");
  if (r_.size() != n || y_.size() != n) {
    throw Error(ErrorCode::kUsage, "r, y and x must have the same number of rows");
  }
  if (names_.empty()) names_ = default_names(x_.cols());
  if (static_cast<Index>(names_.size()) != x_.cols()) {
    throw Error(ErrorCode::kUsage, "covariate name count does not match x");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (r_[i] != 0 && r_[i] != 1) {
      throw Error(ErrorCode::kParse, "row " + std::to_string(i + 1) + ": r must be 0 or 1");
    }
    if ((r_[i] == 1) != y_[i].has_value()) {
      throw Error(ErrorCode::kParse,
                  "row " + std::to_string(i + 1) +
                      (r_[i] == 1 ? ": r=1 but y is missing" : ": r=0 but y is present"));
    }
    observed_count_ += r_[i];
  }
  if (!x_.allFinite()) throw Error(ErrorCode::kParse, "covariates must be finite");
}

Dataset Dataset::from_outcomes(std::vector<std::optional<double>> y,
                               Eigen::MatrixXd x,
                               std::vector<std::string> covariate_names) {
  std::vector<int> r(y.size());
  std::transform(y.begin(), y.end(), r.begin(),
                 [](const auto& v) { return v.has_value() ? 1 : 0; });
  return Dataset(std::move(r), std::move(y), std::move(x),
                 std::move(covariate_names));
}

Dataset Dataset::select(std::span<const Index> rows) const {
  std::vector<int> r(rows.size());
  std::vector<std::optional<double>> y(rows.size());
  Eigen::MatrixXd x(static_cast<Index>(rows.size()), x_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<std::size_t>(rows[k]);
    r[k] = r_[i];
    y[k] = y_[i];
    x.row(static_cast<Index>(k)) = x_.row(rows[k]);
  }
  return Dataset(std::move(r), std::move(y), std::move(x), names_);
}

Dataset read_dataset(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : split_row(line)) header.emplace_back(cell);

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };

  const auto y_col = find_column(schema.y_column);
  if (!y_col) throw Error(ErrorCode::kParse, "no column named '" + schema.y_column + "'");

  std::optional<std::size_t> r_col;
  if (schema.r_column) {
    r_col = find_column(*schema.r_column);
    if (!r_col) throw Error(ErrorCode::kParse, "no column named '" + *schema.r_column + "'");
  } else {
    r_col = find_column("r");
  }

  std::vector<std::size_t> x_cols;
  std::vector<std::string> names;
  if (schema.x_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j == *y_col || (r_col && j == *r_col)) continue;
      x_cols.push_back(j);
      names.push_back(header[j]);
    }
  } else {
    for (const auto& name : schema.x_columns) {
      const auto j = find_column(name);
      if (!j) throw Error(ErrorCode::kParse, "no column named '" + name + "'");
      x_cols.push_back(*j);
      names.push_back(name);
    }
  }

  std::vector<int> r;
  std::vector<std::optional<double>> y;
  std::vector<double> xs;
  Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row << ": expected " << header.size() << " fields, found "
          << cells.size();
      throw Error(ErrorCode::kParse, msg.str());
    }
    std::optional<double> yv;
    try {
      yv = parse_number(cells[*y_col]);
    } catch (const std::invalid_argument&) {
      parse_failure(row, header[*y_col], "not a number");
    }
    int rv = yv.has_value() ? 1 : 0;
    if (r_col && !cells[*r_col].empty()) {
      const auto cell = cells[*r_col];
      if (cell == "1") {
        rv = 1;
      } else if (cell == "0") {
        rv = 0;
      } else {
        parse_failure(row, header[*r_col], "r must be 0 or 1");
      }
      if (rv == 1 && !yv) parse_failure(row, header[*y_col], "r=1 but y is missing");
      if (rv == 0 && yv) parse_failure(row, header[*y_col], "r=0 but y is present");
    }
    r.push_back(rv);
    y.push_back(yv);
    for (auto j : x_cols) {
      std::optional<double> v;
      try {
        v = parse_number(cells[j]);
      } catch (const std::invalid_argument&) {
        parse_failure(row, header[j], "not a number");
      }
      if (!v) parse_failure(row, header[j], "covariates must not be missing");
      xs.push_back(*v);
    }
  }
  if (row == 0) throw Error(ErrorCode::kParse, "no data rows");

  const auto d = static_cast<Index>(x_cols.size());
  Eigen::MatrixXd x(row, d);
  for (Index i = 0; i < row; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = xs[static_cast<std::size_t>(i * d + j)];
  }
  return Dataset(std::move(r), std::move(y), std::move(x), std::move(names));
}

Dataset parse_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_dataset(in, schema);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "r,y";
  for (const auto& name : ds.covariate_names()) out << ',' << name;
  out << '\n';
  for (Index i = 0; i < ds.size(); ++i) {
    out << ds.r()[static_cast<std::size_t>(i)] << ',';
    if (ds.observed(i)) out << ds.outcome(i);
    for (Index j = 0; j < ds.covariate_count(); ++j) out << ',' << ds.x()(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_dataset(out, ds);
}

bool BasisTerm::is_intercept() const {
  return std::all_of(exponents.begin(), exponents.end(), [](int e) { return e == 0; });
}

int BasisTerm::degree() const {
  int total = 0;
  for (int e : exponents) total += e;
  return total;
}

double BasisTerm::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double value = 1.0;
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    for (int k = 0; k < exponents[j]; ++k) value *= x(static_cast<Index>(j));
  }
  return value;
}

BasisTerm BasisTerm::intercept(Index d) {
  return BasisTerm{std::vector<int>(static_cast<std::size_t>(d), 0)};
}

BasisTerm BasisTerm::linear(Index d, Index column) {
  auto term = intercept(d);
  term.exponents[static_cast<std::size_t>(column)] = 1;
  return term;
}

std::vector<BasisTerm> monomial_basis(Index d, int max_degree) {
  std::vector<BasisTerm> terms;
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  for (int total = 0; total <= max_degree; ++total) {
    // Enumerate exponent vectors with the given total, lexicographically
    // descending in the first coordinate.
    auto recurse = [&](auto&& self, std::size_t j, int left) -> void {
      if (j + 1 == e.size()) {
        e[j] = left;
        terms.push_back(BasisTerm{e});
        return;
      }
      for (int k = left; k >= 0; --k) {
        e[j] = k;
        self(self, j + 1, left - k);
      }
    };
    if (d == 0) {
      if (total == 0) terms.push_back(BasisTerm{});
      continue;
    }
    recurse(recurse, 0, total);
  }
  return terms;
}

Index ModelConfig::covariate_dim() const {
  return mean_basis.empty() ? 0 : mean_basis.front().dimension();
}

void ModelConfig::validate(Index d, int max_exponent) const {
  if (mean_basis.empty()) throw Error(ErrorCode::kUsage, "mean_basis is empty");
  bool has_intercept = false;
  for (std::size_t k = 0; k < mean_basis.size(); ++k) {
    const auto& term = mean_basis[k];
    if (term.dimension() != d) {
      throw Error(ErrorCode::kUsage, "basis term " + std::to_string(k + 1) + " has " +
                                         std::to_string(term.dimension()) +
                                         " exponents, expected " + std::to_string(d));
    }
    for (int e : term.exponents) {
      if (e < 0 || e > max_exponent) {
        throw Error(ErrorCode::kUsage, "basis term " + std::to_string(k + 1) +
                                           " has an exponent outside [0, " +
                                           std::to_string(max_exponent) + "]");
      }
    }
    has_intercept = has_intercept || term.is_intercept();
  }
  if (!has_intercept) throw Error(ErrorCode::kUsage, "mean_basis must contain the intercept");
  std::vector<Index> sorted = x1_columns;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kUsage, "x1_columns contains duplicates");
  }
  for (Index c : x1_columns) {
    if (c < 0 || c >= d) {
      throw Error(ErrorCode::kUsage, "x1 column " + std::to_string(c + 1) + " out of range");
    }
  }
}

ModelConfig model_config_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model config: ") + e.what());
  }
  ModelConfig cfg;
  try {
    for (const auto& row : doc.at("mean_basis")) {
      cfg.mean_basis.push_back(BasisTerm{row.get<std::vector<int>>()});
    }
    for (const auto& c : doc.at("x1_columns")) {
      const auto one_based = c.get<Index>();
      if (one_based < 1) throw Error(ErrorCode::kParse, "x1_columns are 1-based");
      cfg.x1_columns.push_back(one_based - 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model config: ") + e.what());
  }
  return cfg;
}

std::string model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json doc;
  doc["mean_basis"] = nlohmann::json::array();
  for (const auto& term : cfg.mean_basis) doc["mean_basis"].push_back(term.exponents);
  doc["x1_columns"] = nlohmann::json::array();
  for (Index c : cfg.x1_columns) doc["x1_columns"].push_back(c + 1);
  return doc.dump();
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return model_config_from_json(text.str());
}

DesignMatrices build_design(const Dataset& ds, const ModelConfig& cfg) {
  cfg.validate(ds.covariate_count(), std::numeric_limits<int>::max());
  const Index n = ds.size();
  DesignMatrices dm;
  dm.mean_basis.resize(n, cfg.mean_dim());
  for (Index k = 0; k < cfg.mean_dim(); ++k) {
    const auto& term = cfg.mean_basis[static_cast<std::size_t>(k)];
    for (Index i = 0; i < n; ++i) dm.mean_basis(i, k) = term.evaluate(ds.x().row(i));
    if (!dm.mean_basis.col(k).allFinite()) {
      throw Error(ErrorCode::kOverflow,
                  "basis term " + std::to_string(k + 1) + " evaluates to a non-finite value");
    }
  }
  dm.x1.resize(n, static_cast<Index>(cfg.x1_columns.size()));
  for (std::size_t j = 0; j < cfg.x1_columns.size(); ++j) {
    dm.x1.col(static_cast<Index>(j)) = ds.x().col(cfg.x1_columns[j]);
  }
  return dm;
}

IdentifiabilityReport check_identifiability(const DesignMatrices& dm,
                                            const std::optional<Eigen::VectorXd>& xi_hat) {
  const Index n = dm.rows();
  Eigen::MatrixXd base(n, 1 + dm.x1.cols());
  base.col(0).setOnes();
  base.rightCols(dm.x1.cols()) = dm.x1;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(base);
  qr.setThreshold(1e-12);
  const Index rank = qr.rank();
  const Eigen::MatrixXd q =
      (qr.householderQ() * Eigen::MatrixXd::Identity(n, base.cols())).leftCols(rank);

  IdentifiabilityReport report;
  for (Index k = 0; k < dm.mean_basis.cols(); ++k) {
    const Eigen::VectorXd col = dm.mean_basis.col(k);
    const double norm = col.norm();
    double ratio = 0.0;
    if (norm > 0.0) {
      const Eigen::VectorXd resid = col - q * (q.transpose() * col);
      ratio = resid.norm() / norm;
    }
    report.residual_ratios.push_back(ratio);
    if (ratio >= kSpanTolerance) report.identifiable = true;
  }

  if (xi_hat) {
    Eigen::MatrixXd z(n, base.cols() + 1);
    z.leftCols(base.cols()) = base;
    z.col(base.cols()) = dm.mean_basis * *xi_hat;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(z);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    report.condition_number =
        smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace mnar
