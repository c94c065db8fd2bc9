#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mnar {

using Eigen::Index;

// n records of (r, y, x). y is present exactly when r == 1; x is always
// observed. Immutable once constructed.
class Dataset {
 public:
  Dataset(std::vector<int> r, std::vector<std::optional<double>> y,
          Eigen::MatrixXd x, std::vector<std::string> covariate_names = {});

  // Derives r from the presence of y.
  static Dataset from_outcomes(std::vector<std::optional<double>> y,
                               Eigen::MatrixXd x,
                               std::vector<std::string> covariate_names = {});

  Index size() const { return x_.rows(); }
  Index covariate_count() const { return x_.cols(); }
  Index observed_count() const { return observed_count_; }

  const std::vector<int>& r() const { return r_; }
  const std::vector<std::optional<double>>& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::vector<std::string>& covariate_names() const { return names_; }

  bool observed(Index i) const { return r_[static_cast<std::size_t>(i)] == 1; }
  // Outcome of an observed row.
  double outcome(Index i) const { return *y_[static_cast<std::size_t>(i)]; }

  // Rows in the given order; repeats allowed (bootstrap resampling).
  Dataset select(std::span<const Index> rows) const;

 private:
  std::vector<int> r_;
  std::vector<std::optional<double>> y_;
  Eigen::MatrixXd x_;
  std::vector<std::string> names_;
  Index observed_count_ = 0;
};

struct CsvSchema {
  std::string y_column = "y";
  // When unset and the file has no column named "r", r is derived from y.
  std::optional<std::string> r_column;
  // Empty selects every column other than y and r, in file order.
  std::vector<std::string> x_columns;
};

Dataset read_dataset(std::istream& in, const CsvSchema& schema = {});
Dataset parse_dataset(const std::filesystem::path& path,
                      const CsvSchema& schema = {});

// Header "r,y,<covariates>"; numbers printed with round-trip precision.
void write_dataset(std::ostream& out, const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);

inline constexpr int kDefaultMaxExponent = 4;

// Monomial prod_j x_j^{e_j}. The all-zero exponent vector is the intercept.
struct BasisTerm {
  std::vector<int> exponents;

  Index dimension() const { return static_cast<Index>(exponents.size()); }
  bool is_intercept() const;
  int degree() const;
  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  static BasisTerm intercept(Index d);
  static BasisTerm linear(Index d, Index column);

  friend bool operator==(const BasisTerm&, const BasisTerm&) = default;
};

// All monomials of total degree <= max_degree over d covariates, ordered by
// degree and then lexicographically (intercept first).
std::vector<BasisTerm> monomial_basis(Index d, int max_degree);

struct ModelConfig {
  std::vector<BasisTerm> mean_basis;  // mu(x; xi) = sum_k xi_k term_k(x)
  std::vector<Index> x1_columns;      // zero-based; complement = instruments

  Index mean_dim() const { return static_cast<Index>(mean_basis.size()); }
  Index propensity_dim() const {
    return 2 + static_cast<Index>(x1_columns.size());
  }
  Index covariate_dim() const;

  void validate(Index d, int max_exponent = kDefaultMaxExponent) const;
};

// JSON form uses 1-based columns:
//   {"mean_basis": [[0,0],[1,0]], "x1_columns": [1]}
ModelConfig model_config_from_json(std::string_view text);
std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig load_model_config(const std::filesystem::path& path);

struct DesignMatrices {
  Eigen::MatrixXd mean_basis;  // n x q
  Eigen::MatrixXd x1;          // n x |x1_columns|

  Index rows() const { return mean_basis.rows(); }
};

DesignMatrices build_design(const Dataset& ds, const ModelConfig& cfg);

struct IdentifiabilityReport {
  bool identifiable = false;
  // Residual norm of each mean-basis column after projecting out
  // span{1, X1}, relative to the column norm.
  std::vector<double> residual_ratios;
  // cond([1 | X1 | mu_hat]); NaN unless xi_hat was supplied.
  double condition_number = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double kSpanTolerance = 1e-8;

IdentifiabilityReport check_identifiability(
    const DesignMatrices& dm,
    const std::optional<Eigen::VectorXd>& xi_hat = std::nullopt);

}  // namespace mnar
