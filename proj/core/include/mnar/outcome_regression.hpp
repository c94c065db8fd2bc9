#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mnar/dataset.hpp"

namespace mnar {

// Least-squares fit of the mean model on complete cases.
struct OutcomeFit {
  Eigen::VectorXd xi_hat;
  std::vector<Index> observed_rows;  // rows with r == 1, ascending
  Eigen::VectorXd residuals;         // y_i - mu(x_i; xi_hat) over observed_rows
  double sigma2_hat = 0.0;           // sum of squared residuals / n1
  Index n1 = 0;
};

inline constexpr double kRankTolerance = 1e-10;

// Column-pivoted QR. Throws kSingular if the complete-case basis is rank
// deficient (message lists the dependent columns, 1-based) or n1 < q.
OutcomeFit fit_least_squares(const Dataset& ds, const DesignMatrices& dm);

// mu(x_i; xi_hat) for every row, observed or not.
Eigen::VectorXd predict_mu(const OutcomeFit& fit, const DesignMatrices& dm);

}  // namespace mnar
