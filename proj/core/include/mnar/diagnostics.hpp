#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mnar/dataset.hpp"
#include "mnar/outcome_regression.hpp"
#include "mnar/propensity.hpp"

namespace mnar {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<double> df;
  std::string test_name;
};

// Breusch-Pagan / Cook-Weisberg score test for non-constant error variance:
// regress e^2 / sigma2 - 1 on the fitted mean over complete cases; the
// statistic is half the explained sum of squares, referred to chi-square(1).
// Throws kSingular for zero residual variance or too few complete cases.
TestResult ncv_score_test(const OutcomeFit& outcome, const DesignMatrices& dm);

// Unweighted sum of squares goodness-of-fit test for the logistic response
// model with the Hosmer-le Cessie moment standardisation; two-sided normal
// p-value. Throws kSingular when the variance vanishes or Z'WZ is singular.
TestResult uss_gof_test(const Dataset& ds, const PropensityFit& propensity,
                        const Eigen::VectorXd& mu_hat, const DesignMatrices& dm);

}  // namespace mnar
