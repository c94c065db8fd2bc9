#pragma once

#include <span>

#include <Eigen/Dense>

#include "mnar/dataset.hpp"
#include "mnar/outcome_regression.hpp"
#include "mnar/propensity.hpp"

namespace mnar {

// Empirical M1(t) = mean e^{t e}, M2(t) = mean e e^{t e} over residuals.
// Sums are accumulated after factoring out max(t e), so tilted_mean = M2/M1
// and log_m1 stay finite even when M1 itself overflows a double.
struct MgfMoments {
  double m1 = 1.0;
  double m2 = 0.0;
  double log_m1 = 0.0;
  double tilted_mean = 0.0;  // M2(t) / M1(t)
};

// |t e| above this is reported as overflow rather than silently saturated.
inline constexpr double kMgfExponentLimit = 1e4;

MgfMoments empirical_mgf(std::span<const double> residuals, double t);
MgfMoments empirical_mgf(const Eigen::VectorXd& residuals, double t);

struct TauEstimate {
  double tau_hat = 0.0;
  double eta_hat = 0.0;  // n1 / n
  double m1_hat = 1.0;
  double m2_hat = 0.0;
  double alpha0_hat = 0.0;
  double mean_mu_hat = 0.0;  // average of mu(x_i; xi_hat) over all n rows
};

// tau_hat = n^-1 sum_i mu(x_i; xi_hat) + (1 - eta_hat) M2(gamma_hat)/M1(gamma_hat).
TauEstimate estimate_tau(const Dataset& ds, const OutcomeFit& outcome,
                         const PropensityFit& propensity,
                         const Eigen::VectorXd& mu_hat);

// Same estimator with M1, M2 replaced by their Gaussian closed forms at
// variance sigma2_hat: the correction term becomes (1 - eta_hat) gamma sigma2.
TauEstimate estimate_tau_normal_plugin(const Dataset& ds, const OutcomeFit& outcome,
                                       const PropensityFit& propensity,
                                       const Eigen::VectorXd& mu_hat);

}  // namespace mnar
