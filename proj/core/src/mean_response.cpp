#include "mnar/mean_response.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mnar/error.hpp"

namespace mnar {

MgfMoments empirical_mgf(std::span<const double> residuals, double t) {
  if (residuals.empty()) throw Error(ErrorCode::kUsage, "empirical MGF of an empty sample");
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double a = t * residuals[i];
    if (!std::isfinite(a) || std::abs(a) > kMgfExponentLimit) {
      std::ostringstream msg;
      msg << "MGF overflow: t * residual[" << i << "] = " << a;
      throw Error(ErrorCode::kOverflow, msg.str());
    }
    shift = std::max(shift, a);
  }
  double s1 = 0.0;
  double s2 = 0.0;
  for (double e : residuals) {
    const double w = std::exp(t * e - shift);
    s1 += w;
    s2 += e * w;
  }
  const double count = static_cast<double>(residuals.size());
  MgfMoments out;
  out.log_m1 = shift + std::log(s1 / count);
  out.tilted_mean = s2 / s1;
  out.m1 = std::exp(out.log_m1);
  out.m2 = out.m1 * out.tilted_mean;
  return out;
}

MgfMoments empirical_mgf(const Eigen::VectorXd& residuals, double t) {
  return empirical_mgf(std::span<const double>(residuals.data(),
                                               static_cast<std::size_t>(residuals.size())),
                       t);
}

namespace {

TauEstimate tau_common(const Dataset& ds, const PropensityFit& propensity,
                       const Eigen::VectorXd& mu_hat) {
  const Index n = ds.size();
  if (mu_hat.size() != n) throw Error(ErrorCode::kUsage, "mu_hat length differs from n");
  if (!std::isfinite(propensity.gamma())) {
    throw Error(ErrorCode::kNonconvergence, "gamma_hat is not finite");
  }
  TauEstimate est;
  est.eta_hat = static_cast<double>(ds.observed_count()) / static_cast<double>(n);
  if (ds.observed_count() == 0 || ds.observed_count() == n) {
    throw Error(ErrorCode::kSingular, "degenerate data: eta_hat is 0 or 1");
  }
  est.mean_mu_hat = mu_hat.mean();
  return est;
}

}  // namespace

TauEstimate estimate_tau(const Dataset& ds, const OutcomeFit& outcome,
                         const PropensityFit& propensity, const Eigen::VectorXd& mu_hat) {
  TauEstimate est = tau_common(ds, propensity, mu_hat);
  const auto mgf = empirical_mgf(outcome.residuals, propensity.gamma());
  est.m1_hat = mgf.m1;
  est.m2_hat = mgf.m2;
  est.alpha0_hat = propensity.alpha() - mgf.log_m1;
  est.tau_hat = est.mean_mu_hat + (1.0 - est.eta_hat) * mgf.tilted_mean;
  return est;
}

TauEstimate estimate_tau_normal_plugin(const Dataset& ds, const OutcomeFit& outcome,
                                       const PropensityFit& propensity,
                                       const Eigen::VectorXd& mu_hat) {
  TauEstimate est = tau_common(ds, propensity, mu_hat);
  const double g = propensity.gamma();
  const double s2 = outcome.sigma2_hat;
  const double log_m1 = 0.5 * g * g * s2;
  est.m1_hat = std::exp(log_m1);
  est.m2_hat = g * s2 * est.m1_hat;
  est.alpha0_hat = propensity.alpha() - log_m1;
  est.tau_hat = est.mean_mu_hat + (1.0 - est.eta_hat) * g * s2;
  return est;
}

}  // namespace mnar
