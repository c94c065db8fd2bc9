#include "mnar/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mnar/error.hpp"
#include "mnar/stats.hpp"

namespace mnar {

TestResult ncv_score_test(const OutcomeFit& outcome, const DesignMatrices& dm) {
  const Index n1 = outcome.n1;
  const Index q = outcome.xi_hat.size();
  if (n1 <= q + 1) throw Error(ErrorCode::kSingular, "too few complete cases for the variance test");
  if (!(outcome.sigma2_hat > 0.0)) throw Error(ErrorCode::kSingular, "residual variance is zero");

  Eigen::VectorXd u(n1), fitted(n1);
  for (Index k = 0; k < n1; ++k) {
    const Index i = outcome.observed_rows[static_cast<std::size_t>(k)];
    const double e = outcome.residuals(k);
    u(k) = e * e / outcome.sigma2_hat - 1.0;
    fitted(k) = dm.mean_basis.row(i).dot(outcome.xi_hat);
  }
  // Simple regression of u on (1, fitted).
  const double fbar = fitted.mean();
  const double ubar = u.mean();
  const Eigen::VectorXd fc = fitted.array() - fbar;
  const double sxx = fc.squaredNorm();
  TestResult out;
  out.test_name = "ncv_score";
  out.df = 1.0;
  if (!(sxx > 0.0)) {
    // Constant fitted values carry no information about the variance.
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const double sxy = fc.dot(u.array().matrix() - Eigen::VectorXd::Constant(n1, ubar));
  const double ess = sxy * sxy / sxx;
  out.statistic = ess / 2.0;
  out.p_value = chi_squared_sf(out.statistic, 1.0);
  return out;
}

TestResult uss_gof_test(const Dataset& ds, const PropensityFit& propensity,
                        const Eigen::VectorXd& mu_hat, const DesignMatrices& dm) {
  if (!propensity.converged) {
    throw Error(ErrorCode::kNonconvergence, "goodness-of-fit test needs a converged propensity fit");
  }
  const PropensityDesign design = make_propensity_design(ds, dm, mu_hat);
  const Eigen::VectorXd pi = response_probabilities(design, propensity.theta_hat);
  const Index n = ds.size();

  const Eigen::ArrayXd w = pi.array() * (1.0 - pi.array());
  const Eigen::VectorXd d = (1.0 - 2.0 * pi.array()).matrix();
  double t = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double resid = design.r(i) - pi(i);
    t += resid * resid;
  }
  const double expected = w.sum();
  if (!(w.maxCoeff() > 0.0)) {
    throw Error(ErrorCode::kSingular, "degenerate fitted probabilities: variance of USS is zero");
  }

  const Eigen::MatrixXd& z = design.z;
  const Eigen::MatrixXd wz = z.array().colwise() * w;
  const Eigen::MatrixXd ztwz = z.transpose() * wz;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ztwz);
  qr.setThreshold(1e-12);
  if (qr.rank() < ztwz.cols()) throw Error(ErrorCode::kSingular, "Z'WZ is singular");
  const Eigen::VectorXd wzd = wz.transpose() * d;
  const double var = (w * d.array().square()).sum() - wzd.dot(qr.solve(wzd));
  if (!(var > 0.0)) {
    throw Error(ErrorCode::kSingular, "degenerate fitted probabilities: variance of USS is zero");
  }

  TestResult out;
  out.test_name = "uss_gof";
  out.statistic = (t - expected) / std::sqrt(var);
  out.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(out.statistic)));
  return out;
}

}  // namespace mnar
