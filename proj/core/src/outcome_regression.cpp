#include "mnar/outcome_regression.hpp"

#include <algorithm>
#include <sstream>

#include "mnar/error.hpp"

namespace mnar {

OutcomeFit fit_least_squares(const Dataset& ds, const DesignMatrices& dm) {
  const Index q = dm.mean_basis.cols();
  OutcomeFit fit;
  fit.n1 = ds.observed_count();
  if (fit.n1 < q) {
    throw Error(ErrorCode::kSingular, "insufficient data: " + std::to_string(fit.n1) +
                                          " complete cases for " + std::to_string(q) +
                                          " mean parameters");
  }

  fit.observed_rows.reserve(static_cast<std::size_t>(fit.n1));
  for (Index i = 0; i < ds.size(); ++i) {
    if (ds.observed(i)) fit.observed_rows.push_back(i);
  }
  Eigen::MatrixXd m(fit.n1, q);
  Eigen::VectorXd y(fit.n1);
  for (Index k = 0; k < fit.n1; ++k) {
    const Index i = fit.observed_rows[static_cast<std::size_t>(k)];
    m.row(k) = dm.mean_basis.row(i);
    y(k) = ds.outcome(i);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  // Threshold is relative to the largest pivot, a proxy for the top singular value.
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < q) {
    std::vector<Index> dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Index k = qr.rank(); k < q; ++k) dependent.push_back(perm(k) + 1);
    std::sort(dependent.begin(), dependent.end());
    std::ostringstream msg;
    msg << "singular design: mean-basis columns";
    for (Index c : dependent) msg << ' ' << c;
    msg << " are linearly dependent on the others";
    throw Error(ErrorCode::kSingular, msg.str());
  }
  fit.xi_hat = qr.solve(y);
  fit.residuals = y - m * fit.xi_hat;
  fit.sigma2_hat = fit.residuals.squaredNorm() / static_cast<double>(fit.n1);
  return fit;
}

Eigen::VectorXd predict_mu(const OutcomeFit& fit, const DesignMatrices& dm) {
  if (dm.mean_basis.cols() != fit.xi_hat.size()) {
    throw Error(ErrorCode::kUsage, "design has " + std::to_string(dm.mean_basis.cols()) +
                                       " columns but the fit has " +
                                       std::to_string(fit.xi_hat.size()) + " coefficients");
  }
  return dm.mean_basis * fit.xi_hat;
}

}  // namespace mnar
