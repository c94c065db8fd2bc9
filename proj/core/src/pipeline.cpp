#include "mnar/pipeline.hpp"

#include <sstream>

#include "mnar/error.hpp"

namespace mnar {

ProposedFit fit_proposed(const Dataset& ds, const ModelConfig& cfg, const FitOptions& options) {
  if (ds.observed_count() == 0 || ds.observed_count() == ds.size()) {
    throw Error(ErrorCode::kSingular, "degenerate data: need both observed and missing outcomes");
  }
  ProposedFit fit;
  fit.design = build_design(ds, cfg);
  fit.identifiability = check_identifiability(fit.design);
  if (!fit.identifiability.identifiable) {
    throw Error(ErrorCode::kIdentifiability,
                "mean function lies in the span of the propensity covariates (1, x1); "
                "theta is not identifiable");
  }
  fit.outcome = fit_least_squares(ds, fit.design);
  fit.mu_hat = predict_mu(fit.outcome, fit.design);
  fit.propensity_design = make_propensity_design(ds, fit.design, fit.mu_hat);
  fit.propensity = fit_propensity(fit.propensity_design, options.propensity);
  if (!fit.propensity.converged) {
    std::ostringstream msg;
    msg << "propensity fit did not converge after " << fit.propensity.iterations
        << " iterations (score norm " << fit.propensity.gradient_norm << ")";
    throw Error(ErrorCode::kNonconvergence, msg.str());
  }
  fit.tau = estimate_tau(ds, fit.outcome, fit.propensity, fit.mu_hat);

  if (options.compute_variance) {
    fit.pieces = build_sandwich_pieces(ds, fit.design, fit.outcome, fit.propensity_design,
                                       fit.propensity, fit.mu_hat);
    fit.variance = estimate_sigma_tau(*fit.pieces, options.h1);
    fit.wald = wald_ci(fit.tau.tau_hat, fit.variance->sigma2_tau, ds.size(), options.level);
  }
  return fit;
}

}  // namespace mnar
