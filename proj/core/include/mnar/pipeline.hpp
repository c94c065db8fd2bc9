#pragma once

#include <optional>

#include <Eigen/Dense>

#include "mnar/asymptotic.hpp"
#include "mnar/dataset.hpp"
#include "mnar/mean_response.hpp"
#include "mnar/outcome_regression.hpp"
#include "mnar/propensity.hpp"

namespace mnar {

struct FitOptions {
  PropensityOptions propensity;
  H1Variant h1 = default_h1_variant();
  double level = 0.95;
  bool compute_variance = true;
};

// Everything produced by the two-step fit of one dataset.
struct ProposedFit {
  DesignMatrices design;
  IdentifiabilityReport identifiability;
  OutcomeFit outcome;
  Eigen::VectorXd mu_hat;
  PropensityDesign propensity_design;
  PropensityFit propensity;
  TauEstimate tau;
  std::optional<SandwichPieces> pieces;
  std::optional<VarianceEstimates> variance;
  std::optional<ConfidenceInterval> wald;
};

// Least squares for xi, conditional maximum likelihood for theta, then tau
// and (optionally) its sandwich variance and Wald interval.
// Throws kIdentifiability when the mean basis lies in span{1, x1}, and
// kNonconvergence when the propensity fit fails to converge.
ProposedFit fit_proposed(const Dataset& ds, const ModelConfig& cfg,
                         const FitOptions& options = {});

}  // namespace mnar
