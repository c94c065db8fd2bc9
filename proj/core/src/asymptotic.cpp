#include "mnar/asymptotic.hpp"

#include <cmath>

#include "mnar/error.hpp"
#include "mnar/stats.hpp"

#ifndef MNAR_H1_DEFAULT_VARIANT
#define MNAR_H1_DEFAULT_VARIANT 0
#endif

namespace mnar {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a, const char* name) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(s.size() - 1) > 0.0) || s(0) / s(s.size() - 1) >= kMaxCondition) {
    throw Error(ErrorCode::kSingular, std::string("singular information: ") + name +
                                          " is not invertible");
  }
  Eigen::MatrixXd inv = a.inverse();
  return 0.5 * (inv + inv.transpose());
}

// Shifted sums of r e^{k-1} exp(g e) (and times M_i); returns the log of the
// common scale factor.
struct ShiftedMoments {
  double log_scale = 0.0;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  Eigen::VectorXd c1, c2;
};

ShiftedMoments shifted_moments(const OutcomeFit& outcome, double gamma,
                               const DesignMatrices& dm) {
  ShiftedMoments out;
  const Index q = dm.mean_basis.cols();
  out.c1 = Eigen::VectorXd::Zero(q);
  out.c2 = Eigen::VectorXd::Zero(q);
  double shift = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < outcome.residuals.size(); ++k) {
    shift = std::max(shift, gamma * outcome.residuals(k));
  }
  if (!std::isfinite(shift)) shift = 0.0;
  for (Index k = 0; k < outcome.residuals.size(); ++k) {
    const double e = outcome.residuals(k);
    const double w = std::exp(gamma * e - shift);
    const Index i = outcome.observed_rows[static_cast<std::size_t>(k)];
    out.s1 += w;
    out.s2 += e * w;
    out.s3 += e * e * w;
    out.c1 += w * dm.mean_basis.row(i).transpose();
    out.c2 += e * w * dm.mean_basis.row(i).transpose();
  }
  out.log_scale = shift;
  return out;
}

}  // namespace

AMatrices estimate_A_matrices(const DesignMatrices& dm, const PropensityDesign& design,
                              const PropensityFit& propensity) {
  const double n = static_cast<double>(dm.rows());
  const Eigen::VectorXd pi = response_probabilities(design, propensity.theta_hat);
  const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());

  AMatrices a;
  a.a1 = dm.mean_basis.transpose() * (design.r.asDiagonal() * dm.mean_basis) / n;
  a.a1 = 0.5 * (a.a1 + a.a1.transpose());
  a.a2 = logistic_information(design, pi) / n;
  a.a3 = design.z.transpose() * (w.asDiagonal() * dm.mean_basis) / n;
  a.a4 = dm.mean_basis.colwise().mean().transpose();
  return a;
}

BCMoments estimate_B_C(const Dataset& ds, const OutcomeFit& outcome, double gamma_hat,
                       const DesignMatrices& dm) {
  const auto sm = shifted_moments(outcome, gamma_hat, dm);
  if (sm.log_scale > 700.0) {
    throw Error(ErrorCode::kOverflow, "B_k moments overflow: max gamma * residual = " +
                                          std::to_string(sm.log_scale));
  }
  const double scale = std::exp(sm.log_scale) / static_cast<double>(ds.size());
  BCMoments bc;
  bc.b1 = sm.s1 * scale;
  bc.b2 = sm.s2 * scale;
  bc.b3 = sm.s3 * scale;
  bc.c1 = sm.c1 * scale;
  bc.c2 = sm.c2 * scale;
  return bc;
}

ScoreRows build_score_rows_and_V(const Dataset& ds, const DesignMatrices& dm,
                                 const OutcomeFit& outcome, const PropensityDesign& design,
                                 const PropensityFit& propensity, const Eigen::VectorXd& mu_hat,
                                 const BCMoments& bc) {
  const Index n = ds.size();
  const Index q = dm.mean_basis.cols();
  const Index p = design.dim();
  const Index m = 1 + q + p + 3;
  const double eta = static_cast<double>(ds.observed_count()) / static_cast<double>(n);
  const double mu_bar = mu_hat.mean();
  const double gamma = propensity.gamma();
  const Eigen::VectorXd pi = response_probabilities(design, propensity.theta_hat);

  Eigen::VectorXd resid = Eigen::VectorXd::Zero(n);
  for (Index k = 0; k < outcome.residuals.size(); ++k) {
    resid(outcome.observed_rows[static_cast<std::size_t>(k)]) = outcome.residuals(k);
  }

  ScoreRows out;
  out.rows.resize(n, m);
  for (Index i = 0; i < n; ++i) {
    const double r = design.r(i);
    const double e = resid(i);
    const double tilt = r > 0.5 ? std::exp(gamma * e) : 0.0;
    out.rows(i, 0) = r - eta;
    out.rows.row(i).segment(1, q) = (r * e) * dm.mean_basis.row(i);
    out.rows.row(i).segment(1 + q, p) = (r - pi(i)) * design.z.row(i);
    out.rows(i, 1 + q + p) = mu_hat(i) - mu_bar;
    out.rows(i, 2 + q + p) = tilt - bc.b1;
    out.rows(i, 3 + q + p) = e * tilt - bc.b2;
  }
  out.v = out.rows.transpose() * out.rows / static_cast<double>(n);
  out.v = 0.5 * (out.v + out.v.transpose());
  return out;
}

SandwichPieces build_sandwich_pieces(const Dataset& ds, const DesignMatrices& dm,
                                     const OutcomeFit& outcome, const PropensityDesign& design,
                                     const PropensityFit& propensity,
                                     const Eigen::VectorXd& mu_hat) {
  SandwichPieces pieces;
  pieces.a = estimate_A_matrices(dm, design, propensity);
  pieces.bc = estimate_B_C(ds, outcome, propensity.gamma(), dm);
  pieces.scores =
      build_score_rows_and_V(ds, dm, outcome, design, propensity, mu_hat, pieces.bc);
  pieces.sigma2 = outcome.sigma2_hat;
  pieces.gamma = propensity.gamma();
  pieces.eta = static_cast<double>(ds.observed_count()) / static_cast<double>(ds.size());
  return pieces;
}

Eigen::MatrixXd estimate_Sigma(const AMatrices& a, double sigma2_hat, double gamma_hat) {
  const Eigen::MatrixXd a1_inv = checked_inverse(a.a1, "A1");
  const Eigen::MatrixXd a2_inv = checked_inverse(a.a2, "A2");
  const Index q = a1_inv.rows();
  const Index p = a2_inv.rows();
  const Eigen::MatrixXd cross = a2_inv * a.a3 * a1_inv;  // p x q

  Eigen::MatrixXd sigma(q + p, q + p);
  sigma.topLeftCorner(q, q) = sigma2_hat * a1_inv;
  sigma.bottomLeftCorner(p, q) = -gamma_hat * sigma2_hat * cross;
  sigma.topRightCorner(q, p) = -gamma_hat * sigma2_hat * cross.transpose();
  sigma.bottomRightCorner(p, p) =
      a2_inv + gamma_hat * gamma_hat * sigma2_hat * cross * a.a3.transpose() * a2_inv;
  return 0.5 * (sigma + sigma.transpose());
}

H1Variant default_h1_variant() {
  return static_cast<H1Variant>(MNAR_H1_DEFAULT_VARIANT);
}

std::string_view to_string(H1Variant variant) {
  switch (variant) {
    case H1Variant::kAsPrinted: return "as_printed";
    case H1Variant::kSquaredB2: return "squared_b2";
    case H1Variant::kDeltaMethod: return "delta_method";
  }
  return "as_printed";
}

VarianceEstimates estimate_sigma_tau(const SandwichPieces& pieces, H1Variant variant) {
  const auto& a = pieces.a;
  const auto& bc = pieces.bc;
  if (!(bc.b1 > 0.0)) throw Error(ErrorCode::kSingular, "B1 must be positive");

  const Eigen::MatrixXd a1_inv = checked_inverse(a.a1, "A1");
  const Eigen::MatrixXd a2_inv = checked_inverse(a.a2, "A2");
  const Index q = a1_inv.rows();
  const Index p = a2_inv.rows();
  const double g = pieces.gamma;
  const double miss = 1.0 - pieces.eta;
  const double b1 = bc.b1, b2 = bc.b2, b3 = bc.b3;
  const double b1sq = b1 * b1;

  // e_p' A2^-1: the gamma row.
  const Eigen::RowVectorXd ep_a2inv = a2_inv.row(p - 1);

  double c1_coef = b2 / b1sq;
  double k_factor = b2 - b1 * b3;
  if (variant == H1Variant::kSquaredB2 || variant == H1Variant::kDeltaMethod) {
    k_factor = b2 * b2 - b1 * b3;
  }
  if (variant == H1Variant::kDeltaMethod) c1_coef = g * b2 / b1sq;

  VarianceEstimates out;
  out.variant = variant;
  out.sigma = estimate_Sigma(a, pieces.sigma2, g);
  out.h1 = a.a4.transpose() * a1_inv +
           miss * (c1_coef * bc.c1.transpose() - bc.c1.transpose() / b1 -
                   (g / b1) * bc.c2.transpose()) *
               a1_inv +
           (miss * g / b1sq) * k_factor * ep_a2inv * a.a3 * a1_inv;
  out.h2 = (b2 * b2 - b1 * b3) * ep_a2inv * miss / b1sq;

  out.d.resize(1 + q + p + 3);
  out.d(0) = -b2 / b1;
  out.d.segment(1, q) = out.h1.transpose();
  out.d.segment(1 + q, p) = out.h2.transpose();
  out.d(1 + q + p) = 1.0;
  out.d(2 + q + p) = -miss * b2 / b1sq;
  out.d(3 + q + p) = miss / b1;

  out.raw_sigma2_tau = out.d.dot(pieces.scores.v * out.d);
  out.clipped = out.raw_sigma2_tau < 0.0;
  out.sigma2_tau = std::max(out.raw_sigma2_tau, 0.0);
  return out;
}

std::string_view to_string(IntervalMethod method) {
  switch (method) {
    case IntervalMethod::kWald: return "wald";
    case IntervalMethod::kBootstrapT: return "bootstrap_t";
    case IntervalMethod::kBootstrapPercentile: return "bootstrap_percentile";
  }
  return "wald";
}

ConfidenceInterval wald_ci(double tau_hat, double sigma2_tau, Index n, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kUsage, "confidence level must lie in (0, 1)");
  }
  if (sigma2_tau < 0.0 || n < 1) throw Error(ErrorCode::kUsage, "invalid Wald CI inputs");
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double half = z * std::sqrt(sigma2_tau / static_cast<double>(n));
  return ConfidenceInterval{tau_hat - half, tau_hat + half, level, IntervalMethod::kWald};
}

}  // namespace mnar
