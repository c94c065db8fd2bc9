#pragma once

#include <string_view>

#include <Eigen/Dense>

#include "mnar/dataset.hpp"
#include "mnar/mean_response.hpp"
#include "mnar/outcome_regression.hpp"
#include "mnar/propensity.hpp"

namespace mnar {

// Plug-in estimates of the information blocks:
//   A1 = n^-1 sum r_i M_i M_i'                 (q x q)
//   A2 = n^-1 sum pi_i (1 - pi_i) z_i z_i'     (p x p)
//   A3 = n^-1 sum pi_i (1 - pi_i) z_i M_i'     (p x q)
//   A4 = n^-1 sum M_i                          (q)
// where M_i is the mean-basis row (gradient of mu in xi) and z_i = (1, x1_i, mu_hat_i).
struct AMatrices {
  Eigen::MatrixXd a1;
  Eigen::MatrixXd a2;
  Eigen::MatrixXd a3;
  Eigen::VectorXd a4;
};

AMatrices estimate_A_matrices(const DesignMatrices& dm, const PropensityDesign& design,
                              const PropensityFit& propensity);

// B_k = n^-1 sum r_i e_i^{k-1} exp(gamma e_i), k = 1..3
// C_k = n^-1 sum r_i e_i^{k-1} exp(gamma e_i) M_i, k = 1..2
struct BCMoments {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  Eigen::VectorXd c1;
  Eigen::VectorXd c2;
};

BCMoments estimate_B_C(const Dataset& ds, const OutcomeFit& outcome, double gamma_hat,
                       const DesignMatrices& dm);

// Per-row estimating-function values, columns ordered
//   [ r - eta | r e M' (q) | (r - pi) z' (p) | mu - mean(mu) | r e^{g e} - B1 | r e e^{g e} - B2 ]
// and V = n^-1 S' S.
struct ScoreRows {
  Eigen::MatrixXd rows;
  Eigen::MatrixXd v;
};

ScoreRows build_score_rows_and_V(const Dataset& ds, const DesignMatrices& dm,
                                 const OutcomeFit& outcome, const PropensityDesign& design,
                                 const PropensityFit& propensity, const Eigen::VectorXd& mu_hat,
                                 const BCMoments& bc);

struct SandwichPieces {
  AMatrices a;
  BCMoments bc;
  ScoreRows scores;
  double sigma2 = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
};

SandwichPieces build_sandwich_pieces(const Dataset& ds, const DesignMatrices& dm,
                                     const OutcomeFit& outcome, const PropensityDesign& design,
                                     const PropensityFit& propensity,
                                     const Eigen::VectorXd& mu_hat);

// Asymptotic covariance of sqrt(n) (xi_hat - xi0, theta_hat - theta0):
//   [ s2 A1^-1                      -g s2 A1^-1 A3' A2^-1                        ]
//   [ -g s2 A2^-1 A3 A1^-1          A2^-1 + g^2 s2 A2^-1 A3 A1^-1 A3' A2^-1      ]
// Throws kSingular when A1 or A2 has condition number >= 1e12.
Eigen::MatrixXd estimate_Sigma(const AMatrices& a, double sigma2_hat, double gamma_hat);

// Which scalar multiplies e_p' A2^-1 A3 A1^-1 inside H1.
enum class H1Variant {
  kAsPrinted,    // (1-eta) gamma (B2 - B1 B3) / B1^2, C1 coefficient B2 / B1^2
  kSquaredB2,    // (1-eta) gamma (B2^2 - B1 B3) / B1^2, C1 coefficient B2 / B1^2
  kDeltaMethod,  // (1-eta) gamma (B2^2 - B1 B3) / B1^2, C1 coefficient gamma B2 / B1^2
};

H1Variant default_h1_variant();
std::string_view to_string(H1Variant variant);

struct VarianceEstimates {
  Eigen::MatrixXd sigma;
  double sigma2_tau = 0.0;      // max(D' V D, 0)
  double raw_sigma2_tau = 0.0;  // D' V D before clipping
  bool clipped = false;
  Eigen::VectorXd d;
  Eigen::RowVectorXd h1;
  Eigen::RowVectorXd h2;
  H1Variant variant = H1Variant::kAsPrinted;
};

VarianceEstimates estimate_sigma_tau(const SandwichPieces& pieces,
                                     H1Variant variant = default_h1_variant());

enum class IntervalMethod { kWald, kBootstrapT, kBootstrapPercentile };
std::string_view to_string(IntervalMethod method);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::kWald;

  double width() const { return upper - lower; }
  bool contains(double value) const { return lower <= value && value <= upper; }
};

// tau_hat -/+ z_{1-a/2} sqrt(sigma2_tau / n).
ConfidenceInterval wald_ci(double tau_hat, double sigma2_tau, Index n, double level);

}  // namespace mnar
