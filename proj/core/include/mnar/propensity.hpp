#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mnar/dataset.hpp"

namespace mnar {

// Induced logistic model for R given x:
//   pi(x) = pr(R=1 | x) = 1 / (1 + exp(alpha + x1' beta + gamma mu(x; xi)))
// with theta = (alpha, beta, gamma). mu_hat enters as a fixed covariate.
struct PropensityDesign {
  Eigen::VectorXd r;  // 0/1
  Eigen::MatrixXd z;  // rows (1, x1_i, mu_hat_i)

  Index rows() const { return z.rows(); }
  Index dim() const { return z.cols(); }
};

PropensityDesign make_propensity_design(const Dataset& ds, const DesignMatrices& dm,
                                        const Eigen::VectorXd& mu_hat);

// pr(R=1 | x_i) at theta.
Eigen::VectorXd response_probabilities(const PropensityDesign& design,
                                       const Eigen::VectorXd& theta);

// sum_i [r_i log pi_i + (1 - r_i) log(1 - pi_i)], evaluated through softplus
// so large |linear predictor| stays finite.
double log_conditional_likelihood(const PropensityDesign& design,
                                  const Eigen::VectorXd& theta);

// Gradient and Hessian of the log-likelihood:
//   score = sum (pi_i - r_i) z_i,  hessian = -sum pi_i (1 - pi_i) z_i z_i'.
struct ScoreHessian {
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

ScoreHessian score_and_hessian(const PropensityDesign& design,
                               const Eigen::VectorXd& theta);

// Weighted Gram matrix sum pi_i (1 - pi_i) z_i z_i' (= -hessian).
Eigen::MatrixXd logistic_information(const PropensityDesign& design,
                                     const Eigen::VectorXd& pi);

struct PropensityOptions {
  double tolerance = 1e-8;  // on the sup-norm of the score
  int max_iterations = 100;
  int max_halvings = 30;
  double separation_bound = 30.0;
};

struct PropensityFit {
  Eigen::VectorXd theta_hat;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> loglik_trace;  // start value, then each accepted step

  double alpha() const { return theta_hat(0); }
  double gamma() const { return theta_hat(theta_hat.size() - 1); }
  Eigen::VectorXd beta() const { return theta_hat.segment(1, theta_hat.size() - 2); }
};

// Newton-Raphson with step halving from (logit(n1/n) sign-adjusted, 0, ..., 0).
// Throws kSingular for single-class data or a singular information matrix,
// kSeparation when |theta|_inf exceeds the bound while the likelihood still
// improves. Hitting the iteration cap returns converged = false.
PropensityFit fit_propensity(const PropensityDesign& design,
                             const PropensityOptions& options = {});

// alpha0 = alpha - log M1(gamma).
double recover_alpha0(const PropensityFit& fit, double m1_at_gamma);

}  // namespace mnar
