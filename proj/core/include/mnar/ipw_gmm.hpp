#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mnar/dataset.hpp"

namespace mnar {

// Inverse-probability-weighting baselines under the selection model
//   pr(R=1 | x, y) = 1 / (1 + exp(alpha0 + x1' beta + gamma y)),
// theta = (alpha0, beta, gamma). The moment for basis function g is
//   n^-1 sum_i {r_i exp(alpha0 + x1_i' beta + gamma y_i) + r_i - 1} g(x_i).
class IpwProblem {
 public:
  IpwProblem(const Dataset& ds, std::vector<Index> x1_columns, std::vector<BasisTerm> basis_g);

  Index rows() const { return x1_.rows(); }
  Index moment_count() const { return g_.cols(); }
  Index theta_dim() const { return x1_.cols() + 2; }

  // Linear predictor alpha0 + x1' beta + gamma y on observed rows (0 elsewhere).
  Eigen::VectorXd exponent(const Eigen::VectorXd& theta) const;
  // Averaged moments; overflow surfaces as +/-inf entries.
  Eigen::VectorXd moments(const Eigen::VectorXd& theta) const;
  // n x L per-row moment contributions.
  Eigen::MatrixXd moment_rows(const Eigen::VectorXd& theta) const;
  // L x p derivative of moments() with respect to theta.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta) const;

  // n^-1 sum r_i y_i / pi_i (Horvitz-Thompson) or the normalised (Hajek) ratio.
  double mean_outcome(const Eigen::VectorXd& theta, bool hajek = false) const;
  double max_weight(const Eigen::VectorXd& theta) const;

  // (log((1 - eta)/eta), 0, ..., 0): the gamma = 0 root for g = 1.
  Eigen::VectorXd default_start() const;

 private:
  Eigen::VectorXd r_;
  Eigen::VectorXd y_;  // 0 where missing
  Eigen::MatrixXd x1_;
  Eigen::MatrixXd g_;
};

Eigen::VectorXd ipw_moments(const Dataset& ds, const std::vector<Index>& x1_columns,
                            const Eigen::VectorXd& theta, const std::vector<BasisTerm>& basis_g);

struct GridSpec {
  double lo = -5.0;
  double hi = 5.0;
  double step = 0.01;
};

struct GammaProfile {
  std::vector<double> grid;
  std::vector<double> values;            // M(gamma) per grid point
  std::vector<bool> bracket_start;       // sign change between point k and k+1
  std::vector<double> roots;             // bisection-refined
  Eigen::VectorXd alpha_beta_fixed;
};

// M(gamma) = n^-1 sum r_i {exp(alpha0 + x1_i' beta + gamma y_i) + 1} - 1 on a grid,
// with every sign change refined by bisection. Throws kOverflow when M is
// non-finite over the whole grid and kUsage for an empty grid.
GammaProfile profile_gamma(const Dataset& ds, const std::vector<Index>& x1_columns,
                           double alpha0, const Eigen::VectorXd& beta, const GridSpec& grid);

struct IpwOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
  int max_halvings = 30;
  std::vector<double> gamma_offsets = {-2.0, -1.0, 0.0, 1.0, 2.0};
  bool hajek = false;
  double divergence_bound = 1e3;
};

struct IpwFit {
  Eigen::VectorXd theta_hat;
  bool converged = false;
  double tau_ipw = 0.0;
  double weights_max = 0.0;
  double objective = 0.0;  // |moments|_inf (IPW) or weighted quadratic form (GMM)
  std::vector<Eigen::VectorXd> solutions;  // distinct converged roots/minimisers
  // Two-step GMM only.
  Eigen::VectorXd step1_theta;
  double step1_objective = 0.0;
  Eigen::MatrixXd weight;

  double gamma() const { return theta_hat(theta_hat.size() - 1); }
};

// Just-identified IPW: damped Newton on the moment vector from a gamma
// lattice around `start`; keeps the root with the smallest |moments|_inf.
// Throws kNonconvergence when the Jacobian is singular at every start.
IpwFit solve_ipw(const Dataset& ds, const std::vector<Index>& x1_columns,
                 const std::vector<BasisTerm>& basis_g, const Eigen::VectorXd& start,
                 const IpwOptions& options = {});

// Two-step GMM with all monomials of total degree <= degree_k as basis.
// Non-convergence is reported in the fit, not thrown.
IpwFit solve_gmm(const Dataset& ds, const std::vector<Index>& x1_columns, int degree_k,
                 const IpwOptions& options = {});

// Weighted GMM objective gbar' W gbar.
double gmm_objective(const IpwProblem& problem, const Eigen::VectorXd& theta,
                     const Eigen::MatrixXd& weight);

}  // namespace mnar
