#include "mnar/propensity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mnar/error.hpp"

namespace mnar {

namespace {

// log(1 + e^t)
double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// 1 / (1 + e^t)
double inv_logit_neg(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

PropensityDesign make_propensity_design(const Dataset& ds, const DesignMatrices& dm,
                                        const Eigen::VectorXd& mu_hat) {
  const Index n = ds.size();
  if (mu_hat.size() != n || dm.rows() != n) {
    throw Error(ErrorCode::kUsage, "propensity design: row counts disagree");
  }
  PropensityDesign design;
  design.r.resize(n);
  for (Index i = 0; i < n; ++i) design.r(i) = ds.r()[static_cast<std::size_t>(i)];
  design.z.resize(n, 2 + dm.x1.cols());
  design.z.col(0).setOnes();
  design.z.middleCols(1, dm.x1.cols()) = dm.x1;
  design.z.col(design.z.cols() - 1) = mu_hat;
  return design;
}

Eigen::VectorXd response_probabilities(const PropensityDesign& design,
                                       const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = design.z * theta;
  return eta.unaryExpr([](double t) { return inv_logit_neg(t); });
}

double log_conditional_likelihood(const PropensityDesign& design,
                                  const Eigen::VectorXd& theta) {
  const Eigen::VectorXd eta = design.z * theta;
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    // log pi = -softplus(eta), log(1 - pi) = eta - softplus(eta)
    total += design.r(i) > 0.5 ? -softplus(eta(i)) : eta(i) - softplus(eta(i));
  }
  return total;
}

Eigen::MatrixXd logistic_information(const PropensityDesign& design,
                                     const Eigen::VectorXd& pi) {
  const Eigen::VectorXd w = pi.array() * (1.0 - pi.array());
  Eigen::MatrixXd info = design.z.transpose() * (w.asDiagonal() * design.z);
  return 0.5 * (info + info.transpose());
}

ScoreHessian score_and_hessian(const PropensityDesign& design,
                               const Eigen::VectorXd& theta) {
  const Eigen::VectorXd pi = response_probabilities(design, theta);
  ScoreHessian out;
  out.score = design.z.transpose() * (pi - design.r);
  out.hessian = -logistic_information(design, pi);
  return out;
}

PropensityFit fit_propensity(const PropensityDesign& design,
                             const PropensityOptions& options) {
  const Index n = design.rows();
  const double n1 = design.r.sum();
  if (n1 < 0.5 || n1 > static_cast<double>(n) - 0.5) {
    throw Error(ErrorCode::kSingular,
                "degenerate data: all response indicators are equal");
  }

  PropensityFit fit;
  fit.theta_hat = Eigen::VectorXd::Zero(design.dim());
  // pr(R=1) = 1 / (1 + e^alpha) at beta = gamma = 0.
  fit.theta_hat(0) = std::log((static_cast<double>(n) - n1) / n1);
  fit.loglik = log_conditional_likelihood(design, fit.theta_hat);
  fit.loglik_trace.push_back(fit.loglik);

  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    const Eigen::VectorXd pi = response_probabilities(design, fit.theta_hat);
    const Eigen::VectorXd score = design.z.transpose() * (pi - design.r);
    fit.gradient_norm = score.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm < options.tolerance) {
      fit.converged = true;
      break;
    }

    const Eigen::MatrixXd info = logistic_information(design, pi);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      throw Error(ErrorCode::kSingular, "singular information matrix in propensity fit");
    }
    // Newton direction theta - H^{-1} score with H = -info.
    const Eigen::VectorXd direction = ldlt.solve(score);

    // Near the optimum the gain in l_n drops below the rounding error of the
    // sum, so a step that leaves l_n flat to rounding is also accepted when
    // it reduces the score.
    const double flat = 64.0 * std::numeric_limits<double>::epsilon() *
                        std::max(1.0, std::abs(fit.loglik));
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      const Eigen::VectorXd candidate = fit.theta_hat + step * direction;
      const double ll = log_conditional_likelihood(design, candidate);
      if (!std::isfinite(ll)) continue;
      bool better = ll > fit.loglik;
      if (!better && ll >= fit.loglik - flat) {
        const Eigen::VectorXd pc = response_probabilities(design, candidate);
        better = (design.z.transpose() * (pc - design.r)).lpNorm<Eigen::Infinity>() <
                 fit.gradient_norm;
      }
      if (better) {
        fit.theta_hat = candidate;
        fit.loglik = ll;
        fit.loglik_trace.push_back(ll);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (fit.theta_hat.lpNorm<Eigen::Infinity>() > options.separation_bound) {
      std::ostringstream msg;
      msg << "complete separation suspected: |theta|_inf = "
          << fit.theta_hat.lpNorm<Eigen::Infinity>() << " with the likelihood still increasing";
      throw Error(ErrorCode::kSeparation, msg.str());
    }
  }
  if (!fit.converged) {
    const Eigen::VectorXd pi = response_probabilities(design, fit.theta_hat);
    fit.gradient_norm = (design.z.transpose() * (pi - design.r)).lpNorm<Eigen::Infinity>();
    fit.converged = fit.gradient_norm < options.tolerance;
  }
  return fit;
}

double recover_alpha0(const PropensityFit& fit, double m1_at_gamma) {
  if (!(m1_at_gamma > 0.0) || !std::isfinite(m1_at_gamma)) {
    throw Error(ErrorCode::kInternal, "M1(gamma) must be positive and finite");
  }
  return fit.alpha() - std::log(m1_at_gamma);
}

}  // namespace mnar
