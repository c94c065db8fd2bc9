#include "mnar/ipw_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mnar/error.hpp"

namespace mnar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

void add_solution(std::vector<Eigen::VectorXd>& solutions, const Eigen::VectorXd& theta) {
  for (const auto& s : solutions) {
    if ((s - theta).lpNorm<Eigen::Infinity>() < 1e-6 * (1.0 + theta.lpNorm<Eigen::Infinity>())) {
      return;
    }
  }
  solutions.push_back(theta);
}

Eigen::MatrixXd basis_matrix(const Dataset& ds, const std::vector<BasisTerm>& basis) {
  Eigen::MatrixXd g(ds.size(), static_cast<Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k].dimension() != ds.covariate_count()) {
      throw Error(ErrorCode::kUsage, "moment basis term dimension does not match covariates");
    }
    for (Index i = 0; i < ds.size(); ++i) {
      g(i, static_cast<Index>(k)) = basis[k].evaluate(ds.x().row(i));
    }
  }
  return g;
}

struct NewtonRun {
  Eigen::VectorXd theta;
  double norm = kInf;
  bool converged = false;
  bool singular = false;
};

// Damped Newton on F(theta) = moments (square system).
NewtonRun newton_root(const IpwProblem& problem, Eigen::VectorXd theta,
                      const IpwOptions& options) {
  NewtonRun run;
  Eigen::VectorXd f = problem.moments(theta);
  if (!finite(f)) return run;
  double merit = f.squaredNorm();
  for (int it = 0; it < options.max_iterations; ++it) {
    run.theta = theta;
    run.norm = f.lpNorm<Eigen::Infinity>();
    if (run.norm < options.tolerance) {
      run.converged = true;
      return run;
    }
    const Eigen::MatrixXd jac = problem.jacobian(theta);
    if (!jac.allFinite()) return run;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) {
      run.singular = true;
      return run;
    }
    const Eigen::VectorXd direction = -lu.solve(f);
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      const Eigen::VectorXd candidate = theta + step * direction;
      const Eigen::VectorXd fc = problem.moments(candidate);
      if (finite(fc) && fc.squaredNorm() < merit) {
        theta = candidate;
        f = fc;
        merit = fc.squaredNorm();
        accepted = true;
        break;
      }
    }
    if (!accepted || theta.lpNorm<Eigen::Infinity>() > options.divergence_bound) break;
  }
  run.theta = theta;
  run.norm = f.lpNorm<Eigen::Infinity>();
  run.converged = run.norm < options.tolerance &&
                  theta.lpNorm<Eigen::Infinity>() <= options.divergence_bound;
  return run;
}

struct MinimizeRun {
  Eigen::VectorXd theta;
  double objective = kInf;
  bool converged = false;
};

// Gauss-Newton with step halving on Q(theta) = gbar' W gbar. Converged when
// the Newton decrement falls below 1e-10 Q + 1e-18.
MinimizeRun minimize_gmm(const IpwProblem& problem, Eigen::VectorXd theta,
                         const Eigen::MatrixXd& weight, const IpwOptions& options) {
  MinimizeRun run;
  Eigen::VectorXd g = problem.moments(theta);
  if (!finite(g)) return run;
  double q = g.dot(weight * g);
  for (int it = 0; it < options.max_iterations; ++it) {
    run.theta = theta;
    run.objective = q;
    const Eigen::MatrixXd jac = problem.jacobian(theta);
    if (!jac.allFinite()) return run;
    const Eigen::MatrixXd h = jac.transpose() * weight * jac;
    const Eigen::VectorXd grad = jac.transpose() * (weight * g);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1e-300, ldlt.vectorD().maxCoeff())) {
      return run;
    }
    const Eigen::VectorXd direction = -ldlt.solve(grad);
    const double decrement = -grad.dot(direction);
    if (decrement <= 1e-10 * q + 1e-18) {
      run.converged = true;
      return run;
    }
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, step *= 0.5) {
      const Eigen::VectorXd candidate = theta + step * direction;
      const Eigen::VectorXd gc = problem.moments(candidate);
      if (!finite(gc)) continue;
      const double qc = gc.dot(weight * gc);
      if (qc < q) {
        theta = candidate;
        g = gc;
        q = qc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No further decrease representable; accept if the decrement is tiny.
      run.converged = decrement <= 1e-8 * q + 1e-16;
      return run;
    }
    if (theta.lpNorm<Eigen::Infinity>() > options.divergence_bound) {
      run.theta = theta;
      run.objective = q;
      return run;
    }
  }
  run.theta = theta;
  run.objective = q;
  return run;
}

std::vector<Eigen::VectorXd> lattice(const Eigen::VectorXd& center, const IpwOptions& options) {
  std::vector<Eigen::VectorXd> starts;
  for (double offset : options.gamma_offsets) {
    Eigen::VectorXd s = center;
    s(s.size() - 1) += offset;
    starts.push_back(s);
  }
  return starts;
}

}  // namespace

IpwProblem::IpwProblem(const Dataset& ds, std::vector<Index> x1_columns,
                       std::vector<BasisTerm> basis_g) {
  const Index n = ds.size();
  r_.resize(n);
  y_.setZero(n);
  for (Index i = 0; i < n; ++i) {
    r_(i) = ds.r()[static_cast<std::size_t>(i)];
    if (ds.observed(i)) y_(i) = ds.outcome(i);
  }
  x1_.resize(n, static_cast<Index>(x1_columns.size()));
  for (std::size_t j = 0; j < x1_columns.size(); ++j) {
    if (x1_columns[j] < 0 || x1_columns[j] >= ds.covariate_count()) {
      throw Error(ErrorCode::kUsage, "x1 column out of range");
    }
    x1_.col(static_cast<Index>(j)) = ds.x().col(x1_columns[j]);
  }
  g_ = basis_matrix(ds, basis_g);
}

Eigen::VectorXd IpwProblem::exponent(const Eigen::VectorXd& theta) const {
  const Index p = theta_dim();
  if (theta.size() != p) throw Error(ErrorCode::kUsage, "theta has the wrong dimension");
  Eigen::VectorXd phi = Eigen::VectorXd::Constant(rows(), theta(0));
  if (x1_.cols() > 0) phi += x1_ * theta.segment(1, x1_.cols());
  phi += theta(p - 1) * y_;
  return phi.cwiseProduct(r_);
}

Eigen::MatrixXd IpwProblem::moment_rows(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd phi = exponent(theta);
  Eigen::VectorXd w(rows());
  for (Index i = 0; i < rows(); ++i) {
    w(i) = r_(i) > 0.5 ? std::exp(phi(i)) : -1.0;
  }
  return w.asDiagonal() * g_;
}

Eigen::VectorXd IpwProblem::moments(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd phi = exponent(theta);
  Eigen::VectorXd w(rows());
  for (Index i = 0; i < rows(); ++i) w(i) = r_(i) > 0.5 ? std::exp(phi(i)) : -1.0;
  return g_.transpose() * w / static_cast<double>(rows());
}

Eigen::MatrixXd IpwProblem::jacobian(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd phi = exponent(theta);
  const Index p = theta_dim();
  Eigen::MatrixXd dphi(rows(), p);
  dphi.col(0).setOnes();
  if (x1_.cols() > 0) dphi.middleCols(1, x1_.cols()) = x1_;
  dphi.col(p - 1) = y_;
  Eigen::VectorXd w(rows());
  for (Index i = 0; i < rows(); ++i) w(i) = r_(i) > 0.5 ? std::exp(phi(i)) : 0.0;
  return g_.transpose() * (w.asDiagonal() * dphi) / static_cast<double>(rows());
}

double IpwProblem::mean_outcome(const Eigen::VectorXd& theta, bool hajek) const {
  const Eigen::VectorXd phi = exponent(theta);
  double num = 0.0;
  double den = 0.0;
  for (Index i = 0; i < rows(); ++i) {
    if (r_(i) < 0.5) continue;
    const double w = 1.0 + std::exp(phi(i));  // 1 / pi_i
    num += w * y_(i);
    den += w;
  }
  return hajek ? num / den : num / static_cast<double>(rows());
}

double IpwProblem::max_weight(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd phi = exponent(theta);
  double best = 0.0;
  for (Index i = 0; i < rows(); ++i) {
    if (r_(i) > 0.5) best = std::max(best, 1.0 + std::exp(phi(i)));
  }
  return best;
}

Eigen::VectorXd IpwProblem::default_start() const {
  Eigen::VectorXd start = Eigen::VectorXd::Zero(theta_dim());
  const double n1 = r_.sum();
  const double n = static_cast<double>(rows());
  if (n1 > 0.0 && n1 < n) start(0) = std::log((n - n1) / n1);
  return start;
}

Eigen::VectorXd ipw_moments(const Dataset& ds, const std::vector<Index>& x1_columns,
                            const Eigen::VectorXd& theta, const std::vector<BasisTerm>& basis_g) {
  return IpwProblem(ds, x1_columns, basis_g).moments(theta);
}

GammaProfile profile_gamma(const Dataset& ds, const std::vector<Index>& x1_columns,
                           double alpha0, const Eigen::VectorXd& beta, const GridSpec& grid) {
  if (!(grid.lo < grid.hi) || !(grid.step > 0.0)) {
    throw Error(ErrorCode::kUsage, "gamma grid needs lo < hi and step > 0");
  }
  if (beta.size() != static_cast<Index>(x1_columns.size())) {
    throw Error(ErrorCode::kUsage, "beta length must match x1 columns");
  }
  const IpwProblem problem(ds, x1_columns, {BasisTerm::intercept(ds.covariate_count())});
  Eigen::VectorXd theta(beta.size() + 2);
  theta(0) = alpha0;
  theta.segment(1, beta.size()) = beta;

  auto m_of = [&](double gamma) {
    theta(theta.size() - 1) = gamma;
    return problem.moments(theta)(0);
  };

  GammaProfile profile;
  profile.alpha_beta_fixed = theta.head(theta.size() - 1);
  const auto count = static_cast<std::size_t>(std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  bool any_finite = false;
  for (std::size_t k = 0; k < count; ++k) {
    const double gamma = grid.lo + static_cast<double>(k) * grid.step;
    profile.grid.push_back(gamma);
    profile.values.push_back(m_of(gamma));
    any_finite = any_finite || std::isfinite(profile.values.back());
  }
  if (!any_finite) throw Error(ErrorCode::kOverflow, "M(gamma) is non-finite on the entire grid");

  profile.bracket_start.assign(count, false);
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double a = profile.values[k];
    const double b = profile.values[k + 1];
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    if (a == 0.0) {
      profile.bracket_start[k] = true;
      profile.roots.push_back(profile.grid[k]);
      continue;
    }
    if ((a < 0.0) == (b < 0.0) || b == 0.0) continue;
    profile.bracket_start[k] = true;
    double lo = profile.grid[k], hi = profile.grid[k + 1];
    double flo = a;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (lo + hi);
      const double fm = m_of(mid);
      if (std::abs(fm) < 1e-10 || mid == lo || mid == hi) break;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    profile.roots.push_back(mid);
  }
  if (!profile.values.empty() && profile.values.back() == 0.0) {
    profile.roots.push_back(profile.grid.back());
  }
  return profile;
}

IpwFit solve_ipw(const Dataset& ds, const std::vector<Index>& x1_columns,
                 const std::vector<BasisTerm>& basis_g, const Eigen::VectorXd& start,
                 const IpwOptions& options) {
  const IpwProblem problem(ds, x1_columns, basis_g);
  if (problem.moment_count() != problem.theta_dim()) {
    throw Error(ErrorCode::kUsage, "IPW needs as many basis functions as parameters (" +
                                       std::to_string(problem.theta_dim()) + ")");
  }
  if (start.size() != problem.theta_dim()) {
    throw Error(ErrorCode::kUsage, "start has the wrong dimension");
  }

  IpwFit fit;
  fit.objective = kInf;
  NewtonRun best;
  bool all_singular = true;
  for (const auto& s : lattice(start, options)) {
    const NewtonRun run = newton_root(problem, s, options);
    all_singular = all_singular && run.singular;
    if (run.converged) add_solution(fit.solutions, run.theta);
    const bool better = (run.converged && !best.converged) ||
                        (run.converged == best.converged && run.norm < best.norm);
    if (run.theta.size() > 0 && better) best = run;
  }
  if (all_singular) throw Error(ErrorCode::kNonconvergence, "IPW Jacobian singular at every start");
  if (best.theta.size() == 0) {
    fit.theta_hat = start;
    fit.converged = false;
    fit.tau_ipw = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  fit.theta_hat = best.theta;
  fit.converged = best.converged;
  fit.objective = best.norm;
  fit.tau_ipw = problem.mean_outcome(best.theta, options.hajek);
  fit.weights_max = problem.max_weight(best.theta);
  return fit;
}

double gmm_objective(const IpwProblem& problem, const Eigen::VectorXd& theta,
                     const Eigen::MatrixXd& weight) {
  const Eigen::VectorXd g = problem.moments(theta);
  return g.dot(weight * g);
}

IpwFit solve_gmm(const Dataset& ds, const std::vector<Index>& x1_columns, int degree_k,
                 const IpwOptions& options) {
  const IpwProblem problem(ds, x1_columns, monomial_basis(ds.covariate_count(), degree_k));
  const Index l = problem.moment_count();
  if (l < problem.theta_dim()) {
    throw Error(ErrorCode::kUsage, "GMM degree " + std::to_string(degree_k) + " yields " +
                                       std::to_string(l) + " moments for " +
                                       std::to_string(problem.theta_dim()) + " parameters");
  }

  auto best_of = [&](const Eigen::VectorXd& center, const Eigen::MatrixXd& weight,
                     std::vector<Eigen::VectorXd>* solutions) {
    MinimizeRun best;
    for (const auto& s : lattice(center, options)) {
      const MinimizeRun run = minimize_gmm(problem, s, weight, options);
      if (run.theta.size() == 0) continue;
      if (run.converged && solutions) add_solution(*solutions, run.theta);
      const bool better = (run.converged && !best.converged) ||
                          (run.converged == best.converged && run.objective < best.objective);
      if (better) best = run;
    }
    return best;
  };

  IpwFit fit;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(l, l);
  const MinimizeRun step1 = best_of(problem.default_start(), identity, nullptr);
  if (step1.theta.size() == 0) {
    fit.theta_hat = problem.default_start();
    fit.converged = false;
    fit.tau_ipw = std::numeric_limits<double>::quiet_NaN();
    fit.objective = kInf;
    return fit;
  }
  fit.step1_theta = step1.theta;

  const Eigen::MatrixXd rows = problem.moment_rows(step1.theta);
  Eigen::MatrixXd omega = rows.transpose() * rows / static_cast<double>(problem.rows());
  omega += 1e-8 * omega.trace() * identity;
  fit.weight = omega.ldlt().solve(identity);
  fit.weight = 0.5 * (fit.weight + fit.weight.transpose());
  if (!fit.weight.allFinite()) {
    fit.theta_hat = step1.theta;
    fit.converged = false;
    fit.tau_ipw = problem.mean_outcome(step1.theta, options.hajek);
    fit.objective = kInf;
    return fit;
  }
  fit.step1_objective = gmm_objective(problem, step1.theta, fit.weight);

  const MinimizeRun step2 = best_of(step1.theta, fit.weight, &fit.solutions);
  const MinimizeRun& chosen = step2.theta.size() > 0 ? step2 : step1;
  fit.theta_hat = chosen.theta;
  fit.converged = step1.converged && step2.theta.size() > 0 && step2.converged;
  fit.objective = step2.theta.size() > 0 ? step2.objective : fit.step1_objective;
  fit.tau_ipw = problem.mean_outcome(fit.theta_hat, options.hajek);
  fit.weights_max = problem.max_weight(fit.theta_hat);
  return fit;
}

}  // namespace mnar
