#include "mnar/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mnar/bootstrap.hpp"
#include "mnar/error.hpp"
#include "mnar/parallel.hpp"
#include "mnar/pipeline.hpp"

namespace mnar {
namespace {

constexpr double kWeightTolerance = 1e-12;
constexpr double kMeanTolerance = 1e-12;

double logistic_response(double phi) {
  // 1 / (1 + exp(phi)), stable for large |phi|.
  if (phi >= 0.0) {
    const double e = std::exp(-phi);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(phi));
}

double x1_linear(const Scenario& sc, const Eigen::RowVectorXd& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < sc.model.x1_columns.size(); ++j) {
    s += sc.beta(static_cast<Index>(j)) * x(sc.model.x1_columns[j]);
  }
  return s;
}

class MixtureSampler {
 public:
  explicit MixtureSampler(const ErrorLaw& law) {
    double acc = 0.0;
    for (const auto& c : law.components()) {
      acc += c.weight;
      cumulative_.push_back(acc);
      means_.push_back(c.mean);
      sds_.push_back(std::sqrt(c.variance));
    }
    cumulative_.back() = 1.0;
  }

  double operator()(std::mt19937_64& rng, std::normal_distribution<double>& z,
                    std::uniform_real_distribution<double>& u) const {
    std::size_t k = 0;
    if (cumulative_.size() > 1) {
      const double v = u(rng);
      k = static_cast<std::size_t>(
          std::upper_bound(cumulative_.begin(), cumulative_.end(), v) - cumulative_.begin());
      k = std::min(k, cumulative_.size() - 1);
    }
    return means_[k] + sds_[k] * z(rng);
  }

 private:
  std::vector<double> cumulative_, means_, sds_;
};

StudyRow summarize(const std::string& tag, double tau0,
                   const std::vector<std::optional<MethodEstimate>>& estimates) {
  StudyRow row;
  row.method = tag;
  row.n_reps = static_cast<int>(estimates.size());
  std::vector<double> taus, gammas;
  for (const auto& e : estimates) {
    if (e && !is_non_reliable(*e)) {
      taus.push_back(e->tau);
      gammas.push_back(e->gamma);
    }
  }
  row.ncr = row.n_reps - static_cast<int>(taus.size());
  if (taus.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.rb_percent = row.mse_x100 = row.mean_tau = row.sd_tau = row.mean_gamma = row.sd_gamma = nan;
    return row;
  }
  double bias = 0.0, sq = 0.0;
  for (double t : taus) {
    bias += t - tau0;
    sq += (t - tau0) * (t - tau0);
  }
  const auto m = static_cast<double>(taus.size());
  row.rb_percent = 100.0 * (bias / m) / tau0;
  row.mse_x100 = 100.0 * sq / m;
  row.mean_tau = mean(taus);
  row.sd_tau = std::sqrt(sample_variance(taus));
  row.mean_gamma = mean(gammas);
  row.sd_gamma = std::sqrt(sample_variance(gammas));
  return row;
}

}  // namespace

ErrorLaw::ErrorLaw(std::vector<NormalComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::kUsage, "error law needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::kUsage, "error law weights must be positive");
    }
    if (!(c.variance > 0.0) || !std::isfinite(c.variance) || !std::isfinite(c.mean)) {
      throw Error(ErrorCode::kUsage, "error law components need finite mean and positive variance");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::kUsage, "error law weights must sum to one");
  }
}

ErrorLaw ErrorLaw::normal(double variance) { return ErrorLaw({{1.0, 0.0, variance}}); }

ErrorLaw ErrorLaw::two_component(double delta) {
  if (delta == 0.0) return normal(4.0);
  return ErrorLaw({{2.0 / 3.0, -delta, 4.0 - 3.0 * delta * delta}, {1.0 / 3.0, 2.0 * delta, 4.0}});
}

double ErrorLaw::mean() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

double ErrorLaw::variance() const {
  const double mu = mean();
  double v = 0.0;
  for (const auto& c : components_) v += c.weight * (c.variance + (c.mean - mu) * (c.mean - mu));
  return v;
}

double ErrorLaw::m1(double t) const {
  double s = 0.0;
  for (const auto& c : components_) s += c.weight * std::exp(t * c.mean + 0.5 * t * t * c.variance);
  return s;
}

double ErrorLaw::m2(double t) const {
  // d/dt of each component MGF.
  double s = 0.0;
  for (const auto& c : components_) {
    s += c.weight * std::exp(t * c.mean + 0.5 * t * t * c.variance) * (c.mean + t * c.variance);
  }
  return s;
}

double ErrorLaw::cdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) p += c.weight * normal_cdf((x - c.mean) / std::sqrt(c.variance));
  return p;
}

double ErrorLaw::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  return MixtureSampler(*this)(rng, z, u);
}

TiltedLaw tilt_error_law(const ErrorLaw& law, double gamma) {
  if (!std::isfinite(gamma)) throw Error(ErrorCode::kUsage, "tilt parameter must be finite");
  std::vector<NormalComponent> out;
  double m1 = 0.0;
  for (const auto& c : law.components()) {
    const double w = c.weight * std::exp(gamma * c.mean + 0.5 * gamma * gamma * c.variance);
    m1 += w;
    out.push_back({w, c.mean + gamma * c.variance, c.variance});
  }
  if (!std::isfinite(m1)) throw Error(ErrorCode::kOverflow, "tilted error law weights overflow");
  for (auto& c : out) c.weight /= m1;
  // Renormalise so the constructor's sum check is exact to rounding.
  const double total = std::accumulate(out.begin(), out.end(), 0.0,
                                       [](double a, const NormalComponent& c) { return a + c.weight; });
  for (auto& c : out) c.weight /= total;
  return {ErrorLaw(std::move(out)), m1};
}

double Scenario::alpha_induced() const { return alpha0 + std::log(error.m1(gamma)); }

double Scenario::mu(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < model.mean_basis.size(); ++k) {
    s += xi(static_cast<Index>(k)) * model.mean_basis[k].evaluate(x);
  }
  return s;
}

void Scenario::validate() const {
  const Index d = covariate_count();
  if (d == 0) throw Error(ErrorCode::kUsage, "scenario needs at least one covariate");
  for (const auto& c : covariates) {
    if (!(c.variance > 0.0) || !std::isfinite(c.mean)) {
      throw Error(ErrorCode::kUsage, "covariate laws need finite mean and positive variance");
    }
  }
  model.validate(d);
  if (xi.size() != model.mean_dim()) throw Error(ErrorCode::kUsage, "xi does not match the mean basis");
  if (beta.size() != static_cast<Index>(model.x1_columns.size())) {
    throw Error(ErrorCode::kUsage, "beta does not match x1_columns");
  }
  if (!std::isfinite(alpha0) || !std::isfinite(gamma) || !beta.allFinite() || !xi.allFinite()) {
    throw Error(ErrorCode::kUsage, "scenario parameters must be finite");
  }
  if (std::abs(error.mean()) > kMeanTolerance) {
    throw Error(ErrorCode::kUsage, "scenario error law must have mean zero");
  }
  // Identifiability of the true mean function on a small covariate sample.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> z;
  const Index m = 200;
  Eigen::MatrixXd x(m, d);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < d; ++j) {
      const auto& law = covariates[static_cast<std::size_t>(j)];
      x(i, j) = law.mean + std::sqrt(law.variance) * z(rng);
    }
  }
  std::vector<std::optional<double>> y(static_cast<std::size_t>(m), 0.0);
  const Dataset probe = Dataset::from_outcomes(std::move(y), std::move(x));
  const auto report = check_identifiability(build_design(probe, model), xi);
  if (!report.identifiable) {
    throw Error(ErrorCode::kIdentifiability, "scenario mean function lies in span{1, x1}");
  }
}

namespace {

Scenario example_common(std::string name, std::vector<CovariateLaw> covariates,
                        std::vector<BasisTerm> basis, Eigen::VectorXd xi, double alpha0,
                        double delta) {
  Scenario sc;
  sc.name = std::move(name);
  sc.covariates = std::move(covariates);
  sc.model.mean_basis = std::move(basis);
  sc.model.x1_columns = {0};
  sc.xi = std::move(xi);
  sc.alpha0 = alpha0;
  sc.beta = Eigen::VectorXd::Constant(1, -0.4);
  sc.gamma = 0.5;
  sc.error = ErrorLaw::two_component(delta);
  sc.validate();
  return sc;
}

}  // namespace

Scenario example1(double alpha0, double delta) {
  Eigen::VectorXd xi(3);
  xi << 2.5, -1.0, 1.5;
  std::ostringstream name;
  name << "example1(alpha0=" << alpha0 << ",delta=" << delta << ")";
  return example_common(name.str(), {{1.0, 1.0}, {0.0, 1.0}}, monomial_basis(2, 1), xi, alpha0,
                        delta);
}

Scenario example2(double alpha0, double delta) {
  Eigen::VectorXd xi(3);
  xi << 2.0, -1.0, 1.0;
  std::ostringstream name;
  name << "example2(alpha0=" << alpha0 << ",delta=" << delta << ")";
  return example_common(name.str(), {{0.0, 1.0}}, monomial_basis(1, 2), xi, alpha0, delta);
}

Scenario selection_example() {
  Scenario sc;
  sc.name = "selection";
  sc.covariates = {{0.0, 2.0}, {0.0, 1.0}};
  sc.model.mean_basis = monomial_basis(2, 1);
  sc.model.x1_columns = {0};
  sc.xi = Eigen::Vector3d(0.0, 1.0, 1.0);
  sc.alpha0 = -1.0;
  sc.beta = Eigen::VectorXd::Constant(1, -1.0);
  sc.gamma = 3.0;
  sc.error = ErrorLaw::normal(1.0);
  sc.mechanism = Mechanism::kFullData;
  sc.validate();
  return sc;
}

double normal_raw_moment(double mean, double variance, int k) {
  if (k < 0) throw Error(ErrorCode::kUsage, "moment order must be non-negative");
  double prev = 1.0;  // E x^0
  if (k == 0) return prev;
  double cur = mean;  // E x^1
  for (int j = 2; j <= k; ++j) {
    const double next = mean * cur + (j - 1) * variance * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Truth compute_truth(const Scenario& sc, Index mc_draws, std::uint64_t seed) {
  if (mc_draws < kMinTruthDraws) {
    throw Error(ErrorCode::kUsage, "compute_truth needs at least 1e6 Monte Carlo draws");
  }
  sc.validate();
  Truth t;
  for (std::size_t k = 0; k < sc.model.mean_basis.size(); ++k) {
    double term = 1.0;
    const auto& e = sc.model.mean_basis[k].exponents;
    for (std::size_t j = 0; j < e.size(); ++j) {
      term *= normal_raw_moment(sc.covariates[j].mean, sc.covariates[j].variance, e[j]);
    }
    t.mean_mu += sc.xi(static_cast<Index>(k)) * term;
  }
  t.m1 = sc.error.m1(sc.gamma);
  t.m2 = sc.error.m2(sc.gamma);
  t.alpha_induced = sc.alpha_induced();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  const MixtureSampler eps(sc.error);
  const Index d = sc.covariate_count();
  std::vector<double> sd(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) sd[static_cast<std::size_t>(j)] = std::sqrt(sc.covariates[static_cast<std::size_t>(j)].variance);
  Eigen::RowVectorXd x(d);
  // Welford accumulation of pi.
  double mean_pi = 0.0, m2_pi = 0.0;
  for (Index i = 0; i < mc_draws; ++i) {
    for (Index j = 0; j < d; ++j) {
      x(j) = sc.covariates[static_cast<std::size_t>(j)].mean + sd[static_cast<std::size_t>(j)] * z(rng);
    }
    const double mu = sc.mu(x);
    double phi;
    if (sc.mechanism == Mechanism::kFullData) {
      phi = sc.alpha0 + x1_linear(sc, x) + sc.gamma * (mu + eps(rng, z, u));
    } else {
      phi = t.alpha_induced + x1_linear(sc, x) + sc.gamma * mu;
    }
    const double p = logistic_response(phi);
    const double delta = p - mean_pi;
    mean_pi += delta / static_cast<double>(i + 1);
    m2_pi += delta * (p - mean_pi);
  }
  t.eta0 = mean_pi;
  t.pr_missing = 1.0 - mean_pi;
  t.pr_missing_standard_error =
      std::sqrt(m2_pi / static_cast<double>(mc_draws - 1) / static_cast<double>(mc_draws));
  if (sc.mechanism == Mechanism::kFullData) {
    t.tau0 = t.mean_mu + sc.error.mean();
  } else {
    t.tau0 = t.mean_mu + t.pr_missing * t.m2 / t.m1;
  }
  return t;
}

LatentSample generate_latent(const Scenario& sc, Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kUsage, "sample size must be at least 1");
  const Index d = sc.covariate_count();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  const MixtureSampler f(sc.error);
  const MixtureSampler tilted(tilt_error_law(sc.error, sc.gamma).tilted);
  const double alpha_ind = sc.alpha_induced();

  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y_full(n), errors(n);
  std::vector<int> r(static_cast<std::size_t>(n));
  std::vector<std::optional<double>> y(static_cast<std::size_t>(n));
  Eigen::RowVectorXd xi_row(d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) {
      const auto& law = sc.covariates[static_cast<std::size_t>(j)];
      xi_row(j) = law.mean + std::sqrt(law.variance) * z(rng);
    }
    x.row(i) = xi_row;
    const double mu = sc.mu(xi_row);
    int ri;
    double e;
    if (sc.mechanism == Mechanism::kFullData) {
      e = f(rng, z, u);
      const double p = logistic_response(sc.alpha0 + x1_linear(sc, xi_row) + sc.gamma * (mu + e));
      ri = u(rng) < p ? 1 : 0;
    } else {
      const double p = logistic_response(alpha_ind + x1_linear(sc, xi_row) + sc.gamma * mu);
      ri = u(rng) < p ? 1 : 0;
      e = ri == 1 ? f(rng, z, u) : tilted(rng, z, u);
    }
    errors(i) = e;
    y_full(i) = mu + e;
    r[static_cast<std::size_t>(i)] = ri;
    if (ri == 1) y[static_cast<std::size_t>(i)] = mu + e;
  }
  std::vector<std::string> names;
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return {Dataset(std::move(r), std::move(y), std::move(x), std::move(names)), std::move(y_full),
          std::move(errors)};
}

Dataset generate_dataset(const Scenario& sc, Index n, std::uint64_t seed) {
  return generate_latent(sc, n, seed).data;
}

StudyReport run_study(const Scenario& sc, double tau0, const StudyOptions& options) {
  if (options.reps < 1) throw Error(ErrorCode::kUsage, "a study needs at least one replication");
  if (options.methods.empty()) throw Error(ErrorCode::kUsage, "a study needs at least one method");
  MethodContext context = options.context;
  if (!context.oracle_tau) context.oracle_tau = tau0;

  const auto n_methods = options.methods.size();
  StudyReport report;
  report.estimates.assign(n_methods,
                          std::vector<std::optional<MethodEstimate>>(static_cast<std::size_t>(options.reps)));
  parallel_for(options.reps, options.threads, [&](Index rep) {
    const Dataset ds = generate_dataset(sc, options.n, derive_seed(options.seed, static_cast<std::uint64_t>(rep)));
    for (std::size_t m = 0; m < n_methods; ++m) {
      try {
        report.estimates[m][static_cast<std::size_t>(rep)] =
            run_method(options.methods[m], ds, sc.model, context);
      } catch (const std::exception&) {
        // Counted as non-convergent.
      }
    }
  });
  for (std::size_t m = 0; m < n_methods; ++m) {
    report.rows.push_back(summarize(options.methods[m].tag(), tau0, report.estimates[m]));
  }
  return report;
}

CoverageResult run_coverage_study(const Scenario& sc, double tau0, const CoverageOptions& options,
                                  const IntervalFn& interval) {
  if (options.reps < 1) throw Error(ErrorCode::kUsage, "a study needs at least one replication");
  const auto reps = static_cast<std::size_t>(options.reps);
  std::vector<std::optional<ConfidenceInterval>> cis(reps);
  parallel_for(options.reps, options.threads, [&](Index rep) {
    const std::uint64_t rep_seed = derive_seed(options.seed, static_cast<std::uint64_t>(rep));
    try {
      const Dataset ds = generate_dataset(sc, options.n, rep_seed);
      cis[static_cast<std::size_t>(rep)] = interval(ds, rep_seed);
    } catch (const std::exception&) {
    }
  });
  CoverageResult out;
  int covered = 0;
  double width = 0.0;
  for (const auto& ci : cis) {
    if (!ci) {
      ++out.failures;
      continue;
    }
    ++out.n_valid;
    if (ci->contains(tau0)) ++covered;
    width += ci->width();
  }
  if (out.n_valid > 0) {
    out.coverage_percent = 100.0 * covered / out.n_valid;
    out.mean_width = width / out.n_valid;
  } else {
    out.coverage_percent = out.mean_width = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

CoverageResult run_coverage_study(const Scenario& sc, double tau0, const CoverageOptions& options) {
  MethodContext context = options.context;
  context.fit.level = options.level;
  IntervalFn fn;
  switch (options.method) {
    case IntervalMethod::kWald:
      fn = [&](const Dataset& ds, std::uint64_t) {
        FitOptions fit = context.fit;
        fit.compute_variance = true;
        return *fit_proposed(ds, sc.model, fit).wald;
      };
      break;
    case IntervalMethod::kBootstrapT:
    case IntervalMethod::kBootstrapPercentile:
      fn = [&](const Dataset& ds, std::uint64_t rep_seed) {
        BootstrapOptions b;
        b.resamples = options.bootstrap_resamples;
        b.level = options.level;
        b.seed = derive_seed(rep_seed, 0xB0075712ULL);
        b.threads = 1;
        b.context = context;
        if (options.method == IntervalMethod::kBootstrapT) return bootstrap_t_ci(ds, sc.model, b).ci;
        return bootstrap_percentile_ci(MethodSpec{}, ds, sc.model, b).ci;
      };
      break;
  }
  return run_coverage_study(sc, tau0, options, fn);
}

}  // namespace mnar
