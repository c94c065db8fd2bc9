#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mnar/asymptotic.hpp"
#include "mnar/dataset.hpp"
#include "mnar/methods.hpp"
#include "mnar/stats.hpp"

namespace mnar {

struct NormalComponent {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;
};

// Finite normal mixture. Weights must be positive and sum to one; a zero
// mean is required of scenario error laws but not of tilted laws.
class ErrorLaw {
 public:
  explicit ErrorLaw(std::vector<NormalComponent> components);

  static ErrorLaw normal(double variance);
  // 2/3 N(-delta, 4 - 3 delta^2) + 1/3 N(2 delta, 4); N(0, 4) at delta = 0.
  static ErrorLaw two_component(double delta);

  const std::vector<NormalComponent>& components() const { return components_; }
  double mean() const;
  double variance() const;
  // M1(t) = E e^{t e} and M2(t) = E e e^{t e}.
  double m1(double t) const;
  double m2(double t) const;
  double cdf(double x) const;
  double sample(std::mt19937_64& rng) const;

 private:
  std::vector<NormalComponent> components_;
};

struct TiltedLaw {
  ErrorLaw tilted;
  double m1 = 1.0;
};

// Density proportional to exp(gamma e) f(e): component k becomes
// N(m_k + gamma s_k^2, s_k^2) with weight proportional to
// w_k exp(gamma m_k + gamma^2 s_k^2 / 2).
TiltedLaw tilt_error_law(const ErrorLaw& law, double gamma);

struct CovariateLaw {
  double mean = 0.0;
  double variance = 1.0;
};

enum class Mechanism {
  // X -> R | X (induced logistic model) -> e | R (f or its tilt).
  // The location-scale model holds among respondents.
  kObservedOutcomeModel,
  // X -> e ~ f -> Y = mu(X) + e -> R | X, Y. The outcome model holds in the
  // full population.
  kFullData,
};

struct Scenario {
  std::string name;
  std::vector<CovariateLaw> covariates;  // independent normals
  ModelConfig model;                     // true mean basis and x1 columns
  Eigen::VectorXd xi;                    // true mean coefficients
  double alpha0 = 0.0;
  Eigen::VectorXd beta;
  double gamma = 0.0;
  ErrorLaw error = ErrorLaw::normal(1.0);
  Mechanism mechanism = Mechanism::kObservedOutcomeModel;

  Index covariate_count() const { return static_cast<Index>(covariates.size()); }
  // alpha0 + log M1(gamma): intercept of the induced model for R given x.
  double alpha_induced() const;
  double mu(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  void validate() const;
};

// X1 ~ N(1,1), X2 ~ N(0,1); mu = 2.5 - x1 + 1.5 x2; beta = -0.4 on x1; gamma = 0.5.
Scenario example1(double alpha0, double delta);
// X ~ N(0,1); mu = 2 - x + x^2; beta = -0.4; gamma = 0.5.
Scenario example2(double alpha0, double delta);
// Y = X1 + X2 + e with X1 ~ N(0,2), X2 ~ N(0,1), e ~ N(0,1) in the full
// population; pr(R=1|x,y) = 1/(1 + exp(-1 - x1 + 3y)).
Scenario selection_example();

struct Truth {
  double tau0 = 0.0;
  double pr_missing = 0.0;
  double eta0 = 0.0;
  double alpha_induced = 0.0;
  double mean_mu = 0.0;
  double m1 = 1.0;
  double m2 = 0.0;
  double pr_missing_standard_error = 0.0;
};

inline constexpr Index kMinTruthDraws = 1'000'000;

// E mu(X) in closed form (independent normal covariates); M1, M2 in closed
// form; pr(R=0) by Monte Carlo over X (and e for the full-data mechanism).
Truth compute_truth(const Scenario& sc, Index mc_draws, std::uint64_t seed);

// Exact E x^k for x ~ N(m, v).
double normal_raw_moment(double mean, double variance, int k);

struct LatentSample {
  Dataset data;
  Eigen::VectorXd y_full;  // outcomes before masking
  Eigen::VectorXd errors;
};

LatentSample generate_latent(const Scenario& sc, Index n, std::uint64_t seed);
Dataset generate_dataset(const Scenario& sc, Index n, std::uint64_t seed);

struct StudyOptions {
  Index n = 2000;
  int reps = 1000;
  std::vector<MethodSpec> methods = {MethodSpec{}};
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  MethodContext context;
};

struct StudyRow {
  std::string method;
  double rb_percent = 0.0;  // 100 mean(tau - tau0) / tau0 over reliable reps
  double mse_x100 = 0.0;    // 100 mean (tau - tau0)^2 over reliable reps
  int ncr = 0;
  int n_reps = 0;
  double mean_tau = 0.0;
  double sd_tau = 0.0;
  double mean_gamma = 0.0;
  double sd_gamma = 0.0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  // estimates[m][rep]; nullopt when the method threw.
  std::vector<std::vector<std::optional<MethodEstimate>>> estimates;
};

// Replication rep uses generate_dataset(sc, n, derive_seed(seed, rep)).
StudyReport run_study(const Scenario& sc, double tau0, const StudyOptions& options);

struct CoverageOptions {
  Index n = 2000;
  int reps = 1000;
  IntervalMethod method = IntervalMethod::kWald;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  int bootstrap_resamples = 399;
  MethodContext context;
};

struct CoverageResult {
  double coverage_percent = 0.0;
  double mean_width = 0.0;
  int n_valid = 0;
  int failures = 0;
};

using IntervalFn = std::function<ConfidenceInterval(const Dataset&, std::uint64_t)>;

CoverageResult run_coverage_study(const Scenario& sc, double tau0, const CoverageOptions& options);
// Same driver with a caller-supplied interval (test hook).
CoverageResult run_coverage_study(const Scenario& sc, double tau0, const CoverageOptions& options,
                                  const IntervalFn& interval);

}  // namespace mnar
