#include <numeric>

#include <gtest/gtest.h>

#include "mnar/bootstrap.hpp"
#include "mnar/simulation.hpp"
#include "support/test_util.hpp"

namespace mnar {
namespace {

using testing::expect_error;

TEST(BootstrapT, SymmetricToy) {
  const ConfidenceInterval ci = bootstrap_t_interval(3.0, 2.0, 16, {2.0, -1.0, 0.0, -2.0, 1.0}, 0.5);
  EXPECT_DOUBLE_EQ(ci.lower, 3.0 - 1.0 * 0.5);
  EXPECT_DOUBLE_EQ(ci.upper, 3.0 + 1.0 * 0.5);
  EXPECT_EQ(ci.method, IntervalMethod::kBootstrapT);
}

TEST(BootstrapT, ApproachesWaldForNormalPivot) {
  std::vector<double> t;
  const int b = 100001;
  for (int k = 1; k <= b; ++k) t.push_back(normal_quantile(static_cast<double>(k) / (b + 1)));
  const ConfidenceInterval boot = bootstrap_t_interval(1.0, 3.0, 400, t, 0.95);
  const ConfidenceInterval wald = wald_ci(1.0, 9.0, 400, 0.95);
  EXPECT_NEAR(boot.lower, wald.lower, 1e-4);
  EXPECT_NEAR(boot.upper, wald.upper, 1e-4);
}

TEST(Percentile, UniformGridUsesTypeSeven) {
  std::vector<double> est(100);
  std::iota(est.begin(), est.end(), 1.0);
  std::reverse(est.begin(), est.end());
  const ConfidenceInterval ci = percentile_interval(est, 0.90);
  // Type 7: h = (n-1)p + 1 -> 5.95 and 95.05.
  EXPECT_NEAR(ci.lower, 5.95, 1e-12);
  EXPECT_NEAR(ci.upper, 95.05, 1e-12);
}

TEST(Resample, IndicesAreSeededAndInRange) {
  const auto a = resample_indices(50, 9, 3);
  EXPECT_EQ(a, resample_indices(50, 9, 3));
  EXPECT_NE(a, resample_indices(50, 9, 4));
  for (Index i : a) {
    EXPECT_GE(i, 0);
    EXPECT_LT(i, 50);
  }
}

class BootstrapOnExample : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { data_ = new Dataset(generate_dataset(example1(-1.7, 0.0), 400, 71)); }
  static void TearDownTestSuite() { delete data_; }
  static Dataset* data_;
};
Dataset* BootstrapOnExample::data_ = nullptr;

TEST_F(BootstrapOnExample, BootstrapTIsDeterministic) {
  BootstrapOptions opts;
  opts.resamples = 99;
  opts.seed = 5;
  const BootstrapResult a = bootstrap_t_ci(*data_, testing::linear_model(2), opts);
  opts.threads = 3;
  const BootstrapResult b = bootstrap_t_ci(*data_, testing::linear_model(2), opts);
  EXPECT_EQ(a.ci.lower, b.ci.lower);
  EXPECT_EQ(a.ci.upper, b.ci.upper);
  EXPECT_EQ(a.t_stats, b.t_stats);
  EXPECT_LE(a.ci.lower, a.tau_hat);
  EXPECT_GE(a.ci.upper, a.tau_hat);
  int failed = 0;
  for (const auto& [code, count] : a.failures) failed += count;
  EXPECT_EQ(a.n_successful + failed, 99);
  EXPECT_EQ(a.seed, 5u);
}

TEST_F(BootstrapOnExample, PercentileIsDeterministic) {
  BootstrapOptions opts;
  opts.resamples = 99;
  opts.seed = 6;
  const auto a = bootstrap_percentile_ci(parse_method("normal_plugin"), *data_, testing::linear_model(2), opts);
  const auto b = bootstrap_percentile_ci(parse_method("normal_plugin"), *data_, testing::linear_model(2), opts);
  EXPECT_EQ(a.ci.lower, b.ci.lower);
  EXPECT_EQ(a.ci.upper, b.ci.upper);
  EXPECT_TRUE(a.t_stats.empty());
}

TEST(BootstrapFailures, AccountingAndThreshold) {
  // One missing row in twenty: about a third of resamples are single-class.
  std::vector<std::optional<double>> y(20);
  for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = i == 7 ? std::nullopt : std::optional<double>(i * 0.1);
  const Dataset ds = Dataset::from_outcomes(y, Eigen::MatrixXd::Random(20, 2));
  BootstrapOptions opts;
  opts.resamples = 200;
  opts.context.oracle_tau = 1.0;
  opts.max_failure_fraction = 1.0;
  const auto result = bootstrap_percentile_ci(parse_method("oracle"), ds, testing::linear_model(2), opts);
  ASSERT_EQ(result.failures.count("DEGENERATE"), 1u);
  EXPECT_GT(result.failures.at("DEGENERATE"), 30);
  EXPECT_EQ(result.n_successful + result.failures.at("DEGENERATE"), 200);
  EXPECT_EQ(result.ci.lower, 1.0);

  opts.max_failure_fraction = 0.05;
  try {
    bootstrap_percentile_ci(parse_method("oracle"), ds, testing::linear_model(2), opts);
    FAIL() << "expected instability error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonconvergence);
    EXPECT_NE(std::string(e.what()).find("DEGENERATE="), std::string::npos);
  }
}

TEST(BootstrapOptions, Validation) {
  const Dataset ds = generate_dataset(example1(-1.7, 0.0), 100, 72);
  BootstrapOptions opts;
  opts.resamples = 50;
  expect_error(ErrorCode::kUsage, [&] { bootstrap_t_ci(ds, testing::linear_model(2), opts); });
  opts.resamples = 99;
  opts.level = 1.5;
  expect_error(ErrorCode::kUsage, [&] { bootstrap_t_ci(ds, testing::linear_model(2), opts); });
}

// The proposed estimator's bootstrap interval is tighter than the IPW
// baseline's over repeated samples.
TEST(BootstrapWidth, ProposedNarrowerThanJustIdentifiedGmm) {
  int narrower = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    const Dataset ds = generate_dataset(example1(-1.7, 0.0), 500, derive_seed(73, static_cast<std::uint64_t>(rep)));
    BootstrapOptions opts;
    opts.resamples = 99;
    opts.seed = derive_seed(74, static_cast<std::uint64_t>(rep));
    opts.max_failure_fraction = 1.0;
    try {
      const auto proposed = bootstrap_percentile_ci(parse_method("proposed"), ds, testing::linear_model(2), opts);
      const auto gmm = bootstrap_percentile_ci(parse_method("gmm1"), ds, testing::linear_model(2), opts);
      if (proposed.ci.width() < gmm.ci.width()) ++narrower;
    } catch (const Error&) {
      // A failed baseline counts as the proposed interval being narrower.
      ++narrower;
    }
  }
  EXPECT_GE(narrower, 80);
}

}  // namespace
}  // namespace mnar
