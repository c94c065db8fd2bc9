#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "mnar/error.hpp"
#include "mnar/parallel.hpp"
#include "mnar/pipeline.hpp"
#include "mnar/stats.hpp"
#include "support/test_util.hpp"

namespace mnar {
namespace {

TEST(Stats, NormalDistribution) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(chi_squared_sf(3.841458820694124, 1.0), 0.05, 1e-12);
}

TEST(Stats, TypeSevenQuantile) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_type7(std::vector<double>{7.0}, 0.3), 7.0);
}

TEST(Stats, MeanAndVariance) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(mean(v), 2.5);
  EXPECT_DOUBLE_EQ(sample_variance(v), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(sample_variance(std::vector<double>{3.0}), 0.0);
}

TEST(Stats, DerivedSeedsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 10000; ++k) seen.insert(derive_seed(kDefaultSeed, k));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
}

TEST(Parallel, EachIndexOnceAndErrorsPropagate) {
  std::vector<int> hits(97, 0);
  parallel_for(97, 4, [&](Index i) { ++hits[static_cast<std::size_t>(i)]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](Index i) {
                 if (i == 5) throw Error(ErrorCode::kInternal, "boom");
               }),
               Error);
}

TEST(ErrorCodes, StableStrings) {
  EXPECT_EQ(to_string(ErrorCode::kIo), "IO");
  EXPECT_EQ(to_string(ErrorCode::kParse), "PARSE");
  EXPECT_EQ(to_string(ErrorCode::kIdentifiability), "IDENTIFIABILITY");
  EXPECT_EQ(to_string(ErrorCode::kSeparation), "SEPARATION");
  EXPECT_EQ(to_string(ErrorCode::kSingular), "SINGULAR");
  EXPECT_EQ(to_string(ErrorCode::kOverflow), "OVERFLOW");
  EXPECT_EQ(to_string(ErrorCode::kNonconvergence), "NONCONVERGENCE");
  EXPECT_EQ(to_string(ErrorCode::kUsage), "USAGE");
}

TEST(Pipeline, NonIdentifiableModelIsRejected) {
  const Dataset ds = testing::random_dataset(301, 300, 1);
  ModelConfig cfg;
  cfg.mean_basis = monomial_basis(1, 1);
  cfg.x1_columns = {0};
  testing::expect_error(ErrorCode::kIdentifiability, [&] { fit_proposed(ds, cfg); });
}

TEST(Pipeline, FitPopulatesEveryStage) {
  const Dataset ds = testing::random_dataset(302, 1000, 2);
  const ProposedFit f = fit_proposed(ds, testing::linear_model(2));
  EXPECT_TRUE(f.identifiability.identifiable);
  EXPECT_TRUE(f.propensity.converged);
  ASSERT_TRUE(f.variance.has_value());
  ASSERT_TRUE(f.wald.has_value());
  EXPECT_TRUE(f.wald->contains(f.tau.tau_hat));
  EXPECT_EQ(f.mu_hat.size(), 1000);
  FitOptions no_var;
  no_var.compute_variance = false;
  const ProposedFit g = fit_proposed(ds, testing::linear_model(2), no_var);
  EXPECT_FALSE(g.variance.has_value());
  EXPECT_EQ(g.tau.tau_hat, f.tau.tau_hat);
}

}  // namespace
}  // namespace mnar
