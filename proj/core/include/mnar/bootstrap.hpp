#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mnar/asymptotic.hpp"
#include "mnar/dataset.hpp"
#include "mnar/methods.hpp"
#include "mnar/stats.hpp"

namespace mnar {

struct BootstrapOptions {
  int resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  double max_failure_fraction = 0.05;
  MethodContext context;
};

struct BootstrapResult {
  ConfidenceInterval ci;
  int n_resamples_requested = 0;
  int n_successful = 0;
  std::vector<double> t_stats;    // bootstrap-t only, in resample order
  std::vector<double> estimates;  // successful tau* in resample order
  std::uint64_t seed = 0;
  std::map<std::string, int> failures;  // error code -> count
  double tau_hat = 0.0;
  double sigma_tau = 0.0;  // bootstrap-t only
};

// Row indices of resample b: n draws with replacement from a stream seeded by
// derive_seed(seed, b).
std::vector<Index> resample_indices(Index n, std::uint64_t seed, std::uint64_t b);

// [tau - q_{1-a/2}(t*) s / sqrt(n), tau - q_{a/2}(t*) s / sqrt(n)], type-7 quantiles.
ConfidenceInterval bootstrap_t_interval(double tau_hat, double sigma_tau, Index n,
                                        std::vector<double> t_stats, double level);

// [q_{a/2}(tau*), q_{1-a/2}(tau*)], type-7 quantiles.
ConfidenceInterval percentile_interval(std::vector<double> estimates, double level);

// Pairs bootstrap of the full two-step pipeline with studentisation by the
// per-resample sandwich standard error. Failed resamples are dropped and
// counted; more than max_failure_fraction failures throws kNonconvergence.
BootstrapResult bootstrap_t_ci(const Dataset& ds, const ModelConfig& cfg,
                               const BootstrapOptions& options);

BootstrapResult bootstrap_percentile_ci(const MethodSpec& method, const Dataset& ds,
                                        const ModelConfig& cfg, const BootstrapOptions& options);

}  // namespace mnar
