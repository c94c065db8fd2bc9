#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mnar {

double normal_cdf(double x);
double normal_quantile(double p);
double chi_squared_sf(double x, double df);

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
double quantile_type7(std::span<const double> sorted, double p);

double mean(std::span<const double> values);
// Unbiased (n - 1) sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);

// SplitMix64 finalizer; used to derive independent per-stream seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline constexpr std::uint64_t kDefaultSeed = 20230917;

}  // namespace mnar
