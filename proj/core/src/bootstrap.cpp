#include "mnar/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "mnar/error.hpp"
#include "mnar/parallel.hpp"

namespace mnar {

namespace {

void check_options(const BootstrapOptions& options) {
  if (options.resamples < 99) throw Error(ErrorCode::kUsage, "bootstrap needs B >= 99");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw Error(ErrorCode::kUsage, "confidence level must lie in (0, 1)");
  }
}

struct Replicate {
  std::optional<double> tau;
  std::optional<double> t;
  std::string failure;
};

bool single_class(const Dataset& ds) {
  return ds.observed_count() == 0 || ds.observed_count() == ds.size();
}

template <typename Fn>
std::vector<Replicate> run_replicates(const Dataset& ds, const BootstrapOptions& options,
                                      Fn&& fn) {
  std::vector<Replicate> reps(static_cast<std::size_t>(options.resamples));
  parallel_for(options.resamples, options.threads, [&](Index b) {
    auto& rep = reps[static_cast<std::size_t>(b)];
    const auto rows = resample_indices(ds.size(), options.seed, static_cast<std::uint64_t>(b));
    const Dataset star = ds.select(rows);
    if (single_class(star)) {
      rep.failure = "DEGENERATE";
      return;
    }
    try {
      fn(star, rep);
    } catch (const Error& e) {
      rep.failure = std::string(to_string(e.code()));
    } catch (const std::exception&) {
      rep.failure = "INTERNAL";
    }
  });
  return reps;
}

void tally(const std::vector<Replicate>& reps, const BootstrapOptions& options,
           BootstrapResult& result) {
  result.n_resamples_requested = options.resamples;
  result.seed = options.seed;
  for (const auto& rep : reps) {
    if (!rep.failure.empty()) {
      ++result.failures[rep.failure];
      continue;
    }
    ++result.n_successful;
    result.estimates.push_back(*rep.tau);
    if (rep.t) result.t_stats.push_back(*rep.t);
  }
  if (result.n_successful < (1.0 - options.max_failure_fraction) * options.resamples) {
    std::ostringstream msg;
    msg << "bootstrap unstable: " << (options.resamples - result.n_successful) << " of "
        << options.resamples << " resamples failed (";
    bool first = true;
    for (const auto& [code, count] : result.failures) {
      msg << (first ? "" : ", ") << code << "=" << count;
      first = false;
    }
    msg << ")";
    throw Error(ErrorCode::kNonconvergence, msg.str());
  }
}

}  // namespace

std::vector<Index> resample_indices(Index n, std::uint64_t seed, std::uint64_t b) {
  std::mt19937_64 rng(derive_seed(seed, b));
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (auto& row : rows) row = pick(rng);
  return rows;
}

ConfidenceInterval bootstrap_t_interval(double tau_hat, double sigma_tau, Index n,
                                        std::vector<double> t_stats, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kUsage, "confidence level must lie in (0, 1)");
  }
  std::sort(t_stats.begin(), t_stats.end());
  const double a = 1.0 - level;
  const double scale = sigma_tau / std::sqrt(static_cast<double>(n));
  const double q_hi = quantile_type7(t_stats, 1.0 - a / 2.0);
  const double q_lo = quantile_type7(t_stats, a / 2.0);
  return ConfidenceInterval{tau_hat - q_hi * scale, tau_hat - q_lo * scale, level,
                            IntervalMethod::kBootstrapT};
}

ConfidenceInterval percentile_interval(std::vector<double> estimates, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kUsage, "confidence level must lie in (0, 1)");
  }
  std::sort(estimates.begin(), estimates.end());
  const double a = 1.0 - level;
  return ConfidenceInterval{quantile_type7(estimates, a / 2.0),
                            quantile_type7(estimates, 1.0 - a / 2.0), level,
                            IntervalMethod::kBootstrapPercentile};
}

BootstrapResult bootstrap_t_ci(const Dataset& ds, const ModelConfig& cfg,
                               const BootstrapOptions& options) {
  check_options(options);
  FitOptions fit_options = options.context.fit;
  fit_options.compute_variance = true;
  const ProposedFit base = fit_proposed(ds, cfg, fit_options);
  const double tau_hat = base.tau.tau_hat;
  const double sigma_tau = std::sqrt(base.variance->sigma2_tau);
  const double root_n = std::sqrt(static_cast<double>(ds.size()));

  const auto reps = run_replicates(ds, options, [&](const Dataset& star, Replicate& rep) {
    const ProposedFit fit = fit_proposed(star, cfg, fit_options);
    const double s = std::sqrt(fit.variance->sigma2_tau);
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::kSingular, "zero sigma_tau");
    rep.tau = fit.tau.tau_hat;
    rep.t = root_n * (fit.tau.tau_hat - tau_hat) / s;
  });

  BootstrapResult result;
  result.tau_hat = tau_hat;
  result.sigma_tau = sigma_tau;
  tally(reps, options, result);
  result.ci = bootstrap_t_interval(tau_hat, sigma_tau, ds.size(), result.t_stats, options.level);
  return result;
}

BootstrapResult bootstrap_percentile_ci(const MethodSpec& method, const Dataset& ds,
                                        const ModelConfig& cfg, const BootstrapOptions& options) {
  check_options(options);
  MethodContext context = options.context;
  context.fit.compute_variance = false;
  const MethodEstimate base = run_method(method, ds, cfg, context);

  const auto reps = run_replicates(ds, options, [&](const Dataset& star, Replicate& rep) {
    const MethodEstimate est = run_method(method, star, cfg, context);
    if (!est.converged || !std::isfinite(est.tau)) {
      throw Error(ErrorCode::kNonconvergence, "resample estimate did not converge");
    }
    rep.tau = est.tau;
  });

  BootstrapResult result;
  result.tau_hat = base.tau;
  tally(reps, options, result);
  result.ci = percentile_interval(result.estimates, options.level);
  return result;
}

}  // namespace mnar
