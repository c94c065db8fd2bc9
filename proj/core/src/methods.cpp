#include "mnar/methods.hpp"

#include <charconv>
#include <cmath>

#include "mnar/error.hpp"

namespace mnar {

std::string MethodSpec::tag() const {
  switch (kind) {
    case MethodKind::kProposed: return "proposed";
    case MethodKind::kNormalPlugin: return "normal_plugin";
    case MethodKind::kIpw: return "ipw";
    case MethodKind::kGmm: return "gmm" + std::to_string(degree);
    case MethodKind::kOracle: return "oracle";
  }
  return "proposed";
}

MethodSpec parse_method(std::string_view tag) {
  if (tag == "proposed") return {MethodKind::kProposed, 0};
  if (tag == "normal_plugin" || tag == "normal-plugin") return {MethodKind::kNormalPlugin, 0};
  if (tag == "ipw") return {MethodKind::kIpw, 0};
  if (tag == "oracle") return {MethodKind::kOracle, 0};
  if (tag.substr(0, 3) == "gmm") {
    auto rest = tag.substr(3);
    if (!rest.empty() && rest.front() == '-') rest.remove_prefix(1);
    int k = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec == std::errc() && ptr == rest.data() + rest.size() && k >= 1) {
      return {MethodKind::kGmm, k};
    }
  }
  throw Error(ErrorCode::kUsage, "unknown method '" + std::string(tag) + "'");
}

MethodEstimate run_method(const MethodSpec& spec, const Dataset& ds, const ModelConfig& cfg,
                          const MethodContext& context) {
  MethodEstimate out;
  switch (spec.kind) {
    case MethodKind::kOracle: {
      if (!context.oracle_tau) throw Error(ErrorCode::kUsage, "oracle method needs a true tau");
      out.tau = *context.oracle_tau;
      return out;
    }
    case MethodKind::kProposed:
    case MethodKind::kNormalPlugin: {
      FitOptions opts = context.fit;
      if (spec.kind == MethodKind::kNormalPlugin) opts.compute_variance = false;
      const ProposedFit fit = fit_proposed(ds, cfg, opts);
      out.gamma = fit.propensity.gamma();
      out.converged = fit.propensity.converged;
      if (spec.kind == MethodKind::kProposed) {
        out.tau = fit.tau.tau_hat;
        if (fit.variance) out.sigma2_tau = fit.variance->sigma2_tau;
      } else {
        out.tau = estimate_tau_normal_plugin(ds, fit.outcome, fit.propensity, fit.mu_hat).tau_hat;
      }
      return out;
    }
    case MethodKind::kIpw: {
      const Index d = ds.covariate_count();
      const IpwProblem probe(ds, cfg.x1_columns, monomial_basis(d, 1));
      const IpwFit fit =
          solve_ipw(ds, cfg.x1_columns, monomial_basis(d, 1), probe.default_start(), context.ipw);
      out.tau = fit.tau_ipw;
      out.gamma = fit.gamma();
      out.converged = fit.converged;
      return out;
    }
    case MethodKind::kGmm: {
      const IpwFit fit = solve_gmm(ds, cfg.x1_columns, spec.degree, context.ipw);
      out.tau = fit.tau_ipw;
      out.gamma = fit.gamma();
      out.converged = fit.converged;
      return out;
    }
  }
  throw Error(ErrorCode::kInternal, "unhandled method");
}

bool is_non_reliable(const MethodEstimate& estimate) {
  return !estimate.converged || !std::isfinite(estimate.tau) || !std::isfinite(estimate.gamma) ||
         std::abs(estimate.tau) > kTauReliableBound ||
         std::abs(estimate.gamma) > kGammaReliableBound;
}

}  // namespace mnar
