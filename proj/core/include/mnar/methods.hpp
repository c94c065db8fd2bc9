#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mnar/dataset.hpp"
#include "mnar/ipw_gmm.hpp"
#include "mnar/pipeline.hpp"

namespace mnar {

// Estimators of tau that the study drivers and the bootstrap can run by tag.
enum class MethodKind { kProposed, kNormalPlugin, kIpw, kGmm, kOracle };

struct MethodSpec {
  MethodKind kind = MethodKind::kProposed;
  int degree = 0;  // GMM basis degree

  std::string tag() const;
};

// Accepts proposed, normal_plugin, ipw, gmm<k> (or gmm-k), oracle.
MethodSpec parse_method(std::string_view tag);

struct MethodContext {
  FitOptions fit;
  IpwOptions ipw;
  std::optional<double> oracle_tau;  // value returned by the oracle method
};

struct MethodEstimate {
  double tau = 0.0;
  double gamma = 0.0;
  bool converged = true;
  std::optional<double> sigma2_tau;  // proposed only, when variance requested
};

// Runs one estimator. Errors propagate as mnar::Error.
// The IPW baseline uses g = (1, x_1, ..., x_d) and therefore needs d = |x1| + 1.
MethodEstimate run_method(const MethodSpec& spec, const Dataset& ds, const ModelConfig& cfg,
                          const MethodContext& context = {});

// Non-convergence or a non-reliable estimate: tau outside [-10, 10] or gamma
// outside [-3, 3].
bool is_non_reliable(const MethodEstimate& estimate);

inline constexpr double kTauReliableBound = 10.0;
inline constexpr double kGammaReliableBound = 3.0;

}  // namespace mnar
