#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "keyrate/channel.hpp"
#include "keyrate/key_rate.hpp"

namespace keyrate {

/// Search-space description for one (k, s_x) cell.
///
/// mu_k is pinned to mu_min. Consecutive non-vacuum intensities keep a gap
/// of at least spacing_min; the gap between mu_{k-1} and the vacuum
/// intensity is only required to stay positive (the published optima sit
/// below spacing_min there).
struct OptimizationConfig {
  int k = 3;
  double s_x = 1e7;
  double mu_min = 1e-6;
  double spacing_min = 0.1;
  double mu_max = 1.0;
  double p_mu_min = 0.01;  // floor on every usage probability
  int restarts = 32;
  std::uint64_t seed = 1;
  double tolerance = 1e-9;  // relative simplex-convergence threshold
  int max_evals = 4000;     // per local search

  /// Throws std::domain_error unless 3 <= k <= 10 and the feasible region
  /// is non-empty.
  void validate() const;
};

/// A full parameter point; usable as a warm start for a neighbouring cell.
struct ParameterPoint {
  double p_x = 0.0;
  std::vector<double> mu;
  std::vector<double> p_mu;
};

struct OptimizationResult {
  ParameterPoint best;
  KeyRateReport report;  // re-evaluated at `best`; never stale
  std::int64_t evaluations = 0;
  bool converged = false;
};

/// Seeded multi-start Nelder-Mead maximization of the fixed-point key rate
/// over (p_x, mu_1..mu_{k-1}, p_mu_1..p_mu_{k-1}). Unconstrained search
/// coordinates map into the feasible region through monotone transforms
/// (ordered gaps for mu, normalized positive weights for p_mu).
/// Deterministic for a given config and seed. An optional hint point is
/// added to the start list (used by scans to warm-start along a column).
OptimizationResult optimize(const ChannelParams& channel, const OptimizationConfig& config,
                            double kappa, double eps_cor,
                            const std::optional<ParameterPoint>& hint = std::nullopt);

}  // namespace keyrate
