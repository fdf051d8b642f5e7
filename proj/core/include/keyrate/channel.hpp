#pragma once

#include <cstdint>
#include <vector>

#include "keyrate/decoy.hpp"

namespace keyrate {

/// Fiber-channel model constants. Defaults are the 100 km dedicated-fiber
/// reference set used throughout the evaluation.
struct ChannelParams {
  double p_ap = 4e-2;    // after-pulse probability
  double p_dc = 6e-7;    // dark-count probability
  double e_mis = 5e-3;   // optical misalignment error rate
  double eta_ch = 1e-2;  // channel transmittance
  double eta_sys = 1e-3; // system transmittance

  /// Throws std::domain_error unless every field lies in [0,1].
  void validate() const;
};

/// Detection gain Q(mu) = (1 + p_ap) * (2 p_dc + eta_sys * mu).
/// The model is defined for 0 <= mu <= 1; outside that range a
/// std::domain_error is thrown.
double gain(const ChannelParams& params, double mu);

/// Error gain Q(mu)E(mu) = (1 + p_ap) p_dc + (e_mis eta_ch + p_ap eta_sys / 2) mu.
double error_gain(const ChannelParams& params, double mu);

/// Per-basis gains and error rates plus the derived means used by the
/// finite-key formulas. E is stored as a rate; error_gain(n) = q[n]*e[n]
/// recovers the error-gain product.
struct BasisStats {
  std::vector<double> q;  // gains per intensity
  std::vector<double> e;  // error rates per intensity
  double mean_q = 0.0;    // <Q>
  double mean_qe = 0.0;   // <Q E>
  double mean_q_h2e = 0.0;  // <Q H2(E)>

  double error_gain(int n) const { return q[n] * e[n]; }
};

struct ObservedStats {
  BasisStats x;
  BasisStats z;
};

/// Evaluates the deterministic channel model for every intensity of the
/// profile. The model has no basis dependence, so X and Z statistics are
/// identical. Throws if any gain is zero (degenerate channel).
ObservedStats observe(const ChannelParams& params, const IntensityProfile& profile);

/// One seeded finite-size experiment: per-pulse basis and intensity
/// assignment followed by binomial detection/error outcomes.
struct FiniteSample {
  ObservedStats stats;  // empirical gains/error rates, means with profile weights
  double s_x = 0.0;     // detected in X (sifted-key length)
  double s_z = 0.0;     // detected in Z
  double s_z_err = 0.0; // errors among Z detections
  std::vector<std::int64_t> assigned_x;  // pulses assigned per intensity, X basis
  std::vector<std::int64_t> assigned_z;
  std::vector<std::int64_t> detected_x;
  std::vector<std::int64_t> detected_z;
  bool degenerate = false;  // some intensity received zero pulses
};

FiniteSample sample_finite(const ChannelParams& params, const IntensityProfile& profile,
                           double p_x, std::int64_t pulses, std::uint64_t seed);

}  // namespace keyrate
