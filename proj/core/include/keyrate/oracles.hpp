#pragma once

#include <cstdint>
#include <vector>

namespace keyrate {

/// A photon source defined directly by its per-photon-number yields and
/// error rates, truncated at order M (Y_m = 0 for m > M, so the truncation
/// is exact rather than approximate).
struct TruncatedSource {
  std::vector<double> yields;       // Y_m in [0,1], m = 0..M
  std::vector<double> error_rates;  // e_m in [0,1/2]

  int truncation_order() const { return static_cast<int>(yields.size()) - 1; }
};

struct ForwardGains {
  double q = 0.0;   // sum_m mu^m Y_m exp(-mu) / m!
  double qe = 0.0;  // sum_m mu^m Y_m e_m exp(-mu) / m!
};

/// Exact truncated Poissonian forward model.
ForwardGains truncated_poisson_forward(const TruncatedSource& source, double mu);

/// Brute-force falsification of the three decoy-bound directions on random
/// truncated sources and random feasible profiles (non-vacuum spacing
/// >= 0.1). Per-trial tolerance 1e-9. Violations are data, not errors.
struct ValidityReport {
  int trials = 0;
  int y0_violations = 0;   // sum a0_n Q_n exceeded Y_0
  int y1_violations = 0;   // sum a1_n Q_n exceeded Y_1
  int e1_violations = 0;   // sum a2_n Q_n E_n fell below Y_1 e_1
  double max_excess = 0.0; // largest signed violation margin observed

  int total_violations() const { return y0_violations + y1_violations + e1_violations; }
};

/// k >= 3 is the supported regime; k = 2 runs as an exploratory mode and is
/// expected to report violations (its single-intensity variant is not a
/// valid bound), which is why the rate computations require k >= 3.
ValidityReport bound_validity_check(int trials, int k, std::uint64_t seed);

/// Monte Carlo check of the one-sided deviation bound under sampling
/// without replacement. Builds a fixed population of 10*s items labelled
/// with the per-draw values {a1_n / p_n} of a canonical k-intensity
/// profile, draws s per trial, and measures how often the population mean
/// exceeds the sample mean by more than mcdiarmid_deviation(eps, s, width).
struct CoverageReport {
  int trials = 0;
  int exceedances = 0;
  double empirical_rate = 0.0;
  double threshold = 0.0;  // eps + 3 sqrt(eps / trials)
  bool pass = false;
};

CoverageReport coverage_check(double eps, int s, int k, int trials, std::uint64_t seed);

}  // namespace keyrate
