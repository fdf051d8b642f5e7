#pragma once

#include <vector>

#include "keyrate/channel.hpp"
#include "keyrate/decoy.hpp"
#include "keyrate/finite_key.hpp"

namespace keyrate {

/// Full evaluation record for one parameter point.
struct KeyRateReport {
  double rate = 0.0;        // max(0, rate_raw), secure bits per pulse sent
  double rate_raw = 0.0;    // unclamped value of the rate formula
  double final_length = 0.0;  // rate * s_x / (p_x^2 <Q_X>), bits
  double eps_sec = 0.0;     // budget used (resolved value for the fixed point)
  double e_p = 0.0;
  double e_z1 = 0.0;
  double lambda_ec = 0.0;
  double deviation_x = 0.0;  // X-basis coefficient-sum deviation
  std::vector<double> b;     // per-intensity rate coefficients
  bool feasible = false;
  bool vacuous_gamma = false;
  int iterations = 0;  // fixed-point iterations (0 for a direct evaluation)
};

/// H2(x) = -x log2 x - (1-x) log2 (1-x); H2(0) = H2(1) = 0 by continuity.
/// Throws std::domain_error outside [0,1].
double binary_entropy(double x);

/// Error-correction leakage at the Shannon limit: <Q_X H2(E_X)>.
double lambda_ec(const IntensityProfile& profile, const ObservedStats& observed);

/// b_n = p_x^2 ( <exp(-mu)> a0_n + <mu exp(-mu)> a1_n (1 - H2(e_p)) ).
std::vector<double> compute_b(const DecoyCoefficients& coeffs,
                              const IntensityProfile& profile,
                              double p_x, double e_p);

/// Finite-key rate at a fixed security budget:
///   R = sum_n b_n Q_{X,n}
///       - <Q_X> sqrt(ln(chi/eps_sec) / (2 s_x)) Width({b_n / p_n})
///       - p_x^2 ( <Q_X H2(E_X)> + <Q_X>/s_x (6 log2(chi/eps_sec) + log2(2/eps_cor)) ).
/// Requires k >= 3 (the k = 2 coefficient set has no valid single-photon
/// bound). Infeasible points come back with feasible = false and rate = 0.
KeyRateReport key_rate(const IntensityProfile& profile, const ObservedStats& observed,
                       double p_x, double s_x, const SecurityBudget& budget);

/// Zero-deviation evaluation of the same formula (no concentration terms,
/// no phase-error correction). Upper envelope of key_rate over s_x.
KeyRateReport asymptotic_key_rate(const IntensityProfile& profile,
                                  const ObservedStats& observed,
                                  double p_x, double s_x, const SecurityBudget& budget);

/// Resolves eps_sec = kappa * final_length by iterating from
/// eps_sec = kappa * s_x until the final length moves by less than half a
/// bit. A zero rate at any iterate means no positive fixed point exists and
/// the result is infeasible. Throws after 100 iterations without
/// convergence (the message carries the length trace).
KeyRateReport solve_security_fixed_point(const IntensityProfile& profile,
                                         const ObservedStats& observed,
                                         double p_x, double s_x,
                                         double kappa, double eps_cor);

}  // namespace keyrate
