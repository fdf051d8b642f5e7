#pragma once

#include "keyrate/channel.hpp"
#include "keyrate/decoy.hpp"

namespace keyrate {

/// Failure-probability budget. eps_sec is split evenly over chi = 9
/// sub-tests; eps_test() is the per-test share used for the X/Z sums, the
/// Z-error sum and the phase-error correction.
struct SecurityBudget {
  double eps_sec = 1e-10;
  double eps_cor = 1e-15;
  double kappa = 0.0;  // per-final-bit secrecy leakage; 0 when eps_sec is fixed

  static constexpr double chi = 9.0;
  double eps_test() const { return eps_sec / chi; }

  /// Throws std::domain_error unless eps_sec and eps_cor lie in (0,1).
  void validate() const;
};

/// Expected sample counts entering the deviation terms. Kept real-valued;
/// the formulas never round them.
struct SampleSizes {
  double s_x = 0.0;      // X-basis sifted-key length (= raw key length)
  double s_z = 0.0;      // Z-basis detected count
  double s_z_err = 0.0;  // Z-basis error count
};

/// One-sided deviation of a sum of s dependent draws with per-draw value
/// range w, at failure probability eps: w * sqrt(ln(1/eps) / (2 s)).
/// eps in (0,1], s >= 1, w >= 0; violations throw std::domain_error.
double mcdiarmid_deviation(double eps, double s, double w);

struct GammaBar {
  double value = 0.0;
  bool vacuous = false;  // radicand was negative: no correction is needed
};

/// Hypergeometric finite-sample correction
///   sqrt( (c+d)(1-b)b/(cd) * ln( (c+d) / (2 pi c d (1-b) b a^2) ) ).
/// b in {0,1} returns 0 (limit); a negative radicand returns 0 with the
/// vacuous flag set. Requires 0 < a < 1, 0 <= b <= 1, c > 0, d > 0.
GammaBar gamma_bar(double a, double b, double c, double d);

/// s_z = (1-p_x)^2 s_x <Q_Z> / (p_x^2 <Q_X>), s_z_err = s_z <Q_Z E_Z>/<Q_Z>.
SampleSizes derive_sample_sizes(double s_x, double p_x, const ObservedStats& observed);

/// Finite-key bounds on the Z-basis single-photon quantities. Infeasibility
/// (nonpositive lower bound) is a value, not an exception, so optimization
/// sweeps stay total.
struct ZBasisEstimates {
  double y1_lower = 0.0;          // lower bound on sum_n a1_n Q_{Z,n}
  double e1_product_upper = 0.0;  // upper bound on sum_n a2_n Q_{Z,n} E_{Z,n}
  double e_z1 = 0.0;              // in [0, 1/2] after clamping
  double delta_z = 0.0;           // deviation subtracted from the yield sum
  double delta_z_err = 0.0;       // deviation added to the error sum
  bool feasible = false;
};

ZBasisEstimates z_basis_estimates(const DecoyCoefficients& coeffs,
                                  const IntensityProfile& profile,
                                  const ObservedStats& observed,
                                  const SampleSizes& sizes,
                                  const SecurityBudget& budget);

struct PhaseErrorBound {
  double e_p = 0.0;  // clamped to <= 1/2
  bool vacuous_gamma = false;
  bool feasible = false;
};

/// e_p <= e_z1 + gamma_bar(eps_test, e_z1, c, d) with
///   c = s_z y_z1 <mu exp(-mu)> / <Q_Z>,  d = s_x y_x1 <mu exp(-mu)> / <Q_X>.
/// The y arguments are the deviation-corrected lower bounds (conservative:
/// the correction grows as c and d shrink).
PhaseErrorBound e_p_upper(double e_z1, double y_z1, double y_x1,
                          const IntensityProfile& profile,
                          const ObservedStats& observed,
                          const SampleSizes& sizes,
                          const SecurityBudget& budget);

}  // namespace keyrate
