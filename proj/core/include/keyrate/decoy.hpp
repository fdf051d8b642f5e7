#pragma once

#include <span>
#include <vector>

namespace keyrate {

/// Photon intensities mu_1 > mu_2 > ... > mu_k and their usage probabilities.
///
/// Invariants enforced at construction:
///   - 2 <= k <= 10
///   - 1 >= mu_1 > mu_2 > ... > mu_k >= 0 (strictly decreasing)
///   - all p_mu > 0 and sum(p_mu) == 1 within 1e-12
class IntensityProfile {
 public:
  IntensityProfile(std::vector<double> mu, std::vector<double> p_mu);

  int size() const { return static_cast<int>(mu_.size()); }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& p_mu() const { return p_mu_; }

  /// <f(mu)> = sum_n p_mu[n] * f(mu[n])
  template <typename F>
  double mean(F&& f) const {
    double acc = 0.0;
    for (int n = 0; n < size(); ++n) acc += p_mu_[n] * f(mu_[n]);
    return acc;
  }

  double mean_exp_neg_mu() const;     // <exp(-mu)>
  double mean_mu_exp_neg_mu() const;  // <mu * exp(-mu)>

 private:
  std::vector<double> mu_;
  std::vector<double> p_mu_;
};

/// Linear-combination coefficients of the decoy-state yield bounds.
///
/// a0, a1, a2 have one entry per intensity; indices outside each bound's
/// summation range are stored as explicit zeros so downstream sums run
/// uniformly over n = 1..k. k0 is the parity offset (1 for even k, 2 for
/// odd k, 1-based).
struct DecoyCoefficients {
  std::vector<double> a0;
  std::vector<double> a1;
  std::vector<double> a2;
  int k0 = 0;
};

/// Elementary symmetric polynomial of the given degree over `values`.
/// Degree 0 returns 1 (empty product). Throws std::domain_error when
/// degree exceeds the number of values.
double elementary_symmetric(std::span<const double> values, int degree);

/// Width(S) = max(S) - min(S). Throws std::domain_error on an empty set.
double width(std::span<const double> values);

/// Computes the vacuum-yield (a0), single-photon-yield (a1) and
/// single-photon-error (a2) combination coefficients for the profile.
///
/// The a0/a2 combinations run over the even-sized node set {k0..k}; the a1
/// combination runs over the odd-sized node set {3-k0..k} and its products
/// and symmetric polynomial range over that same set. For k = 2 the a1
/// slot degenerates to the single-intensity expression exp(mu_2)/(mu_1-mu_2);
/// that variant does not yield a valid single-photon bound (the verification
/// oracles demonstrate violations), so rate computations require k >= 3.
DecoyCoefficients compute_coefficients(const IntensityProfile& profile);

}  // namespace keyrate
