#include "keyrate/finite_key.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace keyrate {

void SecurityBudget::validate() const {
  if (!(eps_sec > 0.0 && eps_sec < 1.0))
    throw std::domain_error("SecurityBudget: eps_sec must lie in (0,1)");
  if (!(eps_cor > 0.0 && eps_cor < 1.0))
    throw std::domain_error("SecurityBudget: eps_cor must lie in (0,1)");
}

double mcdiarmid_deviation(double eps, double s, double w) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::domain_error("mcdiarmid_deviation: eps must lie in (0,1]");
  if (!(s >= 1.0)) throw std::domain_error("mcdiarmid_deviation: s must be >= 1");
  if (!(w >= 0.0)) throw std::domain_error("mcdiarmid_deviation: negative width");
  return w * std::sqrt(std::log(1.0 / eps) / (2.0 * s));
}

GammaBar gamma_bar(double a, double b, double c, double d) {
  if (!(a > 0.0 && a < 1.0)) throw std::domain_error("gamma_bar: a must lie in (0,1)");
  if (!(b >= 0.0 && b <= 1.0)) throw std::domain_error("gamma_bar: b must lie in [0,1]");
  if (!(c > 0.0 && d > 0.0)) throw std::domain_error("gamma_bar: c and d must be positive");
  if (b == 0.0 || b == 1.0) return {0.0, false};

  // log-decomposed form: robust for extreme c, d, a
  const double log_arg = std::log(c + d) - std::log(2.0 * std::numbers::pi) - std::log(c) -
                         std::log(d) - std::log(1.0 - b) - std::log(b) - 2.0 * std::log(a);
  const double prefactor = (c + d) * (1.0 - b) * b / (c * d);
  const double radicand = prefactor * log_arg;
  if (radicand < 0.0) return {0.0, true};
  return {std::sqrt(radicand), false};
}

SampleSizes derive_sample_sizes(double s_x, double p_x, const ObservedStats& observed) {
  if (!(p_x > 0.0 && p_x < 1.0))
    throw std::domain_error("derive_sample_sizes: p_x must lie in (0,1)");
  if (!(s_x >= 1.0)) throw std::domain_error("derive_sample_sizes: s_x must be >= 1");
  if (!(observed.x.mean_q > 0.0))
    throw std::domain_error("derive_sample_sizes: degenerate X-basis gain");
  SampleSizes sizes;
  sizes.s_x = s_x;
  const double p_z = 1.0 - p_x;
  sizes.s_z = p_z * p_z * s_x * observed.z.mean_q / (p_x * p_x * observed.x.mean_q);
  sizes.s_z_err = sizes.s_z * observed.z.mean_qe / observed.z.mean_q;
  return sizes;
}

ZBasisEstimates z_basis_estimates(const DecoyCoefficients& coeffs,
                                  const IntensityProfile& profile,
                                  const ObservedStats& observed,
                                  const SampleSizes& sizes,
                                  const SecurityBudget& budget) {
  if (sizes.s_z < 1.0) throw std::domain_error("z_basis_estimates: s_z must be >= 1");
  const int k = profile.size();
  const auto& p = profile.p_mu();
  const double eps = budget.eps_test();

  std::vector<double> a1_over_p(k), a2_over_p(k);
  for (int n = 0; n < k; ++n) {
    a1_over_p[n] = coeffs.a1[n] / p[n];
    a2_over_p[n] = coeffs.a2[n] / p[n];
  }

  double yield_sum = 0.0, error_sum = 0.0;
  for (int n = 0; n < k; ++n) {
    yield_sum += coeffs.a1[n] * observed.z.q[n];
    error_sum += coeffs.a2[n] * observed.z.q[n] * observed.z.e[n];
  }

  ZBasisEstimates est;
  est.delta_z = observed.z.mean_q * mcdiarmid_deviation(eps, sizes.s_z, width(a1_over_p));
  est.delta_z_err = std::sqrt(observed.z.mean_q * observed.z.mean_qe *
                              std::log(1.0 / eps) / (2.0 * sizes.s_z)) *
                    width(a2_over_p);
  est.y1_lower = yield_sum - est.delta_z;
  est.e1_product_upper = error_sum + est.delta_z_err;
  est.feasible = est.y1_lower > 0.0;
  if (est.feasible) {
    est.e_z1 = std::min(0.5, std::max(0.0, est.e1_product_upper / est.y1_lower));
  }
  return est;
}

PhaseErrorBound e_p_upper(double e_z1, double y_z1, double y_x1,
                          const IntensityProfile& profile,
                          const ObservedStats& observed,
                          const SampleSizes& sizes,
                          const SecurityBudget& budget) {
  if (!(e_z1 >= 0.0 && e_z1 <= 0.5))
    throw std::domain_error("e_p_upper: e_z1 must lie in [0, 1/2]");
  PhaseErrorBound out;
  const double mue = profile.mean_mu_exp_neg_mu();
  const double c = sizes.s_z * y_z1 * mue / observed.z.mean_q;
  const double d = sizes.s_x * y_x1 * mue / observed.x.mean_q;
  if (!(c > 0.0 && d > 0.0)) return out;  // infeasible point
  out.feasible = true;
  if (e_z1 == 0.0) {
    out.e_p = 0.0;
    return out;
  }
  const GammaBar g = gamma_bar(budget.eps_test(), e_z1, c, d);
  out.vacuous_gamma = g.vacuous;
  out.e_p = std::min(0.5, e_z1 + g.value);
  return out;
}

}  // namespace keyrate
