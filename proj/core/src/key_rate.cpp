#include "keyrate/key_rate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace keyrate {

namespace {

// One pass over the full rate formula. zero_deviation drops every
// concentration term and the phase-error correction, which turns the
// expression into its infinite-sample envelope.
KeyRateReport evaluate(const IntensityProfile& profile, const ObservedStats& observed,
                       double p_x, double s_x, const SecurityBudget& budget,
                       bool zero_deviation) {
  if (profile.size() < 3)
    throw std::domain_error("key_rate: k >= 3 required (no valid single-photon bound for k = 2)");
  if (!(p_x > 0.0 && p_x < 1.0)) throw std::domain_error("key_rate: p_x must lie in (0,1)");
  if (!(s_x >= 1.0)) throw std::domain_error("key_rate: s_x must be >= 1");

  const DecoyCoefficients coeffs = compute_coefficients(profile);
  const SampleSizes sizes = derive_sample_sizes(s_x, p_x, observed);
  const int k = profile.size();
  const auto& p = profile.p_mu();
  const double eps_test = budget.eps_test();

  KeyRateReport report;
  report.eps_sec = budget.eps_sec;
  report.lambda_ec = lambda_ec(profile, observed);

  // fewer than one expected Z-basis event: an infeasible point, not an error
  if (sizes.s_z < 1.0) return report;

  // Z-basis single-photon estimates.
  ZBasisEstimates z;
  if (zero_deviation) {
    double yield_sum = 0.0, error_sum = 0.0;
    for (int n = 0; n < k; ++n) {
      yield_sum += coeffs.a1[n] * observed.z.q[n];
      error_sum += coeffs.a2[n] * observed.z.q[n] * observed.z.e[n];
    }
    z.y1_lower = yield_sum;
    z.e1_product_upper = error_sum;
    z.feasible = yield_sum > 0.0;
    if (z.feasible) z.e_z1 = std::min(0.5, std::max(0.0, error_sum / yield_sum));
  } else {
    z = z_basis_estimates(coeffs, profile, observed, sizes, budget);
  }
  report.e_z1 = z.e_z1;
  if (!z.feasible) return report;

  // X-side single-photon and vacuum estimates feeding the rate coefficients.
  double yield1_x = 0.0, yield0_x = 0.0;
  std::vector<double> a1_over_p(k);
  for (int n = 0; n < k; ++n) {
    yield1_x += coeffs.a1[n] * observed.x.q[n];
    yield0_x += coeffs.a0[n] * observed.x.q[n];
    a1_over_p[n] = coeffs.a1[n] / p[n];
  }
  double y_x1 = yield1_x;
  if (!zero_deviation) {
    y_x1 -= observed.x.mean_q * mcdiarmid_deviation(eps_test, s_x, width(a1_over_p));
  }
  if (!(y_x1 > 0.0)) return report;

  // Phase error bound.
  double e_p = z.e_z1;
  if (!zero_deviation) {
    const PhaseErrorBound pe = e_p_upper(z.e_z1, z.y1_lower, y_x1, profile, observed,
                                         sizes, budget);
    if (!pe.feasible) return report;
    e_p = pe.e_p;
    report.vacuous_gamma = pe.vacuous_gamma;
  }
  report.e_p = e_p;

  // a nonpositive vacuum-yield combination (e.g. a dark-count-free channel)
  // falls back to the trivial Y_0 >= 0 bound: drop the vacuum term from b
  if (yield0_x > 0.0) {
    report.b = compute_b(coeffs, profile, p_x, e_p);
  } else {
    DecoyCoefficients no_vacuum = coeffs;
    no_vacuum.a0.assign(k, 0.0);
    report.b = compute_b(no_vacuum, profile, p_x, e_p);
  }
  std::vector<double> b_over_p(k);
  double rate_sum = 0.0;
  for (int n = 0; n < k; ++n) {
    rate_sum += report.b[n] * observed.x.q[n];
    b_over_p[n] = report.b[n] / p[n];
  }

  if (!zero_deviation) {
    report.deviation_x =
        observed.x.mean_q * mcdiarmid_deviation(eps_test, s_x, width(b_over_p));
  }

  const double log_correction = 6.0 * std::log2(SecurityBudget::chi / budget.eps_sec) +
                                std::log2(2.0 / budget.eps_cor);
  report.rate_raw = rate_sum - report.deviation_x -
                    p_x * p_x *
                        (report.lambda_ec + observed.x.mean_q / s_x * log_correction);
  report.rate = std::max(0.0, report.rate_raw);
  report.final_length = report.rate * s_x / (p_x * p_x * observed.x.mean_q);
  report.feasible = true;
  return report;
}

}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double lambda_ec(const IntensityProfile& profile, const ObservedStats& observed) {
  double acc = 0.0;
  for (int n = 0; n < profile.size(); ++n) {
    acc += profile.p_mu()[n] * observed.x.q[n] * binary_entropy(observed.x.e[n]);
  }
  return acc;
}

std::vector<double> compute_b(const DecoyCoefficients& coeffs, const IntensityProfile& profile,
                              double p_x, double e_p) {
  if (!(e_p >= 0.0 && e_p <= 0.5))
    throw std::domain_error("compute_b: e_p must lie in [0, 1/2]");
  const double mexp = profile.mean_exp_neg_mu();
  const double mmue = profile.mean_mu_exp_neg_mu();
  const double one_minus_h2 = 1.0 - binary_entropy(e_p);
  std::vector<double> b(profile.size());
  for (int n = 0; n < profile.size(); ++n) {
    b[n] = p_x * p_x * (mexp * coeffs.a0[n] + mmue * coeffs.a1[n] * one_minus_h2);
  }
  return b;
}

KeyRateReport key_rate(const IntensityProfile& profile, const ObservedStats& observed,
                       double p_x, double s_x, const SecurityBudget& budget) {
  budget.validate();
  return evaluate(profile, observed, p_x, s_x, budget, /*zero_deviation=*/false);
}

KeyRateReport asymptotic_key_rate(const IntensityProfile& profile,
                                  const ObservedStats& observed,
                                  double p_x, double s_x, const SecurityBudget& budget) {
  budget.validate();
  return evaluate(profile, observed, p_x, s_x, budget, /*zero_deviation=*/true);
}

KeyRateReport solve_security_fixed_point(const IntensityProfile& profile,
                                         const ObservedStats& observed,
                                         double p_x, double s_x,
                                         double kappa, double eps_cor) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::domain_error("solve_security_fixed_point: kappa must lie in (0,1)");

  constexpr int kMaxIterations = 100;
  SecurityBudget budget;
  budget.kappa = kappa;
  budget.eps_cor = eps_cor;
  budget.eps_sec = std::min(kappa * s_x, 0.999);  // final_length <= s_x

  double prev_length = -1.0;
  std::vector<double> trace;
  for (int it = 1; it <= kMaxIterations; ++it) {
    KeyRateReport report = key_rate(profile, observed, p_x, s_x, budget);
    report.iterations = it;
    if (!report.feasible || report.rate <= 0.0) {
      // No positive fixed point exists: the first iterate uses the most
      // permissive eps_sec, and shrinking it only lowers the rate.
      report.rate = 0.0;
      report.final_length = 0.0;
      report.feasible = false;
      return report;
    }
    if (prev_length >= 0.0 && std::abs(report.final_length - prev_length) < 0.5) {
      return report;
    }
    prev_length = report.final_length;
    trace.push_back(report.final_length);
    budget.eps_sec = kappa * report.final_length;
    if (!(budget.eps_sec > 0.0)) {
      report.rate = 0.0;
      report.final_length = 0.0;
      report.feasible = false;
      return report;
    }
  }

  std::ostringstream msg;
  msg << "solve_security_fixed_point: no convergence after " << kMaxIterations
      << " iterations; final_length trace tail:";
  for (std::size_t i = trace.size() >= 6 ? trace.size() - 6 : 0; i < trace.size(); ++i)
    msg << ' ' << trace[i];
  throw std::runtime_error(msg.str());
}

}  // namespace keyrate
