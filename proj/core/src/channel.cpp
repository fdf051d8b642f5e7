#include "keyrate/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "keyrate/key_rate.hpp"

namespace keyrate {

namespace {

void check_mu_domain(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw std::domain_error("channel model is defined for 0 <= mu <= 1");
}

BasisStats basis_stats_from(const IntensityProfile& profile, std::vector<double> q,
                            std::vector<double> e) {
  BasisStats s;
  s.q = std::move(q);
  s.e = std::move(e);
  const auto& p = profile.p_mu();
  for (int n = 0; n < profile.size(); ++n) {
    s.mean_q += p[n] * s.q[n];
    s.mean_qe += p[n] * s.q[n] * s.e[n];
    s.mean_q_h2e += p[n] * s.q[n] * binary_entropy(s.e[n]);
  }
  return s;
}

}  // namespace

void ChannelParams::validate() const {
  for (double v : {p_ap, p_dc, e_mis, eta_ch, eta_sys}) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("ChannelParams: fields must lie in [0,1]");
  }
}

double gain(const ChannelParams& params, double mu) {
  check_mu_domain(mu);
  return (1.0 + params.p_ap) * (2.0 * params.p_dc + params.eta_sys * mu);
}

double error_gain(const ChannelParams& params, double mu) {
  check_mu_domain(mu);
  return (1.0 + params.p_ap) * params.p_dc +
         (params.e_mis * params.eta_ch + params.p_ap * params.eta_sys / 2.0) * mu;
}

ObservedStats observe(const ChannelParams& params, const IntensityProfile& profile) {
  params.validate();
  const int k = profile.size();
  std::vector<double> q(k), e(k);
  for (int n = 0; n < k; ++n) {
    q[n] = gain(params, profile.mu()[n]);
    if (q[n] <= 0.0) throw std::domain_error("observe: degenerate channel (zero gain)");
    e[n] = error_gain(params, profile.mu()[n]) / q[n];
  }
  ObservedStats out;
  out.x = basis_stats_from(profile, q, e);
  out.z = out.x;  // the model has no basis dependence
  return out;
}

FiniteSample sample_finite(const ChannelParams& params, const IntensityProfile& profile,
                           double p_x, std::int64_t pulses, std::uint64_t seed) {
  params.validate();
  if (pulses < 1) throw std::domain_error("sample_finite: need at least one pulse");
  if (!(p_x > 0.0 && p_x < 1.0)) throw std::domain_error("sample_finite: p_x must be in (0,1)");

  const int k = profile.size();
  const auto& p_mu = profile.p_mu();
  const double p_z = 1.0 - p_x;

  std::mt19937_64 rng(seed);

  // Multinomial assignment over the 2k sifted categories (basis, intensity);
  // basis-mismatched pulses fall into the discarded remainder.
  FiniteSample out;
  out.assigned_x.assign(k, 0);
  out.assigned_z.assign(k, 0);
  out.detected_x.assign(k, 0);
  out.detected_z.assign(k, 0);
  std::vector<std::int64_t> errors_z(k, 0), errors_x(k, 0);

  std::int64_t remaining = pulses;
  double prob_left = 1.0;
  auto draw_category = [&](double prob) -> std::int64_t {
    if (remaining <= 0 || prob <= 0.0) return 0;
    const double q = std::min(1.0, prob / prob_left);
    std::int64_t n = 0;
    if (q >= 1.0) {
      n = remaining;
    } else {
      std::binomial_distribution<std::int64_t> dist(remaining, q);
      n = dist(rng);
    }
    remaining -= n;
    prob_left -= prob;
    return n;
  };

  for (int n = 0; n < k; ++n) out.assigned_x[n] = draw_category(p_x * p_x * p_mu[n]);
  for (int n = 0; n < k; ++n) out.assigned_z[n] = draw_category(p_z * p_z * p_mu[n]);

  auto detect = [&](std::int64_t assigned, double mu, std::int64_t& detected,
                    std::int64_t& errors) {
    const double q = gain(params, mu);
    const double e = error_gain(params, mu) / q;
    if (assigned > 0) {
      std::binomial_distribution<std::int64_t> d(assigned, std::min(q, 1.0));
      detected = d(rng);
      if (detected > 0) {
        std::binomial_distribution<std::int64_t> derr(detected, std::min(e, 1.0));
        errors = derr(rng);
      }
    }
  };

  for (int n = 0; n < k; ++n) {
    detect(out.assigned_x[n], profile.mu()[n], out.detected_x[n], errors_x[n]);
    detect(out.assigned_z[n], profile.mu()[n], out.detected_z[n], errors_z[n]);
    if (out.assigned_x[n] == 0 || out.assigned_z[n] == 0) out.degenerate = true;
  }

  auto empirical = [&](const std::vector<std::int64_t>& assigned,
                       const std::vector<std::int64_t>& detected,
                       const std::vector<std::int64_t>& errors) {
    std::vector<double> q(k, 0.0), e(k, 0.0);
    for (int n = 0; n < k; ++n) {
      if (assigned[n] > 0) q[n] = static_cast<double>(detected[n]) / assigned[n];
      if (detected[n] > 0) e[n] = static_cast<double>(errors[n]) / detected[n];
    }
    return basis_stats_from(profile, std::move(q), std::move(e));
  };

  out.stats.x = empirical(out.assigned_x, out.detected_x, errors_x);
  out.stats.z = empirical(out.assigned_z, out.detected_z, errors_z);

  for (int n = 0; n < k; ++n) {
    out.s_x += static_cast<double>(out.detected_x[n]);
    out.s_z += static_cast<double>(out.detected_z[n]);
    out.s_z_err += static_cast<double>(errors_z[n]);
  }
  return out;
}

}  // namespace keyrate
