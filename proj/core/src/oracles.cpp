#include "keyrate/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "keyrate/decoy.hpp"
#include "keyrate/finite_key.hpp"

namespace keyrate {

namespace {

constexpr int kDefaultTruncation = 12;
constexpr double kBoundTolerance = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Random profile with non-vacuum spacing >= 0.1 and mu_1 <= 1.
IntensityProfile random_profile(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double mu_last = 0.02 * unif(rng);
  const double spacing = 0.1;
  const double slack = 1.0 - mu_last - spacing * (k - 1);
  std::vector<double> u(k - 1);
  double u_sum = 0.0;
  for (double& v : u) {
    v = unif(rng);
    u_sum += v;
  }
  const double scale = slack * unif(rng) / u_sum;
  std::vector<double> mu(k);
  mu[k - 1] = mu_last;
  for (int i = k - 2; i >= 0; --i) mu[i] = mu[i + 1] + spacing + scale * u[k - 2 - i];

  std::vector<double> p(k);
  double p_sum = 0.0;
  for (double& v : p) {
    v = 0.1 + unif(rng);
    p_sum += v;
  }
  for (double& v : p) v /= p_sum;
  // exact normalization for the profile invariant
  double acc = 0.0;
  for (int i = 0; i + 1 < k; ++i) acc += p[i];
  p[k - 1] = 1.0 - acc;
  return IntensityProfile(std::move(mu), std::move(p));
}

TruncatedSource random_source(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  TruncatedSource src;
  src.yields.resize(kDefaultTruncation + 1);
  src.error_rates.resize(kDefaultTruncation + 1);
  for (int m = 0; m <= kDefaultTruncation; ++m) {
    src.yields[m] = unif(rng);
    src.error_rates[m] = 0.5 * unif(rng);
  }
  return src;
}

}  // namespace

ForwardGains truncated_poisson_forward(const TruncatedSource& source, double mu) {
  if (!(mu >= 0.0)) throw std::domain_error("truncated_poisson_forward: negative mu");
  if (source.yields.size() < 2 || source.yields.size() != source.error_rates.size())
    throw std::domain_error("truncated_poisson_forward: malformed source");
  ForwardGains out;
  double term = std::exp(-mu);  // mu^m exp(-mu) / m!
  for (std::size_t m = 0; m < source.yields.size(); ++m) {
    out.q += term * source.yields[m];
    out.qe += term * source.yields[m] * source.error_rates[m];
    term *= mu / static_cast<double>(m + 1);
  }
  return out;
}

ValidityReport bound_validity_check(int trials, int k, std::uint64_t seed) {
  if (trials < 1) throw std::domain_error("bound_validity_check: trials must be >= 1");
  if (k < 2 || k > 10) throw std::domain_error("bound_validity_check: k must lie in [2,10]");

  ValidityReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(seed ^ static_cast<std::uint64_t>(t)));
    const IntensityProfile profile = random_profile(k, rng);
    const TruncatedSource source = random_source(rng);
    const DecoyCoefficients coeffs = compute_coefficients(profile);

    double y0_sum = 0.0, y1_sum = 0.0, e1_sum = 0.0;
    for (int n = 0; n < k; ++n) {
      const ForwardGains g = truncated_poisson_forward(source, profile.mu()[n]);
      y0_sum += coeffs.a0[n] * g.q;
      y1_sum += coeffs.a1[n] * g.q;
      e1_sum += coeffs.a2[n] * g.qe;
    }
    const double y0 = source.yields[0];
    const double y1 = source.yields[1];
    const double y1e1 = source.yields[1] * source.error_rates[1];

    if (y0_sum > y0 + kBoundTolerance) {
      ++report.y0_violations;
      report.max_excess = std::max(report.max_excess, y0_sum - y0);
    }
    if (y1_sum > y1 + kBoundTolerance) {
      ++report.y1_violations;
      report.max_excess = std::max(report.max_excess, y1_sum - y1);
    }
    if (e1_sum < y1e1 - kBoundTolerance) {
      ++report.e1_violations;
      report.max_excess = std::max(report.max_excess, y1e1 - e1_sum);
    }
  }
  return report;
}

CoverageReport coverage_check(double eps, int s, int k, int trials, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::domain_error("coverage_check: eps must lie in (0,1]");
  if (s < 100) throw std::domain_error("coverage_check: s must be >= 100");
  if (trials < 1000) throw std::domain_error("coverage_check: trials must be >= 1000");
  if (k < 2 || k > 10) throw std::domain_error("coverage_check: k must lie in [2,10]");

  // Canonical profile: gaps of 0.1 down to the vacuum intensity, equal
  // usage probabilities.
  std::vector<double> mu(k), p(k, 1.0 / k);
  for (int n = 0; n < k; ++n) mu[n] = 0.1 * (k - 1 - n) + 1e-6;
  double acc = 0.0;
  for (int n = 0; n + 1 < k; ++n) acc += p[n];
  p[k - 1] = 1.0 - acc;
  const IntensityProfile profile(mu, p);
  const DecoyCoefficients coeffs = compute_coefficients(profile);

  // Fixed population of 10*s labelled items; hypergeometric-vs-binomial
  // differences are material at that ratio.
  const int population_size = 10 * s;
  if (s > population_size) throw std::domain_error("coverage_check: s exceeds population");
  std::vector<double> population;
  population.reserve(population_size);
  for (int n = 0; n < k; ++n) {
    const double value = coeffs.a1[n] / profile.p_mu()[n];
    int count = static_cast<int>(std::floor(profile.p_mu()[n] * population_size));
    if (n == k - 1) count = population_size - static_cast<int>(population.size());
    population.insert(population.end(), count, value);
  }

  double population_mean = 0.0;
  for (double v : population) population_mean += v;
  population_mean /= population.size();

  std::vector<double> values_by_label(k);
  for (int n = 0; n < k; ++n) values_by_label[n] = coeffs.a1[n] / profile.p_mu()[n];
  const double w = width(values_by_label);
  const double threshold_dev = mcdiarmid_deviation(eps, s, w);

  CoverageReport report;
  report.trials = trials;
  report.threshold = eps + 3.0 * std::sqrt(eps / trials);

  std::vector<double> pool(population);
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(seed ^ static_cast<std::uint64_t>(t)));
    pool = population;
    double sample_sum = 0.0;
    // partial Fisher-Yates: draw s without replacement
    for (int i = 0; i < s; ++i) {
      std::uniform_int_distribution<int> pick(i, population_size - 1);
      std::swap(pool[i], pool[pick(rng)]);
      sample_sum += pool[i];
    }
    const double sample_mean = sample_sum / s;
    if (population_mean - sample_mean > threshold_dev) ++report.exceedances;
  }
  report.empirical_rate = static_cast<double>(report.exceedances) / trials;
  report.pass = report.empirical_rate <= report.threshold;
  return report;
}

}  // namespace keyrate
