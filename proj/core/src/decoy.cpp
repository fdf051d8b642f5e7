#include "keyrate/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace keyrate {

namespace {

constexpr int kMaxIntensities = 10;  // coefficient growth makes larger k useless
constexpr double kProbabilitySumTol = 1e-12;

// Product with factors ordered by magnitude; keeps the small differences
// from being absorbed into large intermediate products.
double stable_product(std::vector<double> factors) {
  std::sort(factors.begin(), factors.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  double prod = 1.0;
  for (double f : factors) prod *= f;
  return prod;
}

}  // namespace

IntensityProfile::IntensityProfile(std::vector<double> mu, std::vector<double> p_mu)
    : mu_(std::move(mu)), p_mu_(std::move(p_mu)) {
  const int k = static_cast<int>(mu_.size());
  if (k < 2) throw std::domain_error("IntensityProfile: need at least two intensities");
  if (k > kMaxIntensities) throw std::domain_error("IntensityProfile: more than 10 intensities");
  if (p_mu_.size() != mu_.size())
    throw std::domain_error("IntensityProfile: mu and p_mu size mismatch");
  if (mu_.front() > 1.0) throw std::domain_error("IntensityProfile: mu_1 exceeds 1");
  if (mu_.back() < 0.0) throw std::domain_error("IntensityProfile: negative intensity");
  for (int n = 0; n + 1 < k; ++n) {
    if (!(mu_[n] > mu_[n + 1]))
      throw std::domain_error("IntensityProfile: intensities must be strictly decreasing");
  }
  double sum = 0.0;
  for (double p : p_mu_) {
    if (!(p > 0.0)) throw std::domain_error("IntensityProfile: probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTol)
    throw std::domain_error("IntensityProfile: probabilities must sum to 1");
}

double IntensityProfile::mean_exp_neg_mu() const {
  return mean([](double m) { return std::exp(-m); });
}

double IntensityProfile::mean_mu_exp_neg_mu() const {
  return mean([](double m) { return m * std::exp(-m); });
}

double elementary_symmetric(std::span<const double> values, int degree) {
  if (degree < 0) throw std::domain_error("elementary_symmetric: negative degree");
  if (degree > static_cast<int>(values.size()))
    throw std::domain_error("elementary_symmetric: degree exceeds value count");
  std::vector<double> e(static_cast<std::size_t>(degree) + 1, 0.0);
  e[0] = 1.0;
  for (double v : values) {
    for (int d = degree; d >= 1; --d) e[d] += v * e[d - 1];
  }
  return e[degree];
}

double width(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("width: empty set");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

DecoyCoefficients compute_coefficients(const IntensityProfile& profile) {
  const auto& mu = profile.mu();
  const int k = profile.size();
  const int k0 = (k % 2 == 0) ? 1 : 2;

  DecoyCoefficients out;
  out.k0 = k0;
  out.a0.assign(k, 0.0);
  out.a1.assign(k, 0.0);
  out.a2.assign(k, 0.0);

  // Even-sized node set for the vacuum-yield and error combinations.
  std::vector<int> even_nodes;
  for (int n = k0 - 1; n < k; ++n) even_nodes.push_back(n);

  for (int n : even_nodes) {
    std::vector<double> diff, others;
    for (int j : even_nodes) {
      if (j == n) continue;
      diff.push_back(mu[n] - mu[j]);
      others.push_back(mu[j]);
    }
    const double denom = stable_product(diff);
    const double expn = std::exp(mu[n]);
    out.a0[n] = -expn * stable_product(others) / denom;
    out.a2[n] = expn *
                elementary_symmetric(others, static_cast<int>(even_nodes.size()) - 2) / denom;
  }

  if (k == 2) {
    // Single-intensity variant; kept for the exploratory oracle mode only.
    out.a1[1] = std::exp(mu[1]) / (mu[0] - mu[1]);
    return out;
  }

  // Odd-sized node set for the single-photon-yield combination; its
  // products and symmetric polynomial range over this same set, which is
  // what makes the combination extract the first-order coefficient.
  std::vector<int> odd_nodes;
  for (int n = 2 - k0; n < k; ++n) odd_nodes.push_back(n);

  for (int n : odd_nodes) {
    std::vector<double> diff, others;
    for (int j : odd_nodes) {
      if (j == n) continue;
      diff.push_back(mu[n] - mu[j]);
      others.push_back(mu[j]);
    }
    const double denom = stable_product(diff);
    out.a1[n] = -std::exp(mu[n]) *
                elementary_symmetric(others, static_cast<int>(odd_nodes.size()) - 2) / denom;
  }
  return out;
}

}  // namespace keyrate
