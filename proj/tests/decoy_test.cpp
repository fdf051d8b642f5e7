#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "keyrate/decoy.hpp"

using namespace keyrate;

namespace {

// extended-precision recomputation used by the stability check
std::vector<long double> coefficients_long_double(const std::vector<double>& mu_d,
                                                  int which) {
  const int k = static_cast<int>(mu_d.size());
  const int k0 = (k % 2 == 0) ? 1 : 2;
  std::vector<long double> mu(mu_d.begin(), mu_d.end());
  std::vector<long double> out(k, 0.0L);

  std::vector<int> nodes;
  if (which == 1) {
    for (int n = 2 - k0; n < k; ++n) nodes.push_back(n);
  } else {
    for (int n = k0 - 1; n < k; ++n) nodes.push_back(n);
  }
  for (int n : nodes) {
    long double denom = 1.0L, prod = 1.0L;
    std::vector<long double> others;
    for (int j : nodes) {
      if (j == n) continue;
      denom *= mu[n] - mu[j];
      prod *= mu[j];
      others.push_back(mu[j]);
    }
    // elementary symmetric of degree |nodes|-2
    const int degree = static_cast<int>(nodes.size()) - 2;
    std::vector<long double> e(degree + 1, 0.0L);
    e[0] = 1.0L;
    for (long double v : others)
      for (int d = degree; d >= 1; --d) e[d] += v * e[d - 1];
    const long double sym = e[degree];
    if (which == 0) out[n] = -std::exp(mu[n]) * prod / denom;
    if (which == 1) out[n] = -std::exp(mu[n]) * sym / denom;
    if (which == 2) out[n] = std::exp(mu[n]) * sym / denom;
  }
  return out;
}

IntensityProfile equal_profile(std::vector<double> mu) {
  const int k = static_cast<int>(mu.size());
  std::vector<double> p(k, 1.0 / k);
  double acc = 0.0;
  for (int i = 0; i + 1 < k; ++i) acc += p[i];
  p[k - 1] = 1.0 - acc;
  return IntensityProfile(std::move(mu), std::move(p));
}

}  // namespace

TEST_CASE("elementary_symmetric basics") {
  const std::vector<double> v{1.0, 2.0, 3.0};
  CHECK(elementary_symmetric(v, 0) == 1.0);
  CHECK(elementary_symmetric(v, 2) == 11.0);
  CHECK(elementary_symmetric(v, 3) == 6.0);
  CHECK_THROWS_AS((void)elementary_symmetric(v, 4), std::domain_error);
}

TEST_CASE("width basics") {
  const std::vector<double> v{3.0, 1.0, 2.0};
  CHECK(width(v) == 2.0);
  const std::vector<double> single{7.5};
  CHECK(width(single) == 0.0);
  CHECK_THROWS_AS((void)width(std::vector<double>{}), std::domain_error);
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(IntensityProfile({0.5}, {1.0}), std::domain_error);
  CHECK_THROWS_AS(IntensityProfile({0.5, 0.5}, {0.5, 0.5}), std::domain_error);  // duplicate
  CHECK_THROWS_AS(IntensityProfile({0.1, 0.5}, {0.5, 0.5}), std::domain_error);  // increasing
  CHECK_THROWS_AS(IntensityProfile({1.5, 0.5}, {0.5, 0.5}), std::domain_error);  // mu > 1
  CHECK_THROWS_AS(IntensityProfile({0.5, 0.1}, {0.5, 0.4}), std::domain_error);  // sum != 1
  CHECK_THROWS_AS(IntensityProfile({0.5, 0.1}, {1.0, 0.0}), std::domain_error);  // p = 0
  // k = 11 rejected
  std::vector<double> mu11, p11;
  for (int i = 0; i < 11; ++i) {
    mu11.push_back(1.0 - 0.09 * i);
    p11.push_back(1.0 / 11);
  }
  p11[10] = 1.0 - 10.0 / 11;
  CHECK_THROWS_AS(IntensityProfile(mu11, p11), std::domain_error);
}

TEST_CASE("k=2 coefficients match the closed forms") {
  const auto coeffs = compute_coefficients(IntensityProfile({0.5, 0.1}, {0.5, 0.5}));
  CHECK(coeffs.k0 == 1);
  CHECK(coeffs.a0[0] == doctest::Approx(-0.41218031767503204).epsilon(1e-14));
  CHECK(coeffs.a0[1] == doctest::Approx(1.3814636475945595).epsilon(1e-14));
  CHECK(coeffs.a1[0] == 0.0);
  CHECK(coeffs.a1[1] == doctest::Approx(2.7629272951891191).epsilon(1e-14));

  // width of {a1_n / p_n}
  std::vector<double> scaled(2);
  for (int n = 0; n < 2; ++n) scaled[n] = coeffs.a1[n] / 0.5;
  CHECK(width(scaled) == doctest::Approx(5.5258545903782381).epsilon(1e-14));
}

TEST_CASE("parity rule for k = 2..10") {
  for (int k = 2; k <= 10; ++k) {
    std::vector<double> mu(k);
    for (int n = 0; n < k; ++n) mu[n] = 0.1 * (k - n) / 1.0 + 1e-6 - 0.1;
    // build spaced intensities inside [0,1]
    for (int n = 0; n < k; ++n) mu[n] = 1e-6 + 0.09 * (k - 1 - n);
    const auto coeffs = compute_coefficients(equal_profile(mu));
    if (k % 2 == 0) {
      CHECK(coeffs.k0 == 1);
      CHECK(coeffs.a1[0] == 0.0);
      CHECK(coeffs.a0[0] != 0.0);
    } else {
      CHECK(coeffs.k0 == 2);
      CHECK(coeffs.a0[0] == 0.0);
      CHECK(coeffs.a2[0] == 0.0);
      CHECK(coeffs.a1[0] != 0.0);
    }
  }
}

TEST_CASE("a1 sign pattern follows the node differences, k=3") {
  const std::vector<double> mu{0.5, 0.2, 1e-6};
  const auto coeffs = compute_coefficients(equal_profile(mu));
  for (int n = 0; n < 3; ++n) {
    double prod = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != n) prod *= mu[n] - mu[j];
    CHECK(coeffs.a1[n] * prod < 0.0);  // a1_n = -exp(mu_n) * sym / prod
  }
}

TEST_CASE("coefficients are independent of p_mu") {
  const std::vector<double> mu{0.55, 0.3, 0.12, 1e-6};
  const auto a = compute_coefficients(IntensityProfile(mu, {0.1, 0.2, 0.3, 0.4}));
  const auto b = compute_coefficients(IntensityProfile(mu, {0.4, 0.3, 0.2, 0.1}));
  CHECK(a.a0 == b.a0);
  CHECK(a.a1 == b.a1);
  CHECK(a.a2 == b.a2);
}

TEST_CASE("double-precision coefficients track an extended-precision recomputation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 3 + static_cast<int>(rng() % 4);  // 3..6
    const double slack = 1.0 - 1e-6 - 0.1 * (k - 1);
    std::vector<double> u(k - 1);
    double u_sum = 0.0;
    for (double& x : u) {
      x = unif(rng);
      u_sum += x;
    }
    std::vector<double> mu(k);
    mu[k - 1] = 1e-6;
    const double scale = slack * unif(rng) / u_sum;
    for (int i = k - 2; i >= 0; --i) mu[i] = mu[i + 1] + 0.1 + scale * u[k - 2 - i];

    const auto coeffs = compute_coefficients(equal_profile(mu));
    for (int which = 0; which < 3; ++which) {
      const auto ref = coefficients_long_double(mu, which);
      const auto& got = which == 0 ? coeffs.a0 : which == 1 ? coeffs.a1 : coeffs.a2;
      for (int n = 0; n < k; ++n) {
        // k = even has a structurally zero a1 slot handled above
        if (ref[n] == 0.0L) {
          CHECK(got[n] == 0.0);
        } else {
          CHECK(std::abs(got[n] - static_cast<double>(ref[n])) <=
                1e-9 * std::abs(static_cast<double>(ref[n])));
        }
      }
    }
  }
}
