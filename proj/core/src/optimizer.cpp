#include "keyrate/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace keyrate {

namespace {

// Search space: x in R^(2k-1) mapped through monotone transforms.
//   x[0]        -> p_x in (PX_LO, PX_HI)
//   x[1]        -> mu_{k-1} - mu_min in (T_LO, T_HI)
//   x[2..k-1]   -> gaps between non-vacuum intensities, each >= spacing_min
//   x[k..2k-2]  -> p_mu logits (softmax with an implicit trailing zero)
constexpr double kPxLo = 0.1, kPxHi = 0.99;
constexpr double kTLo = 1e-3, kTHi = 0.45;
constexpr double kGapSpan = 0.5;
constexpr double kLogitClamp = 40.0;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double u) {
  u = std::clamp(u, 1e-9, 1.0 - 1e-9);
  return std::log(u / (1.0 - u));
}

struct Transform {
  const OptimizationConfig& config;

  int dim() const { return 2 * config.k - 1; }

  ParameterPoint decode(std::span<const double> x) const {
    const int k = config.k;
    ParameterPoint pt;
    pt.p_x = kPxLo + (kPxHi - kPxLo) * sigmoid(x[0]);
    pt.mu.assign(k, 0.0);
    pt.mu[k - 1] = config.mu_min;
    pt.mu[k - 2] = config.mu_min + kTLo + (kTHi - kTLo) * sigmoid(x[1]);
    for (int i = k - 3; i >= 0; --i) {
      const double gap = config.spacing_min + kGapSpan * sigmoid(x[2 + (k - 3 - i)]);
      pt.mu[i] = pt.mu[i + 1] + gap;
    }
    pt.p_mu.assign(k, 0.0);
    double max_logit = 0.0;
    std::vector<double> logits(k, 0.0);
    for (int n = 0; n + 1 < k; ++n) {
      logits[n] = std::clamp(x[k + n], -kLogitClamp, kLogitClamp);
      max_logit = std::max(max_logit, logits[n]);
    }
    double sum = 0.0;
    for (int n = 0; n < k; ++n) {
      pt.p_mu[n] = std::exp(logits[n] - max_logit);
      sum += pt.p_mu[n];
    }
    const double floor = config.p_mu_min;
    for (int n = 0; n < k; ++n) pt.p_mu[n] = floor + (1.0 - k * floor) * pt.p_mu[n] / sum;
    return pt;
  }

  std::vector<double> encode(const ParameterPoint& pt) const {
    const int k = config.k;
    std::vector<double> x(dim(), 0.0);
    x[0] = logit((pt.p_x - kPxLo) / (kPxHi - kPxLo));
    x[1] = logit((pt.mu[k - 2] - config.mu_min - kTLo) / (kTHi - kTLo));
    for (int i = k - 3; i >= 0; --i) {
      const double gap = pt.mu[i] - pt.mu[i + 1];
      x[2 + (k - 3 - i)] = logit((gap - config.spacing_min) / kGapSpan);
    }
    const double floor = config.p_mu_min;
    auto share = [&](double p) {
      return std::max((p - floor) / (1.0 - k * floor), 1e-12);
    };
    const double ref = share(pt.p_mu[k - 1]);
    for (int n = 0; n + 1 < k; ++n) {
      x[k + n] = std::clamp(std::log(share(pt.p_mu[n]) / ref), -kLogitClamp, kLogitClamp);
    }
    return x;
  }
};

class Objective {
 public:
  Objective(const ChannelParams& channel, const OptimizationConfig& config,
            double kappa, double eps_cor)
      : channel_(channel), config_(config), kappa_(kappa), eps_cor_(eps_cor),
        transform_{config} {}

  // Score to maximize. Feasible points score their rate; clamped-to-zero
  // points score their (negative) raw rate so the search still sees a
  // slope; structurally infeasible points and mu_1 overshoot score below
  // every raw rate of interest.
  double score(std::span<const double> x) {
    ++evaluations_;
    const ParameterPoint pt = transform_.decode(x);
    if (pt.mu[0] > config_.mu_max) {
      return -1.0 - 1e3 * (pt.mu[0] - config_.mu_max);
    }
    const IntensityProfile profile(pt.mu, pt.p_mu);
    const ObservedStats observed = observe(channel_, profile);
    const KeyRateReport report =
        solve_security_fixed_point(profile, observed, pt.p_x, config_.s_x, kappa_, eps_cor_);
    if (report.feasible) return report.rate;
    if (report.rate_raw < 0.0) return report.rate_raw;
    return -1.0;
  }

  std::int64_t evaluations() const { return evaluations_; }
  const Transform& transform() const { return transform_; }

 private:
  const ChannelParams& channel_;
  const OptimizationConfig& config_;
  double kappa_, eps_cor_;
  Transform transform_;
  std::int64_t evaluations_ = 0;
};

struct LocalResult {
  std::vector<double> x;
  double score = -1e300;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2) maximizing obj.score via negation.
LocalResult nelder_mead(Objective& obj, std::vector<double> x0, double tolerance,
                        int max_evals) {
  const int d = static_cast<int>(x0.size());
  struct Vertex {
    std::vector<double> x;
    double f;  // negated score
  };
  auto eval = [&](const std::vector<double>& x) { return -obj.score(x); };

  std::vector<Vertex> simplex;
  simplex.reserve(d + 1);
  simplex.push_back({x0, eval(x0)});
  for (int j = 0; j < d; ++j) {
    std::vector<double> xj = x0;
    xj[j] += 0.5;
    simplex.push_back({std::move(xj), 0.0});
    simplex.back().f = eval(simplex.back().x);
  }

  int evals = d + 1;
  auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  std::sort(simplex.begin(), simplex.end(), by_f);

  while (evals < max_evals) {
    const double spread = std::abs(simplex.back().f - simplex.front().f);
    if (spread <= tolerance * (std::abs(simplex.front().f) + tolerance)) break;

    std::vector<double> centroid(d, 0.0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) centroid[j] += simplex[i].x[j];
    }
    for (int j = 0; j < d; ++j) centroid[j] /= d;

    const Vertex& worst = simplex.back();
    std::vector<double> xr(d);
    for (int j = 0; j < d; ++j) xr[j] = centroid[j] + (centroid[j] - worst.x[j]);
    const double fr = eval(xr);
    ++evals;

    if (fr < simplex.front().f) {
      std::vector<double> xe(d);
      for (int j = 0; j < d; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - worst.x[j]);
      const double fe = eval(xe);
      ++evals;
      simplex.back() = fe < fr ? Vertex{std::move(xe), fe} : Vertex{std::move(xr), fr};
    } else if (fr < simplex[simplex.size() - 2].f) {
      simplex.back() = Vertex{std::move(xr), fr};
    } else {
      std::vector<double> xc(d);
      for (int j = 0; j < d; ++j) xc[j] = centroid[j] + 0.5 * (worst.x[j] - centroid[j]);
      const double fc = eval(xc);
      ++evals;
      if (fc < worst.f) {
        simplex.back() = Vertex{std::move(xc), fc};
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          for (int j = 0; j < d; ++j) {
            simplex[i].x[j] = simplex[0].x[j] + 0.5 * (simplex[i].x[j] - simplex[0].x[j]);
          }
          simplex[i].f = eval(simplex[i].x);
          ++evals;
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_f);
  }
  return {simplex.front().x, -simplex.front().f};
}

bool lexicographically_before(const ParameterPoint& a, const ParameterPoint& b) {
  if (a.p_x != b.p_x) return a.p_x < b.p_x;
  if (a.mu != b.mu) return a.mu < b.mu;
  return a.p_mu < b.p_mu;
}

}  // namespace

void OptimizationConfig::validate() const {
  if (k < 3 || k > 10) throw std::domain_error("OptimizationConfig: k must lie in [3,10]");
  if (!(s_x >= 1.0)) throw std::domain_error("OptimizationConfig: s_x must be >= 1");
  if (!(mu_min >= 0.0 && mu_min < mu_max))
    throw std::domain_error("OptimizationConfig: need 0 <= mu_min < mu_max");
  if (!(mu_max <= 1.0)) throw std::domain_error("OptimizationConfig: mu_max must be <= 1");
  if (!(spacing_min > 0.0)) throw std::domain_error("OptimizationConfig: spacing_min must be > 0");
  if (!(p_mu_min >= 0.0 && k * p_mu_min < 1.0))
    throw std::domain_error("OptimizationConfig: p_mu_min must satisfy 0 <= k*p_mu_min < 1");
  if (mu_min + kTLo + (k - 2) * spacing_min >= mu_max)
    throw std::domain_error("OptimizationConfig: empty feasible region");
  if (restarts < 1) throw std::domain_error("OptimizationConfig: restarts must be >= 1");
  if (max_evals < 100) throw std::domain_error("OptimizationConfig: max_evals must be >= 100");
  if (!(tolerance > 0.0)) throw std::domain_error("OptimizationConfig: tolerance must be > 0");
}

OptimizationResult optimize(const ChannelParams& channel, const OptimizationConfig& config,
                            double kappa, double eps_cor,
                            const std::optional<ParameterPoint>& hint) {
  config.validate();
  channel.validate();

  Objective objective(channel, config, kappa, eps_cor);
  const Transform& transform = objective.transform();
  const int d = transform.dim();
  const int k = config.k;

  // Start list: deterministic heuristics, an optional warm start, then a
  // seeded Kronecker sequence for space coverage.
  std::vector<std::vector<double>> starts;

  for (double px : {0.5, 0.8, 0.9, 0.95}) {
    for (int pattern = 0; pattern < 2; ++pattern) {
      ParameterPoint pt;
      pt.p_x = px;
      pt.mu.assign(k, 0.0);
      pt.mu[k - 1] = config.mu_min;
      pt.mu[k - 2] = config.mu_min + 0.1;
      for (int i = k - 3; i >= 0; --i) pt.mu[i] = pt.mu[i + 1] + config.spacing_min + 0.01;
      pt.p_mu.assign(k, 0.0);
      double sum = 0.0;
      for (int n = 0; n < k; ++n) {
        // pattern 0: mass on the largest intensity; pattern 1: on the second
        pt.p_mu[n] = (n == pattern) ? 4.0 : (n + 1 == k ? 1.0 : 0.5);
        sum += pt.p_mu[n];
      }
      for (int n = 0; n < k; ++n) pt.p_mu[n] /= sum;
      starts.push_back(transform.encode(pt));
    }
  }
  if (hint) starts.push_back(transform.encode(*hint));

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> offset(d);
  for (int j = 0; j < d; ++j) offset[j] = unif(rng);
  // Kronecker sequence with per-dimension irrational strides.
  std::vector<double> stride(d);
  for (int j = 0; j < d; ++j) stride[j] = std::sqrt(101.0 + 13.0 * j);
  const int quasi = std::max(0, config.restarts - static_cast<int>(starts.size()));
  for (int i = 0; i < quasi; ++i) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) {
      double u = offset[j] + (i + 1) * stride[j];
      u -= std::floor(u);
      x[j] = -3.5 + 7.0 * u;
    }
    starts.push_back(std::move(x));
  }

  LocalResult best;
  ParameterPoint best_point;
  bool have_best = false;
  for (const auto& x0 : starts) {
    LocalResult local = nelder_mead(objective, x0, config.tolerance, config.max_evals);
    const ParameterPoint pt = transform.decode(local.x);
    const bool better =
        !have_best || local.score > best.score ||
        (local.score == best.score && lexicographically_before(pt, best_point));
    if (better) {
      best = std::move(local);
      best_point = pt;
      have_best = true;
    }
  }

  OptimizationResult result;
  result.best = best_point;
  result.evaluations = objective.evaluations();
  const IntensityProfile profile(best_point.mu, best_point.p_mu);
  const ObservedStats observed = observe(channel, profile);
  result.report = solve_security_fixed_point(profile, observed, best_point.p_x,
                                             config.s_x, kappa, eps_cor);
  result.converged = result.report.feasible && result.report.rate > 0.0;
  if (!result.converged) {
    result.report.rate = 0.0;
    result.report.final_length = 0.0;
  }
  return result;
}

}  // namespace keyrate
