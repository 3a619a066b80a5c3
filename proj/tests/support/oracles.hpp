#pragma once

// Test-only reference routines. They deliberately avoid the library's
// optimizers so they can check them.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace roma::testing {

/// Box-Cox profile log-likelihood written out directly from its definition.
inline double reference_boxcox_llf(std::span<const double> x, double lambda) {
  const auto n = static_cast<double>(x.size());
  std::vector<double> y;
  y.reserve(x.size());
  double sum_log = 0.0;
  for (double v : x) {
    sum_log += std::log(v);
    y.push_back(lambda == 0.0 ? std::log(v) : (std::pow(v, lambda) - 1.0) / lambda);
  }
  double m = 0.0;
  for (double v : y) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  return -0.5 * n * std::log(ss / n) + (lambda - 1.0) * sum_log;
}

/// Brute-force argmax of the log-likelihood over {-5.00, -4.99, ..., 5.00}.
inline double grid_search_lambda(std::span<const double> x) {
  double best_lambda = -5.0;
  double best = -INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    const double lambda = -5.0 + 0.01 * i;
    const double value = reference_boxcox_llf(x, lambda);
    if (value > best) {
      best = value;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

inline std::vector<double> normal_draws(std::uint64_t seed, std::size_t n, double mu, double sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mu, sigma);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> lognormal_draws(std::uint64_t seed, std::size_t n, double m, double s) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(m, s);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

inline std::vector<double> exponential_draws(std::uint64_t seed, std::size_t n, double rate) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> dist(rate);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

/// Exact two-sided binomial p-value by enumerating every outcome with
/// multiplicative pmf recurrences (no lgamma).
inline double enumerate_binomial_p(int k, int n, double p) {
  std::vector<double> pmf(n + 1);
  pmf[0] = std::pow(1.0 - p, n);
  for (int i = 1; i <= n; ++i) pmf[i] = pmf[i - 1] * (n - i + 1) / i * p / (1.0 - p);
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    if (pmf[i] <= pmf[k] * (1.0 + 1e-7)) total += pmf[i];
  }
  return std::min(1.0, total);
}

/// Standard normal CDF by Simpson quadrature of the density from -12 to z.
inline double quadrature_normal_cdf(double z) {
  const double a = -12.0;
  if (z <= a) return 0.0;
  const int steps = 20000;
  const double h = (z - a) / steps;
  const auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double sum = pdf(a) + pdf(z);
  for (int i = 1; i < steps; ++i) sum += pdf(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace roma::testing
