#pragma once

// Statistics used by the plr pipeline: normal CDF, Anderson-Darling normality
// test (both parameters estimated), Box-Cox with maximum-likelihood lambda,
// normal fitting and the two comparison tests (Welch t, exact binomial).
//
// Everything here is a pure function over spans of doubles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "roma/error.hpp"

namespace roma::stats {

/// p-values at or above this are accepted as normal.
inline constexpr double kNormalityThreshold = 0.15;
/// |lambda| below this takes the logarithmic branch of Box-Cox.
inline constexpr double kLambdaZeroTolerance = 1e-8;
inline constexpr double kLambdaMin = -5.0;
inline constexpr double kLambdaMax = 5.0;
inline constexpr double kLambdaTolerance = 1e-5;
inline constexpr std::size_t kMinNormalitySamples = 8;

struct NormalityVerdict {
  double statistic = 0.0;  // adjusted A*^2
  double p_value = 0.0;
  bool is_normal = false;

  friend bool operator==(const NormalityVerdict&, const NormalityVerdict&) = default;
};

struct BoxCoxParams {
  double lambda = 1.0;
  double log_likelihood = 0.0;
};

struct NormalModel {
  double mu = 0.0;
  double sigma = 1.0;
};

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InputError(std::string(what) + ": non-finite sample value");
    }
  }
}

inline void require_positive(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v > 0.0)) {
      throw DomainError(std::string(what) + ": Box-Cox requires strictly positive samples");
    }
  }
}

}  // namespace detail

inline double mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Two-pass variance. ddof = 1 gives the sample variance, 0 the population one.
inline double variance(std::span<const double> values, int ddof = 1) {
  const double m = mean(values);
  double ss = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double d = v - m;
    ss += d * d;
    comp += d;
  }
  const auto n = static_cast<double>(values.size());
  return (ss - comp * comp / n) / (n - ddof);
}

/// Standard normal CDF. Absolute error is at the level of double rounding.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double log_normal_cdf(double z) {
  return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

/// log(1 - Phi(z)) without cancellation.
inline double log_normal_sf(double z) {
  return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
}

/// Maps the small-sample adjusted statistic A*^2 to a p-value using the
/// piecewise-exponential fit for the estimated-mean-and-variance case.
inline double anderson_darling_p_value(double a2_star) {
  double p;
  if (a2_star < 0.2) {
    p = 1.0 - std::exp(-13.436 + 101.14 * a2_star - 223.73 * a2_star * a2_star);
  } else if (a2_star < 0.34) {
    p = 1.0 - std::exp(-8.318 + 42.796 * a2_star - 59.938 * a2_star * a2_star);
  } else if (a2_star < 0.6) {
    p = std::exp(0.9177 - 4.279 * a2_star - 1.38 * a2_star * a2_star);
  } else if (a2_star <= 13.0) {
    p = std::exp(1.2937 - 5.709 * a2_star + 0.0186 * a2_star * a2_star);
  } else {
    p = 0.0;
  }
  return std::clamp(p, 0.0, 1.0);
}

/// Unadjusted A^2 with mean and standard deviation (n-1 divisor) estimated
/// from the sample.
inline double anderson_darling_statistic(std::span<const double> samples) {
  const std::size_t n = samples.size();
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = mean(sorted);
  const double s = std::sqrt(variance(sorted));
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = (sorted[i] - m) / s;
    const double hi = (sorted[n - 1 - i] - m) / s;
    acc += static_cast<double>(2 * i + 1) * (log_normal_cdf(lo) + log_normal_sf(hi));
  }
  return -static_cast<double>(n) - acc / static_cast<double>(n);
}

inline NormalityVerdict anderson_darling_normal(std::span<const double> samples) {
  if (samples.size() < kMinNormalitySamples) {
    throw InputError("anderson_darling_normal: need at least 8 samples, got " +
                     std::to_string(samples.size()));
  }
  detail::require_finite(samples, "anderson_darling_normal");
  if (!(variance(samples) > 0.0)) {
    throw DegenerateSampleError("anderson_darling_normal: zero sample variance");
  }
  const auto n = static_cast<double>(samples.size());
  const double a2 = anderson_darling_statistic(samples);
  const double a2_star = a2 * (1.0 + 0.75 / n + 2.25 / (n * n));
  NormalityVerdict verdict;
  verdict.statistic = a2_star;
  verdict.p_value = anderson_darling_p_value(a2_star);
  verdict.is_normal = verdict.p_value >= kNormalityThreshold;
  return verdict;
}

// Box-Cox of one positive value. Works from log(x) so the small-lambda branch
// stays continuous with ln(x).
inline double boxcox_from_log(double log_x, double lambda) {
  if (std::abs(lambda) < kLambdaZeroTolerance) return log_x;
  return std::expm1(lambda * log_x) / lambda;
}

inline double boxcox(double x, double lambda) {
  if (!(x > 0.0)) throw DomainError("boxcox: input must be strictly positive");
  return boxcox_from_log(std::log(x), lambda);
}

inline std::vector<double> boxcox_transform(std::span<const double> samples, double lambda) {
  detail::require_finite(samples, "boxcox_transform");
  detail::require_positive(samples, "boxcox_transform");
  std::vector<double> out;
  out.reserve(samples.size());
  for (double x : samples) out.push_back(boxcox_from_log(std::log(x), lambda));
  return out;
}

/// Profile log-likelihood of lambda:
///   -(n/2) ln(var(BoxCox_lambda(x))) + (lambda - 1) * sum(ln x),
/// with the population (1/n) variance.
class BoxCoxLikelihood {
 public:
  explicit BoxCoxLikelihood(std::span<const double> samples) {
    detail::require_finite(samples, "boxcox_log_likelihood");
    detail::require_positive(samples, "boxcox_log_likelihood");
    logs_.reserve(samples.size());
    for (double x : samples) {
      logs_.push_back(std::log(x));
      sum_log_ += logs_.back();
    }
    transformed_.resize(logs_.size());
  }

  double operator()(double lambda) const {
    for (std::size_t i = 0; i < logs_.size(); ++i) {
      transformed_[i] = boxcox_from_log(logs_[i], lambda);
    }
    const auto n = static_cast<double>(logs_.size());
    return -0.5 * n * std::log(variance(transformed_, 0)) + (lambda - 1.0) * sum_log_;
  }

 private:
  std::vector<double> logs_;
  mutable std::vector<double> transformed_;
  double sum_log_ = 0.0;
};

inline double boxcox_log_likelihood(std::span<const double> samples, double lambda) {
  return BoxCoxLikelihood(samples)(lambda);
}

namespace detail {

struct MinimizeResult {
  double x;
  double fx;
  bool converged;
};

// Brent's method (golden section with parabolic steps) on [a, b].
template <typename F>
MinimizeResult brent_minimize(F&& f, double a, double b, double xtol, int max_iter = 500) {
  constexpr double kGolden = 0.3819660112501051;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = xtol * 0.5 + 1e-12 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) return {x, fx, true};
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (mid >= x) ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= mid) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, false};
}

}  // namespace detail

/// Maximum-likelihood lambda over [-5, 5]. A coarse scan picks the bracket
/// holding the global maximum, then Brent refines it to 1e-5.
inline BoxCoxParams boxcox_mle_lambda(std::span<const double> samples) {
  if (samples.size() < kMinNormalitySamples) {
    throw InputError("boxcox_mle_lambda: need at least 8 samples");
  }
  const BoxCoxLikelihood ll(samples);
  const auto neg_ll = [&](double lambda) { return -ll(lambda); };

  constexpr int kScanPoints = 101;
  constexpr double kStep = (kLambdaMax - kLambdaMin) / (kScanPoints - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScanPoints; ++i) {
    const double value = neg_ll(kLambdaMin + kStep * i);
    if (value < best_value) {
      best_value = value;
      best = i;
    }
  }
  if (!std::isfinite(best_value)) {
    throw NumericError("boxcox_mle_lambda: log-likelihood is not finite on the search interval");
  }
  const double lo = std::max(kLambdaMin, kLambdaMin + kStep * (best - 1));
  const double hi = std::min(kLambdaMax, kLambdaMin + kStep * (best + 1));
  const auto result = detail::brent_minimize(neg_ll, lo, hi, kLambdaTolerance);
  if (!result.converged || !std::isfinite(result.fx)) {
    throw NumericError("boxcox_mle_lambda: optimizer did not converge");
  }
  // Brent never evaluates the bracket ends; an optimum on the interval
  // boundary is picked up here.
  BoxCoxParams params{result.x, -result.fx};
  for (double edge : {lo, hi}) {
    const double value = ll(edge);
    if (value > params.log_likelihood) params = {edge, value};
  }
  return params;
}

inline NormalModel fit_normal(std::span<const double> values) {
  if (values.size() < 2) throw InputError("fit_normal: need at least 2 values");
  detail::require_finite(values, "fit_normal");
  const double var = variance(values);
  if (!(var > 0.0)) throw DegenerateSampleError("fit_normal: zero sample variance");
  return {mean(values), std::sqrt(var)};
}

inline double z_score(const NormalModel& model, double threshold) {
  return (threshold - model.mu) / model.sigma;
}

/// Two-sided Welch unequal-variance t-test.
inline double welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InputError("welch_t_test: each sample needs at least 2 values");
  }
  detail::require_finite(a, "welch_t_test");
  detail::require_finite(b, "welch_t_test");
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double va = variance(a) / na;
  const double vb = variance(b) / nb;
  if (!(va + vb > 0.0)) throw DegenerateSampleError("welch_t_test: both samples have zero variance");
  const double t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  if (t == 0.0) return 1.0;
  const double df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

/// Exact two-sided binomial test: total probability of outcomes no more
/// likely than the observed one.
inline double binomial_test(std::int64_t successes, std::int64_t trials, double p0) {
  if (trials < 0 || successes < 0 || successes > trials) {
    throw InputError("binomial_test: need 0 <= successes <= trials");
  }
  if (!(p0 > 0.0 && p0 < 1.0)) throw InputError("binomial_test: p0 must lie in (0, 1)");
  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double lg_n1 = std::lgamma(static_cast<double>(trials) + 1.0);
  const auto log_pmf = [&](std::int64_t k) {
    const auto kd = static_cast<double>(k);
    const auto nd = static_cast<double>(trials);
    return lg_n1 - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * log_p + (nd - kd) * log_q;
  };
  const double observed = log_pmf(successes);
  // Relative slack so outcomes tied with the observed one count despite rounding.
  const double cutoff = observed + std::log1p(1e-7);
  double total = 0.0;
  for (std::int64_t k = 0; k <= trials; ++k) {
    const double lp = log_pmf(k);
    if (lp <= cutoff) total += std::exp(lp);
  }
  return std::min(1.0, total);
}

}  // namespace roma::stats
