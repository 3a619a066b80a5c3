#pragma once

// Seeded perturbation sampling inside an L-infinity ball.
//
// Seed derivation is counter based: every (master_seed, point_index,
// sample_index) triple maps to its own key, and coordinate j of that sample
// is splitmix64(key + (j + 1) * golden). No generator state is shared, so a
// sample never depends on evaluation order or on how many workers run.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "roma/error.hpp"

namespace roma {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// splitmix64 finalizer applied to x + golden gamma.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t point_index = 0;

  std::uint64_t sample_key(std::uint64_t sample_index) const {
    return splitmix64(splitmix64(splitmix64(master_seed) ^ point_index) ^ sample_index);
  }

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Master seed for one entry of a sweep, so every sweep point is an independent draw.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
  return splitmix64(master_seed ^ splitmix64(stream_index + 1));
}

enum class PerturbationDistribution { kPerCoordinateUniform };

struct PerturbationSpec {
  double epsilon = 0.04;
  double domain_min = 0.0;
  double domain_max = 1.0;
  PerturbationDistribution distribution = PerturbationDistribution::kPerCoordinateUniform;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (!(domain_min < domain_max)) throw ConfigError("domain_min must be < domain_max");
  }
};

struct PerturbedSamples {
  std::vector<std::vector<double>> points;
  std::size_t clipped_coordinates = 0;

  double clipped_fraction() const {
    if (points.empty() || points.front().empty()) return 0.0;
    return static_cast<double>(clipped_coordinates) /
           static_cast<double>(points.size() * points.front().size());
  }
};

/// n points drawn per-coordinate uniformly from [x0 - eps, x0 + eps], clipped
/// to the input domain. Deterministic in (x0, spec, n, seed).
inline PerturbedSamples sample_perturbed_points(std::span<const double> x0, const PerturbationSpec& spec,
                                                std::size_t n, const SeedSpec& seed) {
  spec.validate();
  if (n == 0) throw ConfigError("sample count must be >= 1");
  for (double v : x0) {
    if (v < spec.domain_min || v > spec.domain_max) throw ConfigError("x0 lies outside the input domain");
  }
  PerturbedSamples out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t key = seed.sample_key(i);
    std::vector<double> x(x0.size());
    for (std::size_t j = 0; j < x0.size(); ++j) {
      const double u = unit_interval(splitmix64(key + (j + 1) * kGoldenGamma));
      const double lo = x0[j] - spec.epsilon;
      const double hi = x0[j] + spec.epsilon;
      const double raw = std::clamp(x0[j] + spec.epsilon * (2.0 * u - 1.0), lo, hi);
      x[j] = std::clamp(raw, spec.domain_min, spec.domain_max);
      if (x[j] != raw) ++out.clipped_coordinates;
    }
    out.points.push_back(std::move(x));
  }
  return out;
}

}  // namespace roma
