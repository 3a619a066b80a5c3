#pragma once

// Synthetic classifiers shipped with the toolkit. They are pure functions of
// their input, so they are thread-safe and their plr is known analytically.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "roma/error.hpp"
#include "roma/model.hpp"
#include "roma/sampler.hpp"

namespace roma::builtin {

/// Returns the same row for every input. With logits the endpoint applies softmax.
class ConstantModel final : public Model {
 public:
  ConstantModel(std::vector<double> row, bool normalized, std::size_t input_dim)
      : row_(std::move(row)), normalized_(normalized), input_dim_(input_dim) {
    if (row_.size() < 2) throw ConfigError("constant model needs at least 2 labels");
  }

  ModelMetadata metadata() const override { return {input_dim_, row_.size(), normalized_}; }

  std::vector<std::vector<double>> predict_raw(std::span<const std::vector<double>> inputs) const override {
    return std::vector<std::vector<double>>(inputs.size(), row_);
  }

  std::string describe() const override { return normalized_ ? "constant(probs)" : "constant(logits)"; }

 private:
  std::vector<double> row_;
  bool normalized_;
  std::size_t input_dim_;
};

/// logits = W x + b with weights drawn deterministically from a seed.
class LinearModel final : public Model {
 public:
  LinearModel(std::size_t input_dim, std::size_t num_labels, std::uint64_t seed, double scale = 4.0)
      : input_dim_(input_dim), num_labels_(num_labels) {
    if (num_labels_ < 2) throw ConfigError("linear model needs at least 2 labels");
    weights_.resize(input_dim_ * num_labels_);
    bias_.resize(num_labels_);
    std::uint64_t state = splitmix64(seed);
    for (double& w : weights_) {
      state = splitmix64(state);
      w = scale * (2.0 * unit_interval(state) - 1.0);
    }
    for (double& b : bias_) {
      state = splitmix64(state);
      b = 2.0 * unit_interval(state) - 1.0;
    }
  }

  ModelMetadata metadata() const override { return {input_dim_, num_labels_, false}; }

  std::vector<std::vector<double>> predict_raw(std::span<const std::vector<double>> inputs) const override {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs) {
      std::vector<double> logits(bias_);
      for (std::size_t k = 0; k < num_labels_; ++k) {
        for (std::size_t j = 0; j < input_dim_; ++j) logits[k] += weights_[k * input_dim_ + j] * x[j];
      }
      out.push_back(std::move(logits));
    }
    return out;
  }

  std::string describe() const override { return "linear"; }

 private:
  std::size_t input_dim_;
  std::size_t num_labels_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

enum class HicShape { kNormal, kLogNormal };

struct HicGeneratorConfig {
  HicShape shape = HicShape::kNormal;
  // Normal: hic ~ N(location, scale). LogNormal: ln(hic) ~ N(location, scale).
  double location = 0.5;
  double scale = 0.05;
  // location += slope * (L-infinity distance from the anchor)
  double epsilon_slope = 0.0;
  // location += anchor_gain * (first anchor coordinate)
  double anchor_gain = 0.0;
  double grid_step = 0.25;
  std::size_t input_dim = 64;
  std::size_t num_labels = 3;
  std::uint64_t seed = 0;
};

/// A model whose hic distribution around any grid-aligned point is known in
/// closed form.
///
/// Every input is snapped to its nearest anchor on a grid of `grid_step`.
/// At the anchor itself the model answers label 0 with confidence 0.9. Any
/// other input is hashed to a uniform u; hic = F^-1(u) for the configured
/// distribution and label 1 carries exactly that confidence. Perturbation
/// radii must stay below grid_step / 2.
class HicGeneratorModel final : public Model {
 public:
  explicit HicGeneratorModel(HicGeneratorConfig config) : config_(config) {
    if (config_.num_labels < 2) throw ConfigError("hic generator needs at least 2 labels");
    if (config_.input_dim == 0) throw ConfigError("hic generator needs input_dim >= 1");
    if (!(config_.scale > 0.0)) throw ConfigError("hic generator scale must be > 0");
    if (!(config_.grid_step > 0.0)) throw ConfigError("hic generator grid step must be > 0");
  }

  ModelMetadata metadata() const override { return {config_.input_dim, config_.num_labels, true}; }

  std::vector<std::vector<double>> predict_raw(std::span<const std::vector<double>> inputs) const override {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs) out.push_back(predict_one(x));
    return out;
  }

  std::string describe() const override {
    return config_.shape == HicShape::kNormal ? "hic-normal" : "hic-lognormal";
  }

  const HicGeneratorConfig& config() const { return config_; }

  /// Location of the hic distribution for a perturbation of L-infinity size
  /// `deviation` around `anchor0` (the first anchor coordinate).
  double location_at(double deviation, double anchor0) const {
    return config_.location + config_.epsilon_slope * deviation + config_.anchor_gain * anchor0;
  }

 private:
  std::vector<double> predict_one(const std::vector<double>& x) const {
    const std::size_t m = config_.num_labels;
    double deviation = 0.0;
    double anchor0 = 0.0;
    std::uint64_t h = splitmix64(config_.seed);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double anchor = std::round(x[j] / config_.grid_step) * config_.grid_step;
      if (j == 0) anchor0 = anchor;
      deviation = std::max(deviation, std::abs(x[j] - anchor));
      h = splitmix64(h ^ std::bit_cast<std::uint64_t>(x[j]));
    }
    std::vector<double> row(m);
    if (deviation == 0.0) {
      row[0] = 0.9;
      for (std::size_t i = 1; i < m; ++i) row[i] = 0.1 / static_cast<double>(m - 1);
      return row;
    }
    const double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    const double z = boost::math::quantile(boost::math::normal(), u);
    const double loc = location_at(deviation, anchor0);
    double g = config_.shape == HicShape::kNormal ? loc + config_.scale * z
                                                  : std::exp(loc + config_.scale * z);
    g = std::clamp(g, 1e-9, 1.0 - 1e-9);
    if (m == 2) {
      row[0] = 1.0 - g;
      row[1] = g;
      return row;
    }
    // Spill mass stays below both g and 1 - g, so label 1 is always the hic label.
    const double spill = g * (1.0 - g) / 4.0;
    row[1] = g;
    for (std::size_t i = 2; i < m; ++i) row[i] = spill / static_cast<double>(m - 2);
    row[0] = 1.0 - g - spill;
    return row;
  }

  HicGeneratorConfig config_;
};

}  // namespace roma::builtin
