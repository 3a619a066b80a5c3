#pragma once

// Black-box classifier access: confidence vectors, label extraction and the
// endpoint abstraction the engine predicts through.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roma/error.hpp"

namespace roma {

inline constexpr double kConfidenceSumTolerance = 1e-4;

/// Per-label scores for one input. Always softmax-normalized once constructed
/// through from_probabilities / from_logits.
class ConfidenceVector {
 public:
  ConfidenceVector() = default;

  static ConfidenceVector from_probabilities(std::vector<double> scores) {
    if (scores.size() < 2) throw ModelOutputError("confidence vector needs at least 2 labels");
    double sum = 0.0;
    for (double s : scores) {
      if (!std::isfinite(s)) throw ModelOutputError("non-finite model output");
      if (s < 0.0 || s > 1.0) throw ModelOutputError("confidence outside [0, 1]");
      sum += s;
    }
    if (std::abs(sum - 1.0) > kConfidenceSumTolerance) {
      throw ModelOutputError("confidence vector does not sum to 1 (sum = " + std::to_string(sum) + ")");
    }
    return ConfidenceVector(std::move(scores));
  }

  static ConfidenceVector from_logits(std::span<const double> logits) {
    if (logits.size() < 2) throw ModelOutputError("confidence vector needs at least 2 labels");
    for (double l : logits) {
      if (!std::isfinite(l)) throw ModelOutputError("non-finite model output");
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      out[i] = std::exp(logits[i] - top);
      sum += out[i];
    }
    for (double& v : out) v /= sum;
    return ConfidenceVector(std::move(out));
  }

  std::span<const double> scores() const { return scores_; }
  std::size_t size() const { return scores_.size(); }
  double operator[](std::size_t i) const { return scores_[i]; }

  /// c(x): the highest confidence.
  double max_confidence() const { return *std::max_element(scores_.begin(), scores_.end()); }

  friend bool operator==(const ConfidenceVector&, const ConfidenceVector&) = default;

 private:
  explicit ConfidenceVector(std::vector<double> scores) : scores_(std::move(scores)) {}
  std::vector<double> scores_;
};

/// Index of the largest score; ties go to the lowest index.
inline std::size_t argmax_label(const ConfidenceVector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

/// Highest incorrect confidence: the largest score whose label is not base_label.
inline double hic_score(const ConfidenceVector& v, std::size_t base_label) {
  if (base_label >= v.size()) throw InputError("hic_score: base label out of range");
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != base_label) best = std::max(best, v[i]);
  }
  return best;
}

struct InputPoint {
  std::string id;
  std::vector<double> values;
  std::optional<std::string> category;
};

struct ModelMetadata {
  std::size_t input_dim = 0;
  std::size_t num_labels = 0;
  bool normalized = true;  // false: outputs are logits, softmax applied on ingestion
};

/// A classifier reachable as a black box. Implementations return raw rows;
/// ModelEndpoint validates and normalizes them.
class Model {
 public:
  virtual ~Model() = default;
  virtual ModelMetadata metadata() const = 0;
  virtual std::vector<std::vector<double>> predict_raw(std::span<const std::vector<double>> inputs) const = 0;
  virtual std::string describe() const = 0;
};

/// A model plus validated metadata and a cap on concurrent batch requests.
class ModelEndpoint {
 public:
  enum class Kind { kBuiltinSynthetic, kWireProtocol };

  ModelEndpoint(std::shared_ptr<const Model> model, Kind kind, std::string address,
                std::ptrdiff_t max_concurrent_requests = 8)
      : model_(std::move(model)),
        kind_(kind),
        address_(std::move(address)),
        limiter_(std::make_shared<std::counting_semaphore<>>(std::max<std::ptrdiff_t>(1, max_concurrent_requests))) {
    metadata_ = model_->metadata();
    if (metadata_.num_labels < 2) throw ConfigError("model reports fewer than 2 labels");
    if (metadata_.input_dim == 0) throw ConfigError("model reports input dimension 0");
  }

  const ModelMetadata& metadata() const { return metadata_; }
  Kind kind() const { return kind_; }
  const std::string& address() const { return address_; }
  const Model& model() const { return *model_; }

  std::vector<std::vector<double>> call(std::span<const std::vector<double>> inputs) const {
    limiter_->acquire();
    struct Release {
      std::counting_semaphore<>* s;
      ~Release() { s->release(); }
    } release{limiter_.get()};
    return model_->predict_raw(inputs);
  }

 private:
  std::shared_ptr<const Model> model_;
  Kind kind_;
  std::string address_;
  ModelMetadata metadata_;
  std::shared_ptr<std::counting_semaphore<>> limiter_;
};

/// One confidence vector per input, order preserved. Raw-logit endpoints are
/// softmax-normalized here.
inline std::vector<ConfidenceVector> predict_batch(const ModelEndpoint& endpoint,
                                                   std::span<const std::vector<double>> inputs) {
  if (inputs.empty()) throw ConfigError("predict_batch: empty batch");
  const auto& meta = endpoint.metadata();
  for (const auto& x : inputs) {
    if (x.size() != meta.input_dim) {
      throw ConfigError("predict_batch: input dimension " + std::to_string(x.size()) +
                        " does not match model dimension " + std::to_string(meta.input_dim));
    }
  }
  auto raw = endpoint.call(inputs);
  if (raw.size() != inputs.size()) {
    throw ModelOutputError("model returned " + std::to_string(raw.size()) + " outputs for " +
                           std::to_string(inputs.size()) + " inputs");
  }
  std::vector<ConfidenceVector> out;
  out.reserve(raw.size());
  for (auto& row : raw) {
    if (row.size() != meta.num_labels) throw ModelOutputError("model output has wrong label count");
    out.push_back(meta.normalized ? ConfidenceVector::from_probabilities(std::move(row))
                                  : ConfidenceVector::from_logits(row));
  }
  return out;
}

inline std::vector<ConfidenceVector> predict_batch(const ModelEndpoint& endpoint,
                                                   std::span<const InputPoint> points) {
  std::vector<std::vector<double>> inputs;
  inputs.reserve(points.size());
  for (const auto& p : points) inputs.push_back(p.values);
  return predict_batch(endpoint, std::span<const std::vector<double>>(inputs));
}

}  // namespace roma
