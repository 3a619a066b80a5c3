#pragma once

// Probabilistic local robustness (plr) per input point and its aggregation
// over datasets.
//
// compute_plr draws n perturbations inside the epsilon ball, reads the
// highest incorrect confidence (hic) of each, checks normality with
// Anderson-Darling, falls back to Box-Cox when the raw sample is not normal,
// and returns Phi(z) for the fitted normal model. A sample that stays
// non-normal after Box-Cox is reported as fail-abnormal.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "roma/error.hpp"
#include "roma/model.hpp"
#include "roma/sampler.hpp"
#include "roma/stats.hpp"

namespace roma {

struct PlrQuery {
  double delta = 0.6;
  PerturbationSpec perturbation;
  std::size_t n = 1000;
  SeedSpec seed;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (n < stats::kMinNormalitySamples) throw ConfigError("n must be >= 8");
    perturbation.validate();
  }
};

enum class PlrStatus { kOk, kFailAbnormal, kDegenerate };
enum class NormalityPath { kDirectNormal, kBoxCoxNormal };

inline const char* to_string(PlrStatus s) {
  switch (s) {
    case PlrStatus::kOk: return "ok";
    case PlrStatus::kFailAbnormal: return "fail-abnormal";
    case PlrStatus::kDegenerate: return "degenerate";
  }
  return "?";
}

inline const char* to_string(NormalityPath p) {
  return p == NormalityPath::kDirectNormal ? "direct-normal" : "boxcox-normal";
}

struct PlrDiagnostics {
  std::size_t samples = 0;
  double clipped_fraction = 0.0;
  double hic_min = 0.0;
  double hic_max = 0.0;
  // Perturbed inputs that are distinctly adversarial: label differs from the
  // clean label and the winning confidence is at least delta.
  std::size_t adversarial_samples = 0;
  bool retried = false;

  friend bool operator==(const PlrDiagnostics&, const PlrDiagnostics&) = default;
};

struct PlrResult {
  PlrStatus status = PlrStatus::kOk;
  std::optional<double> plr;  // absent only for fail-abnormal
  NormalityPath path = NormalityPath::kDirectNormal;
  std::optional<double> lambda;
  // Fitted model of the (possibly transformed) hic values. For degenerate
  // samples mu is the constant hic and sigma is 0.
  double mu = 0.0;
  double sigma = 0.0;
  std::optional<double> z;  // absent when not finite
  std::optional<stats::NormalityVerdict> ad_before;
  std::optional<stats::NormalityVerdict> ad_after;
  double clean_confidence = 0.0;
  std::size_t base_label = 0;
  PlrDiagnostics diagnostics;

  bool ok() const { return status == PlrStatus::kOk; }
};

inline bool operator==(const PlrResult& a, const PlrResult& b) {
  return a.status == b.status && a.plr == b.plr && a.path == b.path && a.lambda == b.lambda && a.mu == b.mu &&
         a.sigma == b.sigma && a.z == b.z && a.ad_before == b.ad_before && a.ad_after == b.ad_after &&
         a.clean_confidence == b.clean_confidence && a.base_label == b.base_label &&
         a.diagnostics == b.diagnostics;
}

struct EngineOptions {
  // On fail-abnormal, retry once with 2n samples.
  bool retry_on_fail = false;
  std::size_t batch_size = 1024;
};

/// Raw and transformed hic values of one compute_plr call, for histograms.
struct PlrTrace {
  std::vector<double> hic;
  std::vector<double> transformed;  // empty unless Box-Cox was applied
};

/// Fits the normal model (with Box-Cox fallback) to a hic sample and scores
/// the threshold. Fills everything except the clean-point and sampling fields.
inline PlrResult analyze_hic(std::span<const double> hic, double delta, PlrTrace* trace = nullptr) {
  PlrResult result;
  const auto [lo, hi] = std::minmax_element(hic.begin(), hic.end());
  result.diagnostics.hic_min = *lo;
  result.diagnostics.hic_max = *hi;

  if (*lo == *hi) {
    result.status = PlrStatus::kDegenerate;
    result.mu = *lo;
    result.sigma = 0.0;
    result.plr = *lo < delta ? 1.0 : 0.0;
    return result;
  }

  try {
    result.ad_before = stats::anderson_darling_normal(hic);
    if (result.ad_before->is_normal) {
      const auto model = stats::fit_normal(hic);
      result.mu = model.mu;
      result.sigma = model.sigma;
      result.z = stats::z_score(model, delta);
      result.plr = stats::normal_cdf(*result.z);
      return result;
    }

    result.path = NormalityPath::kBoxCoxNormal;
    const auto params = stats::boxcox_mle_lambda(hic);
    result.lambda = params.lambda;
    auto transformed = stats::boxcox_transform(hic, params.lambda);
    const auto model = stats::fit_normal(transformed);
    result.mu = model.mu;
    result.sigma = model.sigma;
    result.ad_after = stats::anderson_darling_normal(transformed);
    if (trace != nullptr) trace->transformed = std::move(transformed);
    if (!result.ad_after->is_normal) {
      result.status = PlrStatus::kFailAbnormal;
      return result;
    }
    result.z = stats::z_score(model, stats::boxcox(delta, params.lambda));
    result.plr = stats::normal_cdf(*result.z);
    return result;
  } catch (const DegenerateSampleError&) {
    // Distinct raw values collapsed to one after transformation.
    result.status = PlrStatus::kDegenerate;
    result.path = NormalityPath::kDirectNormal;
    result.lambda.reset();
    result.mu = stats::mean(hic);
    result.sigma = 0.0;
    result.z.reset();
    result.plr = result.mu < delta ? 1.0 : 0.0;
    return result;
  }
}

namespace detail {

struct HicSample {
  std::vector<double> hic;
  std::size_t adversarial = 0;
  double clipped_fraction = 0.0;
};

inline HicSample collect_hic(const PlrQuery& query, std::span<const double> x0, std::size_t base_label,
                             std::size_t n, const ModelEndpoint& model, std::size_t batch_size) {
  const auto samples = sample_perturbed_points(x0, query.perturbation, n, query.seed);
  HicSample out;
  out.clipped_fraction = samples.clipped_fraction();
  out.hic.reserve(n);
  const std::size_t step = std::max<std::size_t>(1, batch_size);
  const std::span<const std::vector<double>> all(samples.points);
  for (std::size_t start = 0; start < n; start += step) {
    const auto batch = all.subspan(start, std::min(step, n - start));
    for (const auto& v : predict_batch(model, batch)) {
      const double hic = hic_score(v, base_label);
      if (!(hic > 0.0)) throw ModelOutputError("hic score must be strictly positive for Box-Cox");
      out.hic.push_back(hic);
      if (argmax_label(v) != base_label && v.max_confidence() >= query.delta) ++out.adversarial;
    }
  }
  return out;
}

}  // namespace detail

/// plr of one input point. Transport and model errors propagate as exceptions.
inline PlrResult compute_plr(const PlrQuery& query, const InputPoint& x0, const ModelEndpoint& model,
                             const EngineOptions& options = {}, PlrTrace* trace = nullptr) {
  query.validate();
  if (x0.values.size() != model.metadata().input_dim) {
    throw ConfigError("point '" + x0.id + "' has dimension " + std::to_string(x0.values.size()) +
                      ", model expects " + std::to_string(model.metadata().input_dim));
  }
  const std::vector<std::vector<double>> clean_input{x0.values};
  const auto clean = predict_batch(model, std::span<const std::vector<double>>(clean_input)).front();
  const std::size_t base_label = argmax_label(clean);

  const auto run = [&](std::size_t n) {
    auto sample = detail::collect_hic(query, x0.values, base_label, n, model, options.batch_size);
    PlrTrace local_trace;
    PlrResult result = analyze_hic(sample.hic, query.delta, trace != nullptr ? &local_trace : nullptr);
    result.base_label = base_label;
    result.clean_confidence = clean.max_confidence();
    result.diagnostics.samples = n;
    result.diagnostics.clipped_fraction = sample.clipped_fraction;
    result.diagnostics.adversarial_samples = sample.adversarial;
    if (trace != nullptr) {
      trace->hic = std::move(sample.hic);
      trace->transformed = std::move(local_trace.transformed);
    }
    return result;
  };

  PlrResult result = run(query.n);
  if (result.status == PlrStatus::kFailAbnormal && options.retry_on_fail) {
    result = run(2 * query.n);
    result.diagnostics.retried = true;
  }
  return result;
}

struct PointResult {
  std::string id;
  std::optional<std::string> category;
  PlrResult result;

  friend bool operator==(const PointResult&, const PointResult&) = default;
};

struct CategoryRow {
  std::string category;
  double mean_plr = 0.0;
  double stddev = 0.0;
  double adv_probability = 0.0;  // 1 - mean_plr
  std::size_t count = 0;         // successful points in the category

  friend bool operator==(const CategoryRow&, const CategoryRow&) = default;
};

struct DatasetReport {
  std::string model;
  PlrQuery query;
  std::vector<PointResult> per_point;
  std::optional<double> mean_plr;  // over ok rows; absent when none succeeded
  double success_rate = 0.0;
  std::vector<CategoryRow> per_category;
};

struct EvalOptions {
  std::size_t workers = 1;
  EngineOptions engine;
  // Every point uses query.seed as-is instead of (master_seed, point index).
  bool shared_point_seed = false;
};

/// Mean, stddev and Adv per category over successful rows, in order of first
/// appearance. Categories without a successful row are omitted.
inline std::vector<CategoryRow> category_rows(std::span<const PointResult> rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> scores;
  for (const auto& row : rows) {
    if (!row.category || !row.result.ok()) continue;
    auto [it, inserted] = scores.try_emplace(*row.category);
    if (inserted) order.push_back(*row.category);
    it->second.push_back(*row.result.plr);
  }
  std::vector<CategoryRow> out;
  for (const auto& name : order) {
    const auto& values = scores[name];
    CategoryRow row;
    row.category = name;
    row.count = values.size();
    row.mean_plr = stats::mean(values);
    row.stddev = values.size() > 1 ? std::sqrt(std::max(0.0, stats::variance(values))) : 0.0;
    row.adv_probability = 1.0 - row.mean_plr;
    out.push_back(row);
  }
  return out;
}

/// Recomputes mean_plr, success_rate and per_category from per_point.
inline void summarize(DatasetReport& report) {
  std::vector<double> ok_scores;
  for (const auto& row : report.per_point) {
    if (row.result.ok()) ok_scores.push_back(*row.result.plr);
  }
  report.success_rate = report.per_point.empty()
                            ? 0.0
                            : static_cast<double>(ok_scores.size()) / static_cast<double>(report.per_point.size());
  report.mean_plr = ok_scores.empty() ? std::nullopt : std::optional<double>(stats::mean(ok_scores));
  report.per_category = category_rows(report.per_point);
}

/// plr of every point. Point i samples with seed (master_seed, i), so the
/// report does not depend on the worker count. The first error (by point
/// index) is rethrown after all workers stop.
inline DatasetReport evaluate_dataset(std::span<const InputPoint> points, const PlrQuery& query,
                                      const ModelEndpoint& model, const EvalOptions& options = {}) {
  if (points.empty()) throw ConfigError("evaluate_dataset: empty point list");
  query.validate();

  DatasetReport report;
  report.model = model.address();
  report.query = query;
  report.per_point.resize(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  const auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      if (failed.load()) return;
      try {
        PlrQuery point_query = query;
        if (!options.shared_point_seed) point_query.seed = SeedSpec{query.seed.master_seed, i};
        report.per_point[i] = {points[i].id, points[i].category,
                               compute_plr(point_query, points[i], model, options.engine)};
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, points.size());
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  summarize(report);
  return report;
}

struct SweepRow {
  double epsilon = 0.0;
  std::optional<double> mean_plr;
  double success_rate = 0.0;
  std::optional<std::string> error;
};

inline void validate_epsilons(std::span<const double> epsilons) {
  if (epsilons.empty()) throw ConfigError("epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ConfigError("epsilon values must be > 0");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) throw ConfigError("epsilon values must be strictly increasing");
  }
}

/// One dataset summary per epsilon. Entry k uses master seed
/// derive_seed(master, k). A failing epsilon is recorded with success rate 0
/// instead of aborting the sweep.
inline std::vector<SweepRow> epsilon_sweep(std::span<const InputPoint> points, const ModelEndpoint& model,
                                           const PlrQuery& base_query, std::span<const double> epsilons,
                                           const EvalOptions& options = {}) {
  validate_epsilons(epsilons);
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    PlrQuery query = base_query;
    query.perturbation.epsilon = epsilons[k];
    query.seed = SeedSpec{derive_seed(base_query.seed.master_seed, k), 0};
    SweepRow row;
    row.epsilon = epsilons[k];
    try {
      const auto report = evaluate_dataset(points, query, model, options);
      row.mean_plr = report.mean_plr;
      row.success_rate = report.success_rate;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct NamedEndpoint {
  std::string name;
  const ModelEndpoint* endpoint;
};

struct ModelRow {
  std::string name;
  std::optional<double> mean_plr;
  double success_rate = 0.0;
};

/// Mean plr per model on the same points and seeds (model-variant comparison,
/// e.g. checkpoints after different numbers of training epochs).
inline std::vector<ModelRow> evaluate_models(std::span<const InputPoint> points, const PlrQuery& query,
                                             std::span<const NamedEndpoint> models, const EvalOptions& options = {}) {
  std::vector<ModelRow> rows;
  for (const auto& m : models) {
    const auto report = evaluate_dataset(points, query, *m.endpoint, options);
    rows.push_back({m.name, report.mean_plr, report.success_rate});
  }
  return rows;
}

struct CategoryComparison {
  double t_p_value = 1.0;
  double binomial_p_value = 1.0;
  // Binomial inputs: adversarial samples of A out of A's samples, tested
  // against B's adversarial sample rate.
  std::uint64_t adversarial_a = 0;
  std::uint64_t samples_a = 0;
  double p0 = 0.0;
};

/// Welch t-test over per-point plr of the two categories (successful rows),
/// plus an exact binomial test of A's distinct-adversarial sample count
/// against B's empirical rate. `delta` must equal the report's delta, since
/// the counts were taken at that threshold.
inline CategoryComparison compare_categories(const DatasetReport& report, const std::string& cat_a,
                                             const std::string& cat_b, double delta) {
  if (delta != report.query.delta) {
    throw ConfigError("compare_categories: delta differs from the delta the report was computed with");
  }
  std::vector<double> plr_a, plr_b;
  std::uint64_t adv_a = 0, n_a = 0, adv_b = 0, n_b = 0;
  bool seen_a = false, seen_b = false;
  for (const auto& row : report.per_point) {
    if (!row.category) continue;
    const auto& r = row.result;
    if (*row.category == cat_a) {
      seen_a = true;
      adv_a += r.diagnostics.adversarial_samples;
      n_a += r.diagnostics.samples;
      if (r.ok()) plr_a.push_back(*r.plr);
    }
    if (*row.category == cat_b) {
      seen_b = true;
      adv_b += r.diagnostics.adversarial_samples;
      n_b += r.diagnostics.samples;
      if (r.ok()) plr_b.push_back(*r.plr);
    }
  }
  if (!seen_a) throw InputError("category '" + cat_a + "' not present in report");
  if (!seen_b) throw InputError("category '" + cat_b + "' not present in report");
  if (plr_a.size() < 2 || plr_b.size() < 2) {
    throw InputError("each category needs at least 2 successful points");
  }

  CategoryComparison out;
  out.adversarial_a = adv_a;
  out.samples_a = n_a;
  out.p0 = n_b == 0 ? 0.0 : static_cast<double>(adv_b) / static_cast<double>(n_b);
  try {
    out.t_p_value = stats::welch_t_test(plr_a, plr_b);
  } catch (const DegenerateSampleError&) {
    // Both categories constant: identical means are indistinguishable, different ones are certain.
    out.t_p_value = stats::mean(plr_a) == stats::mean(plr_b) ? 1.0 : 0.0;
  }
  if (out.p0 <= 0.0) {
    out.binomial_p_value = adv_a == 0 ? 1.0 : 0.0;
  } else if (out.p0 >= 1.0) {
    out.binomial_p_value = adv_a == n_a ? 1.0 : 0.0;
  } else {
    out.binomial_p_value = stats::binomial_test(static_cast<std::int64_t>(adv_a), static_cast<std::int64_t>(n_a), out.p0);
  }
  return out;
}

}  // namespace roma
