#pragma once

// Dataset ingestion (JSON Lines) and report emission (JSON, CSV, the
// per-category text table).
//
// JSON reports store every float in shortest round-trip form so fitted
// parameters can be re-scored exactly. CSV outputs use 9 significant digits.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roma/engine.hpp"
#include "roma/error.hpp"
#include "roma/model.hpp"
#include "roma/stats.hpp"

namespace roma::report {

using nlohmann::json;

inline std::string format_g9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

// ---------------------------------------------------------------------------
// Dataset files: one {"id": str, "input": [float...], "category": str?} per line.

inline std::vector<InputPoint> read_dataset(std::istream& in, const std::string& source = "dataset") {
  std::vector<InputPoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = source + ":" + std::to_string(line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() || !doc.contains("input") ||
        !doc["input"].is_array()) {
      throw InputError(where + ": expected {\"id\": string, \"input\": [numbers], \"category\"?: string}");
    }
    InputPoint p;
    p.id = doc["id"].get<std::string>();
    for (const auto& v : doc["input"]) {
      if (!v.is_number()) throw InputError(where + ": input contains a non-number");
      p.values.push_back(v.get<double>());
    }
    if (doc.contains("category") && !doc["category"].is_null()) {
      if (!doc["category"].is_string()) throw InputError(where + ": category must be a string");
      p.category = doc["category"].get<std::string>();
    }
    points.push_back(std::move(p));
  }
  if (points.empty()) throw InputError(source + ": no points");
  return points;
}

inline std::vector<InputPoint> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return read_dataset(in, path);
}

inline void write_dataset(std::ostream& out, const std::vector<InputPoint>& points) {
  for (const auto& p : points) {
    json doc{{"id", p.id}, {"input", p.values}};
    if (p.category) doc["category"] = *p.category;
    out << doc.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON report

namespace detail {

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<T>();
}

inline json verdict_json(const std::optional<stats::NormalityVerdict>& v) {
  if (!v) return nullptr;
  return json{{"statistic", v->statistic}, {"p_value", v->p_value}, {"is_normal", v->is_normal}};
}

inline std::optional<stats::NormalityVerdict> verdict_from(const json& doc) {
  if (doc.is_null()) return std::nullopt;
  return stats::NormalityVerdict{doc.at("statistic").get<double>(), doc.at("p_value").get<double>(),
                                 doc.at("is_normal").get<bool>()};
}

inline PlrStatus status_from(const std::string& s) {
  if (s == "ok") return PlrStatus::kOk;
  if (s == "fail-abnormal") return PlrStatus::kFailAbnormal;
  if (s == "degenerate") return PlrStatus::kDegenerate;
  throw InputError("unknown status '" + s + "'");
}

inline NormalityPath path_from(const std::string& s) {
  if (s == "direct-normal") return NormalityPath::kDirectNormal;
  if (s == "boxcox-normal") return NormalityPath::kBoxCoxNormal;
  throw InputError("unknown path '" + s + "'");
}

}  // namespace detail

inline json to_json(const PlrResult& r) {
  const auto& d = r.diagnostics;
  return json{
      {"status", to_string(r.status)},
      {"plr", detail::optional_json(r.plr)},
      {"path", to_string(r.path)},
      {"lambda", detail::optional_json(r.lambda)},
      {"mu", r.mu},
      {"sigma", r.sigma},
      {"z", detail::optional_json(r.z)},
      {"ad_before", detail::verdict_json(r.ad_before)},
      {"ad_after", detail::verdict_json(r.ad_after)},
      {"clean_confidence", r.clean_confidence},
      {"base_label", r.base_label},
      {"diagnostics",
       {{"samples", d.samples},
        {"clipped_fraction", d.clipped_fraction},
        {"hic_min", d.hic_min},
        {"hic_max", d.hic_max},
        {"adversarial_samples", d.adversarial_samples},
        {"retried", d.retried}}},
  };
}

inline PlrResult plr_result_from_json(const json& doc) {
  PlrResult r;
  r.status = detail::status_from(doc.at("status").get<std::string>());
  r.plr = detail::optional_from<double>(doc, "plr");
  r.path = detail::path_from(doc.at("path").get<std::string>());
  r.lambda = detail::optional_from<double>(doc, "lambda");
  r.mu = doc.at("mu").get<double>();
  r.sigma = doc.at("sigma").get<double>();
  r.z = detail::optional_from<double>(doc, "z");
  r.ad_before = detail::verdict_from(doc.at("ad_before"));
  r.ad_after = detail::verdict_from(doc.at("ad_after"));
  r.clean_confidence = doc.at("clean_confidence").get<double>();
  r.base_label = doc.at("base_label").get<std::size_t>();
  const auto& d = doc.at("diagnostics");
  r.diagnostics.samples = d.at("samples").get<std::size_t>();
  r.diagnostics.clipped_fraction = d.at("clipped_fraction").get<double>();
  r.diagnostics.hic_min = d.at("hic_min").get<double>();
  r.diagnostics.hic_max = d.at("hic_max").get<double>();
  r.diagnostics.adversarial_samples = d.at("adversarial_samples").get<std::size_t>();
  r.diagnostics.retried = d.at("retried").get<bool>();
  return r;
}

inline json to_json(const DatasetReport& report) {
  const auto& q = report.query;
  json doc;
  doc["model"] = report.model;
  doc["query"] = {{"delta", q.delta},
                  {"epsilon", q.perturbation.epsilon},
                  {"n", q.n},
                  {"master_seed", q.seed.master_seed},
                  {"domain_min", q.perturbation.domain_min},
                  {"domain_max", q.perturbation.domain_max},
                  {"distribution", "per-coordinate-uniform"},
                  {"norm", "linf"}};
  doc["success_rate"] = report.success_rate;
  doc["mean_plr"] = detail::optional_json(report.mean_plr);
  doc["per_category"] = json::array();
  for (const auto& row : report.per_category) {
    doc["per_category"].push_back({{"category", row.category},
                                   {"mean_plr", row.mean_plr},
                                   {"stddev", row.stddev},
                                   {"adv_probability", row.adv_probability},
                                   {"count", row.count}});
  }
  doc["per_point"] = json::array();
  for (const auto& row : report.per_point) {
    json entry = to_json(row.result);
    entry["id"] = row.id;
    entry["category"] = detail::optional_json(row.category);
    doc["per_point"].push_back(std::move(entry));
  }
  return doc;
}

inline DatasetReport report_from_json(const json& doc) {
  try {
    DatasetReport report;
    report.model = doc.at("model").get<std::string>();
    const auto& q = doc.at("query");
    report.query.delta = q.at("delta").get<double>();
    report.query.perturbation.epsilon = q.at("epsilon").get<double>();
    report.query.n = q.at("n").get<std::size_t>();
    report.query.seed.master_seed = q.at("master_seed").get<std::uint64_t>();
    report.query.perturbation.domain_min = q.at("domain_min").get<double>();
    report.query.perturbation.domain_max = q.at("domain_max").get<double>();
    report.success_rate = doc.at("success_rate").get<double>();
    report.mean_plr = detail::optional_from<double>(doc, "mean_plr");
    for (const auto& row : doc.at("per_category")) {
      report.per_category.push_back({row.at("category").get<std::string>(), row.at("mean_plr").get<double>(),
                                     row.at("stddev").get<double>(), row.at("adv_probability").get<double>(),
                                     row.at("count").get<std::size_t>()});
    }
    for (const auto& row : doc.at("per_point")) {
      report.per_point.push_back(
          {row.at("id").get<std::string>(), detail::optional_from<std::string>(row, "category"), plr_result_from_json(row)});
    }
    return report;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

inline std::string dump_report(const DatasetReport& report) { return to_json(report).dump(2) + "\n"; }

inline DatasetReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report '" + path + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw InputError("malformed report '" + path + "': " + e.what());
  }
}

/// Re-scores a stored row from (mu, sigma, lambda, path) and delta alone.
inline std::optional<double> recompute_plr(const PlrResult& r, double delta) {
  if (r.status != PlrStatus::kOk) return std::nullopt;
  double threshold = delta;
  if (r.path == NormalityPath::kBoxCoxNormal) threshold = stats::boxcox(delta, r.lambda.value());
  return stats::normal_cdf((threshold - r.mu) / r.sigma);
}

// ---------------------------------------------------------------------------
// Text and CSV outputs

/// One line per category: "Airplane, 99.143%, 5.18%, 0.857%" (plr, std-dev, Adv).
inline std::string format_category_table(const std::vector<CategoryRow>& rows) {
  std::string out = "category, plr, std-dev, adv\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, ", %.3f%%, %.2f%%, %.3f%%\n", 100.0 * row.mean_plr, 100.0 * row.stddev,
                  100.0 * row.adv_probability);
    out += row.category + buf;
  }
  return out;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "epsilon,mean_plr,success_rate\n";
  for (const auto& row : rows) {
    out += format_g9(row.epsilon) + "," + (row.mean_plr ? format_g9(*row.mean_plr) : std::string()) + "," +
           format_g9(row.success_rate) + "\n";
  }
  return out;
}

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the last bin is closed on the right.
inline std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins = 50) {
  if (values.empty() || bins == 0) return {};
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].low = lo + width * static_cast<double>(i);
    out[i].high = i + 1 == bins ? hi : lo + width * static_cast<double>(i + 1);
  }
  for (double v : values) {
    std::size_t idx = width > 0.0 ? static_cast<std::size_t>((v - lo) / width) : 0;
    out[std::min(idx, bins - 1)].count += 1;
  }
  return out;
}

inline std::string histogram_csv(const PlrTrace& trace, std::size_t bins = 50) {
  std::string out = "bin_low,bin_high,count,stage\n";
  const auto emit = [&](std::span<const double> values, const char* stage) {
    for (const auto& b : histogram(values, bins)) {
      out += format_g9(b.low) + "," + format_g9(b.high) + "," + std::to_string(b.count) + "," + stage + "\n";
    }
  };
  emit(trace.hic, "raw");
  if (!trace.transformed.empty()) emit(trace.transformed, "boxcox");
  return out;
}

}  // namespace roma::report
