#pragma once

// Command implementations behind the `roma` executable. Each returns the
// process exit code: 0 success, 1 configuration/transport/input error,
// 2 when no point could be certified.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roma/endpoint.hpp"
#include "roma/engine.hpp"
#include "roma/error.hpp"
#include "roma/report.hpp"

namespace roma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAllFailed = 2;

struct RunConfig {
  std::string model;
  std::string dataset;
  double delta = 0.6;
  std::vector<double> epsilons;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string out;  // empty or "-" writes to stdout
  std::size_t workers = 1;
  bool retry_on_fail = false;
  double domain_min = 0.0;
  double domain_max = 1.0;
  std::size_t max_concurrent_requests = 8;
  // histogram
  std::string point_id;
  std::size_t bins = 50;
  // compare
  std::string cat_a;
  std::string cat_b;
  std::string report;  // existing report to compare instead of evaluating
};

namespace detail {

inline PlrQuery make_query(const RunConfig& config, double epsilon) {
  PlrQuery query;
  query.delta = config.delta;
  query.n = config.n;
  query.seed = SeedSpec{config.seed, 0};
  query.perturbation.epsilon = epsilon;
  query.perturbation.domain_min = config.domain_min;
  query.perturbation.domain_max = config.domain_max;
  query.validate();
  return query;
}

inline EvalOptions make_options(const RunConfig& config) {
  EvalOptions options;
  options.workers = config.workers;
  options.engine.retry_on_fail = config.retry_on_fail;
  return options;
}

inline double single_epsilon(const RunConfig& config) {
  if (config.epsilons.size() != 1) throw ConfigError("exactly one --epsilon is required for this command");
  return config.epsilons.front();
}

inline void write_output(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.out.empty() || config.out == "-") {
    out << text;
    return;
  }
  std::ofstream file(config.out, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + config.out + "'");
  file << text;
  if (!file) throw ConfigError("failed writing '" + config.out + "'");
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
  }
  return kExitError;
}

inline DatasetReport run_eval(const RunConfig& config) {
  const auto query = make_query(config, single_epsilon(config));
  const auto points = report::load_dataset(config.dataset);
  const auto endpoint = make_endpoint(config.model, static_cast<std::ptrdiff_t>(config.max_concurrent_requests));
  return evaluate_dataset(points, query, endpoint, make_options(config));
}

}  // namespace detail

/// Evaluates every dataset point and writes the JSON report. The category
/// table goes to `err` alongside a one-line summary so stdout stays a clean
/// report when --out is not given.
inline int cmd_eval(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto report = detail::run_eval(config);
    detail::write_output(config, report::dump_report(report), out);
    err << "points: " << report.per_point.size() << ", success rate: " << report::format_g9(report.success_rate)
        << ", mean plr: " << (report.mean_plr ? report::format_g9(*report.mean_plr) : std::string("n/a")) << '\n';
    if (!report.per_category.empty()) err << report::format_category_table(report.per_category);
    return report.success_rate > 0.0 ? kExitOk : kExitAllFailed;
  });
}

inline int cmd_sweep(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    validate_epsilons(config.epsilons);
    const auto query = detail::make_query(config, config.epsilons.front());
    const auto points = report::load_dataset(config.dataset);
    const auto endpoint = make_endpoint(config.model, static_cast<std::ptrdiff_t>(config.max_concurrent_requests));
    const auto rows = epsilon_sweep(points, endpoint, query, config.epsilons, detail::make_options(config));
    detail::write_output(config, report::sweep_csv(rows), out);
    bool any_error = false;
    bool any_success = false;
    for (const auto& row : rows) {
      if (row.error) {
        err << "epsilon " << report::format_g9(row.epsilon) << ": " << *row.error << '\n';
        any_error = true;
      }
      any_success = any_success || row.success_rate > 0.0;
    }
    if (any_error) return kExitError;
    return any_success ? kExitOk : kExitAllFailed;
  });
}

/// hic histogram of one point, before and (when applied) after Box-Cox.
inline int cmd_histogram(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    const auto query = detail::make_query(config, detail::single_epsilon(config));
    const auto points = report::load_dataset(config.dataset);
    std::optional<std::size_t> index;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].id == config.point_id) {
        index = i;
        break;
      }
    }
    if (!index) throw InputError("point id '" + config.point_id + "' not found in dataset");
    const auto endpoint = make_endpoint(config.model, static_cast<std::ptrdiff_t>(config.max_concurrent_requests));
    PlrQuery point_query = query;
    point_query.seed = SeedSpec{config.seed, *index};
    EngineOptions options;
    options.retry_on_fail = config.retry_on_fail;
    PlrTrace trace;
    const auto result = compute_plr(point_query, points[*index], endpoint, options, &trace);
    detail::write_output(config, report::histogram_csv(trace, config.bins), out);
    err << "point " << config.point_id << ": status " << to_string(result.status) << ", path "
        << to_string(result.path);
    if (result.plr) err << ", plr " << report::format_g9(*result.plr);
    err << '\n';
    return kExitOk;
  });
}

inline int cmd_compare(const RunConfig& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::guarded(err, [&] {
    if (config.cat_a.empty() || config.cat_b.empty()) throw ConfigError("--cat-a and --cat-b are required");
    const DatasetReport report = config.report.empty() ? detail::run_eval(config) : report::load_report(config.report);
    const auto cmp = compare_categories(report, config.cat_a, config.cat_b, report.query.delta);
    nlohmann::json doc{{"cat_a", config.cat_a},
                       {"cat_b", config.cat_b},
                       {"delta", report.query.delta},
                       {"t_p_value", cmp.t_p_value},
                       {"binomial_p_value", cmp.binomial_p_value},
                       {"adversarial_a", cmp.adversarial_a},
                       {"samples_a", cmp.samples_a},
                       {"p0", cmp.p0}};
    detail::write_output(config, doc.dump(2) + "\n", out);
    return kExitOk;
  });
}

}  // namespace roma::cli
