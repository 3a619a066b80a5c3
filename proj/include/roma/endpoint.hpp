#pragma once

// Turns a model address into a ModelEndpoint.
//
//   http://host:port[/prefix]            remote model over the wire protocol
//   [builtin:]NAME[:key=value[:key=value...]]  synthetic model
//
// Builtin names and their keys (list values are comma separated):
//   constant       logits=2,0,0 | probs=0.7,0.3   dim=4
//   linear         dim=16 labels=3 seed=1
//   hic-normal     mu=0.5 sigma=0.05 slope=0 gain=0 grid=0.25 dim=64 labels=3 seed=0
//   hic-lognormal  m=-1.5 s=0.3 slope=0 gain=0 grid=0.25 dim=64 labels=3 seed=0

#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "roma/builtin_models.hpp"
#include "roma/error.hpp"
#include "roma/model.hpp"
#include "roma/wire.hpp"

namespace roma {

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(const std::string& text, const std::string& key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("builtin model: bad number for '" + key + "': " + text);
  return value;
}

inline std::uint64_t parse_uint(const std::string& text, const std::string& key) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("builtin model: bad integer for '" + key + "': " + text);
  return value;
}

class BuiltinArgs {
 public:
  BuiltinArgs(const std::vector<std::string>& parts, std::set<std::string> allowed) {
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos) throw ConfigError("builtin model: expected key=value, got '" + parts[i] + "'");
      auto key = parts[i].substr(0, eq);
      if (!allowed.contains(key)) throw ConfigError("builtin model '" + parts[0] + "': unknown key '" + key + "'");
      values_[key] = parts[i].substr(eq + 1);
    }
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  double number(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_uint(it->second, key);
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(values_.at(key), ',')) out.push_back(parse_double(item, key));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace detail

inline std::shared_ptr<const Model> make_builtin_model(std::string_view spec) {
  if (spec.starts_with("builtin:")) spec.remove_prefix(8);
  const auto parts = detail::split(spec, ':');
  const std::string& name = parts.front();
  if (name == "constant") {
    const detail::BuiltinArgs args(parts, {"logits", "probs", "dim"});
    const auto dim = args.integer("dim", 4);
    if (args.has("logits") == args.has("probs")) throw ConfigError("constant model needs exactly one of logits= or probs=");
    if (args.has("logits")) return std::make_shared<builtin::ConstantModel>(args.list("logits"), false, dim);
    return std::make_shared<builtin::ConstantModel>(args.list("probs"), true, dim);
  }
  if (name == "linear") {
    const detail::BuiltinArgs args(parts, {"dim", "labels", "seed"});
    return std::make_shared<builtin::LinearModel>(args.integer("dim", 16), args.integer("labels", 3),
                                                  args.integer("seed", 1));
  }
  if (name == "hic-normal" || name == "hic-lognormal") {
    const bool normal = name == "hic-normal";
    const detail::BuiltinArgs args(parts, normal ? std::set<std::string>{"mu", "sigma", "slope", "gain", "grid", "dim", "labels", "seed"}
                                                 : std::set<std::string>{"m", "s", "slope", "gain", "grid", "dim", "labels", "seed"});
    builtin::HicGeneratorConfig config;
    config.shape = normal ? builtin::HicShape::kNormal : builtin::HicShape::kLogNormal;
    config.location = normal ? args.number("mu", 0.5) : args.number("m", -1.5);
    config.scale = normal ? args.number("sigma", 0.05) : args.number("s", 0.3);
    config.epsilon_slope = args.number("slope", 0.0);
    config.anchor_gain = args.number("gain", 0.0);
    config.grid_step = args.number("grid", 0.25);
    config.input_dim = args.integer("dim", 64);
    config.num_labels = args.integer("labels", 3);
    config.seed = args.integer("seed", 0);
    return std::make_shared<builtin::HicGeneratorModel>(config);
  }
  throw ConfigError("unknown builtin model '" + name + "'");
}

/// Builds an endpoint and validates its metadata. Remote endpoints are
/// contacted immediately, so an unreachable URL fails here with TransportError.
inline ModelEndpoint make_endpoint(const std::string& address, std::ptrdiff_t max_concurrent_requests = 8) {
  if (address.empty()) throw ConfigError("no model given");
  if (address.starts_with("https://")) throw ConfigError("https endpoints are not supported; use http://");
  if (address.starts_with("http://")) {
    return ModelEndpoint(std::make_shared<wire::HttpModel>(address), ModelEndpoint::Kind::kWireProtocol, address,
                         max_concurrent_requests);
  }
  return ModelEndpoint(make_builtin_model(address), ModelEndpoint::Kind::kBuiltinSynthetic, address,
                       max_concurrent_requests);
}

}  // namespace roma
