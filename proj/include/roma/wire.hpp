#pragma once

// HTTP wire protocol for remote classifiers.
//
//   GET  /metadata -> {"input_dim": int, "num_labels": int, "normalized": bool}
//   POST /predict  {"inputs": [[...], ...]} -> {"outputs": [[...], ...]}
//
// HttpModel is the client side. mount_model_routes serves any Model with the
// same schema; the toolkit uses it for conformance tests.

#include <chrono>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "roma/error.hpp"
#include "roma/model.hpp"

namespace roma::wire {

using nlohmann::json;

struct Address {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string base_path;         // prefix before /metadata, usually empty
};

inline Address parse_address(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("model URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

inline ModelMetadata parse_metadata(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /metadata JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("input_dim") || !doc.contains("num_labels") ||
      !doc.contains("normalized") || !doc["input_dim"].is_number_integer() ||
      !doc["num_labels"].is_number_integer() || !doc["normalized"].is_boolean()) {
    throw TransportError("/metadata reply does not match the expected schema");
  }
  const auto dim = doc["input_dim"].get<long long>();
  const auto labels = doc["num_labels"].get<long long>();
  if (dim <= 0 || labels <= 0) throw TransportError("/metadata reports non-positive sizes");
  return {static_cast<std::size_t>(dim), static_cast<std::size_t>(labels), doc["normalized"].get<bool>()};
}

inline std::vector<std::vector<double>> parse_outputs(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /predict JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("outputs") || !doc["outputs"].is_array()) {
    throw TransportError("/predict reply lacks an \"outputs\" array");
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(doc["outputs"].size());
  for (const auto& row : doc["outputs"]) {
    if (!row.is_array()) throw TransportError("/predict output row is not an array");
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& v : row) {
      if (!v.is_number()) throw TransportError("/predict output contains a non-number");
      values.push_back(v.get<double>());
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

/// Client for a remote model. Every call opens its own connection, so
/// concurrent use from several workers is safe.
class HttpModel final : public Model {
 public:
  explicit HttpModel(std::string url, std::chrono::seconds timeout = std::chrono::seconds(60))
      : url_(std::move(url)), address_(parse_address(url_)), timeout_(timeout) {
    metadata_ = fetch_metadata();
  }

  ModelMetadata metadata() const override { return metadata_; }

  std::vector<std::vector<double>> predict_raw(std::span<const std::vector<double>> inputs) const override {
    json body;
    body["inputs"] = json::array();
    for (const auto& x : inputs) body["inputs"].push_back(x);
    auto client = make_client();
    auto res = client->Post(address_.base_path + "/predict", body.dump(), "application/json");
    if (!res) throw TransportError("POST " + url_ + "/predict failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw TransportError("POST " + url_ + "/predict returned HTTP " + std::to_string(res->status));
    }
    return parse_outputs(res->body);
  }

  std::string describe() const override { return url_; }

 private:
  std::unique_ptr<httplib::Client> make_client() const {
    auto client = std::make_unique<httplib::Client>(address_.scheme_host_port);
    client->set_connection_timeout(std::chrono::seconds(5));
    client->set_read_timeout(timeout_);
    client->set_write_timeout(timeout_);
    return client;
  }

  ModelMetadata fetch_metadata() const {
    auto client = make_client();
    auto res = client->Get(address_.base_path + "/metadata");
    if (!res) throw TransportError("GET " + url_ + "/metadata failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      throw TransportError("GET " + url_ + "/metadata returned HTTP " + std::to_string(res->status));
    }
    return parse_metadata(res->body);
  }

  std::string url_;
  Address address_;
  std::chrono::seconds timeout_;
  ModelMetadata metadata_;
};

/// Serves `model` under the wire protocol. Malformed requests get HTTP 400
/// with {"error": ...}; inference failures get 500.
inline void mount_model_routes(httplib::Server& server, std::shared_ptr<const Model> model) {
  server.Get("/metadata", [model](const httplib::Request&, httplib::Response& res) {
    const auto meta = model->metadata();
    json doc{{"input_dim", meta.input_dim}, {"num_labels", meta.num_labels}, {"normalized", meta.normalized}};
    res.set_content(doc.dump(), "application/json");
  });
  server.Post("/predict", [model](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::vector<double>> inputs;
    try {
      const auto doc = json::parse(req.body);
      inputs = doc.at("inputs").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    const auto dim = model->metadata().input_dim;
    for (const auto& x : inputs) {
      if (x.size() != dim) {
        res.status = 400;
        res.set_content(json{{"error", "input dimension mismatch"}}.dump(), "application/json");
        return;
      }
    }
    try {
      json doc{{"outputs", model->predict_raw(inputs)}};
      res.set_content(doc.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

}  // namespace roma::wire
