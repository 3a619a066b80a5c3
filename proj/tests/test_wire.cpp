#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "roma/endpoint.hpp"
#include "roma/engine.hpp"
#include "roma/wire.hpp"
#include "support/http_fixture.hpp"

using Catch::Approx;
using namespace roma;
using nlohmann::json;

TEST_CASE("wire client talks to a served builtin model", "[wire]") {
  testing::ServedModel served(make_builtin_model("linear:dim=6:labels=4:seed=3"));
  const auto remote = make_endpoint(served.url());
  const auto local = make_endpoint("linear:dim=6:labels=4:seed=3");
  CHECK(remote.kind() == ModelEndpoint::Kind::kWireProtocol);
  CHECK(remote.metadata().input_dim == 6);
  CHECK(remote.metadata().num_labels == 4);
  CHECK_FALSE(remote.metadata().normalized);

  std::vector<std::vector<double>> in;
  for (int i = 0; i < 9; ++i) in.push_back(std::vector<double>(6, 0.1 * i));
  const auto a = predict_batch(remote, std::span<const std::vector<double>>(in));
  const auto b = predict_batch(local, std::span<const std::vector<double>>(in));
  REQUIRE(a.size() == in.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(a[i][k] == Approx(b[i][k]).epsilon(1e-12));
      sum += a[i][k];
    }
    CHECK(sum == Approx(1.0).margin(1e-4));
  }
}

TEST_CASE("compute_plr gives identical results over the wire and in-process", "[wire][engine]") {
  const std::string spec = "hic-normal:dim=8";
  testing::ServedModel served(make_builtin_model(spec));
  const auto remote = make_endpoint(served.url(), 4);
  const auto local = make_endpoint(spec);
  PlrQuery q;
  q.n = 300;
  q.perturbation.epsilon = 0.04;
  q.seed = SeedSpec{5, 1};
  const InputPoint x0{"p", std::vector<double>(8, 0.5), std::nullopt};
  EngineOptions opts;
  opts.batch_size = 64;
  CHECK(compute_plr(q, x0, remote, opts) == compute_plr(q, x0, local, opts));
}

TEST_CASE("server side of the protocol rejects malformed requests", "[wire]") {
  testing::ServedModel served(make_builtin_model("linear:dim=2"));
  httplib::Client client("127.0.0.1", served.port());
  auto bad_json = client.Post("/predict", "{not json", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);
  CHECK(json::parse(bad_json->body).contains("error"));
  auto wrong_dim = client.Post("/predict", R"({"inputs": [[1, 2, 3]]})", "application/json");
  REQUIRE(wrong_dim);
  CHECK(wrong_dim->status == 400);
  auto meta = client.Get("/metadata");
  REQUIRE(meta);
  const auto doc = json::parse(meta->body);
  CHECK(doc == json{{"input_dim", 2}, {"num_labels", 3}, {"normalized", false}});
}

TEST_CASE("protocol failures surface as transport errors", "[wire]") {
  SECTION("unreachable endpoint") {
    // Port 1 is privileged and has no listener, so the connect is refused.
    CHECK_THROWS_AS(make_endpoint("http://127.0.0.1:1"), TransportError);
  }
  SECTION("non-200, malformed JSON and wrong schema") {
    httplib::Server server;
    server.Get("/metadata", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"input_dim": 2, "num_labels": 2, "normalized": true})", "application/json");
    });
    server.Post("/predict", [](const httplib::Request& req, httplib::Response& res) {
      const auto doc = json::parse(req.body);
      const double first = doc["inputs"][0][0].get<double>();
      if (first == 0.0) {
        res.status = 500;
      } else if (first == 1.0) {
        res.set_content("{oops", "application/json");
      } else if (first == 2.0) {
        res.set_content(R"({"results": []})", "application/json");
      } else {
        res.set_content(R"({"outputs": [[0.9, 0.9]]})", "application/json");
      }
    });
    testing::ServerThread thread(server);
    const auto ep = make_endpoint("http://127.0.0.1:" + std::to_string(thread.port()));
    const auto call = [&](double v) {
      const std::vector<std::vector<double>> in{{v, 0.0}};
      return predict_batch(ep, std::span<const std::vector<double>>(in));
    };
    CHECK_THROWS_AS(call(0.0), TransportError);
    CHECK_THROWS_AS(call(1.0), TransportError);
    CHECK_THROWS_AS(call(2.0), TransportError);
    CHECK_THROWS_AS(call(3.0), ModelOutputError);
  }
  SECTION("metadata schema violations") {
    CHECK_THROWS_AS(wire::parse_metadata(R"({"input_dim": "3", "num_labels": 2, "normalized": true})"), TransportError);
    CHECK_THROWS_AS(wire::parse_metadata(R"({"input_dim": 3, "num_labels": 2})"), TransportError);
    CHECK_THROWS_AS(wire::parse_metadata("[]"), TransportError);
    CHECK(wire::parse_metadata(R"({"input_dim": 3072, "num_labels": 10, "normalized": true})").input_dim == 3072);
  }
}

TEST_CASE("wire URLs may carry a path prefix", "[wire]") {
  const auto a = wire::parse_address("http://host:81/models/vgg/");
  CHECK(a.scheme_host_port == "http://host:81");
  CHECK(a.base_path == "/models/vgg");
  CHECK(wire::parse_address("http://host:81").base_path.empty());
  CHECK_THROWS_AS(wire::parse_address("host:81"), ConfigError);
}
