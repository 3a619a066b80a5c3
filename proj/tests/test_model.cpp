#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "roma/builtin_models.hpp"
#include "roma/endpoint.hpp"
#include "roma/model.hpp"

using Catch::Approx;
using namespace roma;

namespace {

ConfidenceVector cv(std::vector<double> v) { return ConfidenceVector::from_probabilities(std::move(v)); }

}  // namespace

TEST_CASE("argmax_label breaks ties toward the lowest index", "[model]") {
  CHECK(argmax_label(cv({0.7, 0.2, 0.1})) == 0);
  CHECK(argmax_label(cv({0.2, 0.2, 0.6})) == 2);
  CHECK(argmax_label(cv({0.5, 0.5, 0.0})) == 0);
}

TEST_CASE("hic_score is the best score outside the base label", "[model]") {
  CHECK(hic_score(cv({0.7, 0.2, 0.1}), 0) == 0.2);
  CHECK(hic_score(cv({0.7, 0.2, 0.1}), 1) == 0.7);
  CHECK(hic_score(cv({0.25, 0.25, 0.25, 0.25}), 3) == 0.25);
  CHECK_THROWS_AS(hic_score(cv({0.5, 0.5}), 2), InputError);

  SECTION("properties over random vectors") {
    std::mt19937_64 rng(5);
    std::gamma_distribution<double> g(0.7, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> raw(2 + trial % 9);
      double sum = 0.0;
      for (double& r : raw) sum += (r = g(rng) + 1e-12);
      for (double& r : raw) r /= sum;
      const auto v = cv(raw);
      for (std::size_t b = 0; b < v.size(); ++b) {
        const double h = hic_score(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i != b) CHECK(h >= v[i]);
        }
        if (argmax_label(v) == b) CHECK(h <= v.max_confidence());
      }
    }
  }
}

TEST_CASE("confidence vector ingestion validates its invariants", "[model]") {
  CHECK_THROWS_AS(cv({1.0}), ModelOutputError);
  CHECK_THROWS_AS(cv({0.6, 0.6}), ModelOutputError);
  CHECK_THROWS_AS(cv({1.2, -0.2}), ModelOutputError);
  CHECK_THROWS_AS(cv({NAN, 1.0}), ModelOutputError);
  CHECK_NOTHROW(cv({0.50004, 0.5}));

  const std::vector<double> logits{2.0, 0.0, 0.0};
  const auto soft = ConfidenceVector::from_logits(logits);
  // numpy: exp(l) / exp(l).sum()
  CHECK(soft[0] == Approx(0.7869860421615985).epsilon(1e-12));
  CHECK(soft[1] == Approx(0.10650697891920075).epsilon(1e-12));
  CHECK(soft[2] == Approx(0.10650697891920075).epsilon(1e-12));

  const std::vector<double> huge{1000.0, 999.0};
  const auto stable = ConfidenceVector::from_logits(huge);
  CHECK(stable[0] + stable[1] == Approx(1.0));
}

TEST_CASE("predict_batch over builtin models", "[model][builtin]") {
  SECTION("constant logits are softmaxed") {
    const auto ep = make_endpoint("constant:logits=2,0,0:dim=3");
    CHECK_FALSE(ep.metadata().normalized);
    const std::vector<std::vector<double>> in{{0.1, 0.2, 0.3}};
    const auto out = predict_batch(ep, std::span<const std::vector<double>>(in));
    REQUIRE(out.size() == 1);
    CHECK(out[0][0] == Approx(0.7870).margin(1e-4));
    CHECK(out[0][1] == Approx(0.1065).margin(1e-4));
    CHECK(out[0][2] == Approx(0.1065).margin(1e-4));
  }
  SECTION("outputs sum to one, batches preserve order, calls are deterministic") {
    const auto ep = make_endpoint("linear:dim=5:labels=3:seed=9");
    std::vector<std::vector<double>> in;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 17; ++i) in.push_back({u(rng), u(rng), u(rng), u(rng), u(rng)});
    const auto batch = predict_batch(ep, std::span<const std::vector<double>>(in));
    REQUIRE(batch.size() == in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
      double sum = 0.0;
      for (double s : batch[i].scores()) sum += s;
      CHECK(sum == Approx(1.0).margin(1e-12));
      const auto single = predict_batch(ep, std::span<const std::vector<double>>(&in[i], 1));
      CHECK(single[0] == batch[i]);
    }
    CHECK(predict_batch(ep, std::span<const std::vector<double>>(in)) == batch);
  }
  SECTION("dimension mismatch and empty batches are configuration errors") {
    const auto ep = make_endpoint("linear:dim=5");
    const std::vector<std::vector<double>> wrong{{0.1, 0.2}};
    CHECK_THROWS_AS(predict_batch(ep, std::span<const std::vector<double>>(wrong)), ConfigError);
    CHECK_THROWS_AS(predict_batch(ep, std::span<const std::vector<double>>()), ConfigError);
  }
  SECTION("non-finite outputs are model-output errors") {
    const auto ep = make_endpoint("constant:logits=inf,0:dim=2");
    const std::vector<std::vector<double>> in{{0.1, 0.2}};
    CHECK_THROWS_AS(predict_batch(ep, std::span<const std::vector<double>>(in)), ModelOutputError);
  }
}

TEST_CASE("hic generator produces the configured hic distribution", "[model][builtin]") {
  builtin::HicGeneratorConfig config;
  config.input_dim = 4;
  const builtin::HicGeneratorModel model(config);
  const ModelEndpoint ep(std::make_shared<builtin::HicGeneratorModel>(config), ModelEndpoint::Kind::kBuiltinSynthetic, "hic");

  const std::vector<std::vector<double>> anchor{{0.25, 0.5, 0.75, 1.0}};
  const auto clean = predict_batch(ep, std::span<const std::vector<double>>(anchor))[0];
  CHECK(argmax_label(clean) == 0);
  CHECK(clean.max_confidence() == Approx(0.9));

  std::vector<std::vector<double>> perturbed;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.04, 0.04);
  for (int i = 0; i < 4000; ++i) perturbed.push_back({0.25 + u(rng), 0.5 + u(rng), 0.75 + u(rng), 1.0 - std::abs(u(rng))});
  const auto out = predict_batch(ep, std::span<const std::vector<double>>(perturbed));
  double sum = 0.0, sum2 = 0.0;
  for (const auto& v : out) {
    const double h = hic_score(v, 0);
    CHECK(h == v[1]);
    sum += h;
    sum2 += h * h;
  }
  const double mean = sum / out.size();
  const double sd = std::sqrt(sum2 / out.size() - mean * mean);
  CHECK(mean == Approx(0.5).margin(0.005));
  CHECK(sd == Approx(0.05).margin(0.003));
}

TEST_CASE("builtin model specs", "[model][builtin]") {
  CHECK(make_endpoint("builtin:hic-normal:mu=0.4:dim=8").metadata().input_dim == 8);
  CHECK(make_endpoint("hic-lognormal:labels=10").metadata().num_labels == 10);
  CHECK(make_endpoint("constant:probs=0.7,0.3:dim=2").metadata().normalized);
  CHECK_THROWS_AS(make_endpoint("nope"), ConfigError);
  CHECK_THROWS_AS(make_endpoint("linear:bogus=1"), ConfigError);
  CHECK_THROWS_AS(make_endpoint("linear:dim=abc"), ConfigError);
  CHECK_THROWS_AS(make_endpoint("constant:dim=3"), ConfigError);
  CHECK_THROWS_AS(make_endpoint(""), ConfigError);
  CHECK_THROWS_AS(make_endpoint("https://example.invalid"), ConfigError);
}
