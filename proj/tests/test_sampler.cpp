#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "roma/sampler.hpp"

using namespace roma;

TEST_CASE("samples stay inside the epsilon ball and the domain", "[sampler]") {
  const std::vector<double> x0{0.5, 0.5};
  const PerturbationSpec spec{0.04, 0.0, 1.0};
  const auto s = sample_perturbed_points(x0, spec, 1000, SeedSpec{1, 0});
  REQUIRE(s.points.size() == 1000);
  for (const auto& x : s.points) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      CHECK(std::abs(x[j] - x0[j]) <= spec.epsilon);
      CHECK(x[j] >= 0.46 - 1e-12);
      CHECK(x[j] <= 0.54 + 1e-12);
    }
  }
  CHECK(s.clipped_coordinates == 0);
}

TEST_CASE("degenerate ball collapses onto x0", "[sampler]") {
  const std::vector<double> x0{0.1, 0.9, 0.3};
  const auto s = sample_perturbed_points(x0, {1e-12, 0.0, 1.0}, 50, SeedSpec{3, 4});
  for (const auto& x : s.points) {
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(std::abs(x[j] - x0[j]) <= 1e-12);
  }
}

TEST_CASE("corner points are clipped one-sided", "[sampler]") {
  const std::vector<double> x0(5, 0.0);
  const auto s = sample_perturbed_points(x0, {0.1, 0.0, 1.0}, 500, SeedSpec{9, 0});
  for (const auto& x : s.points) {
    for (double v : x) {
      CHECK(v >= 0.0);
      CHECK(v <= 0.1);
    }
  }
  // Roughly half of all coordinates land below 0 before clipping.
  CHECK(s.clipped_fraction() > 0.45);
  CHECK(s.clipped_fraction() < 0.55);
}

TEST_CASE("sampling is a deterministic function of its arguments", "[sampler]") {
  const std::vector<double> x0{0.2, 0.4, 0.6, 0.8};
  const PerturbationSpec spec{0.05, 0.0, 1.0};
  const auto a = sample_perturbed_points(x0, spec, 200, SeedSpec{42, 7});
  const auto b = sample_perturbed_points(x0, spec, 200, SeedSpec{42, 7});
  CHECK(a.points == b.points);
  const auto c = sample_perturbed_points(x0, spec, 200, SeedSpec{42, 8});
  CHECK(a.points != c.points);
  const auto d = sample_perturbed_points(x0, spec, 200, SeedSpec{43, 7});
  CHECK(a.points != d.points);

  // A longer stream extends the shorter one.
  const auto longer = sample_perturbed_points(x0, spec, 400, SeedSpec{42, 7});
  CHECK(std::equal(a.points.begin(), a.points.end(), longer.points.begin()));
}

TEST_CASE("each coordinate is marginally uniform on [-eps, eps]", "[sampler]") {
  const std::vector<double> x0{0.5, 0.5, 0.5};
  const double eps = 0.04;
  const auto s = sample_perturbed_points(x0, {eps, 0.0, 1.0}, 10000, SeedSpec{2023, 1});
  const boost::math::chi_squared chi(19);
  for (std::size_t j = 0; j < x0.size(); ++j) {
    std::array<int, 20> bins{};
    for (const auto& x : s.points) {
      const double u = (x[j] - x0[j] + eps) / (2 * eps);
      bins[std::min<std::size_t>(19, static_cast<std::size_t>(u * 20))]++;
    }
    double stat = 0.0;
    for (int count : bins) stat += (count - 500.0) * (count - 500.0) / 500.0;
    const double p = boost::math::cdf(boost::math::complement(chi, stat));
    CHECK(p > 0.01);
  }
}

TEST_CASE("invalid perturbation specs are rejected", "[sampler]") {
  const std::vector<double> x0{0.5};
  CHECK_THROWS_AS(sample_perturbed_points(x0, {0.0, 0.0, 1.0}, 10, {}), ConfigError);
  CHECK_THROWS_AS(sample_perturbed_points(x0, {0.1, 1.0, 1.0}, 10, {}), ConfigError);
  CHECK_THROWS_AS(sample_perturbed_points(x0, {0.1, 0.0, 1.0}, 0, {}), ConfigError);
  CHECK_THROWS_AS(sample_perturbed_points(std::vector<double>{1.5}, {0.1, 0.0, 1.0}, 10, {}), ConfigError);
}

TEST_CASE("derived seeds differ per stream", "[sampler]") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(SeedSpec{1, 2}.sample_key(3) != SeedSpec{1, 3}.sample_key(2));
}
