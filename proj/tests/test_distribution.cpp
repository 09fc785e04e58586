#include <doctest.h>

#include <vector>

#include "parrep/distribution.hpp"
#include "parrep/errors.hpp"

using namespace parrep;

TEST_CASE("from_weights validates") {
  CHECK_NOTHROW(FiniteDistribution::from_weights({0.5, 0.5}));
  CHECK_THROWS_AS((FiniteDistribution::from_weights({0.6, 0.6})), DomainError);
  CHECK_THROWS_AS((FiniteDistribution::from_weights({1.5, -0.5})), DomainError);
}

TEST_CASE("normalized scales and rejects zero mass") {
  const auto d = FiniteDistribution::normalized({1.0, 3.0});
  CHECK(d[0] == doctest::Approx(0.25));
  CHECK(d[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS((FiniteDistribution::normalized({0.0, 0.0})), DomainError);
}

TEST_CASE("delta and uniform_over") {
  const auto d = FiniteDistribution::delta(4, 2);
  CHECK(d[2] == 1.0);
  CHECK(d[0] == 0.0);
  const std::vector<std::int64_t> support{1, 3};
  const auto u = FiniteDistribution::uniform_over(4, support);
  CHECK(u[1] == 0.5);
  CHECK(u[3] == 0.5);
  CHECK(u[0] == 0.0);
  CHECK_THROWS_AS((FiniteDistribution::delta(4, 7)), DomainError);
}

TEST_CASE("tv_distance") {
  const auto a = FiniteDistribution::from_weights({1.0, 0.0});
  const auto b = FiniteDistribution::from_weights({0.0, 1.0});
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == 1.0);
}

TEST_CASE("cdf sampler hits only mass points and matches frequencies") {
  const auto d = FiniteDistribution::from_weights({0.0, 0.25, 0.0, 0.75, 0.0});
  const CdfSampler sampler(d);
  RngStream rng(11, {StreamContext::kTest, 0, 0});
  int count3 = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const State s = sampler.sample(rng);
    CHECK((s.index == 1 || s.index == 3));
    if (s.index == 3) ++count3;
  }
  CHECK(static_cast<double>(count3) / n == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("empirical distribution") {
  const std::vector<State> samples{State{0}, State{0}, State{1}, State{3}};
  const auto d = empirical_distribution(samples, 4);
  CHECK(d[0] == 0.5);
  CHECK(d[1] == 0.25);
  CHECK(d[3] == 0.25);
}
