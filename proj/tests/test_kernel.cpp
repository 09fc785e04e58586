#include <doctest.h>

#include <vector>

#include "parrep/errors.hpp"
#include "parrep/kernel.hpp"
#include "parrep/models.hpp"

#include "support/test_chains.hpp"

using namespace parrep;

TEST_CASE("transition matrix of a stay-put chain is the identity") {
  const MatrixKernel k("stay", {{1.0, 0.0}, {0.0, 1.0}});
  const TransitionMatrix m = transition_matrix(k);
  CHECK(m.coeff(0, 0) == 1.0);
  CHECK(m.coeff(1, 1) == 1.0);
  CHECK(m.coeff(0, 1) == 0.0);
  CHECK(m.nonZeros() == 2);
}

TEST_CASE("biased walk row at x=30") {
  const BiasedWalk k;
  const FiniteDistribution row = k.row(State{29}); // x = 30
  CHECK(row[28] == doctest::Approx(0.4)); // to 29
  CHECK(row[30] == doctest::Approx(0.6)); // to 31
}

TEST_CASE("entropic walk row at an interior point") {
  const EntropicWalk k;
  const State c = EntropicWalk::state_of(50, 50);
  std::vector<RowEntry> entries;
  k.row_entries(c, entries);
  CHECK(entries.size() == 4);
  for (const RowEntry& e : entries) CHECK(e.prob == 0.25);
}

TEST_CASE("row stochasticity of both models") {
  CHECK_NOTHROW(check_rows_stochastic(BiasedWalk{}));
  CHECK_NOTHROW(check_rows_stochastic(EntropicWalk{}));
}

TEST_CASE("non-finite kernel rejects matrix operations") {
  const BiasedWalk inner;
  const testing::OpaqueKernel k(inner);
  CHECK_THROWS_AS(transition_matrix(k), UnsupportedError);
  CHECK_THROWS_AS(k.n_states(), UnsupportedError);
}

TEST_CASE("sample_step bounds-checks finite kernels") {
  const BiasedWalk k;
  RngStream rng(1, {StreamContext::kTest, 0, 0});
  CHECK_THROWS_AS((k.sample_step(State{-1}, rng)), DomainError);
  CHECK_THROWS_AS((k.sample_step(State{60}, rng)), DomainError);
}

TEST_CASE("replaying a stream replays the successor") {
  const EntropicWalk k;
  const State x = EntropicWalk::state_of(120, 77);
  RngStream a(42, {StreamContext::kTest, 3, 9});
  RngStream b(42, {StreamContext::kTest, 3, 9});
  for (int i = 0; i < 100; ++i)
    CHECK(k.sample_step(x, a).index == k.sample_step(x, b).index);
}

TEST_CASE("empirical step frequencies match the exact row") {
  RngStream rng(5, {StreamContext::kTest, 0, 1});
  const int n = 100'000;

  const auto check_state_draws = [&](const ChainKernel& k, State x) {
    const FiniteDistribution row = k.row(x);
    std::vector<State> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(k.sample_step(x, rng));
    const FiniteDistribution emp =
        empirical_distribution(draws, static_cast<std::size_t>(k.n_states()));
    CHECK(tv_distance(emp, row) < 0.02);
  };

  check_state_draws(BiasedWalk{}, State{29});
  check_state_draws(BiasedWalk{}, State{0});  // boundary clamp at x = 1
  check_state_draws(BiasedWalk{}, State{59}); // boundary clamp at x = 60
  check_state_draws(EntropicWalk{}, EntropicWalk::state_of(50, 50));
  check_state_draws(EntropicWalk{}, EntropicWalk::state_of(-1, -1)); // passage
  const MatrixKernel m("m", testing::rank_one_rows());
  for (std::int64_t i = 0; i < 6; ++i) check_state_draws(m, State{i});
}
