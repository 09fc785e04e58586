#include "parrep/kernel.hpp"

#include <cmath>

#include "parrep/errors.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

std::int64_t ChainKernel::n_states() const {
  throw UnsupportedError(name() + ": not a finite kernel, n_states unavailable");
}

void ChainKernel::row_entries(State, std::vector<RowEntry>&) const {
  throw UnsupportedError(name() + ": not a finite kernel, exact rows unavailable");
}

FiniteDistribution ChainKernel::row(State x) const {
  check_state(x);
  std::vector<double> w(static_cast<std::size_t>(n_states()), 0.0);
  std::vector<RowEntry> entries;
  row_entries(x, entries);
  for (const RowEntry& e : entries) w[static_cast<std::size_t>(e.state)] += e.prob;
  return FiniteDistribution::from_weights(std::move(w));
}

void ChainKernel::check_state(State x) const {
  if (!is_finite()) return;
  if (x.index < 0 || x.index >= n_states())
    throw DomainError(name() + ": state index " + std::to_string(x.index) +
                      " out of range [0, " + std::to_string(n_states()) + ")");
}

TransitionMatrix transition_matrix(const ChainKernel& kernel) {
  if (!kernel.is_finite())
    throw UnsupportedError(kernel.name() + ": transition matrix requires a finite kernel");
  const std::int64_t n = kernel.n_states();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<RowEntry> entries;
  for (std::int64_t i = 0; i < n; ++i) {
    entries.clear();
    kernel.row_entries(State{i}, entries);
    double sum = 0.0;
    for (const RowEntry& e : entries) {
      if (e.state < 0 || e.state >= n)
        throw DomainError(kernel.name() + ": row entry out of range");
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(e.state), e.prob);
      sum += e.prob;
    }
    if (std::abs(sum - 1.0) > kTol.row_sum)
      throw NumericError(kernel.name() + ": row " + std::to_string(i) +
                         " sums to " + std::to_string(sum));
  }
  TransitionMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void check_rows_stochastic(const ChainKernel& kernel) {
  if (!kernel.is_finite())
    throw UnsupportedError(kernel.name() + ": row check requires a finite kernel");
  const std::int64_t n = kernel.n_states();
  std::vector<RowEntry> entries;
  for (std::int64_t i = 0; i < n; ++i) {
    entries.clear();
    kernel.row_entries(State{i}, entries);
    double sum = 0.0;
    for (const RowEntry& e : entries) {
      if (e.prob < 0.0) throw NumericError(kernel.name() + ": negative probability");
      sum += e.prob;
    }
    if (std::abs(sum - 1.0) > kTol.row_sum)
      throw NumericError(kernel.name() + ": row " + std::to_string(i) +
                         " sums to " + std::to_string(sum));
  }
}

} // namespace parrep
