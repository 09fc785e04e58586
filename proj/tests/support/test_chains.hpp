#pragma once

// Shared test doubles and independent oracles used across the test suites.
// Everything here is deliberately implemented without touching the library's
// solver paths so it can serve as a cross-check.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "parrep/distribution.hpp"
#include "parrep/kernel.hpp"
#include "parrep/metastable.hpp"
#include "parrep/models.hpp"
#include "parrep/rng.hpp"

namespace parrep::testing {

// Six-state chain with two metastable sets {0,1} and {2,3} whose within-set
// blocks have rank one: P(x, . | staying in the set) is the same profile for
// every member, so one surviving step lands exactly on the QSD. With
// T_corr >= 2 the counter-replacement dynamics of the lifted chain therefore
// preserves the state marginal exactly, which is what the law-propagation
// identity needs. All entries are binary fractions.
inline std::vector<std::vector<double>> rank_one_rows() {
  return {
      {0.375, 0.125, 0.25, 0.125, 0.0625, 0.0625},
      {0.1875, 0.0625, 0.25, 0.25, 0.125, 0.125},
      {0.125, 0.0625, 0.375, 0.375, 0.03125, 0.03125},
      {0.25, 0.125, 0.25, 0.25, 0.0625, 0.0625},
      {0.25, 0.25, 0.125, 0.125, 0.125, 0.125},
      {0.0625, 0.0625, 0.25, 0.25, 0.1875, 0.1875},
  };
}

inline MatrixKernel rank_one_kernel() {
  return MatrixKernel("rank-one", rank_one_rows());
}

inline MetastableCollection rank_one_collection(std::int64_t t_corr = 3,
                                                std::int64_t t_phase = 3) {
  return MetastableCollection(
      6, {SetSpec{"A", {0, 1}}, SetSpec{"B", {2, 3}}},
      {{t_corr, t_phase}, {t_corr, t_phase}});
}

// Deterministic drift kernel on {0, ..., n-1}: x -> min(x + 1, n - 1).
// Consumes no randomness; handy for exercising exact window arithmetic.
class DriftKernel final : public ChainKernel {
public:
  explicit DriftKernel(std::int64_t n) : n_(n) {}
  State sample_step(State x, RngStream&) const override {
    check_state(x);
    return State{std::min(x.index + 1, n_ - 1)};
  }
  bool is_finite() const noexcept override { return true; }
  std::int64_t n_states() const override { return n_; }
  void row_entries(State x, std::vector<RowEntry>& out) const override {
    check_state(x);
    out.push_back({std::min(x.index + 1, n_ - 1), 1.0});
  }
  std::string name() const override { return "drift"; }

private:
  std::int64_t n_;
};

// Sampling-only wrapper hiding the finite structure of a kernel.
class OpaqueKernel final : public ChainKernel {
public:
  explicit OpaqueKernel(const ChainKernel& inner) : inner_(inner) {}
  State sample_step(State x, RngStream& rng) const override {
    return inner_.sample_step(x, rng);
  }
  std::string name() const override { return "opaque"; }

private:
  const ChainKernel& inner_;
};

// Dense matrix-power oracle: law of X_n given X_0 ~ xi, by n plain
// multiplications against the dense transition matrix.
inline std::vector<double> law_after(const ChainKernel& kernel,
                                     std::span<const double> xi,
                                     std::int64_t n_steps) {
  const auto n = static_cast<std::size_t>(kernel.n_states());
  std::vector<double> law(xi.begin(), xi.end());
  std::vector<double> next(n);
  std::vector<RowEntry> entries;
  for (std::int64_t step = 0; step < n_steps; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (law[i] == 0.0) continue;
      entries.clear();
      kernel.row_entries(State{static_cast<std::int64_t>(i)}, entries);
      for (const RowEntry& e : entries)
        next[static_cast<std::size_t>(e.state)] += law[i] * e.prob;
    }
    law.swap(next);
  }
  return law;
}

// Independent QSD oracle: repeated squaring of the dense S x S block. After
// enough squarings every row of B^(2^k), normalized, equals the left
// principal eigenvector. Entirely separate from the power-iteration path.
inline FiniteDistribution qsd_by_squaring(const ChainKernel& kernel,
                                          const MetastableCollection& coll,
                                          SetId s, int squarings = 60) {
  const auto members = coll.members(s);
  const std::size_t m = members.size();
  std::vector<std::int64_t> local(static_cast<std::size_t>(coll.n_states()), -1);
  for (std::size_t j = 0; j < m; ++j)
    local[static_cast<std::size_t>(members[j])] = static_cast<std::int64_t>(j);

  std::vector<double> block(m * m, 0.0);
  std::vector<RowEntry> entries;
  for (std::size_t i = 0; i < m; ++i) {
    entries.clear();
    kernel.row_entries(State{members[i]}, entries);
    for (const RowEntry& e : entries) {
      const std::int64_t j = local[static_cast<std::size_t>(e.state)];
      if (j >= 0) block[i * m + static_cast<std::size_t>(j)] = e.prob;
    }
  }

  std::vector<double> cur = block, next(m * m);
  for (int k = 0; k < squarings; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < m; ++l) {
        const double v = cur[i * m + l];
        if (v == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) next[i * m + j] += v * cur[l * m + j];
      }
    double top = 0.0;
    for (double v : next) top = std::max(top, v);
    if (top <= 0.0) break; // block already numerically extinct
    for (double& v : next) v /= top;
    cur.swap(next);
  }

  // average the normalized rows (they agree to rounding) in global indexing
  std::vector<double> w(static_cast<std::size_t>(coll.n_states()), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += cur[i * m + j];
    if (sum <= 0.0) continue;
    for (std::size_t j = 0; j < m; ++j)
      w[static_cast<std::size_t>(members[j])] += cur[i * m + j] / sum;
  }
  return FiniteDistribution::normalized(std::move(w));
}

// Batch-means standard error of an ergodic average over a correlated series.
inline double batch_means_stderr(std::span<const double> series, int n_batches) {
  const std::size_t b = series.size() / static_cast<std::size_t>(n_batches);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n_batches));
  for (int k = 0; k < n_batches; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i)
      sum += series[static_cast<std::size_t>(k) * b + i];
    means.push_back(sum / static_cast<double>(b));
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(means.size());
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(means.size() - 1);
  return std::sqrt(var / static_cast<double>(means.size()));
}

} // namespace parrep::testing
