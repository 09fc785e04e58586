#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "parrep/rng.hpp"
#include "parrep/state.hpp"

namespace parrep {

/// Probability vector over an enumerated finite state space. Entries are
/// nonnegative and sum to one within Tolerances::distribution_sum.
class FiniteDistribution {
public:
  FiniteDistribution() = default;

  /// Validates nonnegativity and normalization; throws DomainError otherwise.
  static FiniteDistribution from_weights(std::vector<double> weights);

  /// Scales nonnegative weights to sum to one (throws on zero/negative mass).
  static FiniteDistribution normalized(std::vector<double> weights);

  static FiniteDistribution delta(std::size_t n, std::int64_t index);

  /// Uniform over the given support indices inside a space of size n.
  static FiniteDistribution uniform_over(std::size_t n,
                                         std::span<const std::int64_t> support);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const { return w_; }

private:
  explicit FiniteDistribution(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

/// Total-variation distance, 0.5 * L1.
double tv_distance(const FiniteDistribution& a, const FiniteDistribution& b);
double tv_distance(std::span<const double> a, std::span<const double> b);

/// Inverse-CDF sampler over a distribution, reusable across draws.
class CdfSampler {
public:
  explicit CdfSampler(const FiniteDistribution& dist);
  State sample(RngStream& rng) const;

private:
  std::vector<double> cdf_;
};

/// Empirical distribution of state indices over a space of size n.
FiniteDistribution empirical_distribution(std::span<const State> samples,
                                          std::size_t n);

} // namespace parrep
