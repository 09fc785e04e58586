#include "parrep/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parrep/errors.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

FiniteDistribution FiniteDistribution::from_weights(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("distribution weight is negative or NaN");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kTol.distribution_sum)
    throw DomainError("distribution weights do not sum to 1 within tolerance");
  return FiniteDistribution(std::move(weights));
}

FiniteDistribution FiniteDistribution::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("distribution weight is negative or NaN");
    sum += w;
  }
  if (sum <= 0.0) throw DomainError("cannot normalize zero total mass");
  for (double& w : weights) w /= sum;
  return FiniteDistribution(std::move(weights));
}

FiniteDistribution FiniteDistribution::delta(std::size_t n, std::int64_t index) {
  if (index < 0 || static_cast<std::size_t>(index) >= n)
    throw DomainError("delta index out of range");
  std::vector<double> w(n, 0.0);
  w[static_cast<std::size_t>(index)] = 1.0;
  return FiniteDistribution(std::move(w));
}

FiniteDistribution FiniteDistribution::uniform_over(
    std::size_t n, std::span<const std::int64_t> support) {
  if (support.empty()) throw DomainError("uniform_over: empty support");
  std::vector<double> w(n, 0.0);
  const double mass = 1.0 / static_cast<double>(support.size());
  for (std::int64_t i : support) {
    if (i < 0 || static_cast<std::size_t>(i) >= n)
      throw DomainError("uniform_over: support index out of range");
    w[static_cast<std::size_t>(i)] = mass;
  }
  return FiniteDistribution(std::move(w));
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("tv_distance: size mismatch");
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - b[i]);
  return 0.5 * l1;
}

double tv_distance(const FiniteDistribution& a, const FiniteDistribution& b) {
  return tv_distance(std::span<const double>(a.weights()),
                     std::span<const double>(b.weights()));
}

CdfSampler::CdfSampler(const FiniteDistribution& dist) : cdf_(dist.size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist[i];
    cdf_[i] = acc;
  }
  if (!cdf_.empty()) cdf_.back() = 1.0; // guard against rounding shortfall
}

State CdfSampler::sample(RngStream& rng) const {
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = static_cast<std::int64_t>(it - cdf_.begin());
  return State{std::min<std::int64_t>(i, static_cast<std::int64_t>(cdf_.size()) - 1)};
}

FiniteDistribution empirical_distribution(std::span<const State> samples,
                                          std::size_t n) {
  if (samples.empty()) throw DomainError("empirical_distribution: no samples");
  std::vector<double> w(n, 0.0);
  for (const State& s : samples) {
    if (s.index < 0 || static_cast<std::size_t>(s.index) >= n)
      throw DomainError("empirical_distribution: sample out of range");
    w[static_cast<std::size_t>(s.index)] += 1.0;
  }
  return FiniteDistribution::normalized(std::move(w));
}

} // namespace parrep
