#include "parrep/oracles.hpp"

#include <cmath>

#include <Eigen/SparseCore>

#include "parrep/errors.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

bool is_birth_death(const ChainKernel& kernel) {
  if (!kernel.is_finite()) return false;
  const std::int64_t n = kernel.n_states();
  std::vector<RowEntry> entries;
  for (std::int64_t i = 0; i < n; ++i) {
    entries.clear();
    kernel.row_entries(State{i}, entries);
    for (const RowEntry& e : entries)
      if (std::abs(e.state - i) > 1) return false;
  }
  return true;
}

namespace {

double entry(const ChainKernel& kernel, std::int64_t i, std::int64_t j) {
  std::vector<RowEntry> entries;
  kernel.row_entries(State{i}, entries);
  double p = 0.0;
  for (const RowEntry& e : entries)
    if (e.state == j) p += e.prob;
  return p;
}

FiniteDistribution birth_death_equilibrium(const ChainKernel& kernel) {
  const std::int64_t n = kernel.n_states();
  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  pi[0] = 1.0;
  for (std::int64_t x = 0; x + 1 < n; ++x) {
    const double up = entry(kernel, x, x + 1);
    const double down = entry(kernel, x + 1, x);
    if (up <= 0.0 || down <= 0.0)
      throw NumericError("equilibrium: birth-death chain is not irreducible");
    pi[static_cast<std::size_t>(x + 1)] = pi[static_cast<std::size_t>(x)] * up / down;
  }
  return FiniteDistribution::normalized(std::move(pi));
}

FiniteDistribution power_iteration_equilibrium(const ChainKernel& kernel) {
  const std::int64_t n = kernel.n_states();
  // transpose so that one step of the law is a plain matvec
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<RowEntry> entries;
  for (std::int64_t i = 0; i < n; ++i) {
    entries.clear();
    kernel.row_entries(State{i}, entries);
    for (const RowEntry& e : entries)
      triplets.emplace_back(static_cast<int>(e.state), static_cast<int>(i), e.prob);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> pt(static_cast<int>(n),
                                                  static_cast<int>(n));
  pt.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd next(n);
  for (std::int64_t iter = 0; iter < kTol.equilibrium_iter_max; ++iter) {
    next.noalias() = pt * v;
    next /= next.lpNorm<1>();
    const double diff = 0.5 * (next - v).lpNorm<1>();
    v.swap(next);
    if (diff < kTol.power_iter_tv)
      return FiniteDistribution::normalized(
          std::vector<double>(v.data(), v.data() + n));
  }
  throw NumericError("equilibrium: power iteration did not converge for '" +
                     kernel.name() + "'");
}

} // namespace

double stationarity_residual(const ChainKernel& kernel,
                             const FiniteDistribution& pi) {
  const std::int64_t n = kernel.n_states();
  if (pi.size() != static_cast<std::size_t>(n))
    throw DomainError("stationarity_residual: size mismatch");
  std::vector<double> push(pi.size(), 0.0);
  std::vector<RowEntry> entries;
  for (std::int64_t i = 0; i < n; ++i) {
    const double wi = pi[static_cast<std::size_t>(i)];
    if (wi == 0.0) continue;
    entries.clear();
    kernel.row_entries(State{i}, entries);
    for (const RowEntry& e : entries)
      push[static_cast<std::size_t>(e.state)] += wi * e.prob;
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) l1 += std::abs(push[i] - pi[i]);
  return l1;
}

FiniteDistribution exact_equilibrium(const ChainKernel& kernel) {
  if (!kernel.is_finite())
    throw UnsupportedError("exact_equilibrium: finite kernel required");
  const FiniteDistribution pi = is_birth_death(kernel)
                                    ? birth_death_equilibrium(kernel)
                                    : power_iteration_equilibrium(kernel);
  const double residual = stationarity_residual(kernel, pi);
  if (residual > kTol.equilibrium_residual)
    throw NumericError("equilibrium: residual " + std::to_string(residual) +
                       " exceeds tolerance for '" + kernel.name() + "'");
  return pi;
}

double expectation(const FiniteDistribution& pi, const Observable& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (pi[i] > 0.0) sum += pi[i] * f.fn(State{static_cast<std::int64_t>(i)});
  return sum;
}

double serial_estimate(const ChainKernel& kernel, const Observable& f, State x0,
                       std::int64_t n_steps, RngStream& rng) {
  if (n_steps < 1) throw DomainError("serial_estimate: n_steps must be >= 1");
  kernel.check_state(x0);
  State x = x0;
  double sum = f.fn(x);
  for (std::int64_t i = 1; i < n_steps; ++i) {
    x = kernel.sample_step(x, rng);
    sum += f.fn(x);
  }
  return sum / static_cast<double>(n_steps);
}

} // namespace parrep
