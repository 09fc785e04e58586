#pragma once

#include <cstdint>

#include "parrep/distribution.hpp"
#include "parrep/engine.hpp"
#include "parrep/kernel.hpp"

namespace parrep {

/// True if every row of the kernel moves only to {i-1, i, i+1}.
bool is_birth_death(const ChainKernel& kernel);

/// Stationary distribution of an ergodic finite kernel. Reversible
/// birth-death chains are solved exactly by the detailed-balance recurrence
/// pi(x+1) p(x+1 -> x) = pi(x) p(x -> x+1); everything else by power
/// iteration on the full matrix from a uniform start. The result satisfies
/// ||pi P - pi||_1 <= Tolerances::equilibrium_residual or NumericError is
/// thrown.
FiniteDistribution exact_equilibrium(const ChainKernel& kernel);

/// ||pi P - pi||_1 for a candidate stationary vector.
double stationarity_residual(const ChainKernel& kernel,
                             const FiniteDistribution& pi);

/// Expectation of an observable under a distribution.
double expectation(const FiniteDistribution& pi, const Observable& f);

/// Plain ergodic average (f(X_0) + ... + f(X_{n-1})) / n over one trajectory
/// of n_steps states starting at x0.
double serial_estimate(const ChainKernel& kernel, const Observable& f, State x0,
                       std::int64_t n_steps, RngStream& rng);

} // namespace parrep
