#pragma once

#include <cstdint>

#include "parrep/distribution.hpp"
#include "parrep/kernel.hpp"
#include "parrep/metastable.hpp"

namespace parrep {

/// Deterministically propagates the exact law of the lifted chain
/// (state, sojourn counter) for n steps and returns the state marginal.
///
/// The counter tracks consecutive states spent in one set, starting at 0 on
/// entry and capped at T_corr(S) of that set. While the counter is below
/// T_corr(S) - 1 the state evolves by the kernel; at T_corr(S) - 1 the next
/// state is generated from a fresh exact-QSD draw in S instead of the current
/// state; at the cap the state evolves by the kernel again. Leaving the set
/// resets the counter to 0.
///
/// xi must be supported with counter 0. The extended space must not exceed
/// Tolerances::extended_state_cap states (CapacityError otherwise).
FiniteDistribution propagate_extended_law(const ChainKernel& kernel,
                                          const MetastableCollection& coll,
                                          const FiniteDistribution& xi,
                                          std::int64_t n_steps);

} // namespace parrep
