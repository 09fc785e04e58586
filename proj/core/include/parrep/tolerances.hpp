#pragma once

#include <cstdint>

namespace parrep {

/// Single source of numeric truth: every tolerance and iteration cap used by
/// the library lives here.
struct Tolerances {
  double row_sum = 1e-12;            // |sum(row) - 1| for stochastic rows
  double distribution_sum = 1e-12;   // |sum(weights) - 1| for distributions
  double qsd_residual = 1e-12;       // fixed-point residual of the QSD
  double power_iter_tv = 1e-13;      // successive-iterate TV stopping rule
  std::int64_t power_iter_max = 1'000'000;     // QSD power-iteration cap
  std::int64_t equilibrium_iter_max = 10'000'000; // stationary-vector cap
  double equilibrium_residual = 1e-12;         // ||pi P - pi||_1
  double detailed_balance = 1e-14;   // birth-death residual, per state
  std::int64_t extended_state_cap = 10'000;    // law-propagation capacity
};

inline constexpr Tolerances kTol{};

} // namespace parrep
