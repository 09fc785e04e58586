#pragma once

#include <compare>
#include <cstdint>

namespace parrep {

/// A point of the chain's state space. Finite chains enumerate their states
/// by a documented bijection; the index is that enumeration.
struct State {
  std::int64_t index = 0;

  friend auto operator<=>(const State&, const State&) = default;
};

} // namespace parrep
