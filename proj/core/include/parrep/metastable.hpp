#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parrep/kernel.hpp"
#include "parrep/state.hpp"

namespace parrep {

using SetId = std::int32_t;

/// Declaration of one metastable set by name and member state indices.
struct SetSpec {
  std::string name;
  std::vector<std::int64_t> members;
};

/// Materializes a membership predicate over an enumerated space.
SetSpec set_from_predicate(std::string name, std::int64_t n_states,
                           const std::function<bool(State)>& pred);

/// The disjoint collection of metastable sets with per-set timing parameters
/// (in chain steps). Immutable after construction and freely shareable.
class MetastableCollection {
public:
  struct Timing {
    std::int64_t t_corr = 1;
    std::int64_t t_phase = 1;
  };

  /// Throws ConfigError on overlapping or empty sets, out-of-range members,
  /// or timing entries < 1.
  MetastableCollection(std::int64_t n_states, std::vector<SetSpec> sets,
                       std::vector<Timing> timing);

  std::int64_t n_states() const { return n_states_; }
  std::size_t n_sets() const { return sets_.size(); }
  const std::string& set_name(SetId s) const { return sets_[check(s)].name; }
  std::span<const std::int64_t> members(SetId s) const { return sets_[check(s)].members; }
  std::int64_t t_corr(SetId s) const { return timing_[check(s)].t_corr; }
  std::int64_t t_phase(SetId s) const { return timing_[check(s)].t_phase; }

  /// The unique set containing x, if any. O(1).
  std::optional<SetId> locate(State x) const {
    const SetId s = set_of_[bounded(x)];
    if (s < 0) return std::nullopt;
    return s;
  }

  bool contains(SetId s, State x) const {
    check(s);
    return set_of_[bounded(x)] == s;
  }

  /// Total number of states covered by some set.
  std::int64_t covered_states() const { return covered_; }

private:
  std::size_t check(SetId s) const;
  std::size_t bounded(State x) const;

  std::int64_t n_states_;
  std::vector<SetSpec> sets_;
  std::vector<Timing> timing_;
  std::vector<SetId> set_of_; // state index -> set id, -1 if uncovered
  std::int64_t covered_ = 0;
};

/// Confirms that no set is absorbing under the kernel: some member row of
/// every set must put positive mass outside the set. Throws ConfigError.
void validate(const MetastableCollection& coll, const ChainKernel& kernel);

} // namespace parrep
