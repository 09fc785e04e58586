#include "parrep/metastable.hpp"

#include "parrep/errors.hpp"

namespace parrep {

SetSpec set_from_predicate(std::string name, std::int64_t n_states,
                           const std::function<bool(State)>& pred) {
  SetSpec spec{std::move(name), {}};
  for (std::int64_t i = 0; i < n_states; ++i)
    if (pred(State{i})) spec.members.push_back(i);
  return spec;
}

MetastableCollection::MetastableCollection(std::int64_t n_states,
                                           std::vector<SetSpec> sets,
                                           std::vector<Timing> timing)
    : n_states_(n_states), sets_(std::move(sets)), timing_(std::move(timing)),
      set_of_(static_cast<std::size_t>(n_states), SetId{-1}) {
  if (n_states_ <= 0) throw ConfigError("collection: n_states must be positive");
  if (timing_.size() != sets_.size())
    throw ConfigError("collection: one timing entry per set required");
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    if (sets_[s].members.empty())
      throw ConfigError("collection: set '" + sets_[s].name + "' is empty");
    if (timing_[s].t_corr < 1 || timing_[s].t_phase < 1)
      throw ConfigError("collection: T_corr and T_phase must be >= 1 for set '" +
                        sets_[s].name + "'");
    for (std::int64_t i : sets_[s].members) {
      if (i < 0 || i >= n_states_)
        throw ConfigError("collection: member index out of range in set '" +
                          sets_[s].name + "'");
      SetId& slot = set_of_[static_cast<std::size_t>(i)];
      if (slot >= 0)
        throw ConfigError("collection: sets '" + sets_[slot].name + "' and '" +
                          sets_[s].name + "' overlap at state " + std::to_string(i));
      slot = static_cast<SetId>(s);
      ++covered_;
    }
  }
}

std::size_t MetastableCollection::check(SetId s) const {
  if (s < 0 || static_cast<std::size_t>(s) >= sets_.size())
    throw DomainError("collection: invalid set id " + std::to_string(s));
  return static_cast<std::size_t>(s);
}

std::size_t MetastableCollection::bounded(State x) const {
  if (x.index < 0 || x.index >= n_states_)
    throw DomainError("collection: state index " + std::to_string(x.index) +
                      " out of range");
  return static_cast<std::size_t>(x.index);
}

void validate(const MetastableCollection& coll, const ChainKernel& kernel) {
  if (!kernel.is_finite())
    throw UnsupportedError("validate: finite kernel required");
  if (kernel.n_states() != coll.n_states())
    throw ConfigError("validate: collection and kernel state counts differ");
  std::vector<RowEntry> entries;
  for (SetId s = 0; s < static_cast<SetId>(coll.n_sets()); ++s) {
    double outside = 0.0;
    for (std::int64_t i : coll.members(s)) {
      entries.clear();
      kernel.row_entries(State{i}, entries);
      for (const RowEntry& e : entries)
        if (!coll.contains(s, State{e.state})) outside += e.prob;
    }
    if (outside <= 0.0)
      throw ConfigError("validate: set '" + coll.set_name(s) +
                        "' is absorbing (no one-step mass leaves it)");
  }
}

} // namespace parrep
