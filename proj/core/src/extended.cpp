#include "parrep/extended.hpp"

#include <algorithm>
#include <vector>

#include "parrep/errors.hpp"
#include "parrep/qsd.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

FiniteDistribution propagate_extended_law(const ChainKernel& kernel,
                                          const MetastableCollection& coll,
                                          const FiniteDistribution& xi,
                                          std::int64_t n_steps) {
  if (!kernel.is_finite())
    throw UnsupportedError("propagate_extended_law: finite kernel required");
  if (n_steps < 0) throw DomainError("propagate_extended_law: n_steps < 0");
  const std::int64_t n = kernel.n_states();
  if (xi.size() != static_cast<std::size_t>(n))
    throw DomainError("propagate_extended_law: distribution size mismatch");

  std::int64_t t_max = 0;
  for (SetId s = 0; s < static_cast<SetId>(coll.n_sets()); ++s)
    t_max = std::max(t_max, coll.t_corr(s));
  const std::int64_t n_ext = n * (t_max + 1);
  if (n_ext > kTol.extended_state_cap)
    throw CapacityError("propagate_extended_law: " + std::to_string(n_ext) +
                        " extended states exceed the capacity limit of " +
                        std::to_string(kTol.extended_state_cap));

  // One-step pushforward of each set's QSD, precomputed once.
  std::vector<std::vector<double>> qsd_push(coll.n_sets());
  std::vector<RowEntry> entries;
  for (SetId s = 0; s < static_cast<SetId>(coll.n_sets()); ++s) {
    const FiniteDistribution nu = exact_qsd(kernel, coll, s);
    qsd_push[static_cast<std::size_t>(s)].assign(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t z : coll.members(s)) {
      const double wz = nu[static_cast<std::size_t>(z)];
      if (wz == 0.0) continue;
      entries.clear();
      kernel.row_entries(State{z}, entries);
      for (const RowEntry& e : entries)
        qsd_push[static_cast<std::size_t>(s)][static_cast<std::size_t>(e.state)] +=
            wz * e.prob;
    }
  }

  // law[(t * n) + state]
  auto at = [n](std::int64_t state, std::int64_t t) {
    return static_cast<std::size_t>(t * n + state);
  };
  std::vector<double> law(static_cast<std::size_t>(n_ext), 0.0);
  for (std::int64_t i = 0; i < n; ++i) law[at(i, 0)] = xi[static_cast<std::size_t>(i)];

  std::vector<double> next(law.size());
  for (std::int64_t step = 0; step < n_steps; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t t = 0; t <= t_max; ++t) {
      for (std::int64_t i = 0; i < n; ++i) {
        const double mass = law[at(i, t)];
        if (mass == 0.0) continue;
        const auto s = coll.locate(State{i});
        if (s && t == coll.t_corr(*s) - 1) {
          // replacement step: evolve a fresh QSD draw instead of the state
          const auto& push = qsd_push[static_cast<std::size_t>(*s)];
          for (std::int64_t j = 0; j < n; ++j) {
            if (push[static_cast<std::size_t>(j)] == 0.0) continue;
            const std::int64_t t_next =
                coll.contains(*s, State{j}) ? coll.t_corr(*s) : 0;
            next[at(j, t_next)] += mass * push[static_cast<std::size_t>(j)];
          }
        } else {
          entries.clear();
          kernel.row_entries(State{i}, entries);
          for (const RowEntry& e : entries) {
            std::int64_t t_next = 0;
            if (s && coll.contains(*s, State{e.state}))
              t_next = std::min(t + 1, coll.t_corr(*s));
            next[at(e.state, t_next)] += mass * e.prob;
          }
        }
      }
    }
    law.swap(next);
  }

  std::vector<double> marginal(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t t = 0; t <= t_max; ++t)
    for (std::int64_t i = 0; i < n; ++i)
      marginal[static_cast<std::size_t>(i)] += law[at(i, t)];
  return FiniteDistribution::normalized(std::move(marginal));
}

} // namespace parrep
