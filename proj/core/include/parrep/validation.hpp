#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parrep/engine.hpp"
#include "parrep/qsd.hpp"

namespace parrep {

/// Collects n_events independent exit events from set s: each event draws
/// n_replicas exact-QSD samples and runs one Parallel Step.
std::vector<ExitEvent> collect_exit_events(const ChainKernel& kernel,
                                           const MetastableCollection& coll,
                                           SetId s, int n_events,
                                           int n_replicas, std::int64_t t_poll,
                                           std::uint64_t seed,
                                           WorkerPool* pool = nullptr,
                                           QsdCache* cache = nullptr);

/// Statistical checks of the exit-event law from set s under exact dephasing:
/// tau_acc is Geometric(p) with p the one-step exit probability from the QSD,
/// tau_acc is independent of the exit state, the empirical mean matches 1/p,
/// and the joint law does not depend on the replica count.
struct ExitLawReport {
  double p_exit = 0.0;
  double gof_pvalue = 0.0;        // tau_acc ~ Geometric(p)
  double independence_pvalue = 1.0; // (tau bucket) x (exit state)
  int independence_df = 0;        // 0 when the table is degenerate
  double mean_tau = 0.0;
  double mean_tau_se = 0.0;
  double mean_tau_expected = 0.0; // 1/p
  double n_invariance_pvalue = 0.0; // N = 1 vs N = alt_replicas joint law
  int alt_replicas = 0;

  bool pass(double alpha) const {
    return gof_pvalue > alpha && independence_pvalue > alpha &&
           std::abs(mean_tau - mean_tau_expected) <= 3.0 * mean_tau_se &&
           n_invariance_pvalue > alpha;
  }
};

ExitLawReport exit_law_suite(const ChainKernel& kernel,
                             const MetastableCollection& coll, SetId s,
                             int n_events, int alt_replicas, std::int64_t t_poll,
                             std::uint64_t seed, WorkerPool* pool = nullptr);

/// One named pass/fail outcome of the invariant battery.
struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

/// Runs the model-level invariants: row stochasticity, collection validity,
/// QSD fixed points, equilibrium residual, and the exit-law suite per set.
std::vector<CheckResult> invariant_battery(const ChainKernel& kernel,
                                           const MetastableCollection& coll,
                                           int exit_events, std::uint64_t seed,
                                           WorkerPool* pool = nullptr);

} // namespace parrep
