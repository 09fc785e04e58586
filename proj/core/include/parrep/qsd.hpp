#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "parrep/distribution.hpp"
#include "parrep/kernel.hpp"
#include "parrep/metastable.hpp"
#include "parrep/rng.hpp"
#include "parrep/worker_pool.hpp"

namespace parrep {

/// Result of a dephasing step: the replica start points plus the work spent
/// producing them (chain steps, counted for diagnostics; the wall-clock model
/// charges T_phase regardless).
struct DephasingOutcome {
  std::vector<State> samples;
  std::int64_t work = 0;
  std::int64_t restarts = 0;     // rejection: discarded trajectories
  std::int64_t extinctions = 0;  // Fleming-Viot: steps where all walkers left
};

/// Quasistationary distribution of the kernel restricted to set S: the
/// normalized left principal eigenvector of the S x S substochastic block,
/// computed by power iteration with L1 renormalization (each iterate is the
/// one-step law conditioned on remaining in S). Stops when successive
/// iterates differ by less than Tolerances::power_iter_tv in total variation;
/// throws NumericError with the residual if the iteration cap is hit.
FiniteDistribution exact_qsd(const ChainKernel& kernel,
                             const MetastableCollection& coll, SetId s);

/// Total-variation distance between nu and the one-step evolution of nu
/// conditioned on remaining in S. Zero (within tolerance) iff nu is the QSD.
/// Throws DomainError if the conditioning mass P_nu(X_1 in S) vanishes.
double qsd_residual(const ChainKernel& kernel, const MetastableCollection& coll,
                    SetId s, const FiniteDistribution& nu);

struct DephasingSettings {
  std::int64_t restart_cap = 100'000; // per walker; rejection sampler only
};

/// Rejection dephasing: each of the n_samples walkers repeatedly simulates a
/// fresh trajectory from `start` until one survives t_phase consecutive steps
/// inside S; its endpoint is the sample. Work counts every simulated step,
/// including discarded trajectories. Throws BudgetError when a walker exceeds
/// the restart cap.
DephasingOutcome dephase_rejection(const ChainKernel& kernel,
                                   const MetastableCollection& coll, SetId s,
                                   int n_samples, std::int64_t t_phase,
                                   State start, const RngLineage& rng,
                                   WorkerPool* pool = nullptr,
                                   const DephasingSettings& settings = {});

/// Fleming-Viot dephasing: n_samples walkers start at `start` and evolve in
/// lockstep; after each step, every walker that left S restarts at the
/// current position of a survivor chosen uniformly at random (resampled in
/// replica-index order, among walkers that survived this step only). If all
/// walkers leave in the same step, the population restarts at `start` and the
/// event is counted. Returns the positions after t_phase steps.
DephasingOutcome dephase_fleming_viot(const ChainKernel& kernel,
                                      const MetastableCollection& coll, SetId s,
                                      int n_samples, std::int64_t t_phase,
                                      State start, const RngLineage& rng,
                                      WorkerPool* pool = nullptr);

/// Caches exact QSDs per set for one (kernel, membership) pair. Timing
/// parameters play no role, so a cache may be shared across collections that
/// differ only in T_corr / T_phase. Not thread-safe; intended for a single
/// coordinator thread.
class QsdCache {
public:
  QsdCache(const ChainKernel& kernel, const MetastableCollection& coll)
      : kernel_(kernel), coll_(coll) {}

  const FiniteDistribution& get(SetId s);

private:
  const ChainKernel& kernel_;
  const MetastableCollection& coll_;
  std::map<SetId, FiniteDistribution> cache_;
};

/// Idealized dephasing: n_samples iid draws from the exact QSD in S. No chain
/// steps are simulated (work = 0).
DephasingOutcome dephase_exact(const ChainKernel& kernel, SetId s, int n_samples,
                               const RngLineage& rng, QsdCache& cache);

} // namespace parrep
