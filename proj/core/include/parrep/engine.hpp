#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parrep/distribution.hpp"
#include "parrep/kernel.hpp"
#include "parrep/metastable.hpp"
#include "parrep/qsd.hpp"
#include "parrep/rng.hpp"
#include "parrep/worker_pool.hpp"

namespace parrep {

/// Bounded observable evaluated along the trajectory.
struct Observable {
  std::string name;
  std::function<double(State)> fn;
};

enum class DephasingMode { kRejection, kFlemingViot, kExact };

struct ParRepConfig {
  int n_replicas = 1;          // N >= 1
  std::int64_t t_poll = 1;     // polling window length, >= 1
  DephasingMode dephasing = DephasingMode::kFlemingViot;
  std::int64_t stop_t_sim = 1; // run until T_sim first exceeds this
  std::vector<Observable> observables;
  bool idealized_decorrelation = false; // replace decorrelation endpoint by an
                                        // exact QSD draw (finite chains only)
  bool record_trace = false;
  std::int64_t decorr_step_cap = 0; // 0 = unlimited
  std::int64_t rejection_restart_cap = 100'000;
};

/// Running totals of a ParRep run. f_sim holds one entry per observable;
/// wall_clock is the idealized parallel cost (1 per decorrelation step,
/// T_phase per dephasing, M*T_poll per parallel step). The three counters
/// tally invocations of each phase, with n_parallel_loops summing the polling
/// loops M over all parallel steps.
struct Accumulators {
  std::vector<double> f_sim;
  std::int64_t t_sim = 0;
  std::int64_t wall_clock = 0;
  std::int64_t n_decorr_steps = 0;
  std::int64_t n_parallel_steps = 0;
  std::int64_t n_parallel_loops = 0;
};

enum class Phase { kDecorrelation, kDephasing, kParallel };

/// One line of the optional event log.
struct TraceEvent {
  Phase phase;
  SetId set;
  std::int64_t duration;     // wall-clock charge of the event
  double contribution;       // f_sim delta (first observable)
  std::int64_t sim_advance;  // T_sim delta
  std::int64_t work;         // chain steps actually simulated
};

std::string to_string(Phase phase);
void write_trace(std::span<const TraceEvent> trace,
                 const MetastableCollection& coll, std::ostream& os);

/// Outcome of one Parallel Step: the accumulated exit time and exit state of
/// the concatenated replica trajectory.
struct ExitEvent {
  std::int64_t tau_acc = 0;
  State x_acc;
  std::vector<double> f_contrib; // one entry per observable
  std::int64_t loops = 0;        // number of polling loops M
};

struct DecorrelationResult {
  std::int64_t sigma;
  State x_sigma;
  SetId set;
};

struct RunResult {
  std::vector<double> estimates; // f_sim / T_sim per observable
  Accumulators acc;
  std::vector<TraceEvent> trace;
};

/// The ParRep driver: iterates Decorrelation -> Dephasing -> Parallel until
/// T_sim first exceeds stop_t_sim. Given (seed, config), results are
/// bit-identical regardless of the worker-pool size: every replica and walker
/// owns a counter-based stream keyed by (context, replica, epoch) and writes
/// only to its own slot.
class Engine {
public:
  /// kernel and coll must outlive the engine. pool may be null (serial). A
  /// shared QsdCache may be supplied to reuse QSD solves across engines; it
  /// must refer to the same kernel and set membership.
  Engine(const ChainKernel& kernel, const MetastableCollection& coll,
         ParRepConfig config, std::uint64_t seed, WorkerPool* pool = nullptr,
         QsdCache* shared_qsd = nullptr);

  RunResult run(State x0);
  RunResult run(const FiniteDistribution& xi);

  /// Evolves the chain from x0 (the state at time acc.t_sim) until the first
  /// time sigma >= t_sim + T_corr(S) - 1 at which the trailing T_corr(S)
  /// states, beginning no earlier than x0 itself, all lie in one set S.
  /// Updates f_sim, t_sim, wall_clock and the invocation counter.
  DecorrelationResult decorrelation_step(State x0, Accumulators& acc,
                                         std::vector<TraceEvent>* trace);

  /// Evolves N replicas from the given in-S start points in polling windows
  /// of t_poll steps; all replicas advance a full window before exits are
  /// inspected. Returns the exit event of the replica with the smallest index
  /// among those leaving S in the first window containing an exit.
  ExitEvent parallel_step(SetId s, std::span<const State> samples);

  DephasingOutcome dephase(SetId s, State start);

  const ParRepConfig& config() const { return cfg_; }

private:
  RngLineage next_lineage() { return RngLineage{seed_, epoch_++}; }
  QsdCache& qsd_cache();

  const ChainKernel& kernel_;
  const MetastableCollection& coll_;
  ParRepConfig cfg_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  WorkerPool* pool_;
  QsdCache* shared_qsd_;
  std::unique_ptr<QsdCache> owned_qsd_;
};

/// T_sim divided by wall-clock time. Throws DomainError if wall_clock is 0.
double speedup(const Accumulators& acc);

} // namespace parrep
