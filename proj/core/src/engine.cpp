#include "parrep/engine.hpp"

#include <cassert>
#include <ostream>

#include "parrep/errors.hpp"

namespace parrep {

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kDecorrelation: return "decorrelation";
    case Phase::kDephasing: return "dephasing";
    case Phase::kParallel: return "parallel";
  }
  return "?";
}

void write_trace(std::span<const TraceEvent> trace,
                 const MetastableCollection& coll, std::ostream& os) {
  for (const TraceEvent& e : trace) {
    os << "phase=" << to_string(e.phase) << " duration=" << e.duration
       << " set=" << (e.set >= 0 ? coll.set_name(e.set) : std::string("-"))
       << " contribution=" << e.contribution << " sim=" << e.sim_advance
       << " work=" << e.work << '\n';
  }
}

Engine::Engine(const ChainKernel& kernel, const MetastableCollection& coll,
               ParRepConfig config, std::uint64_t seed, WorkerPool* pool,
               QsdCache* shared_qsd)
    : kernel_(kernel), coll_(coll), cfg_(std::move(config)), seed_(seed),
      pool_(pool), shared_qsd_(shared_qsd) {
  if (cfg_.n_replicas < 1) throw ConfigError("engine: N must be >= 1");
  if (cfg_.t_poll < 1) throw ConfigError("engine: T_poll must be >= 1");
  if (cfg_.stop_t_sim < 1) throw ConfigError("engine: stop_T_sim must be >= 1");
  if (cfg_.idealized_decorrelation && !kernel_.is_finite())
    throw ConfigError("engine: idealized decorrelation needs a finite kernel");
  if (cfg_.dephasing == DephasingMode::kExact && !kernel_.is_finite())
    throw ConfigError("engine: exact dephasing needs a finite kernel");
}

QsdCache& Engine::qsd_cache() {
  if (shared_qsd_ != nullptr) return *shared_qsd_;
  if (!owned_qsd_) owned_qsd_ = std::make_unique<QsdCache>(kernel_, coll_);
  return *owned_qsd_;
}

DecorrelationResult Engine::decorrelation_step(State x0, Accumulators& acc,
                                               std::vector<TraceEvent>* trace) {
  kernel_.check_state(x0);
  const std::size_t n_obs = cfg_.observables.size();
  if (acc.f_sim.size() != n_obs) acc.f_sim.resize(n_obs, 0.0);

  RngStream rng = next_lineage().stream(StreamContext::kMainChain, 0);
  const std::int64_t t_start = acc.t_sim;
  State x = x0;
  // The trailing window may begin at x0 itself (the state produced by the
  // previous parallel step) but never earlier, so the run length counts from
  // x0 at most.
  std::optional<SetId> cur = coll_.locate(x);
  std::int64_t run = cur ? 1 : 0;
  std::vector<double> fdelta(n_obs, 0.0);
  std::int64_t n = t_start;

  while (!(cur && run >= coll_.t_corr(*cur))) {
    if (cfg_.decorr_step_cap > 0 && n - t_start >= cfg_.decorr_step_cap)
      throw TimeoutError("decorrelation: step cap of " +
                         std::to_string(cfg_.decorr_step_cap) +
                         " reached without completing a window");
    x = kernel_.sample_step(x, rng);
    ++n;
    for (std::size_t k = 0; k < n_obs; ++k) fdelta[k] += cfg_.observables[k].fn(x);
    const std::optional<SetId> s = coll_.locate(x);
    run = s ? (s == cur ? run + 1 : 1) : 0;
    cur = s;
  }

  const std::int64_t duration = n - t_start;
  for (std::size_t k = 0; k < n_obs; ++k) acc.f_sim[k] += fdelta[k];
  acc.wall_clock += duration;
  acc.t_sim = n;
  acc.n_decorr_steps += 1;
  if (trace != nullptr)
    trace->push_back({Phase::kDecorrelation, *cur, duration,
                      n_obs > 0 ? fdelta[0] : 0.0, duration, duration});
  return {n, x, *cur};
}

DephasingOutcome Engine::dephase(SetId s, State start) {
  const RngLineage rng = next_lineage();
  switch (cfg_.dephasing) {
    case DephasingMode::kExact:
      return dephase_exact(kernel_, s, cfg_.n_replicas, rng, qsd_cache());
    case DephasingMode::kRejection:
      return dephase_rejection(kernel_, coll_, s, cfg_.n_replicas,
                               coll_.t_phase(s), start, rng, pool_,
                               {cfg_.rejection_restart_cap});
    case DephasingMode::kFlemingViot:
      return dephase_fleming_viot(kernel_, coll_, s, cfg_.n_replicas,
                                  coll_.t_phase(s), start, rng, pool_);
  }
  throw ConfigError("engine: unknown dephasing mode");
}

namespace {

// Per-replica record of one polling window.
struct WindowSummary {
  bool exited = false;
  std::int64_t exit_local = 0; // 1-based first exit time within the window
  State exit_state;
  std::vector<double> full_f;   // sum over the whole window
  std::vector<double> prefix_f; // sum up to and including the first exit
};

} // namespace

ExitEvent Engine::parallel_step(SetId s, std::span<const State> samples) {
  if (samples.empty())
    throw DomainError("parallel_step: at least one replica sample required");
  for (const State& x : samples)
    if (!coll_.contains(s, x))
      throw DomainError("parallel_step: replica start point outside the set");

  const auto n = samples.size();
  const std::int64_t t_poll = cfg_.t_poll;
  const std::size_t n_obs = cfg_.observables.size();
  const RngLineage rng = next_lineage();

  std::vector<State> pos(samples.begin(), samples.end());
  std::vector<RngStream> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    streams.push_back(rng.stream(StreamContext::kParallel,
                                 static_cast<std::uint32_t>(i)));
  std::vector<WindowSummary> window(n);
  for (auto& w : window) {
    w.full_f.assign(n_obs, 0.0);
    w.prefix_f.assign(n_obs, 0.0);
  }

  // Every replica advances the full window before exits are inspected; the
  // first exit within the window is recorded, evolution continues past it.
  auto advance_window = [&](std::size_t i) {
    WindowSummary& w = window[i];
    w.exited = false;
    w.exit_local = 0;
    std::fill(w.full_f.begin(), w.full_f.end(), 0.0);
    State x = pos[i];
    for (std::int64_t step = 1; step <= t_poll; ++step) {
      x = kernel_.sample_step(x, streams[i]);
      for (std::size_t k = 0; k < n_obs; ++k)
        w.full_f[k] += cfg_.observables[k].fn(x);
      if (!w.exited && !coll_.contains(s, x)) {
        w.exited = true;
        w.exit_local = step;
        w.exit_state = x;
        w.prefix_f = w.full_f;
      }
    }
    pos[i] = x;
  };

  ExitEvent ev;
  ev.f_contrib.assign(n_obs, 0.0);
  for (std::int64_t loops = 1;; ++loops) {
    if (pool_ != nullptr) {
      pool_->run(n, advance_window); // polling barrier
    } else {
      for (std::size_t i = 0; i < n; ++i) advance_window(i);
    }

    std::size_t first_exit = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (window[i].exited) {
        first_exit = i;
        break;
      }
    }

    if (first_exit == n) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n_obs; ++k)
          ev.f_contrib[k] += window[i].full_f[k];
      ev.tau_acc += static_cast<std::int64_t>(n) * t_poll;
      continue;
    }

    const WindowSummary& wk = window[first_exit];
    for (std::size_t i = 0; i < first_exit; ++i)
      for (std::size_t k = 0; k < n_obs; ++k)
        ev.f_contrib[k] += window[i].full_f[k];
    for (std::size_t k = 0; k < n_obs; ++k) ev.f_contrib[k] += wk.prefix_f[k];
    ev.tau_acc += static_cast<std::int64_t>(first_exit) * t_poll + wk.exit_local;
    ev.x_acc = wk.exit_state;
    ev.loops = loops;
    assert(ev.tau_acc >= 1);
    assert(ev.tau_acc <= ev.loops * static_cast<std::int64_t>(n) * t_poll);
    return ev;
  }
}

RunResult Engine::run(const FiniteDistribution& xi) {
  const CdfSampler sampler(xi);
  RngStream init = next_lineage().stream(StreamContext::kInit, 0);
  return run(sampler.sample(init));
}

RunResult Engine::run(State x0) {
  if (cfg_.observables.empty())
    throw ConfigError("engine: at least one observable required");
  kernel_.check_state(x0);

  RunResult res;
  res.acc.f_sim.assign(cfg_.observables.size(), 0.0);
  std::vector<TraceEvent>* trace = cfg_.record_trace ? &res.trace : nullptr;

  State x = x0;
  for (;;) {
    const DecorrelationResult dr = decorrelation_step(x, res.acc, trace);
    x = dr.x_sigma;
    if (res.acc.t_sim > cfg_.stop_t_sim) break;

    State start = x;
    if (cfg_.idealized_decorrelation) {
      // Exact-decorrelation mode: the endpoint handed to the dephasing step is
      // a fresh draw from the QSD of the set just decorrelated in.
      const CdfSampler sampler(qsd_cache().get(dr.set));
      RngStream stream = next_lineage().stream(StreamContext::kIdealize, 0);
      start = sampler.sample(stream);
    }

    const DephasingOutcome deph = dephase(dr.set, start);
    res.acc.wall_clock += coll_.t_phase(dr.set);
    if (trace != nullptr)
      trace->push_back({Phase::kDephasing, dr.set, coll_.t_phase(dr.set), 0.0, 0,
                        deph.work});

    const ExitEvent ev = parallel_step(dr.set, deph.samples);
    for (std::size_t k = 0; k < res.acc.f_sim.size(); ++k)
      res.acc.f_sim[k] += ev.f_contrib[k];
    res.acc.t_sim += ev.tau_acc;
    res.acc.wall_clock += ev.loops * cfg_.t_poll;
    res.acc.n_parallel_steps += 1;
    res.acc.n_parallel_loops += ev.loops;
    if (trace != nullptr)
      trace->push_back({Phase::kParallel, dr.set, ev.loops * cfg_.t_poll,
                        ev.f_contrib.empty() ? 0.0 : ev.f_contrib[0], ev.tau_acc,
                        ev.loops * cfg_.t_poll * cfg_.n_replicas});
    x = ev.x_acc;
    if (res.acc.t_sim > cfg_.stop_t_sim) break;
  }

  res.estimates.resize(res.acc.f_sim.size());
  for (std::size_t k = 0; k < res.estimates.size(); ++k)
    res.estimates[k] = res.acc.f_sim[k] / static_cast<double>(res.acc.t_sim);
  return res;
}

double speedup(const Accumulators& acc) {
  if (acc.wall_clock <= 0)
    throw DomainError("speedup: undefined ratio, wall clock is zero");
  return static_cast<double>(acc.t_sim) / static_cast<double>(acc.wall_clock);
}

} // namespace parrep
