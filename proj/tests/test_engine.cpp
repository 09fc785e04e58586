#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "parrep/engine.hpp"
#include "parrep/errors.hpp"
#include "parrep/models.hpp"

#include "support/test_chains.hpp"

using namespace parrep;

namespace {

const Observable kIdentity{"x", [](State s) { return static_cast<double>(s.index); }};
const Observable kOne{"one", [](State) { return 1.0; }};
const Observable kZero{"zero", [](State) { return 0.0; }};

ParRepConfig basic_config(int n, std::int64_t t_poll, std::int64_t stop,
                          std::vector<Observable> obs = {kOne}) {
  ParRepConfig cfg;
  cfg.n_replicas = n;
  cfg.t_poll = t_poll;
  cfg.stop_t_sim = stop;
  cfg.observables = std::move(obs);
  cfg.dephasing = DephasingMode::kExact;
  return cfg;
}

MetastableCollection biased_coll(std::int64_t t_corr, std::int64_t t_phase) {
  const ModelBundle m = biased_model();
  std::vector<MetastableCollection::Timing> timing(3, {t_corr, t_phase});
  return MetastableCollection(60, m.sets, timing);
}

void check_accounting(const RunResult& res, std::int64_t t_poll) {
  std::int64_t sim = 0, wall = 0;
  for (const TraceEvent& e : res.trace) {
    sim += e.sim_advance;
    wall += e.duration;
    if (e.phase == Phase::kDecorrelation) CHECK(e.duration == e.sim_advance);
    if (e.phase == Phase::kDephasing) CHECK(e.sim_advance == 0);
    if (e.phase == Phase::kParallel) CHECK(e.duration % t_poll == 0);
  }
  CHECK(sim == res.acc.t_sim);
  CHECK(wall == res.acc.wall_clock);
}

} // namespace

// ---------------------------------------------------------------------------
// decorrelation step

TEST_CASE("minimal window: three consecutive in-set states end at sigma = 2") {
  // drift chain 0 -> 1 -> 2 -> ... with S = {0, 1, 2, 3, 4}: starting at 0 the
  // first three states 0, 1, 2 lie in S, so the window completes at n = 2.
  const testing::DriftKernel k(10);
  const MetastableCollection coll(10, {SetSpec{"s", {0, 1, 2, 3, 4}}}, {{3, 3}});
  Engine engine(k, coll, basic_config(1, 1, 1), 1);
  Accumulators acc;
  const DecorrelationResult r = engine.decorrelation_step(State{0}, acc, nullptr);
  CHECK(r.sigma == 2);
  CHECK(r.x_sigma == State{2});
  CHECK(acc.t_sim == 2);
  CHECK(acc.wall_clock == 2);
  CHECK(acc.n_decorr_steps == 1);
}

TEST_CASE("decorrelation accumulates f over X_{t+1}..X_sigma only") {
  const testing::DriftKernel k(10);
  const MetastableCollection coll(10, {SetSpec{"s", {0, 1, 2, 3, 4}}}, {{3, 3}});
  Engine engine(k, coll, basic_config(1, 1, 1, {kIdentity}), 1);
  Accumulators acc;
  engine.decorrelation_step(State{0}, acc, nullptr);
  CHECK(acc.f_sim[0] == 1.0 + 2.0); // f(X_1) + f(X_2), not f(X_0)
}

TEST_CASE("a chain alternating between sets times out under a cap") {
  // deterministic 2-cycle between the two one-state sets
  const MatrixKernel k("alt", {{0.0, 1.0}, {1.0, 0.0}});
  const MetastableCollection coll(2, {SetSpec{"a", {0}}, SetSpec{"b", {1}}},
                                  {{2, 2}, {2, 2}});
  ParRepConfig cfg = basic_config(1, 1, 1);
  cfg.decorr_step_cap = 1000;
  Engine engine(k, coll, cfg, 1);
  Accumulators acc;
  CHECK_THROWS_AS((engine.decorrelation_step(State{0}, acc, nullptr)), TimeoutError);
}

TEST_CASE("decorrelation duration is at least T_corr - 1 from a fresh start") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(90, 90);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Engine engine(k, coll, basic_config(1, 1, 1), seed);
    Accumulators acc;
    const DecorrelationResult r = engine.decorrelation_step(State{0}, acc, nullptr);
    CHECK(r.sigma >= 89);
  }
}

TEST_CASE("zero-length decorrelation when T_corr = 1 and the start is inside") {
  const testing::DriftKernel k(10);
  const MetastableCollection coll(10, {SetSpec{"s", {0, 1, 2}}}, {{1, 1}});
  Engine engine(k, coll, basic_config(1, 1, 1), 1);
  Accumulators acc;
  const DecorrelationResult r = engine.decorrelation_step(State{1}, acc, nullptr);
  CHECK(r.sigma == 0);
  CHECK(acc.t_sim == 0);
  CHECK(acc.n_decorr_steps == 1);
}

// ---------------------------------------------------------------------------
// parallel step

TEST_CASE("exit in the first window: K = 2, tau_acc = (K-1)*T_poll + exit time") {
  // drift chain, S = {0..12}: replica 1 starts at 0 (alive all 5 steps),
  // replica 2 starts at 10 and exits at local step 3 (10 -> 11, 12, 13).
  const testing::DriftKernel k(64);
  SetSpec s{"s", {}};
  for (std::int64_t i = 0; i <= 12; ++i) s.members.push_back(i);
  const MetastableCollection coll(64, {s}, {{2, 2}});
  Engine engine(k, coll, basic_config(2, 5, 1, {kIdentity}), 1);
  const std::vector<State> samples{State{0}, State{10}};
  const ExitEvent ev = engine.parallel_step(0, samples);
  CHECK(ev.tau_acc == 8); // (2-1)*5 + 3
  CHECK(ev.x_acc == State{13});
  CHECK(ev.loops == 1);
  // replica 1 contributes f over its whole window, replica 2 up to the exit
  const double expected = (1 + 2 + 3 + 4 + 5) + (11 + 12 + 13);
  CHECK(ev.f_contrib[0] == expected);
}

TEST_CASE("ties resolve to the smallest replica index, not the earliest exit") {
  // replica 1 exits at local time 4, replica 2 survives, replica 3 at time 2
  const testing::DriftKernel k(64);
  SetSpec s{"s", {}};
  for (std::int64_t i = 0; i <= 30; ++i) s.members.push_back(i);
  const MetastableCollection coll(64, {s}, {{2, 2}});
  Engine engine(k, coll, basic_config(3, 5, 1), 1);
  // starts: 27 exits at step 4 (-> 31), 0 survives, 29 exits at step 2 (-> 31)
  const std::vector<State> samples{State{27}, State{0}, State{29}};
  const ExitEvent ev = engine.parallel_step(0, samples);
  CHECK(ev.tau_acc == 4); // K = 1
  CHECK(ev.x_acc == State{31});
}

TEST_CASE("single replica degenerates to the serial exit time") {
  const testing::DriftKernel k(16);
  const MetastableCollection coll(16, {SetSpec{"s", {0, 1, 2}}}, {{2, 2}});
  Engine engine(k, coll, basic_config(1, 2, 1), 1);
  const std::vector<State> samples{State{0}};
  const ExitEvent ev = engine.parallel_step(0, samples);
  CHECK(ev.tau_acc == 3); // 0 -> 1, 2, 3 with 3 outside
  CHECK(ev.x_acc == State{3});
  CHECK(ev.loops == 2); // two polling windows of length 2
}

TEST_CASE("multi-window survival accumulates N*T_poll per full window") {
  const testing::DriftKernel k(64);
  SetSpec s{"s", {}};
  for (std::int64_t i = 0; i <= 20; ++i) s.members.push_back(i);
  const MetastableCollection coll(64, {s}, {{2, 2}});
  Engine engine(k, coll, basic_config(2, 4, 1), 1);
  // replica 1 from 0 exits at global step 21; replica 2 from 1 at step 20.
  // windows of 4: both survive windows 1-4 (steps 1..16); window 5 holds the
  // first exits: replica 1 reaches 21 at local step 1 of window 5? No:
  // replica 1 positions at global steps 17..20 are 17,18,19,20 (in S), so the
  // exit (21) lands at window 6, local step 1. Replica 2 exits at global 20
  // -> position 21 at local step 4 of window 5; K = 2 in window 5.
  const std::vector<State> samples{State{0}, State{1}};
  const ExitEvent ev = engine.parallel_step(0, samples);
  CHECK(ev.loops == 5);
  CHECK(ev.tau_acc == 4 * (2 * 4) + 1 * 4 + 4); // 4 full windows + (K-1)T + local
  CHECK(ev.x_acc == State{21});
}

TEST_CASE("empty replica list is rejected") {
  const testing::DriftKernel k(16);
  const MetastableCollection coll(16, {SetSpec{"s", {0, 1, 2}}}, {{2, 2}});
  Engine engine(k, coll, basic_config(1, 2, 1), 1);
  CHECK_THROWS_AS((engine.parallel_step(0, {})), DomainError);
}

TEST_CASE("replica start outside the set is rejected") {
  const testing::DriftKernel k(16);
  const MetastableCollection coll(16, {SetSpec{"s", {0, 1, 2}}}, {{2, 2}});
  Engine engine(k, coll, basic_config(1, 2, 1), 1);
  const std::vector<State> samples{State{5}};
  CHECK_THROWS_AS((engine.parallel_step(0, samples)), DomainError);
}

// ---------------------------------------------------------------------------
// full runs

TEST_CASE("constant observables give exact estimates") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(5, 5);
  for (const DephasingMode mode :
       {DephasingMode::kExact, DephasingMode::kFlemingViot,
        DephasingMode::kRejection}) {
    ParRepConfig cfg = basic_config(4, 1, 2000, {kOne, kZero});
    cfg.dephasing = mode;
    Engine engine(k, coll, cfg, 77);
    const RunResult res = engine.run(State{0});
    CHECK(res.estimates[0] == 1.0);
    CHECK(res.estimates[1] == 0.0);
    CHECK(res.acc.t_sim > 2000);
  }
}

TEST_CASE("accounting identities hold on traced runs") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(30, 20);
  for (const std::int64_t t_poll : {1, 7}) {
    ParRepConfig cfg = basic_config(8, t_poll, 50'000, {kIdentity});
    cfg.record_trace = true;
    cfg.dephasing = DephasingMode::kFlemingViot;
    Engine engine(k, coll, cfg, 123);
    const RunResult res = engine.run(State{29});
    CHECK(!res.trace.empty());
    check_accounting(res, t_poll);
    // phase counters agree with the trace
    std::int64_t n_dec = 0, n_par = 0;
    for (const TraceEvent& e : res.trace) {
      n_dec += e.phase == Phase::kDecorrelation ? 1 : 0;
      n_par += e.phase == Phase::kParallel ? 1 : 0;
    }
    CHECK(n_dec == res.acc.n_decorr_steps);
    CHECK(n_par == res.acc.n_parallel_steps);
  }
}

TEST_CASE("determinism: identical seed and config give bit-identical results") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(30, 30);
  ParRepConfig cfg = basic_config(16, 3, 20'000, {kIdentity, kOne});
  cfg.dephasing = DephasingMode::kFlemingViot;

  std::vector<RunResult> results;
  for (const unsigned workers : {1u, 4u, 8u}) {
    WorkerPool pool(workers);
    Engine engine(k, coll, cfg, 0xabcdef, &pool);
    results.push_back(engine.run(State{0}));
  }
  for (std::size_t i = 1; i < results.size(); ++i) {
    CHECK(results[i].acc.f_sim[0] == results[0].acc.f_sim[0]);
    CHECK(results[i].acc.f_sim[1] == results[0].acc.f_sim[1]);
    CHECK(results[i].acc.t_sim == results[0].acc.t_sim);
    CHECK(results[i].acc.wall_clock == results[0].acc.wall_clock);
    CHECK(results[i].acc.n_parallel_loops == results[0].acc.n_parallel_loops);
  }
}

TEST_CASE("idealized decorrelation mode runs and keeps the accounting") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(10, 10);
  ParRepConfig cfg = basic_config(4, 1, 10'000, {kIdentity});
  cfg.idealized_decorrelation = true;
  cfg.record_trace = true;
  Engine engine(k, coll, cfg, 5);
  const RunResult res = engine.run(State{0});
  check_accounting(res, 1);
  CHECK(res.acc.t_sim > 10'000);
}

TEST_CASE("invalid configs are rejected") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(5, 5);
  ParRepConfig cfg = basic_config(0, 1, 100);
  CHECK_THROWS_AS((Engine(k, coll, cfg, 1)), ConfigError);
  cfg = basic_config(1, 0, 100);
  CHECK_THROWS_AS((Engine(k, coll, cfg, 1)), ConfigError);
  cfg = basic_config(1, 1, 0);
  CHECK_THROWS_AS((Engine(k, coll, cfg, 1)), ConfigError);
  cfg = basic_config(1, 1, 100, {});
  Engine engine(k, coll, cfg, 1);
  CHECK_THROWS_AS(engine.run(State{0}), ConfigError); // no observables
}

TEST_CASE("run can start from a distribution") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(5, 5);
  Engine engine(k, coll, basic_config(2, 1, 500), 9);
  const RunResult res = engine.run(FiniteDistribution::uniform_over(
      60, std::vector<std::int64_t>{0, 10, 20, 30}));
  CHECK(res.estimates[0] == 1.0);
}

// ---------------------------------------------------------------------------
// speedup

TEST_CASE("speedup is the plain ratio and rejects zero wall clock") {
  Accumulators acc;
  acc.t_sim = 33;
  acc.wall_clock = 29; // decorr 10 + dephase 4 + one parallel step 3*5
  CHECK(speedup(acc) == doctest::Approx(33.0 / 29.0));
  acc.wall_clock = 0;
  CHECK_THROWS_AS(speedup(acc), DomainError);
}

TEST_CASE("pure decorrelation run has speedup exactly 1") {
  const BiasedWalk k;
  // stop is tiny: the first decorrelation already exceeds it, so no dephasing
  const MetastableCollection coll = biased_coll(50, 50);
  Engine engine(k, coll, basic_config(4, 1, 10), 2);
  const RunResult res = engine.run(State{0});
  CHECK(res.acc.n_parallel_steps == 0);
  CHECK(speedup(res.acc) == 1.0);
}

TEST_CASE("dephasing makes a single-replica run slower than serial") {
  // with N = 1, tau_acc <= M * T_poll, so wall clock exceeds T_sim by at
  // least the dephasing charges
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(5, 40);
  ParRepConfig cfg = basic_config(1, 1, 5'000);
  cfg.dephasing = DephasingMode::kRejection;
  Engine engine(k, coll, cfg, 3);
  const RunResult res = engine.run(State{0});
  CHECK(res.acc.n_parallel_steps > 0);
  CHECK(speedup(res.acc) < 1.0);
}

TEST_CASE("trace serialization is line-delimited with the documented fields") {
  const BiasedWalk k;
  const MetastableCollection coll = biased_coll(10, 10);
  ParRepConfig cfg = basic_config(2, 1, 300);
  cfg.record_trace = true;
  Engine engine(k, coll, cfg, 4);
  const RunResult res = engine.run(State{0});
  std::ostringstream os;
  write_trace(res.trace, coll, os);
  const std::string text = os.str();
  CHECK(text.find("phase=decorrelation") != std::string::npos);
  CHECK(text.find("duration=") != std::string::npos);
  CHECK(text.find("set=") != std::string::npos);
  CHECK(text.find("contribution=") != std::string::npos);
}
