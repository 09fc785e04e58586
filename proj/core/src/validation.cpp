#include "parrep/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "parrep/errors.hpp"
#include "parrep/oracles.hpp"
#include "parrep/stats.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

std::vector<ExitEvent> collect_exit_events(const ChainKernel& kernel,
                                           const MetastableCollection& coll,
                                           SetId s, int n_events,
                                           int n_replicas, std::int64_t t_poll,
                                           std::uint64_t seed, WorkerPool* pool,
                                           QsdCache* cache) {
  ParRepConfig cfg;
  cfg.n_replicas = n_replicas;
  cfg.t_poll = t_poll;
  cfg.dephasing = DephasingMode::kExact;
  cfg.stop_t_sim = 1; // unused by direct phase calls
  Engine engine(kernel, coll, cfg, seed, pool, cache);

  std::vector<ExitEvent> events;
  events.reserve(static_cast<std::size_t>(n_events));
  for (int e = 0; e < n_events; ++e) {
    const DephasingOutcome deph = engine.dephase(s, State{coll.members(s)[0]});
    events.push_back(engine.parallel_step(s, deph.samples));
  }
  return events;
}

namespace {

double exit_probability(const ChainKernel& kernel,
                        const MetastableCollection& coll, SetId s,
                        const FiniteDistribution& nu) {
  std::vector<RowEntry> entries;
  double p = 0.0;
  for (std::int64_t i : coll.members(s)) {
    const double wi = nu[static_cast<std::size_t>(i)];
    if (wi == 0.0) continue;
    entries.clear();
    kernel.row_entries(State{i}, entries);
    for (const RowEntry& e : entries)
      if (!coll.contains(s, State{e.state})) p += wi * e.prob;
  }
  return p;
}

// joint (tau bucket, exit state) cell counts on a shared cell layout
std::vector<std::int64_t> joint_cells(const std::vector<ExitEvent>& events,
                                      std::span<const std::int64_t> edges,
                                      const std::map<std::int64_t, std::size_t>& col) {
  std::vector<std::int64_t> counts((edges.size() + 1) * col.size(), 0);
  for (const ExitEvent& ev : events) {
    const std::size_t b = bucket_of(ev.tau_acc, edges);
    const std::size_t c = col.at(ev.x_acc.index);
    counts[b * col.size() + c] += 1;
  }
  return counts;
}

} // namespace

ExitLawReport exit_law_suite(const ChainKernel& kernel,
                             const MetastableCollection& coll, SetId s,
                             int n_events, int alt_replicas, std::int64_t t_poll,
                             std::uint64_t seed, WorkerPool* pool) {
  if (n_events < 100) throw DomainError("exit_law_suite: need >= 100 events");
  QsdCache cache(kernel, coll);
  const FiniteDistribution& nu = cache.get(s);

  ExitLawReport report;
  report.alt_replicas = alt_replicas;
  report.p_exit = exit_probability(kernel, coll, s, nu);
  if (report.p_exit <= 0.0)
    throw DomainError("exit_law_suite: set has no one-step exit mass");
  report.mean_tau_expected = 1.0 / report.p_exit;

  const auto base = collect_exit_events(kernel, coll, s, n_events, 1, t_poll,
                                        seed, pool, &cache);
  const auto alt = collect_exit_events(kernel, coll, s, n_events, alt_replicas,
                                       t_poll, seed + 1, pool, &cache);

  // (a) goodness of fit of tau_acc against Geometric(p)
  {
    const auto edges = geometric_bucket_edges(report.p_exit, 20);
    const auto probs = geometric_bucket_probs(report.p_exit, edges);
    std::vector<std::int64_t> counts(edges.size() + 1, 0);
    for (const ExitEvent& ev : base) counts[bucket_of(ev.tau_acc, edges)] += 1;
    report.gof_pvalue = chi_square_gof(counts, probs).pvalue;
  }

  // (b) independence of tau bucket and exit state
  std::map<std::int64_t, std::size_t> col;
  for (const ExitEvent& ev : base) col.emplace(ev.x_acc.index, 0);
  for (const ExitEvent& ev : alt) col.emplace(ev.x_acc.index, 0);
  {
    std::size_t c = 0;
    for (auto& kv : col) kv.second = c++;
  }
  {
    const auto edges = geometric_bucket_edges(report.p_exit, 8);
    std::vector<std::vector<std::int64_t>> table(
        edges.size() + 1, std::vector<std::int64_t>(col.size(), 0));
    for (const ExitEvent& ev : base)
      table[bucket_of(ev.tau_acc, edges)][col.at(ev.x_acc.index)] += 1;
    const ChiSquareResult r = chi_square_independence(table);
    report.independence_pvalue = r.pvalue;
    report.independence_df = r.df;
  }

  // (c) empirical mean of tau_acc against 1/p
  {
    std::vector<double> taus;
    taus.reserve(base.size());
    for (const ExitEvent& ev : base) taus.push_back(static_cast<double>(ev.tau_acc));
    report.mean_tau = mean(taus);
    report.mean_tau_se = standard_error(taus);
  }

  // (d) joint law agreement between N = 1 and N = alt_replicas
  {
    const auto edges = geometric_bucket_edges(report.p_exit, 8);
    const auto ca = joint_cells(base, edges, col);
    const auto cb = joint_cells(alt, edges, col);
    report.n_invariance_pvalue = two_sample_chi_square(ca, cb).pvalue;
  }
  return report;
}

std::vector<CheckResult> invariant_battery(const ChainKernel& kernel,
                                           const MetastableCollection& coll,
                                           int exit_events, std::uint64_t seed,
                                           WorkerPool* pool) {
  std::vector<CheckResult> results;
  auto add = [&results](std::string name, bool pass, std::string detail) {
    results.push_back({std::move(name), pass, std::move(detail)});
  };

  try {
    check_rows_stochastic(kernel);
    add("rows-stochastic", true, "all rows sum to 1 within tolerance");
  } catch (const Error& e) {
    add("rows-stochastic", false, e.what());
    return results; // nothing downstream is meaningful
  }

  try {
    validate(coll, kernel);
    add("collection", true, "sets disjoint, none absorbing");
  } catch (const Error& e) {
    add("collection", false, e.what());
    return results;
  }

  for (SetId s = 0; s < static_cast<SetId>(coll.n_sets()); ++s) {
    try {
      const FiniteDistribution nu = exact_qsd(kernel, coll, s);
      const double r = qsd_residual(kernel, coll, s, nu);
      std::ostringstream os;
      os << "residual " << r;
      add("qsd-fixed-point[" + coll.set_name(s) + "]", r <= kTol.qsd_residual,
          os.str());
    } catch (const Error& e) {
      add("qsd-fixed-point[" + coll.set_name(s) + "]", false, e.what());
    }
  }

  try {
    const FiniteDistribution pi = exact_equilibrium(kernel);
    const double r = stationarity_residual(kernel, pi);
    std::ostringstream os;
    os << "residual " << r;
    add("equilibrium", r <= kTol.equilibrium_residual, os.str());
  } catch (const Error& e) {
    add("equilibrium", false, e.what());
  }

  if (exit_events > 0) {
    for (SetId s = 0; s < static_cast<SetId>(coll.n_sets()); ++s) {
      try {
        const ExitLawReport rep =
            exit_law_suite(kernel, coll, s, exit_events, 8, 1, seed + s, pool);
        std::ostringstream os;
        os << "p_exit " << rep.p_exit << ", gof p " << rep.gof_pvalue
           << ", indep p " << rep.independence_pvalue << ", mean tau "
           << rep.mean_tau << " vs " << rep.mean_tau_expected << ", N-inv p "
           << rep.n_invariance_pvalue;
        add("exit-law[" + coll.set_name(s) + "]", rep.pass(1e-3), os.str());
      } catch (const Error& e) {
        add("exit-law[" + coll.set_name(s) + "]", false, e.what());
      }
    }
  }
  return results;
}

} // namespace parrep
