#include "parrep/qsd.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>

#include "parrep/errors.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

namespace {

// Transpose of the S x S substochastic block in local (within-S) indexing,
// so that one conditioned step is a plain matrix-vector product.
Eigen::SparseMatrix<double, Eigen::RowMajor> block_transpose(
    const ChainKernel& kernel, const MetastableCollection& coll, SetId s,
    std::vector<std::int64_t>& local_of_global) {
  const auto members = coll.members(s);
  local_of_global.assign(static_cast<std::size_t>(coll.n_states()), -1);
  for (std::size_t j = 0; j < members.size(); ++j)
    local_of_global[static_cast<std::size_t>(members[j])] =
        static_cast<std::int64_t>(j);

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<RowEntry> entries;
  for (std::size_t i = 0; i < members.size(); ++i) {
    entries.clear();
    kernel.row_entries(State{members[i]}, entries);
    for (const RowEntry& e : entries) {
      const std::int64_t j = local_of_global[static_cast<std::size_t>(e.state)];
      if (j >= 0)
        triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), e.prob);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> bt(
      static_cast<int>(members.size()), static_cast<int>(members.size()));
  bt.setFromTriplets(triplets.begin(), triplets.end());
  return bt;
}

} // namespace

FiniteDistribution exact_qsd(const ChainKernel& kernel,
                             const MetastableCollection& coll, SetId s) {
  if (!kernel.is_finite())
    throw UnsupportedError("exact_qsd: finite kernel required");
  const auto members = coll.members(s);
  const auto m = static_cast<Eigen::Index>(members.size());

  std::vector<std::int64_t> local_of_global;
  const auto bt = block_transpose(kernel, coll, s, local_of_global);

  Eigen::VectorXd v = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd next(m);
  double diff = 0.0;
  for (std::int64_t iter = 0; iter < kTol.power_iter_max; ++iter) {
    next.noalias() = bt * v;
    const double mass = next.lpNorm<1>();
    if (mass <= 0.0)
      throw DomainError("exact_qsd: conditioning mass vanished for set '" +
                        coll.set_name(s) + "'");
    next /= mass;
    diff = 0.5 * (next - v).lpNorm<1>();
    v.swap(next);
    if (diff < kTol.power_iter_tv) {
      std::vector<double> w(static_cast<std::size_t>(coll.n_states()), 0.0);
      for (std::size_t j = 0; j < members.size(); ++j)
        w[static_cast<std::size_t>(members[j])] = v[static_cast<Eigen::Index>(j)];
      return FiniteDistribution::normalized(std::move(w));
    }
  }
  throw NumericError("exact_qsd: power iteration did not converge for set '" +
                     coll.set_name(s) + "' (last successive TV = " +
                     std::to_string(diff) + ")");
}

double qsd_residual(const ChainKernel& kernel, const MetastableCollection& coll,
                    SetId s, const FiniteDistribution& nu) {
  if (!kernel.is_finite())
    throw UnsupportedError("qsd_residual: finite kernel required");
  if (nu.size() != static_cast<std::size_t>(coll.n_states()))
    throw DomainError("qsd_residual: distribution size mismatch");
  const auto members = coll.members(s);
  for (std::size_t i = 0; i < nu.size(); ++i)
    if (nu[i] > 0.0 && !coll.contains(s, State{static_cast<std::int64_t>(i)}))
      throw DomainError("qsd_residual: distribution not supported in set");

  std::vector<double> push(nu.size(), 0.0);
  std::vector<RowEntry> entries;
  double mass = 0.0;
  for (std::int64_t i : members) {
    const double wi = nu[static_cast<std::size_t>(i)];
    if (wi == 0.0) continue;
    entries.clear();
    kernel.row_entries(State{i}, entries);
    for (const RowEntry& e : entries) {
      if (coll.contains(s, State{e.state})) {
        push[static_cast<std::size_t>(e.state)] += wi * e.prob;
        mass += wi * e.prob;
      }
    }
  }
  if (mass <= 0.0)
    throw DomainError("qsd_residual: degenerate set, one-step survival mass is zero");
  double l1 = 0.0;
  for (std::size_t i = 0; i < push.size(); ++i)
    l1 += std::abs(push[i] / mass - nu[i]);
  return 0.5 * l1;
}

DephasingOutcome dephase_rejection(const ChainKernel& kernel,
                                   const MetastableCollection& coll, SetId s,
                                   int n_samples, std::int64_t t_phase,
                                   State start, const RngLineage& rng,
                                   WorkerPool* pool,
                                   const DephasingSettings& settings) {
  if (n_samples < 1) throw DomainError("dephase_rejection: n_samples must be >= 1");
  if (t_phase < 0) throw DomainError("dephase_rejection: t_phase must be >= 0");
  if (!coll.contains(s, start))
    throw DomainError("dephase_rejection: start state not in set");

  DephasingOutcome out;
  out.samples.assign(static_cast<std::size_t>(n_samples), start);
  if (t_phase == 0) return out;

  std::vector<std::int64_t> work(static_cast<std::size_t>(n_samples), 0);
  std::vector<std::int64_t> restarts(static_cast<std::size_t>(n_samples), 0);
  std::vector<int> failed(static_cast<std::size_t>(n_samples), 0);

  auto one_walker = [&](std::size_t i) {
    RngStream stream = rng.stream(StreamContext::kDephase,
                                  static_cast<std::uint32_t>(i));
    for (;;) {
      State x = start;
      bool survived = true;
      for (std::int64_t step = 0; step < t_phase; ++step) {
        x = kernel.sample_step(x, stream);
        ++work[i];
        if (!coll.contains(s, x)) {
          survived = false;
          break;
        }
      }
      if (survived) {
        out.samples[i] = x;
        return;
      }
      if (++restarts[i] > settings.restart_cap) {
        failed[i] = 1;
        return;
      }
    }
  };

  if (pool != nullptr) {
    pool->run(static_cast<std::size_t>(n_samples), one_walker);
  } else {
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_samples); ++i)
      one_walker(i);
  }

  for (std::size_t i = 0; i < static_cast<std::size_t>(n_samples); ++i) {
    out.work += work[i];
    out.restarts += restarts[i];
    if (failed[i] != 0)
      throw BudgetError(
          "dephase_rejection: restart budget exhausted in set '" +
          coll.set_name(s) +
          "'; consider Fleming-Viot dephasing for this set");
  }
  return out;
}

DephasingOutcome dephase_fleming_viot(const ChainKernel& kernel,
                                      const MetastableCollection& coll, SetId s,
                                      int n_samples, std::int64_t t_phase,
                                      State start, const RngLineage& rng,
                                      WorkerPool* pool) {
  if (n_samples < 2) throw DomainError("dephase_fleming_viot: needs N >= 2 walkers");
  if (t_phase < 0) throw DomainError("dephase_fleming_viot: t_phase must be >= 0");
  if (!coll.contains(s, start))
    throw DomainError("dephase_fleming_viot: start state not in set");

  const auto n = static_cast<std::size_t>(n_samples);
  DephasingOutcome out;
  out.samples.assign(n, start);
  if (t_phase == 0) return out;

  std::vector<RngStream> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    streams.push_back(rng.stream(StreamContext::kDephase,
                                 static_cast<std::uint32_t>(i)));

  std::vector<State> next(n);
  std::vector<char> in_set(n, 1);
  std::vector<std::uint32_t> survivors;
  survivors.reserve(n);

  auto advance = [&](std::size_t i) {
    next[i] = kernel.sample_step(out.samples[i], streams[i]);
    in_set[i] = coll.contains(s, next[i]) ? 1 : 0;
  };

  for (std::int64_t step = 0; step < t_phase; ++step) {
    if (pool != nullptr) {
      pool->run(n, advance); // per-step barrier
    } else {
      for (std::size_t i = 0; i < n; ++i) advance(i);
    }
    survivors.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (in_set[i] != 0) survivors.push_back(static_cast<std::uint32_t>(i));

    if (survivors.empty()) {
      ++out.extinctions;
      std::fill(next.begin(), next.end(), start);
    } else if (survivors.size() < n) {
      // resample exited walkers in index order, each from its own stream
      for (std::size_t i = 0; i < n; ++i) {
        if (in_set[i] != 0) continue;
        const std::uint64_t pick = streams[i].below(survivors.size());
        next[i] = next[survivors[static_cast<std::size_t>(pick)]];
      }
    }
    out.samples.swap(next);
  }
  out.work = static_cast<std::int64_t>(n) * t_phase;
  return out;
}

const FiniteDistribution& QsdCache::get(SetId s) {
  auto it = cache_.find(s);
  if (it == cache_.end())
    it = cache_.emplace(s, exact_qsd(kernel_, coll_, s)).first;
  return it->second;
}

DephasingOutcome dephase_exact(const ChainKernel& kernel, SetId s, int n_samples,
                               const RngLineage& rng, QsdCache& cache) {
  if (!kernel.is_finite())
    throw UnsupportedError("dephase_exact: finite kernel required");
  if (n_samples < 1) throw DomainError("dephase_exact: n_samples must be >= 1");
  const CdfSampler sampler(cache.get(s));
  RngStream stream = rng.stream(StreamContext::kDephase, 0);
  DephasingOutcome out;
  out.samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) out.samples.push_back(sampler.sample(stream));
  return out;
}

} // namespace parrep
