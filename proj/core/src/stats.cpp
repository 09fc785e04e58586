#include "parrep/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "parrep/errors.hpp"

namespace parrep {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mean: empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw DomainError("sample_std: need at least two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double standard_error(std::span<const double> xs) {
  return sample_std(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double chi_square_pvalue(double statistic, int df) {
  if (df <= 0) return 1.0;
  if (!(statistic >= 0.0)) throw DomainError("chi_square_pvalue: bad statistic");
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

ChiSquareResult chi_square_gof(std::span<const std::int64_t> counts,
                               std::span<const double> probs) {
  if (counts.size() != probs.size())
    throw DomainError("chi_square_gof: counts/probs size mismatch");
  std::int64_t n = 0;
  for (std::int64_t c : counts) n += c;
  if (n <= 0) throw DomainError("chi_square_gof: empty sample");
  ChiSquareResult r;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = static_cast<double>(n) * probs[i];
    if (expected <= 0.0) {
      if (counts[i] > 0)
        throw DomainError("chi_square_gof: observation in a zero-probability cell");
      continue;
    }
    const double d = static_cast<double>(counts[i]) - expected;
    r.statistic += d * d / expected;
    ++cells;
  }
  r.df = cells - 1;
  r.pvalue = chi_square_pvalue(r.statistic, r.df);
  return r;
}

ChiSquareResult chi_square_independence(
    const std::vector<std::vector<std::int64_t>>& table) {
  std::vector<std::vector<std::int64_t>> t;
  for (const auto& row : table) {
    std::int64_t sum = 0;
    for (std::int64_t c : row) sum += c;
    if (sum > 0) t.push_back(row);
  }
  if (t.empty()) throw DomainError("chi_square_independence: empty table");
  const std::size_t n_cols = t.front().size();
  for (const auto& row : t)
    if (row.size() != n_cols)
      throw DomainError("chi_square_independence: ragged table");

  std::vector<std::int64_t> col_sum(n_cols, 0);
  std::vector<std::int64_t> row_sum(t.size(), 0);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      row_sum[i] += t[i][j];
      col_sum[j] += t[i][j];
      total += t[i][j];
    }
  }
  std::size_t live_cols = 0;
  for (std::int64_t c : col_sum)
    if (c > 0) ++live_cols;

  ChiSquareResult r;
  if (t.size() < 2 || live_cols < 2) return r; // trivially independent

  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      if (col_sum[j] == 0) continue;
      const double expected = static_cast<double>(row_sum[i]) *
                              static_cast<double>(col_sum[j]) /
                              static_cast<double>(total);
      const double d = static_cast<double>(t[i][j]) - expected;
      r.statistic += d * d / expected;
    }
  }
  r.df = static_cast<int>((t.size() - 1) * (live_cols - 1));
  r.pvalue = chi_square_pvalue(r.statistic, r.df);
  return r;
}

ChiSquareResult two_sample_chi_square(std::span<const std::int64_t> counts_a,
                                      std::span<const std::int64_t> counts_b) {
  if (counts_a.size() != counts_b.size())
    throw DomainError("two_sample_chi_square: size mismatch");
  std::int64_t na = 0, nb = 0;
  for (std::size_t i = 0; i < counts_a.size(); ++i) {
    na += counts_a[i];
    nb += counts_b[i];
  }
  if (na <= 0 || nb <= 0) throw DomainError("two_sample_chi_square: empty sample");
  ChiSquareResult r;
  int cells = 0;
  for (std::size_t i = 0; i < counts_a.size(); ++i) {
    const std::int64_t both = counts_a[i] + counts_b[i];
    if (both == 0) continue;
    const double pooled =
        static_cast<double>(both) / static_cast<double>(na + nb);
    const double ea = static_cast<double>(na) * pooled;
    const double eb = static_cast<double>(nb) * pooled;
    const double da = static_cast<double>(counts_a[i]) - ea;
    const double db = static_cast<double>(counts_b[i]) - eb;
    r.statistic += da * da / ea + db * db / eb;
    ++cells;
  }
  r.df = cells - 1;
  r.pvalue = chi_square_pvalue(r.statistic, r.df);
  return r;
}

std::vector<std::int64_t> geometric_bucket_edges(double p, int n_buckets) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("geometric_bucket_edges: p must be in (0,1)");
  if (n_buckets < 2) throw DomainError("geometric_bucket_edges: need >= 2 buckets");
  const double log_q = std::log1p(-p);
  std::vector<std::int64_t> edges;
  for (int j = 1; j < n_buckets; ++j) {
    // smallest t with CDF(t) >= j / n_buckets
    const double u = static_cast<double>(j) / n_buckets;
    const auto t = static_cast<std::int64_t>(
        std::ceil(std::log1p(-u) / log_q - 1e-12));
    const std::int64_t edge = std::max<std::int64_t>(t, 1);
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }
  return edges;
}

std::vector<double> geometric_bucket_probs(double p,
                                           std::span<const std::int64_t> edges) {
  std::vector<double> probs;
  probs.reserve(edges.size() + 1);
  auto cdf = [p](std::int64_t t) {
    return t <= 0 ? 0.0 : 1.0 - std::pow(1.0 - p, static_cast<double>(t));
  };
  double prev = 0.0;
  for (std::int64_t e : edges) {
    probs.push_back(cdf(e) - prev);
    prev = cdf(e);
  }
  probs.push_back(1.0 - prev);
  return probs;
}

std::size_t bucket_of(std::int64_t value, std::span<const std::int64_t> edges) {
  const auto it = std::lower_bound(edges.begin(), edges.end(), value);
  return static_cast<std::size_t>(it - edges.begin());
}

} // namespace parrep
