#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace parrep {

double mean(std::span<const double> xs);
double sample_std(std::span<const double> xs); // n-1 denominator
double standard_error(std::span<const double> xs);

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 0;
  double pvalue = 1.0;
};

/// Upper-tail probability of the chi-squared distribution.
double chi_square_pvalue(double statistic, int df);

/// Goodness of fit of observed cell counts against cell probabilities
/// (probabilities need not include an explicit tail; the complement of their
/// sum is appended as a final cell when positive).
ChiSquareResult chi_square_gof(std::span<const std::int64_t> counts,
                               std::span<const double> probs);

/// Independence test on an r x c contingency table. All-zero rows and columns
/// are dropped; a table left with fewer than two rows or columns is reported
/// as trivially independent (df = 0, p = 1).
ChiSquareResult chi_square_independence(
    const std::vector<std::vector<std::int64_t>>& table);

/// Two-sample test of equal cell distributions.
ChiSquareResult two_sample_chi_square(std::span<const std::int64_t> counts_a,
                                      std::span<const std::int64_t> counts_b);

/// Bucket boundaries splitting Geometric(p) on {1, 2, ...} into n_buckets
/// roughly equiprobable cells. Returns the right edges of all but the last
/// (unbounded) bucket; fewer edges are returned when quantiles coincide.
std::vector<std::int64_t> geometric_bucket_edges(double p, int n_buckets);

/// Exact cell probabilities of Geometric(p) for the buckets defined by edges.
std::vector<double> geometric_bucket_probs(double p,
                                           std::span<const std::int64_t> edges);

/// Index of the bucket containing value, given right edges as above.
std::size_t bucket_of(std::int64_t value, std::span<const std::int64_t> edges);

} // namespace parrep
