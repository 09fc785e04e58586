#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "parrep/distribution.hpp"
#include "parrep/rng.hpp"
#include "parrep/state.hpp"

namespace parrep {

/// One nonzero entry of a transition row.
struct RowEntry {
  std::int64_t state;
  double prob;
};

/// A sampleable Markov transition rule. Kernels are immutable after
/// construction and safely shareable across threads; all randomness comes
/// from the stream passed to sample_step, so replaying a stream replays the
/// transition.
///
/// Finite kernels additionally enumerate their states 0..n_states()-1 and
/// expose exact row access for the oracle machinery.
class ChainKernel {
public:
  virtual ~ChainKernel() = default;

  virtual State sample_step(State x, RngStream& rng) const = 0;

  virtual bool is_finite() const noexcept { return false; }

  /// Number of states; throws UnsupportedError for non-finite kernels.
  virtual std::int64_t n_states() const;

  /// Appends the nonzero entries of row x (throws for non-finite kernels).
  virtual void row_entries(State x, std::vector<RowEntry>& out) const;

  virtual std::string name() const { return "chain"; }

  /// Dense transition row at x, built from row_entries.
  FiniteDistribution row(State x) const;

  /// Throws DomainError if x is not a valid state of a finite kernel.
  void check_state(State x) const;
};

using TransitionMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Exact one-step transition matrix of a finite kernel. Every row is checked
/// to sum to 1 within Tolerances::row_sum.
TransitionMatrix transition_matrix(const ChainKernel& kernel);

/// Checks row-stochasticity of every row; throws NumericError on violation.
void check_rows_stochastic(const ChainKernel& kernel);

} // namespace parrep
