#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "parrep/engine.hpp"
#include "parrep/kernel.hpp"
#include "parrep/metastable.hpp"

namespace parrep {

/// Random walk on two square boxes joined by two one-cell passages. The left
/// box carries coordinates x, y in [-100, -1] (10,000 states), the right box
/// x, y in [1, 200] (40,000 states). Each step proposes one of the four unit
/// moves with probability 1/4; a proposal crossing a wall is rejected and the
/// walker stays put. The passages connect the left box's right-edge corners
/// to the right box's left-edge cells of matching height: (-1,-1) <-> (1,1)
/// via right/left proposals, and (-1,-100) <-> (1,100) likewise.
///
/// State enumeration (the canonical bijection used by all oracles): left box
/// first, index = (x+100)*100 + (y+100); right box at offset 10,000 with
/// index = 10000 + (x-1)*200 + (y-1).
class EntropicWalk final : public ChainKernel {
public:
  static constexpr std::int64_t kLeftStates = 10'000;
  static constexpr std::int64_t kTotalStates = 50'000;

  struct Coord {
    int x;
    int y;
  };

  static Coord coord_of(State s);
  static State state_of(int x, int y);

  State sample_step(State x, RngStream& rng) const override;
  bool is_finite() const noexcept override { return true; }
  std::int64_t n_states() const override { return kTotalStates; }
  void row_entries(State x, std::vector<RowEntry>& out) const override;
  std::string name() const override { return "entropic"; }

private:
  static State propose(Coord c, int direction);
};

/// Biased nearest-neighbour walk on {1, ..., 60}: from x the walker moves to
/// max(1, x-1) with probability p(x) and to min(60, x+1) otherwise, where
/// p is 0.6 on 1-15, 0.4 on 16-30, 0.65 on 31-45 and 0.35 on 46-60.
/// State index = x - 1.
class BiasedWalk final : public ChainKernel {
public:
  static constexpr std::int64_t kTotalStates = 60;

  static double p_left(int x); // x in 1..60

  State sample_step(State x, RngStream& rng) const override;
  bool is_finite() const noexcept override { return true; }
  std::int64_t n_states() const override { return kTotalStates; }
  void row_entries(State x, std::vector<RowEntry>& out) const override;
  std::string name() const override { return "biased"; }
};

/// Finite kernel defined by an explicit dense transition matrix. Intended for
/// small custom chains and test doubles.
class MatrixKernel final : public ChainKernel {
public:
  MatrixKernel(std::string name, std::vector<std::vector<double>> rows);

  State sample_step(State x, RngStream& rng) const override;
  bool is_finite() const noexcept override { return true; }
  std::int64_t n_states() const override { return static_cast<std::int64_t>(rows_.size()); }
  void row_entries(State x, std::vector<RowEntry>& out) const override;
  std::string name() const override { return name_; }

private:
  std::string name_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> cdf_;
};

/// A model ready for experiments: kernel, metastable set declarations and the
/// observables reported for it.
struct ModelBundle {
  std::shared_ptr<const ChainKernel> kernel;
  std::vector<SetSpec> sets;
  std::vector<Observable> observables;
  std::string name;
};

/// The two built-in benchmark models with their standard sets:
/// entropic: S1 = left box, S2 = right box; observables x, y and the
/// indicator of y in [101, 200].
/// biased: S1 = {1..15}, S2 = {16..45}, S3 = {46..60}; observables x and the
/// indicator of x in [31, 60].
ModelBundle entropic_model();
ModelBundle biased_model();

/// Loads a custom finite-matrix model from the documented text format:
///   states <n>
///   row <p0> ... <p_{n-1}>      (n lines, rows must sum to 1)
///   set <name> <index> ...      (one line per metastable set)
///   observable <name> <v0> ... <v_{n-1}>
/// Throws ConfigError on malformed input.
ModelBundle load_matrix_model(const std::string& path);
ModelBundle parse_matrix_model(std::istream& in, const std::string& origin);

} // namespace parrep
