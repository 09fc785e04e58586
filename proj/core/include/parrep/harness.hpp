#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parrep/engine.hpp"
#include "parrep/models.hpp"
#include "parrep/worker_pool.hpp"

namespace parrep {

enum class SweepVariable { kTCorrBase, kNReplicas };

/// Parsed experiment description. The on-disk format is a flat key = value
/// text file ('#' starts a comment); unknown keys are rejected. Per-set
/// decorrelation and dephasing times are factor * base, rounded to the
/// nearest integer and clamped to >= 1; t_phase_factors defaults to
/// t_corr_factors, coupling T_phase = T_corr.
struct ExperimentConfig {
  std::string model;                 // entropic | biased | custom
  std::string model_file;            // required iff model == custom
  SweepVariable sweep = SweepVariable::kTCorrBase;
  std::vector<std::int64_t> sweep_values;
  std::int64_t t_corr_base = 0;      // required when sweeping N
  std::vector<double> t_corr_factors;   // one per set; default all 1
  std::vector<double> t_phase_factors;  // default = t_corr_factors
  int n_replicas = 0;                // required when sweeping T_corr_base
  std::int64_t t_poll = 1;
  std::int64_t stop_t_sim = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  DephasingMode dephasing = DephasingMode::kFlemingViot;
  bool idealized = false;
  bool trace = false;
  std::int64_t initial_state = 0;
  std::int64_t rejection_restart_cap = 100'000;
  std::int64_t decorr_step_cap = 0;
  std::string output;                // CSV path ("" = do not write)

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig parse(std::istream& in, const std::string& origin);
};

/// One experiment trial. Fields mirror the CSV columns.
struct TrialRecord {
  std::int64_t trial = 0;
  std::int64_t sweep_value = 0;
  std::vector<double> estimates;
  std::int64_t t_sim = 0;
  std::int64_t wall_clock = 0;
  double speedup = 0.0;
  std::int64_t n_decorr = 0;
  std::int64_t n_par_steps = 0;
  std::int64_t n_par_loops = 0;
  std::uint64_t seed = 0;
};

struct SweepSummary {
  std::int64_t sweep_value = 0;
  std::vector<double> estimate_mean;
  std::vector<double> estimate_std;
  double speedup_mean = 0.0;
  double speedup_std = 0.0;
  double n_decorr_mean = 0.0;
  double n_decorr_std = 0.0;
  double n_par_loops_mean = 0.0;
  double n_par_loops_std = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> estimate_names;
  std::vector<TrialRecord> records;   // sweep-major, then trial order
  std::vector<SweepSummary> summaries;
};

/// Per-trial seed: a fixed counter-based function of the master seed, sweep
/// index and trial index, so trials are independent and order-insensitive.
std::uint64_t derive_trial_seed(std::uint64_t master_seed,
                                std::size_t sweep_index, std::int64_t trial);

/// Runs one trial and returns its record. Exposed so callers can verify that
/// execution order does not matter.
TrialRecord run_single_trial(const ExperimentConfig& cfg,
                             const ModelBundle& model, QsdCache& cache,
                             std::size_t sweep_index, std::int64_t trial,
                             WorkerPool* pool);

/// Runs all trials of all sweep values, computes per-sweep summaries and
/// writes the CSV when cfg.output is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                WorkerPool* pool = nullptr);

ModelBundle make_model(const ExperimentConfig& cfg);

/// CSV with the fixed header
/// trial,sweep,estimate_<name>...,T_sim,wall_clock,speedup,n_decorr,
/// n_par_steps,n_par_loops,seed. Doubles are written in shortest
/// round-trip form, so re-reading reproduces records exactly.
void write_csv(const ExperimentResult& result, std::ostream& os);
std::string csv_string(const ExperimentResult& result);

struct CsvContent {
  std::vector<std::string> estimate_names;
  std::vector<TrialRecord> records;
};
CsvContent read_csv(std::istream& is);

/// Exact reference values of the model observables under the stationary law.
struct OracleValues {
  std::string model;
  std::vector<std::pair<std::string, double>> values;

  std::optional<double> value(const std::string& name) const;
};

OracleValues oracle_values(const ModelBundle& model);
void write_reference(const OracleValues& values, std::ostream& os);
OracleValues read_reference(std::istream& is, const std::string& origin);

/// Per (sweep value, observable): bias against the oracle and a z-score using
/// the standard error over trials; pass means |z| <= 3.
struct ComparisonRow {
  std::int64_t sweep_value;
  std::string observable;
  double mean;
  double std_dev;
  double bias;
  double z;
  bool pass;
};

std::vector<ComparisonRow> compare_against_oracle(const ExperimentResult& result,
                                                  const OracleValues& oracle);

} // namespace parrep
