// Experiment runner for the parallel replica library: executes config-driven
// multi-trial sweeps, exports exact reference values, and runs the built-in
// invariant suite.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "parrep/errors.hpp"
#include "parrep/harness.hpp"
#include "parrep/validation.hpp"
#include "parrep/worker_pool.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

parrep::ModelBundle model_by_name(const std::string& model,
                                  const std::string& model_file) {
  if (model == "entropic") return parrep::entropic_model();
  if (model == "biased") return parrep::biased_model();
  if (model == "custom") {
    if (model_file.empty())
      throw parrep::ConfigError("--model-file is required with --model custom");
    return parrep::load_matrix_model(model_file);
  }
  throw parrep::ConfigError("unknown model '" + model + "'");
}

int run_command(const std::string& config_path, const std::string& check_path,
                unsigned workers) {
  const parrep::ExperimentConfig cfg = parrep::ExperimentConfig::load(config_path);
  parrep::WorkerPool pool(workers);
  const parrep::ExperimentResult result = parrep::run_experiment(cfg, &pool);

  std::cout << "sweep";
  for (const std::string& name : result.estimate_names)
    std::cout << "  mean_" << name << " (std)";
  std::cout << "  speedup  loops\n";
  for (const parrep::SweepSummary& s : result.summaries) {
    std::cout << s.sweep_value;
    for (std::size_t k = 0; k < s.estimate_mean.size(); ++k)
      std::cout << "  " << s.estimate_mean[k] << " (" << s.estimate_std[k] << ")";
    std::cout << "  " << s.speedup_mean << "  " << s.n_par_loops_mean << '\n';
  }
  if (!cfg.output.empty())
    std::cout << "wrote " << result.records.size() << " records to " << cfg.output
              << '\n';

  if (!check_path.empty()) {
    std::ifstream is(check_path);
    if (!is)
      throw parrep::ConfigError("cannot open reference file '" + check_path + "'");
    const parrep::OracleValues oracle = parrep::read_reference(is, check_path);
    bool all_pass = true;
    for (const parrep::ComparisonRow& row :
         parrep::compare_against_oracle(result, oracle)) {
      std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << "sweep=" << row.sweep_value
                << " " << row.observable << ": mean " << row.mean << ", bias "
                << row.bias << ", z " << row.z << '\n';
      all_pass = all_pass && row.pass;
    }
    if (!all_pass) {
      std::cerr << "oracle comparison failed\n";
      return kExitNumeric;
    }
  }
  return kExitOk;
}

int oracle_command(const std::string& model, const std::string& model_file,
                   const std::string& output) {
  const parrep::ModelBundle bundle = model_by_name(model, model_file);
  const parrep::OracleValues values = parrep::oracle_values(bundle);
  if (output.empty() || output == "-") {
    parrep::write_reference(values, std::cout);
  } else {
    std::ofstream os(output, std::ios::binary);
    if (!os) throw parrep::ConfigError("cannot open output file '" + output + "'");
    parrep::write_reference(values, os);
    std::cout << "wrote reference values to " << output << '\n';
  }
  return kExitOk;
}

int validate_command(const std::string& model, const std::string& model_file,
                     int events, std::uint64_t seed, unsigned workers) {
  const parrep::ModelBundle bundle = model_by_name(model, model_file);
  std::vector<parrep::MetastableCollection::Timing> timing(bundle.sets.size(),
                                                           {1, 1});
  const parrep::MetastableCollection coll(bundle.kernel->n_states(), bundle.sets,
                                          timing);
  parrep::WorkerPool pool(workers);
  bool all_pass = true;
  for (const parrep::CheckResult& check :
       parrep::invariant_battery(*bundle.kernel, coll, events, seed, &pool)) {
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name << ": "
              << check.detail << '\n';
    all_pass = all_pass && check.pass;
  }
  return all_pass ? kExitOk : kExitNumeric;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel replica simulation of metastable Markov chains"};
  app.require_subcommand(1);
  std::cout << std::setprecision(12);

  unsigned workers = parrep::WorkerPool::env_size();

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  std::string config_path, check_path;
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--check", check_path, "compare estimates against a reference-values file");
  run->add_option("--workers", workers, "worker pool size (default: PARREP_WORKERS or 1)");

  auto* oracle = app.add_subcommand("oracle", "write exact reference values for a model");
  std::string model = "biased", model_file, output;
  oracle->add_option("--model", model, "entropic | biased | custom")->required();
  oracle->add_option("--model-file", model_file, "matrix file for custom models");
  oracle->add_option("--output,-o", output, "output path ('-' for stdout)");

  auto* validate = app.add_subcommand("validate", "run the invariant suite for a model");
  int events = 10'000;
  std::uint64_t seed = 20140731;
  validate->add_option("--model", model, "entropic | biased | custom")->required();
  validate->add_option("--model-file", model_file, "matrix file for custom models");
  validate->add_option("--events", events, "exit events per set (0 skips the exit-law suite)");
  validate->add_option("--seed", seed, "seed for the statistical checks");
  validate->add_option("--workers", workers, "worker pool size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_command(config_path, check_path, workers);
    if (oracle->parsed()) return oracle_command(model, model_file, output);
    if (validate->parsed())
      return validate_command(model, model_file, events, seed, workers);
  } catch (const parrep::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const parrep::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const parrep::UnsupportedError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const parrep::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}
