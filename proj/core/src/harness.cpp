#include "parrep/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

#include "parrep/errors.hpp"
#include "parrep/oracles.hpp"
#include "parrep/stats.hpp"

namespace parrep {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw NumericError("failed to format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view sv, const std::string& what) {
  double v{};
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size())
    throw ConfigError("bad floating-point value for " + what + ": '" +
                      std::string(sv) + "'");
  return v;
}

std::int64_t parse_int(std::string_view sv, const std::string& what) {
  std::int64_t v{};
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size())
    throw ConfigError("bad integer value for " + what + ": '" + std::string(sv) +
                      "'");
  return v;
}

std::uint64_t parse_u64(std::string_view sv, const std::string& what) {
  std::uint64_t v{};
  const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size())
    throw ConfigError("bad unsigned value for " + what + ": '" + std::string(sv) +
                      "'");
  return v;
}

bool parse_bool(const std::string& sv, const std::string& what) {
  if (sv == "true" || sv == "1" || sv == "yes" || sv == "on") return true;
  if (sv == "false" || sv == "0" || sv == "no" || sv == "off") return false;
  throw ConfigError("bad boolean value for " + what + ": '" + sv + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string token;
  for (char c : value) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!token.empty()) items.push_back(std::move(token));
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) items.push_back(std::move(token));
  return items;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

DephasingMode parse_dephasing(const std::string& v) {
  if (v == "rejection") return DephasingMode::kRejection;
  if (v == "fleming_viot") return DephasingMode::kFlemingViot;
  if (v == "exact") return DephasingMode::kExact;
  throw ConfigError("dephasing must be rejection, fleming_viot or exact, got '" +
                    v + "'");
}

} // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in,
                                         const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
  }

  static const std::set<std::string> known = {
      "model",          "model_file",     "sweep",
      "sweep_values",   "t_corr_base",    "t_corr_factors",
      "t_phase_factors", "n_replicas",    "t_poll",
      "stop_t_sim",     "trials",         "seed",
      "dephasing",      "idealized",      "trace",
      "initial_state",  "rejection_restart_cap", "decorr_step_cap",
      "output"};
  for (const auto& [key, value] : kv)
    if (known.find(key) == known.end())
      throw ConfigError(origin + ": unknown key '" + key + "'");

  auto get = [&kv, &origin](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw ConfigError(origin + ": missing required key '" + key + "'");
    return it->second;
  };
  auto has = [&kv](const std::string& key) { return kv.count(key) != 0; };

  ExperimentConfig cfg;
  cfg.model = get("model");
  if (cfg.model != "entropic" && cfg.model != "biased" && cfg.model != "custom")
    throw ConfigError(origin + ": model must be entropic, biased or custom");
  if (cfg.model == "custom") {
    cfg.model_file = get("model_file");
  } else if (has("model_file")) {
    throw ConfigError(origin + ": model_file is only valid with model = custom");
  }

  const std::string sweep = get("sweep");
  if (sweep == "t_corr_base")
    cfg.sweep = SweepVariable::kTCorrBase;
  else if (sweep == "n_replicas")
    cfg.sweep = SweepVariable::kNReplicas;
  else
    throw ConfigError(origin + ": sweep must be t_corr_base or n_replicas");

  for (const std::string& item : split_list(get("sweep_values"))) {
    const std::int64_t v = parse_int(item, "sweep_values");
    if (v < 1) throw ConfigError(origin + ": sweep values must be >= 1");
    cfg.sweep_values.push_back(v);
  }
  if (cfg.sweep_values.empty())
    throw ConfigError(origin + ": sweep_values must not be empty");

  if (cfg.sweep == SweepVariable::kTCorrBase) {
    if (has("t_corr_base"))
      throw ConfigError(origin + ": t_corr_base conflicts with sweeping it");
    cfg.n_replicas = static_cast<int>(parse_int(get("n_replicas"), "n_replicas"));
  } else {
    if (has("n_replicas"))
      throw ConfigError(origin + ": n_replicas conflicts with sweeping it");
    cfg.t_corr_base = parse_int(get("t_corr_base"), "t_corr_base");
    if (cfg.t_corr_base < 1)
      throw ConfigError(origin + ": t_corr_base must be >= 1");
  }

  if (has("t_corr_factors"))
    for (const std::string& item : split_list(kv.at("t_corr_factors")))
      cfg.t_corr_factors.push_back(parse_double(item, "t_corr_factors"));
  if (has("t_phase_factors"))
    for (const std::string& item : split_list(kv.at("t_phase_factors")))
      cfg.t_phase_factors.push_back(parse_double(item, "t_phase_factors"));

  if (has("t_poll")) cfg.t_poll = parse_int(kv.at("t_poll"), "t_poll");
  if (cfg.t_poll < 1) throw ConfigError(origin + ": t_poll must be >= 1");
  cfg.stop_t_sim = parse_int(get("stop_t_sim"), "stop_t_sim");
  if (cfg.stop_t_sim < 1) throw ConfigError(origin + ": stop_t_sim must be >= 1");
  cfg.trials = static_cast<int>(parse_int(get("trials"), "trials"));
  if (cfg.trials < 1) throw ConfigError(origin + ": trials must be >= 1");
  cfg.seed = parse_u64(get("seed"), "seed");
  if (has("dephasing")) cfg.dephasing = parse_dephasing(kv.at("dephasing"));
  if (has("idealized")) cfg.idealized = parse_bool(kv.at("idealized"), "idealized");
  if (has("trace")) cfg.trace = parse_bool(kv.at("trace"), "trace");
  if (has("initial_state"))
    cfg.initial_state = parse_int(kv.at("initial_state"), "initial_state");
  if (has("rejection_restart_cap"))
    cfg.rejection_restart_cap =
        parse_int(kv.at("rejection_restart_cap"), "rejection_restart_cap");
  if (has("decorr_step_cap"))
    cfg.decorr_step_cap = parse_int(kv.at("decorr_step_cap"), "decorr_step_cap");
  if (has("output")) cfg.output = kv.at("output");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

ModelBundle make_model(const ExperimentConfig& cfg) {
  if (cfg.model == "entropic") return entropic_model();
  if (cfg.model == "biased") return biased_model();
  return load_matrix_model(cfg.model_file);
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed,
                                std::size_t sweep_index, std::int64_t trial) {
  RngStream stream(master_seed,
                   StreamId{StreamContext::kTrialSeed,
                            static_cast<std::uint32_t>(sweep_index),
                            static_cast<std::uint64_t>(trial)});
  return stream.next_u64();
}

namespace {

MetastableCollection build_collection(const ExperimentConfig& cfg,
                                      const ModelBundle& model,
                                      std::int64_t t_corr_base) {
  const std::size_t n_sets = model.sets.size();
  std::vector<double> corr = cfg.t_corr_factors;
  if (corr.empty()) corr.assign(n_sets, 1.0);
  if (corr.size() != n_sets)
    throw ConfigError("t_corr_factors needs one entry per set (" +
                      std::to_string(n_sets) + ")");
  std::vector<double> phase = cfg.t_phase_factors;
  if (phase.empty()) phase = corr; // coupling T_phase = T_corr
  if (phase.size() != n_sets)
    throw ConfigError("t_phase_factors needs one entry per set (" +
                      std::to_string(n_sets) + ")");

  std::vector<MetastableCollection::Timing> timing(n_sets);
  for (std::size_t i = 0; i < n_sets; ++i) {
    timing[i].t_corr = std::max<std::int64_t>(
        1, std::llround(corr[i] * static_cast<double>(t_corr_base)));
    timing[i].t_phase = std::max<std::int64_t>(
        1, std::llround(phase[i] * static_cast<double>(t_corr_base)));
  }
  return MetastableCollection(model.kernel->n_states(), model.sets, timing);
}

} // namespace

TrialRecord run_single_trial(const ExperimentConfig& cfg,
                             const ModelBundle& model, QsdCache& cache,
                             std::size_t sweep_index, std::int64_t trial,
                             WorkerPool* pool) {
  const std::int64_t sweep_value = cfg.sweep_values.at(sweep_index);
  const std::int64_t t_corr_base =
      cfg.sweep == SweepVariable::kTCorrBase ? sweep_value : cfg.t_corr_base;
  const int n_replicas = cfg.sweep == SweepVariable::kNReplicas
                             ? static_cast<int>(sweep_value)
                             : cfg.n_replicas;

  const MetastableCollection coll = build_collection(cfg, model, t_corr_base);
  validate(coll, *model.kernel);

  ParRepConfig pcfg;
  pcfg.n_replicas = n_replicas;
  pcfg.t_poll = cfg.t_poll;
  pcfg.dephasing = cfg.dephasing;
  pcfg.stop_t_sim = cfg.stop_t_sim;
  pcfg.observables = model.observables;
  pcfg.idealized_decorrelation = cfg.idealized;
  pcfg.record_trace = cfg.trace;
  pcfg.rejection_restart_cap = cfg.rejection_restart_cap;
  pcfg.decorr_step_cap = cfg.decorr_step_cap;

  const std::uint64_t trial_seed = derive_trial_seed(cfg.seed, sweep_index, trial);
  Engine engine(*model.kernel, coll, pcfg, trial_seed, pool, &cache);
  const RunResult run = engine.run(State{cfg.initial_state});

  TrialRecord rec;
  rec.trial = trial;
  rec.sweep_value = sweep_value;
  rec.estimates = run.estimates;
  rec.t_sim = run.acc.t_sim;
  rec.wall_clock = run.acc.wall_clock;
  rec.speedup = speedup(run.acc);
  rec.n_decorr = run.acc.n_decorr_steps;
  rec.n_par_steps = run.acc.n_parallel_steps;
  rec.n_par_loops = run.acc.n_parallel_loops;
  rec.seed = trial_seed;
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, WorkerPool* pool) {
  const ModelBundle model = make_model(cfg);
  if (model.observables.empty())
    throw ConfigError("model '" + model.name + "' declares no observables");

  // QSDs depend only on (kernel, membership); share the solves across sweep
  // values and trials. The collection held by the cache carries placeholder
  // timings, which play no role in the QSD.
  const MetastableCollection cache_coll = build_collection(cfg, model, 1);
  QsdCache cache(*model.kernel, cache_coll);

  ExperimentResult result;
  for (const Observable& obs : model.observables)
    result.estimate_names.push_back(obs.name);

  for (std::size_t si = 0; si < cfg.sweep_values.size(); ++si) {
    for (std::int64_t trial = 0; trial < cfg.trials; ++trial)
      result.records.push_back(
          run_single_trial(cfg, model, cache, si, trial, pool));

    SweepSummary summary;
    summary.sweep_value = cfg.sweep_values[si];
    const std::size_t first = result.records.size() - cfg.trials;
    std::vector<double> column(static_cast<std::size_t>(cfg.trials));
    auto stats_of = [&](auto&& getter, double& out_mean, double& out_std) {
      for (std::size_t t = 0; t < column.size(); ++t)
        column[t] = getter(result.records[first + t]);
      out_mean = mean(column);
      out_std = cfg.trials > 1 ? sample_std(column) : 0.0;
    };
    summary.estimate_mean.resize(model.observables.size());
    summary.estimate_std.resize(model.observables.size());
    for (std::size_t k = 0; k < model.observables.size(); ++k)
      stats_of([k](const TrialRecord& r) { return r.estimates[k]; },
               summary.estimate_mean[k], summary.estimate_std[k]);
    stats_of([](const TrialRecord& r) { return r.speedup; },
             summary.speedup_mean, summary.speedup_std);
    stats_of([](const TrialRecord& r) { return static_cast<double>(r.n_decorr); },
             summary.n_decorr_mean, summary.n_decorr_std);
    stats_of(
        [](const TrialRecord& r) { return static_cast<double>(r.n_par_loops); },
        summary.n_par_loops_mean, summary.n_par_loops_std);
    result.summaries.push_back(std::move(summary));
  }

  if (!cfg.output.empty()) {
    std::ofstream os(cfg.output, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file '" + cfg.output + "'");
    write_csv(result, os);
    if (!os) throw ConfigError("failed writing output file '" + cfg.output + "'");
  }
  return result;
}

void write_csv(const ExperimentResult& result, std::ostream& os) {
  os << "trial,sweep";
  for (const std::string& name : result.estimate_names) os << ",estimate_" << name;
  os << ",T_sim,wall_clock,speedup,n_decorr,n_par_steps,n_par_loops,seed\n";
  for (const TrialRecord& r : result.records) {
    os << r.trial << ',' << r.sweep_value;
    for (double e : r.estimates) os << ',' << format_double(e);
    os << ',' << r.t_sim << ',' << r.wall_clock << ',' << format_double(r.speedup)
       << ',' << r.n_decorr << ',' << r.n_par_steps << ',' << r.n_par_loops << ','
       << r.seed << '\n';
  }
}

std::string csv_string(const ExperimentResult& result) {
  std::ostringstream os;
  write_csv(result, os);
  return os.str();
}

CsvContent read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: missing header");
  const std::vector<std::string> header = [&line] {
    std::vector<std::string> cols;
    std::string token;
    std::istringstream hs(line);
    while (std::getline(hs, token, ',')) cols.push_back(token);
    return cols;
  }();
  if (header.size() < 9 || header[0] != "trial" || header[1] != "sweep")
    throw ConfigError("csv: unexpected header");

  CsvContent content;
  const std::size_t n_estimates = header.size() - 9;
  for (std::size_t k = 0; k < n_estimates; ++k) {
    const std::string& col = header[2 + k];
    if (col.rfind("estimate_", 0) != 0)
      throw ConfigError("csv: expected estimate_* column, got '" + col + "'");
    content.estimate_names.push_back(col.substr(9));
  }

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string token;
    std::istringstream ls(line);
    while (std::getline(ls, token, ',')) cells.push_back(token);
    if (cells.size() != header.size())
      throw ConfigError("csv: row has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(header.size()));
    TrialRecord r;
    std::size_t c = 0;
    r.trial = parse_int(cells[c++], "trial");
    r.sweep_value = parse_int(cells[c++], "sweep");
    for (std::size_t k = 0; k < n_estimates; ++k)
      r.estimates.push_back(parse_double(cells[c++], "estimate"));
    r.t_sim = parse_int(cells[c++], "T_sim");
    r.wall_clock = parse_int(cells[c++], "wall_clock");
    r.speedup = parse_double(cells[c++], "speedup");
    r.n_decorr = parse_int(cells[c++], "n_decorr");
    r.n_par_steps = parse_int(cells[c++], "n_par_steps");
    r.n_par_loops = parse_int(cells[c++], "n_par_loops");
    r.seed = parse_u64(cells[c++], "seed");
    content.records.push_back(std::move(r));
  }
  return content;
}

std::optional<double> OracleValues::value(const std::string& name) const {
  for (const auto& [n, v] : values)
    if (n == name) return v;
  return std::nullopt;
}

OracleValues oracle_values(const ModelBundle& model) {
  const FiniteDistribution pi = exact_equilibrium(*model.kernel);
  OracleValues out;
  out.model = model.name;
  for (const Observable& obs : model.observables)
    out.values.emplace_back(obs.name, expectation(pi, obs));
  return out;
}

void write_reference(const OracleValues& values, std::ostream& os) {
  os << "model = " << values.model << '\n';
  for (const auto& [name, value] : values.values)
    os << name << " = " << format_double(value) << '\n';
}

OracleValues read_reference(std::istream& is, const std::string& origin) {
  OracleValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'name = value'");
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key == "model")
      out.model = value;
    else
      out.values.emplace_back(key, parse_double(value, key));
  }
  if (out.model.empty())
    throw ConfigError(origin + ": reference file missing 'model' line");
  return out;
}

std::vector<ComparisonRow> compare_against_oracle(const ExperimentResult& result,
                                                  const OracleValues& oracle) {
  std::vector<ComparisonRow> rows;
  for (const SweepSummary& s : result.summaries) {
    std::int64_t trials = 0;
    for (const TrialRecord& r : result.records)
      if (r.sweep_value == s.sweep_value) ++trials;
    for (std::size_t k = 0; k < result.estimate_names.size(); ++k) {
      const auto expected = oracle.value(result.estimate_names[k]);
      if (!expected)
        throw ConfigError("no oracle value for observable '" +
                          result.estimate_names[k] + "'");
      ComparisonRow row;
      row.sweep_value = s.sweep_value;
      row.observable = result.estimate_names[k];
      row.mean = s.estimate_mean[k];
      row.std_dev = s.estimate_std[k];
      row.bias = row.mean - *expected;
      const double se =
          row.std_dev / std::sqrt(static_cast<double>(std::max<std::int64_t>(trials, 1)));
      if (se > 0.0)
        row.z = row.bias / se;
      else
        row.z = row.bias == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      row.pass = std::abs(row.z) <= 3.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

} // namespace parrep
