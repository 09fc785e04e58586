#include "parrep/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "parrep/errors.hpp"
#include "parrep/tolerances.hpp"

namespace parrep {

// ---------------------------------------------------------------------------
// EntropicWalk

EntropicWalk::Coord EntropicWalk::coord_of(State s) {
  const std::int64_t i = s.index;
  if (i < 0 || i >= kTotalStates) throw DomainError("entropic: state out of range");
  if (i < kLeftStates)
    return {static_cast<int>(i / 100) - 100, static_cast<int>(i % 100) - 100};
  const std::int64_t j = i - kLeftStates;
  return {static_cast<int>(j / 200) + 1, static_cast<int>(j % 200) + 1};
}

State EntropicWalk::state_of(int x, int y) {
  if (x >= -100 && x <= -1 && y >= -100 && y <= -1)
    return State{static_cast<std::int64_t>(x + 100) * 100 + (y + 100)};
  if (x >= 1 && x <= 200 && y >= 1 && y <= 200)
    return State{kLeftStates + static_cast<std::int64_t>(x - 1) * 200 + (y - 1)};
  throw DomainError("entropic: coordinates outside the two boxes");
}

// Directions: 0 = right (+x), 1 = left (-x), 2 = up (+y), 3 = down (-y).
State EntropicWalk::propose(Coord c, int direction) {
  int x = c.x, y = c.y;
  switch (direction) {
    case 0: ++x; break;
    case 1: --x; break;
    case 2: ++y; break;
    default: --y; break;
  }
  const bool in_left = x >= -100 && x <= -1 && y >= -100 && y <= -1;
  const bool in_right = x >= 1 && x <= 200 && y >= 1 && y <= 200;
  if (in_left || in_right) return state_of(x, y);
  // passage transitions between the boxes
  if (direction == 0 && c.x == -1 && c.y == -1) return state_of(1, 1);
  if (direction == 0 && c.x == -1 && c.y == -100) return state_of(1, 100);
  if (direction == 1 && c.x == 1 && c.y == 1) return state_of(-1, -1);
  if (direction == 1 && c.x == 1 && c.y == 100) return state_of(-1, -100);
  return state_of(c.x, c.y); // rejected move, stay put
}

State EntropicWalk::sample_step(State x, RngStream& rng) const {
  check_state(x);
  return propose(coord_of(x), static_cast<int>(rng.below(4)));
}

void EntropicWalk::row_entries(State x, std::vector<RowEntry>& out) const {
  check_state(x);
  const Coord c = coord_of(x);
  double stay = 0.0;
  for (int d = 0; d < 4; ++d) {
    const State to = propose(c, d);
    if (to == x)
      stay += 0.25;
    else
      out.push_back({to.index, 0.25});
  }
  if (stay > 0.0) out.push_back({x.index, stay});
}

// ---------------------------------------------------------------------------
// BiasedWalk

double BiasedWalk::p_left(int x) {
  if (x <= 15) return 0.60;
  if (x <= 30) return 0.40;
  if (x <= 45) return 0.65;
  return 0.35;
}

State BiasedWalk::sample_step(State s, RngStream& rng) const {
  check_state(s);
  const int x = static_cast<int>(s.index) + 1;
  const int next = rng.uniform01() < p_left(x) ? std::max(1, x - 1)
                                               : std::min(60, x + 1);
  return State{next - 1};
}

void BiasedWalk::row_entries(State s, std::vector<RowEntry>& out) const {
  check_state(s);
  const int x = static_cast<int>(s.index) + 1;
  const double p = p_left(x);
  const int left = std::max(1, x - 1);
  const int right = std::min(60, x + 1);
  if (left == right) {
    out.push_back({left - 1, 1.0});
  } else if (left == x) {
    out.push_back({x - 1, p});
    out.push_back({right - 1, 1.0 - p});
  } else if (right == x) {
    out.push_back({left - 1, p});
    out.push_back({x - 1, 1.0 - p});
  } else {
    out.push_back({left - 1, p});
    out.push_back({right - 1, 1.0 - p});
  }
}

// ---------------------------------------------------------------------------
// MatrixKernel

MatrixKernel::MatrixKernel(std::string name, std::vector<std::vector<double>> rows)
    : name_(std::move(name)), rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw ConfigError(name_ + ": empty transition matrix");
  cdf_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows_[i].size() != n)
      throw ConfigError(name_ + ": matrix is not square at row " + std::to_string(i));
    double sum = 0.0;
    cdf_[i].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (rows_[i][j] < 0.0)
        throw ConfigError(name_ + ": negative probability at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");
      sum += rows_[i][j];
      cdf_[i][j] = sum;
    }
    if (std::abs(sum - 1.0) > kTol.row_sum)
      throw ConfigError(name_ + ": row " + std::to_string(i) + " sums to " +
                        std::to_string(sum));
    cdf_[i].back() = 1.0;
  }
}

State MatrixKernel::sample_step(State x, RngStream& rng) const {
  check_state(x);
  const auto& cdf = cdf_[static_cast<std::size_t>(x.index)];
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto j = static_cast<std::int64_t>(it - cdf.begin());
  return State{std::min<std::int64_t>(j, n_states() - 1)};
}

void MatrixKernel::row_entries(State x, std::vector<RowEntry>& out) const {
  check_state(x);
  const auto& row = rows_[static_cast<std::size_t>(x.index)];
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j] > 0.0) out.push_back({static_cast<std::int64_t>(j), row[j]});
}

// ---------------------------------------------------------------------------
// Model bundles

ModelBundle entropic_model() {
  ModelBundle m;
  m.name = "entropic";
  m.kernel = std::make_shared<EntropicWalk>();
  SetSpec s1{"S1", {}};
  SetSpec s2{"S2", {}};
  s1.members.resize(EntropicWalk::kLeftStates);
  for (std::int64_t i = 0; i < EntropicWalk::kLeftStates; ++i) s1.members[i] = i;
  s2.members.resize(EntropicWalk::kTotalStates - EntropicWalk::kLeftStates);
  for (std::int64_t i = EntropicWalk::kLeftStates; i < EntropicWalk::kTotalStates; ++i)
    s2.members[i - EntropicWalk::kLeftStates] = i;
  m.sets = {std::move(s1), std::move(s2)};
  m.observables = {
      {"x", [](State s) { return static_cast<double>(EntropicWalk::coord_of(s).x); }},
      {"y", [](State s) { return static_cast<double>(EntropicWalk::coord_of(s).y); }},
      {"f", [](State s) {
         const int y = EntropicWalk::coord_of(s).y;
         return y >= 101 && y <= 200 ? 1.0 : 0.0;
       }},
  };
  return m;
}

ModelBundle biased_model() {
  ModelBundle m;
  m.name = "biased";
  m.kernel = std::make_shared<BiasedWalk>();
  auto range = [](const char* name, int lo, int hi) {
    SetSpec s{name, {}};
    for (int x = lo; x <= hi; ++x) s.members.push_back(x - 1);
    return s;
  };
  m.sets = {range("S1", 1, 15), range("S2", 16, 45), range("S3", 46, 60)};
  m.observables = {
      {"x", [](State s) { return static_cast<double>(s.index + 1); }},
      {"f", [](State s) { return s.index + 1 >= 31 ? 1.0 : 0.0; }},
  };
  return m;
}

ModelBundle parse_matrix_model(std::istream& in, const std::string& origin) {
  ModelBundle m;
  m.name = "custom";
  std::vector<std::vector<double>> rows;
  std::int64_t n = -1;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError(origin + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "states") {
      if (!(ls >> n) || n <= 0) throw fail("expected a positive state count");
    } else if (word == "row") {
      if (n < 0) throw fail("'states' must come before 'row'");
      std::vector<double> row;
      double p;
      while (ls >> p) row.push_back(p);
      if (static_cast<std::int64_t>(row.size()) != n)
        throw fail("row has " + std::to_string(row.size()) + " entries, expected " +
                   std::to_string(n));
      rows.push_back(std::move(row));
    } else if (word == "set") {
      SetSpec spec;
      if (!(ls >> spec.name)) throw fail("set needs a name");
      std::int64_t idx;
      while (ls >> idx) spec.members.push_back(idx);
      if (spec.members.empty()) throw fail("set '" + spec.name + "' has no members");
      m.sets.push_back(std::move(spec));
    } else if (word == "observable") {
      std::string obs_name;
      if (!(ls >> obs_name)) throw fail("observable needs a name");
      auto values = std::make_shared<std::vector<double>>();
      double v;
      while (ls >> v) values->push_back(v);
      if (static_cast<std::int64_t>(values->size()) != n)
        throw fail("observable '" + obs_name + "' needs one value per state");
      m.observables.push_back(
          {obs_name, [values](State s) { return (*values)[static_cast<std::size_t>(s.index)]; }});
    } else {
      throw fail("unknown directive '" + word + "'");
    }
  }
  if (n < 0) throw ConfigError(origin + ": missing 'states' line");
  if (static_cast<std::int64_t>(rows.size()) != n)
    throw ConfigError(origin + ": got " + std::to_string(rows.size()) +
                      " rows, expected " + std::to_string(n));
  if (m.sets.empty()) throw ConfigError(origin + ": no metastable sets declared");
  try {
    m.kernel = std::make_shared<MatrixKernel>("custom", std::move(rows));
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return m;
}

ModelBundle load_matrix_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  return parse_matrix_model(in, path);
}

} // namespace parrep
