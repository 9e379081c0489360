#include "psps/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace psps {
namespace {

bool rectangular(const Scenario& s, std::size_t rows, std::size_t hours) {
  if (s.demand.size() != rows) return false;
  for (const auto& row : s.demand)
    if (row.size() != hours) return false;
  return true;
}

double l1_distance(const Scenario& a, const Scenario& b) {
  double d = 0.0;
  for (std::size_t r = 0; r < a.demand.size(); ++r)
    for (std::size_t t = 0; t < a.demand[r].size(); ++t)
      d += std::fabs(a.demand[r][t] - b.demand[r][t]);
  return d;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size() || !std::isfinite(v))
      throw ScenarioError(where + ": bad number '" + cell + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ScenarioError(where + ": bad number '" + cell + "'");
  }
}

int parse_int(const std::string& cell, const std::string& where) {
  double v = parse_number(cell, where);
  int i = static_cast<int>(std::lround(v));
  if (static_cast<double>(i) != v) throw ScenarioError(where + ": expected an integer");
  return i;
}

}  // namespace

std::vector<std::string> validate_scenarios(const ScenarioSet& s) {
  std::vector<std::string> problems;
  if (s.scenarios.empty()) problems.push_back("scenario set is empty");
  if (s.horizon < 1) problems.push_back("horizon must be at least 1");
  if (s.demand_ids.empty()) problems.push_back("demand_ids is empty");

  double total = 0.0;
  for (std::size_t i = 0; i < s.scenarios.size(); ++i) {
    const Scenario& sc = s.scenarios[i];
    std::string tag = "scenario[" + std::to_string(i) + "] (id " + std::to_string(sc.id) + ")";
    if (!(sc.probability >= 0.0 && sc.probability <= 1.0))
      problems.push_back(tag + ": probability outside [0, 1]");
    total += sc.probability;
    if (!rectangular(sc, s.demand_ids.size(), static_cast<std::size_t>(std::max(s.horizon, 0)))) {
      problems.push_back(tag + ": demand matrix is not demand_ids x horizon");
      continue;
    }
    bool clean = true;
    for (const auto& row : sc.demand)
      for (double v : row) clean = clean && std::isfinite(v) && v >= 0.0;
    if (!clean) problems.push_back(tag + ": demand values must be non-negative and finite");
  }
  if (!s.scenarios.empty() && std::fabs(total - 1.0) > 1e-9)
    problems.push_back("probabilities sum to " + fmt(total) + ", expected 1");
  return problems;
}

ScenarioSet reduce_scenarios(const ScenarioSet& base, int k) {
  if (k < 1) throw ScenarioError("reduction target must be at least 1");
  if (static_cast<int>(base.scenarios.size()) < k)
    throw ScenarioError("cannot keep " + std::to_string(k) + " of " +
                        std::to_string(base.scenarios.size()) + " scenarios");
  auto problems = validate_scenarios(base);
  if (!problems.empty()) throw ScenarioError("reduce_scenarios: " + problems.front());

  const std::size_t n = base.scenarios.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = l1_distance(base.scenarios[i], base.scenarios[j]);

  std::vector<bool> alive(n, true);
  std::vector<double> prob;
  prob.reserve(n);
  for (const Scenario& sc : base.scenarios) prob.push_back(sc.probability);

  // Nearest surviving neighbour of i, ties to the lowest id.
  auto nearest = [&](std::size_t i) {
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !alive[j]) continue;
      if (best == n || dist[i][j] < dist[i][best] ||
          (dist[i][j] == dist[i][best] && base.scenarios[j].id < base.scenarios[best].id))
        best = j;
    }
    return best;
  };

  for (std::size_t survivors = n; survivors > static_cast<std::size_t>(k); --survivors) {
    std::size_t victim = n, victim_near = n;
    double victim_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      std::size_t near = nearest(i);
      double cost = prob[i] * dist[i][near];
      if (victim == n || cost < victim_cost ||
          (cost == victim_cost && base.scenarios[i].id < base.scenarios[victim].id)) {
        victim = i;
        victim_near = near;
        victim_cost = cost;
      }
    }
    alive[victim] = false;
    prob[victim_near] += prob[victim];
  }

  ScenarioSet out;
  out.horizon = base.horizon;
  out.demand_ids = base.demand_ids;
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) {
      Scenario sc = base.scenarios[i];
      sc.probability = prob[i];
      out.scenarios.push_back(std::move(sc));
    }
  return out;
}

ScenarioSet reduce_scenarios(const std::vector<std::vector<double>>& profiles, int k) {
  if (profiles.empty()) throw ScenarioError("no profiles to reduce");
  ScenarioSet base;
  base.horizon = static_cast<int>(profiles.front().size());
  base.demand_ids = {0};
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (profiles[i].size() != profiles.front().size())
      throw ScenarioError("profile " + std::to_string(i + 1) + " has " +
                          std::to_string(profiles[i].size()) + " hours, expected " +
                          std::to_string(profiles.front().size()));
    Scenario sc;
    sc.id = static_cast<int>(i) + 1;
    sc.probability = 1.0 / static_cast<double>(profiles.size());
    sc.demand = {profiles[i]};
    base.scenarios.push_back(std::move(sc));
  }
  return reduce_scenarios(base, k);
}

namespace {

ScenarioSet quintiles_from_moments(const std::vector<std::vector<double>>& mean,
                                   const std::vector<std::vector<double>>& sigma,
                                   const std::vector<int>& demand_ids, int horizon, bool strict) {
  auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double outer = phi(-2.0);
  const double inner = phi(-1.0) - phi(-2.0);
  const double centre = 1.0 - 2.0 * (outer + inner);
  const double mass[5] = {outer, inner, centre, inner, outer};
  const double shift[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};

  ScenarioSet out;
  out.horizon = horizon;
  out.demand_ids = demand_ids;
  int clamped = 0;
  for (int q = 0; q < 5; ++q) {
    Scenario sc;
    sc.id = q + 1;
    sc.probability = mass[q];
    sc.demand.resize(mean.size());
    for (std::size_t r = 0; r < mean.size(); ++r) {
      sc.demand[r].resize(mean[r].size());
      for (std::size_t t = 0; t < mean[r].size(); ++t) {
        if (strict && sigma[r][t] == 0.0)
          throw ScenarioError("zero variance at demand row " + std::to_string(r) + " hour " +
                              std::to_string(t + 1));
        double v = mean[r][t] + shift[q] * sigma[r][t];
        if (v < 0.0) {
          v = 0.0;
          ++clamped;
        }
        sc.demand[r][t] = v;
      }
    }
    out.scenarios.push_back(std::move(sc));
  }
  if (clamped > 0)
    out.warnings.push_back("clamped " + std::to_string(clamped) +
                           " negative demand cells to zero");
  return out;
}

}  // namespace

ScenarioSet normal_quintile_set(const ScenarioSet& base, bool strict) {
  auto problems = validate_scenarios(base);
  if (!problems.empty()) throw ScenarioError("normal_quintile_set: " + problems.front());
  if (base.scenarios.size() < 2)
    throw ScenarioError("need at least 2 scenarios to fit a standard deviation");

  const std::size_t rows = base.demand_ids.size();
  const std::size_t hours = static_cast<std::size_t>(base.horizon);
  std::vector<std::vector<double>> mean(rows, std::vector<double>(hours, 0.0));
  std::vector<std::vector<double>> sigma(rows, std::vector<double>(hours, 0.0));

  double sq_prob = 0.0;
  for (const Scenario& sc : base.scenarios) sq_prob += sc.probability * sc.probability;
  // Weighted moments; the 1 - sum(pi^2) divisor reduces to the familiar
  // n/(n-1) sample correction under uniform probabilities.
  const double correction = 1.0 - sq_prob;

  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < hours; ++t) {
      double m = 0.0;
      for (const Scenario& sc : base.scenarios) m += sc.probability * sc.demand[r][t];
      double var = 0.0;
      for (const Scenario& sc : base.scenarios) {
        double d = sc.demand[r][t] - m;
        var += sc.probability * d * d;
      }
      mean[r][t] = m;
      sigma[r][t] = correction > 0.0 ? std::sqrt(var / correction) : 0.0;
    }

  return quintiles_from_moments(mean, sigma, base.demand_ids, base.horizon, strict);
}

ScenarioSet normal_quintile_set(const std::vector<double>& mean, const std::vector<double>& sigma,
                                bool strict) {
  if (mean.empty() || mean.size() != sigma.size())
    throw ScenarioError("mean and sigma profiles must be non-empty and the same length");
  for (double s : sigma)
    if (!std::isfinite(s) || s < 0.0)
      throw ScenarioError("sigma values must be non-negative and finite");
  return quintiles_from_moments({mean}, {sigma}, {0}, static_cast<int>(mean.size()), strict);
}

Scenario mean_scenario(const ScenarioSet& s) {
  auto problems = validate_scenarios(s);
  if (!problems.empty()) throw ScenarioError("mean_scenario: " + problems.front());
  Scenario mean;
  mean.id = 0;
  mean.probability = 1.0;
  const auto rows = s.demand_ids.size();
  const auto hours = static_cast<std::size_t>(s.horizon);
  mean.demand.assign(rows, std::vector<double>(hours, 0.0));
  for (const Scenario& sc : s.scenarios)
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t t = 0; t < hours; ++t)
        mean.demand[r][t] += sc.probability * sc.demand[r][t];
  return mean;
}

std::vector<double> cvar_tail_weights(const ScenarioSet& s, const std::vector<double>& costs,
                                      double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ScenarioError("epsilon must lie in [0, 1)");
  if (costs.size() != s.scenarios.size())
    throw ScenarioError("need one cost per scenario");
  for (double c : costs)
    if (!std::isfinite(c)) throw ScenarioError("costs must be finite");

  std::vector<double> weights(s.scenarios.size(), 0.0);
  if (epsilon == 0.0) {
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = s.scenarios[i].probability;
    return weights;
  }

  std::vector<std::size_t> order(s.scenarios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (costs[a] != costs[b]) return costs[a] > costs[b];
    return s.scenarios[a].id < s.scenarios[b].id;
  });

  const double tail = 1.0 - epsilon;
  double remaining = tail;
  for (std::size_t i : order) {
    if (remaining <= 0.0) break;
    double take = std::min(s.scenarios[i].probability, remaining);
    weights[i] = take / tail;
    remaining -= take;
  }
  return weights;
}

ScenarioSet spread_to_demands(const GridCase& c, const ScenarioSet& system_series) {
  if (system_series.demand_ids != std::vector<int>{0})
    throw ScenarioError("spread_to_demands expects a system-wide series (single row, id 0)");
  if (system_series.horizon != c.horizon())
    throw ScenarioError("series horizon " + std::to_string(system_series.horizon) +
                        " does not match case horizon " + std::to_string(c.horizon()));
  auto problems = validate_scenarios(system_series);
  if (!problems.empty()) throw ScenarioError("spread_to_demands: " + problems.front());

  const std::size_t hours = static_cast<std::size_t>(c.horizon());
  std::vector<double> base_total(hours, 0.0);
  for (const Demand& d : c.demands)
    for (std::size_t t = 0; t < hours; ++t) base_total[t] += d.profile[t];

  ScenarioSet out;
  out.horizon = c.horizon();
  for (const Demand& d : c.demands) out.demand_ids.push_back(d.id);
  for (const Scenario& sc : system_series.scenarios) {
    Scenario spread;
    spread.id = sc.id;
    spread.probability = sc.probability;
    spread.demand.resize(c.demands.size(), std::vector<double>(hours, 0.0));
    for (std::size_t t = 0; t < hours; ++t) {
      double want = sc.demand[0][t];
      if (base_total[t] <= 0.0) {
        if (want > 0.0)
          throw ScenarioError("cannot spread " + fmt(want) +
                              " MW onto hour " + std::to_string(t + 1) +
                              " where the baseline demand is zero");
        continue;
      }
      double scale = want / base_total[t];
      for (std::size_t r = 0; r < c.demands.size(); ++r)
        spread.demand[r][t] = c.demands[r].profile[t] * scale;
    }
    out.scenarios.push_back(std::move(spread));
  }
  return out;
}

std::vector<std::vector<double>> read_history_csv(const std::string& path,
                                                  std::vector<std::string>* labels) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open history file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ScenarioError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.empty()) throw ScenarioError(path + ": empty header row");
  if (labels) *labels = header;

  std::vector<std::vector<double>> days(header.size());
  std::size_t rownum = 1;
  while (std::getline(in, line)) {
    ++rownum;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ScenarioError(path + ": row " + std::to_string(rownum) + " has " +
                          std::to_string(cells.size()) + " columns, header has " +
                          std::to_string(header.size()));
    for (std::size_t i = 0; i < cells.size(); ++i)
      days[i].push_back(parse_number(cells[i], path + ": row " + std::to_string(rownum)));
  }
  if (days.front().empty()) throw ScenarioError(path + ": no data rows");
  return days;
}

void write_scenario_csv(const std::string& path, const ScenarioSet& s) {
  auto problems = validate_scenarios(s);
  if (!problems.empty()) throw ScenarioError("write_scenario_csv: " + problems.front());

  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file: " + path);
  out << "scenario_id,probability,hour,demand_id,mw\n";
  for (const Scenario& sc : s.scenarios)
    for (int t = 0; t < s.horizon; ++t)
      for (std::size_t r = 0; r < s.demand_ids.size(); ++r)
        out << sc.id << ',' << fmt(sc.probability) << ',' << t + 1 << ',' << s.demand_ids[r]
            << ',' << fmt(sc.demand[r][static_cast<std::size_t>(t)]) << '\n';
  if (!out) throw ScenarioError("failed writing scenario file: " + path);
}

ScenarioSet read_scenario_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ScenarioError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_csv_line(line) !=
      std::vector<std::string>{"scenario_id", "probability", "hour", "demand_id", "mw"})
    throw ScenarioError(path + ": unexpected header '" + line + "'");

  struct Rec {
    double probability;
    std::map<std::pair<int, int>, double> cells;  // (demand_id, hour) -> mw
  };
  std::map<int, Rec> recs;
  std::vector<int> scenario_order, demand_order;
  int max_hour = 0;
  std::size_t rownum = 1;
  while (std::getline(in, line)) {
    ++rownum;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string where = path + ": row " + std::to_string(rownum);
    auto cells = split_csv_line(line);
    if (cells.size() != 5) throw ScenarioError(where + ": expected 5 columns");
    int sid = parse_int(cells[0], where);
    double prob = parse_number(cells[1], where);
    int hour = parse_int(cells[2], where);
    int did = parse_int(cells[3], where);
    double mw = parse_number(cells[4], where);
    if (hour < 1) throw ScenarioError(where + ": hours are 1-based");

    auto [it, fresh] = recs.try_emplace(sid, Rec{prob, {}});
    if (fresh)
      scenario_order.push_back(sid);
    else if (it->second.probability != prob)
      throw ScenarioError(where + ": probability of scenario " + std::to_string(sid) +
                          " changed mid-file");
    if (!it->second.cells.emplace(std::make_pair(did, hour), mw).second)
      throw ScenarioError(where + ": duplicate cell for scenario " + std::to_string(sid));
    if (std::find(demand_order.begin(), demand_order.end(), did) == demand_order.end())
      demand_order.push_back(did);
    max_hour = std::max(max_hour, hour);
  }
  if (recs.empty()) throw ScenarioError(path + ": no data rows");

  ScenarioSet out;
  out.horizon = max_hour;
  out.demand_ids = demand_order;
  for (int sid : scenario_order) {
    const Rec& rec = recs.at(sid);
    Scenario sc;
    sc.id = sid;
    sc.probability = rec.probability;
    sc.demand.resize(demand_order.size(), std::vector<double>(static_cast<std::size_t>(max_hour)));
    for (std::size_t r = 0; r < demand_order.size(); ++r)
      for (int t = 1; t <= max_hour; ++t) {
        auto it = rec.cells.find({demand_order[r], t});
        if (it == rec.cells.end())
          throw ScenarioError(path + ": scenario " + std::to_string(sid) + " is missing hour " +
                              std::to_string(t) + " of demand " +
                              std::to_string(demand_order[r]));
        sc.demand[r][static_cast<std::size_t>(t - 1)] = it->second;
      }
    out.scenarios.push_back(std::move(sc));
  }

  auto problems = validate_scenarios(out);
  if (!problems.empty()) throw ScenarioError(path + ": " + problems.front());
  return out;
}

}  // namespace psps
