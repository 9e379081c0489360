#include "psps/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "psps/milp.hpp"

namespace psps {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string tidy(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

const char* status_word(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterLimit: return "iteration limit";
    case SolveStatus::NodeLimit: return "node limit";
    case SolveStatus::TimeLimit: return "time limit";
  }
  return "unknown";
}

struct PointSpec {
  std::string strategy;
  int budget = 0;
};

SweepRecord solve_point(const GridCase& c, const ScenarioSet& ss, const PointSpec& pt,
                        const SweepConfig& cfg) {
  SweepRecord rec;
  rec.strategy = pt.strategy;
  rec.budget = pt.budget;
  rec.beta = cfg.beta;
  rec.epsilon = cfg.epsilon;

  const int L = static_cast<int>(c.lines.size());
  StochConfig mcfg;
  mcfg.beta = cfg.beta;
  mcfg.epsilon = cfg.epsilon;
  mcfg.include_commitment_costs = pt.strategy != "wfnc";

  RiskMode mode = Nmk{0};
  if (pt.strategy == "nmks") {
    mode = Nmk{L - pt.budget};
  } else if (pt.strategy == "mnwf") {
    mode = MnwfHeuristic{pt.budget};
  } else {
    rec.r_tol = budget_r_tol(c, pt.budget);
    if (pt.strategy == "wfsl")
      mode = WfpiSlack{rec.r_tol, default_slack_cap(c)};
    else
      mode = WfpiTol{rec.r_tol};
  }

  try {
    MilpModel m = build_stochastic_first_stage(c, ss, mode, mcfg);
    MipResult sol = solve_mip(m, cfg.solver);
    if (sol.status != SolveStatus::Optimal) {
      rec.note = std::string("solver stopped: ") + status_word(sol.status);
      return rec;
    }
    std::vector<double> x = energize_zero_risk_lines(c, mode, m, sol.x);
    SolutionSummary sum = summarize_solution(c, m, x);

    rec.solved = true;
    rec.commit_cost = sum.commit_cost;
    rec.gens_committed = sum.gens_committed;
    for (int n : sum.hourly_lines) rec.active_lines = std::max(rec.active_lines, n);
    for (double r : sum.hourly_risk) rec.wildfire_risk = std::max(rec.wildfire_risk, r);
    for (std::size_t w = 0; w < ss.scenarios.size(); ++w) {
      const double p = ss.scenarios[w].probability;
      rec.served_mw += p * sum.served_mwh[w];
      rec.prod_cost += p * sum.production_cost[w];
      rec.voll_cost += p * sum.voll_cost[w];
      rec.exp_cost += p * sum.scenario_cost[w];
    }
    rec.cvar_cost = report_cvar(ss, sum.scenario_cost, cfg.epsilon);
  } catch (const std::exception& e) {
    rec.solved = false;
    rec.note = tidy(e.what());
  }
  return rec;
}

}  // namespace

double budget_r_tol(const GridCase& c, int budget) {
  if (budget < 0 || budget > static_cast<int>(c.lines.size()))
    throw PspsError("budget_r_tol: budget must lie in [0, " +
                    std::to_string(c.lines.size()) + "], got " + std::to_string(budget));
  std::vector<double> w;
  w.reserve(c.lines.size());
  for (const auto& l : c.lines) w.push_back(l.wfpi);
  std::sort(w.begin(), w.end());
  double r = 0.0;
  for (int i = 0; i < budget; ++i) r += w[static_cast<std::size_t>(i)];
  return r;
}

std::vector<SweepRecord> sweep_strategies(const GridCase& c, const ScenarioSet& scenarios,
                                          const SweepConfig& cfg) {
  const int L = static_cast<int>(c.lines.size());
  std::vector<std::string> err;
  if (cfg.strategies.empty()) err.push_back("no strategies given");
  if (cfg.budgets.empty()) err.push_back("no budgets given");
  for (const auto& s : cfg.strategies)
    if (s != "nmks" && s != "mnwf" && s != "wfnc" && s != "wfpi" && s != "wfsl")
      err.push_back("unknown strategy '" + s +
                    "' (the sweep takes nmks, mnwf, wfnc, wfpi, wfsl)");
  for (int b : cfg.budgets)
    if (b < 0 || b > L)
      err.push_back("budget " + std::to_string(b) + " outside [0, " + std::to_string(L) + "]");
  if (!err.empty()) {
    std::string msg = "sweep_strategies:";
    for (const auto& e : err) msg += "\n  " + e;
    throw PspsError(msg);
  }

  std::vector<PointSpec> grid;
  for (const auto& s : cfg.strategies)
    for (int b : cfg.budgets) grid.push_back({s, b});

  std::vector<SweepRecord> out(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      out[i] = solve_point(c, scenarios, grid[i], cfg);
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

double report_cvar(const ScenarioSet& s, const std::vector<double>& costs, double epsilon) {
  std::vector<double> w = cvar_tail_weights(s, costs, epsilon);
  double cvar = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) cvar += w[i] * costs[i];
  return cvar;
}

namespace {

// first-stage commitments pinned into a fresh per-scenario model
void pin_plan(const MilpModel& m, const GridCase& c, const FirstStagePlan& plan,
              std::vector<double>& lb, std::vector<double>& ub) {
  lb.resize(m.vars.size());
  ub.resize(m.vars.size());
  for (std::size_t j = 0; j < m.vars.size(); ++j) {
    lb[j] = m.vars[j].lower;
    ub[j] = m.vars[j].upper;
  }
  auto pin = [&](const std::string& name, bool v) {
    const auto j = static_cast<std::size_t>(m.var_id(name));
    lb[j] = v ? 1.0 : 0.0;
    ub[j] = v ? 1.0 : 0.0;
  };
  for (int t = 1; t <= c.horizon(); ++t) {
    const auto col = static_cast<std::size_t>(t - 1);
    for (std::size_t gp = 0; gp < c.generators.size(); ++gp) {
      const int id = c.generators[gp].id;
      pin(make_name("z_g", {id, t}), plan.gen_on[gp][col]);
      pin(make_name("zu_g", {id, t}), plan.gen_up[gp][col]);
      pin(make_name("zd_g", {id, t}), plan.gen_dn[gp][col]);
    }
    for (std::size_t lp = 0; lp < c.lines.size(); ++lp)
      pin(make_name("z_l", {c.lines[lp].id, t}), plan.line_on[lp][col]);
  }
}

double blend(const ScenarioSet& ss, const std::vector<double>& costs, double beta,
             double epsilon) {
  double mean = 0.0;
  for (std::size_t w = 0; w < costs.size(); ++w) mean += ss.scenarios[w].probability * costs[w];
  if (beta == 0.0) return mean;
  return (1.0 - beta) * mean + beta * report_cvar(ss, costs, epsilon);
}

}  // namespace

ValueLadder value_ladder(const GridCase& c, const ScenarioSet& scenarios, const RiskMode& mode,
                         const StochConfig& cfg, const SolverConfig& solver) {
  const std::size_t W = scenarios.scenarios.size();
  auto solved = [&](MipResult r, const std::string& what) {
    if (r.status != SolveStatus::Optimal)
      throw PspsError("value_ladder: " + what + " solve stopped: " + status_word(r.status));
    return r;
  };

  // wait-and-see: one perfect-foresight optimum per scenario
  std::vector<double> ws(W);
  for (std::size_t w = 0; w < W; ++w) {
    MilpModel m = build_deterministic(c, scenarios.scenarios[w], mode, cfg);
    ws[w] = solved(solve_mip(m, solver),
                   "scenario " + std::to_string(scenarios.scenarios[w].id) + " foresight")
                .objective;
  }

  MipResult rp = solved(
      solve_mip(build_stochastic_first_stage(c, scenarios, mode, cfg), solver), "two-stage");

  // commit to the mean-demand plan, then pay each scenario's recourse
  MilpModel md = build_deterministic(c, mean_scenario(scenarios), mode, cfg);
  MipResult rd = solved(solve_mip(md, solver), "mean-scenario");
  FirstStagePlan plan = extract_plan(c, md, rd.x);
  std::vector<double> ev(W);
  for (std::size_t w = 0; w < W; ++w) {
    MilpModel m = build_deterministic(c, scenarios.scenarios[w], mode, cfg);
    std::vector<double> lb, ub;
    pin_plan(m, c, plan, lb, ub);
    LpResult lp = solve_lp(m, solver, nullptr, &lb, &ub);
    if (lp.status != SolveStatus::Optimal)
      throw PspsError("value_ladder: scenario " +
                      std::to_string(scenarios.scenarios[w].id) + " recourse solve stopped: " +
                      status_word(lp.status));
    ev[w] = lp.objective;
  }

  ValueLadder out;
  out.mrws = blend(scenarios, ws, cfg.beta, cfg.epsilon);
  out.mrrp = rp.objective;
  out.mrev = blend(scenarios, ev, cfg.beta, cfg.epsilon);

  const double scale = std::max({1.0, std::fabs(out.mrws), std::fabs(out.mrrp),
                                 std::fabs(out.mrev)});
  const double tol = 2.0 * std::max(rp.gap, solver.rel_mip_gap) * scale + 1e-6 * scale;
  if (out.mrws > out.mrrp + tol || out.mrrp > out.mrev + tol)
    throw PspsError("value_ladder: ordering violated beyond the solver gap: mrws " +
                    fmt(out.mrws) + ", mrrp " + fmt(out.mrrp) + ", mrev " + fmt(out.mrev));
  out.mrvpi = std::max(0.0, out.mrrp - out.mrws);
  out.mrvss = std::max(0.0, out.mrev - out.mrrp);
  return out;
}

namespace {

constexpr const char* kSweepHeader =
    "strategy,budget,active_lines,r_tol,beta,epsilon,served_mw,prod_cost,commit_cost,"
    "voll_cost,wildfire_risk,exp_cost,cvar_cost,gens_committed,solved,note";

}  // namespace

void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
  out << kSweepHeader << '\n';
  for (const auto& r : records) {
    if (r.strategy.find_first_of(",\n\r") != std::string::npos ||
        r.note.find_first_of(",\n\r") != std::string::npos)
      throw PspsError("write_sweep_csv: strategy and note must stay free of commas");
    out << r.strategy << ',' << r.budget << ',' << r.active_lines << ',' << fmt(r.r_tol)
        << ',' << fmt(r.beta) << ',' << fmt(r.epsilon) << ',' << fmt(r.served_mw) << ','
        << fmt(r.prod_cost) << ',' << fmt(r.commit_cost) << ',' << fmt(r.voll_cost) << ','
        << fmt(r.wildfire_risk) << ',' << fmt(r.exp_cost) << ',' << fmt(r.cvar_cost) << ','
        << r.gens_committed << ',' << (r.solved ? 1 : 0) << ',' << r.note << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepHeader)
    throw PspsError("read_sweep_csv: missing or unexpected header row");
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cell;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        cell.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    if (cell.size() != 16)
      throw PspsError("read_sweep_csv: expected 16 columns, got " +
                      std::to_string(cell.size()));
    SweepRecord r;
    r.strategy = cell[0];
    r.budget = std::stoi(cell[1]);
    r.active_lines = std::stoi(cell[2]);
    r.r_tol = std::stod(cell[3]);
    r.beta = std::stod(cell[4]);
    r.epsilon = std::stod(cell[5]);
    r.served_mw = std::stod(cell[6]);
    r.prod_cost = std::stod(cell[7]);
    r.commit_cost = std::stod(cell[8]);
    r.voll_cost = std::stod(cell[9]);
    r.wildfire_risk = std::stod(cell[10]);
    r.exp_cost = std::stod(cell[11]);
    r.cvar_cost = std::stod(cell[12]);
    r.gens_committed = std::stoi(cell[13]);
    r.solved = cell[14] == "1";
    r.note = cell[15];
    out.push_back(std::move(r));
  }
  return out;
}

void write_sweep_long_csv(const std::vector<SweepRecord>& records, std::ostream& out) {
  out << "strategy,budget,metric,value\n";
  for (const auto& r : records) {
    if (!r.solved) continue;
    const std::pair<const char*, double> metrics[] = {
        {"served_mw", r.served_mw},     {"prod_cost", r.prod_cost},
        {"commit_cost", r.commit_cost}, {"voll_cost", r.voll_cost},
        {"wildfire_risk", r.wildfire_risk}, {"exp_cost", r.exp_cost},
        {"cvar_cost", r.cvar_cost},     {"active_lines", double(r.active_lines)},
        {"gens_committed", double(r.gens_committed)},
    };
    for (const auto& [name, value] : metrics)
      out << r.strategy << ',' << r.budget << ',' << name << ',' << fmt(value) << '\n';
  }
}

void emit_results(const std::vector<SweepRecord>& records, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PspsError("emit_results: cannot create '" + dir + "': " + ec.message());
  const auto base = std::filesystem::path(dir);
  {
    std::ofstream f(base / "sweep.csv", std::ios::binary);
    if (!f) throw PspsError("emit_results: cannot open sweep.csv for writing");
    write_sweep_csv(records, f);
    if (!f.good()) throw PspsError("emit_results: failed while writing sweep.csv");
  }
  {
    std::ofstream f(base / "sweep_long.csv", std::ios::binary);
    if (!f) throw PspsError("emit_results: cannot open sweep_long.csv for writing");
    write_sweep_long_csv(records, f);
    if (!f.good()) throw PspsError("emit_results: failed while writing sweep_long.csv");
  }
}

}  // namespace psps
