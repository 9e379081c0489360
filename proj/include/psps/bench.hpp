#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "psps/grid.hpp"
#include "psps/psps.hpp"
#include "psps/scenarios.hpp"
#include "psps/solver.hpp"

namespace psps {

/* One solved point of a strategy-versus-budget sweep. The budget is the
 * number of lines the strategy was allowed to keep energized; active_lines
 * counts what the solution actually energized (the busiest hour when the
 * horizon is longer than one). Costs are probability-weighted across the
 * scenario set except commit_cost, which is shared by construction. */
struct SweepRecord {
  std::string strategy;  // nmks | mnwf | wfnc | wfpi | wfsl
  int budget = 0;
  int active_lines = 0;
  double r_tol = 0.0;  // WFPI allowance handed to the model, 0 when not used
  double beta = 0.0;
  double epsilon = 0.0;
  double served_mw = 0.0;
  double prod_cost = 0.0;
  double commit_cost = 0.0;
  double voll_cost = 0.0;
  double wildfire_risk = 0.0;  // largest hourly energized WFPI
  double exp_cost = 0.0;
  double cvar_cost = 0.0;
  int gens_committed = 0;
  bool solved = false;
  std::string note;  // failure context when a point could not be solved

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct SweepConfig {
  std::vector<std::string> strategies;  // any of nmks, mnwf, wfnc, wfpi, wfsl
  std::vector<int> budgets;             // energized-line allowances
  double beta = 0.0;
  double epsilon = 0.95;
  int jobs = 1;
  SolverConfig solver;
};

/* The smallest WFPI allowance that admits `budget` energized lines: the sum
 * of the budget smallest line WFPIs. This is the r_tol grid the allowance
 * strategies sweep over. */
double budget_r_tol(const GridCase& c, int budget);

/* Solves one model per (strategy, budget) grid point and reads the record
 * off the solution. Points run on cfg.jobs threads; the result order is the
 * grid order (strategy-major) no matter how the work interleaves. A point
 * whose solve fails is recorded with solved = false and the sweep moves on.
 *
 * Budgets map onto the strategies as: nmks caps the energized count at the
 * budget, mnwf pins the budget cheapest-WFPI lines on, and the allowance
 * family (wfpi, wfnc, wfsl) receives budget_r_tol. wfnc drops commitment
 * and production costs from the objective; wfsl prices its slack at the
 * default cap. */
std::vector<SweepRecord> sweep_strategies(const GridCase& c, const ScenarioSet& scenarios,
                                          const SweepConfig& cfg);

// Discrete tail average of costs at confidence epsilon under the set's
// probabilities; epsilon 0 gives the plain expectation.
double report_cvar(const ScenarioSet& s, const std::vector<double>& costs, double epsilon);

/* The three classic planning yardsticks under one risk preference, each the
 * beta-blend of expectation and tail average:
 *   mrws  assumes perfect foresight, one optimum per scenario;
 *   mrrp  solves the two-stage problem as posed;
 *   mrev  commits to the mean-scenario plan and pays per-scenario recourse.
 * mrws <= mrrp <= mrev always, so the increments are the price of
 * uncertainty (mrvpi) and the value of modelling it (mrvss). */
struct ValueLadder {
  double mrws = 0.0;
  double mrrp = 0.0;
  double mrev = 0.0;
  double mrvpi = 0.0;  // mrrp - mrws
  double mrvss = 0.0;  // mrev - mrrp
};

ValueLadder value_ladder(const GridCase& c, const ScenarioSet& scenarios, const RiskMode& mode,
                         const StochConfig& cfg, const SolverConfig& solver = {});

// One row per record in a fixed column order; read is the exact inverse of
// write. Notes must not contain commas or newlines.
void write_sweep_csv(const std::vector<SweepRecord>& records, std::ostream& out);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);

// strategy,budget,metric,value rows for plotting tools
void write_sweep_long_csv(const std::vector<SweepRecord>& records, std::ostream& out);

// Writes sweep.csv and sweep_long.csv under dir, creating it if needed.
void emit_results(const std::vector<SweepRecord>& records, const std::string& dir);

}  // namespace psps
