#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "psps/grid.hpp"
#include "psps/milp.hpp"
#include "psps/scenarios.hpp"

namespace psps {

class PspsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* Line shut-off strategies. Each mode contributes one risk row per hour on
 * top of the shared commitment/flow core. */

// At most |lines| - k lines may stay energized in any hour.
struct Nmk {
  int k = 0;
};

// Energized WFPI per hour capped at r_tol.
struct WfpiTol {
  double r_tol = 0.0;
};

/* Energized WFPI per hour pinned to r_tol + r_slack by one shared slack
 * variable. The slack is free below zero (unused tolerance), capped above
 * by r_slack_max (paid violation), and priced into the objective, so among
 * equally cheap shut-off plans the lowest-risk one wins. */
struct WfpiSlack {
  double r_tol = 0.0;
  double r_slack_max = 0.0;
};

// The `active` lines with smallest WFPI are forced on, the rest forced off.
struct MnwfHeuristic {
  int active = 0;
};

/* Hourly cap on the log-linearized joint ignition likelihood. Lines with a
 * zero ignition probability are outside the constraint entirely; every
 * other line needs an ignition_prob in the case data. */
struct WlfpLog {
  double pi_tol = 1.0;
};

using RiskMode = std::variant<Nmk, WfpiTol, WfpiSlack, MnwfHeuristic, WlfpLog>;

struct StochConfig {
  double beta = 0.0;      // 0 = expected cost only, 1 = tail cost only
  double epsilon = 0.95;  // CVaR confidence level, in [0,1)
  // false keeps every constraint but drops startup/shutdown and production
  // charges from the optimized cost, leaving lost load (plus any slack
  // penalty) as the only objective.
  bool include_commitment_costs = true;
  double slack_weight = 1.0;  // $ per WFPI of tolerance violation
};

/* Day-ahead commitments: everything decided before demand reveals itself.
 * Rows follow case order (generators and lines sorted by id), columns are
 * hours. Valid plans satisfy the switching identity
 * on[t+1] - on[t] = up[t+1] - dn[t+1], minimum up/down runs, and
 * non-increasing line energization. */
struct FirstStagePlan {
  std::vector<std::vector<bool>> gen_on;
  std::vector<std::vector<bool>> gen_up;
  std::vector<std::vector<bool>> gen_dn;
  std::vector<std::vector<bool>> line_on;
  double r_slack = 0.0;

  friend bool operator==(const FirstStagePlan&, const FirstStagePlan&) = default;
};

// One plan problem per message; empty means the plan is internally
// consistent with the case's commitment rules.
std::vector<std::string> validate_plan(const GridCase& c, const FirstStagePlan& plan);

/* Single-demand-trajectory commitment model: unit commitment, DC power
 * flow with switchable lines, fractional load service priced at VoLL, and
 * the chosen risk rows. mean_demand rows follow case demand order and must
 * span the case horizon. */
MilpModel build_deterministic(const GridCase& c, const Scenario& mean_demand,
                              const RiskMode& mode, const StochConfig& cfg = {});

/* Two-stage model: one shared set of commitment/switching binaries, one
 * recourse block (dispatch, flows, angles, served fractions) per scenario,
 * and a mean-CVaR objective over the per-scenario costs. Scenario rows
 * must be labeled with the case demand ids. */
MilpModel build_stochastic_first_stage(const GridCase& c, const ScenarioSet& scenarios,
                                       const RiskMode& mode, const StochConfig& cfg);

// Energization pattern for MnwfHeuristic, aligned with case line order:
// the `active` smallest-WFPI lines on (ties to the lower line id).
std::vector<bool> mnwf_fix(const GridCase& c, int active);

// Largest single-line WFPI, the default violation cap for WfpiSlack.
double default_slack_cap(const GridCase& c);

// Joint ignition likelihood with every ignitable line shut off: the
// tightest WlfpLog tolerance, at which only ignition-free lines may carry
// power.
double wlfp_zero_risk_tol(const GridCase& c);

/* Battery extension for an already-built model: charge/discharge power,
 * state of charge with fixed half-capacity endpoints, and the charge-mode
 * and shut-off binaries with their and-gate linearization. Storage power
 * joins the existing balance rows. No-op for a case without storage. */
void add_storage(MilpModel& m, const GridCase& c);

/* Reads the commitment binaries out of a solution, rounding within
 * int_tol, and re-verifies the plan invariants from scratch. Throws
 * PspsError when the rounded plan breaks them, which signals a solver
 * tolerance failure rather than bad input. */
FirstStagePlan extract_plan(const GridCase& c, const MilpModel& m,
                            const std::vector<double>& x, double int_tol = 1e-6);

/* Closes de-energized zero-risk lines when that provably changes nothing:
 * each line's energized prefix extends through the hours where its
 * endpoints sit in different energized islands, the line is closed
 * flow-free by shifting the absorbed island's angles, and the patched
 * solution must re-verify with the objective unchanged (any failure
 * reverts the line). Breaks the tie between optima that strand riskless
 * corridors and optima that keep them alive. No-op for Nmk and
 * MnwfHeuristic, whose risk rows count lines rather than risk. */
std::vector<double> energize_zero_risk_lines(const GridCase& c, const RiskMode& mode,
                                             const MilpModel& m, std::vector<double> x);

/* Costs and service recomputed from case data and the raw solution values,
 * never from objective coefficients. Per-scenario vectors follow the
 * model's scenario order. */
struct SolutionSummary {
  double objective = 0.0;    // objective re-evaluated at x
  double commit_cost = 0.0;  // startup + shutdown charges, shared stage
  double r_slack = 0.0;      // 0 unless the model carries a slack variable
  int gens_committed = 0;    // generators on for at least one hour
  std::vector<double> production_cost;  // [scenario]
  std::vector<double> voll_cost;        // [scenario]
  std::vector<double> scenario_cost;    // commit + production + voll + priced slack
  std::vector<double> served_mwh;       // [scenario]
  std::vector<double> hourly_risk;      // energized WFPI, [hour]
  std::vector<int> hourly_lines;        // energized line count, [hour]
};

SolutionSummary summarize_solution(const GridCase& c, const MilpModel& m,
                                   const std::vector<double>& x);

}  // namespace psps
