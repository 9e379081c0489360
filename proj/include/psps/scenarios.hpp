#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "psps/grid.hpp"

namespace psps {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  int id = 0;
  double probability = 0.0;
  // demand[r][t]: MW in matrix row r (labelled by ScenarioSet::demand_ids)
  // at hour t.
  std::vector<std::vector<double>> demand;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/* Discrete demand distribution over one horizon. Rows of every scenario
 * matrix share the demand_ids labels; a single row labelled 0 marks a
 * system-wide series that has not been spread onto individual demands. */
struct ScenarioSet {
  int horizon = 0;
  std::vector<int> demand_ids;
  std::vector<Scenario> scenarios;
  std::vector<std::string> warnings;  // non-fatal notes, e.g. clamped cells

  friend bool operator==(const ScenarioSet& a, const ScenarioSet& b) {
    return a.horizon == b.horizon && a.demand_ids == b.demand_ids && a.scenarios == b.scenarios;
  }
};

// One message per violated invariant: probabilities in [0,1] summing to 1
// within 1e-9, at least one scenario, rectangular non-negative matrices.
std::vector<std::string> validate_scenarios(const ScenarioSet& s);

// Backward reduction to k scenarios under the L1 transport distance: the
// scenario with the cheapest (probability x distance to nearest survivor)
// is deleted and its probability handed to that survivor, repeatedly. Ties
// go to the lowest id. Survivors keep their input ids (1-based).
ScenarioSet reduce_scenarios(const std::vector<std::vector<double>>& profiles, int k);
ScenarioSet reduce_scenarios(const ScenarioSet& base, int k);

// Five scenarios at mean and +-1, +-2 standard deviations, clamped at 0,
// with standard-normal interval masses split at +-1 and +-2 sigma. The
// fitted form takes probability-weighted per-hour moments from the base
// set; strict rejects zero variance instead of collapsing the five
// scenarios onto the mean.
ScenarioSet normal_quintile_set(const ScenarioSet& base, bool strict = false);
ScenarioSet normal_quintile_set(const std::vector<double>& mean, const std::vector<double>& sigma,
                                bool strict = false);

// Probability-weighted average of the set's demand matrices, returned as a
// single scenario with probability 1 and id 0.
Scenario mean_scenario(const ScenarioSet& s);

// Weights of the discrete CVaR at confidence epsilon: scenarios sorted by
// cost descending fill the (1 - epsilon) tail, with a fractional share for
// the scenario on the boundary. Aligned with s.scenarios; sums to 1; the
// weighted cost average is the CVaR itself.
std::vector<double> cvar_tail_weights(const ScenarioSet& s, const std::vector<double>& costs,
                                      double epsilon);

// Distributes a system-wide series (single row labelled 0) onto the case's
// demands in proportion to their baseline profiles hour by hour.
ScenarioSet spread_to_demands(const GridCase& c, const ScenarioSet& system_series);

// Historical profiles: one column per day, one row per hour, header row
// with day labels. Returns one profile per day (column).
std::vector<std::vector<double>> read_history_csv(const std::string& path,
                                                  std::vector<std::string>* labels = nullptr);

// Long-form CSV with columns scenario_id, probability, hour, demand_id, mw;
// hours are 1-based in the file. read is the exact inverse of write.
void write_scenario_csv(const std::string& path, const ScenarioSet& s);
ScenarioSet read_scenario_csv(const std::string& path);

}  // namespace psps
