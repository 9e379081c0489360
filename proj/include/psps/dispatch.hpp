#pragma once

#include <iosfwd>
#include <vector>

#include "psps/grid.hpp"
#include "psps/psps.hpp"

namespace psps {

// Demand that actually materialized, [demand position][hour] in MW, same
// row order as GridCase::demands and one column per horizon hour.
struct RealizedDemand {
  std::vector<std::vector<double>> demand;
};

// The case's own demand profiles packaged as a realization.
RealizedDemand realized_from_profiles(const GridCase& c);

/* What the rolling dispatcher assumes about hours it has not reached yet.
 * Perfect reads the remaining hours straight from the realization;
 * Persistence repeats the current hour's value forward. Persistence can
 * paint the dispatcher into a corner: committed output it cannot ramp
 * down past a demand drop makes a later hour infeasible, which surfaces
 * as an error naming that hour. */
enum class ForecastRule { Perfect, Persistence };

struct DispatchResult {
  // implemented trajectories, rows in case order, one column per hour
  std::vector<std::vector<double>> gen_output;   // MW
  std::vector<std::vector<double>> served_frac;  // fraction of demand served
  std::vector<std::vector<double>> line_flow;    // MW, positive from -> to

  double served_mwh = 0.0;
  double total_cost = 0.0;  // production + lost load + plan start/stop costs

  /* Demand-carrying buses that lost load, split by cause. A blackout bus
   * has no energized path to a committed generator at any hour, so its
   * served fraction is zero all day; a partial bus is reachable but shed
   * anyway (capacity, ramps, or congestion). Sorted by bus id. */
  std::vector<int> blackout_buses;
  std::vector<int> partial_buses;
};

/* Rolls through the day one hour at a time. Each hour solves a linear
 * program over the remaining hours with every commitment pinned to the
 * plan, demand at the current hour set to the realization and later hours
 * filled by the forecast rule, then keeps only the current hour's setpoints.
 * The kept output feeds the next hour's ramp window, so the concatenated
 * trajectory respects the ramp limits end to end.
 *
 * Costs follow the committed-plan accounting: marginal production plus
 * value of lost load over realized demand, plus the plan's start and stop
 * charges. The risk slack price is intentionally absent, so with a perfect
 * forecast the total reproduces the planning objective minus any slack
 * term.
 *
 * Throws PspsError when the plan or realization does not fit the case, or
 * when an hour's program cannot be solved (the message names the hour). */
DispatchResult run_receding_horizon(const GridCase& c, const FirstStagePlan& plan,
                                    const RealizedDemand& realized,
                                    ForecastRule rule = ForecastRule::Perfect);

// hour,gen_id,p_mw with one row per generator and hour
void write_generation_csv(const GridCase& c, const DispatchResult& r, std::ostream& out);

// hour,demand_id,x_frac,shed_mw against the realization the run used
void write_service_csv(const GridCase& c, const RealizedDemand& realized,
                       const DispatchResult& r, std::ostream& out);

// {"served_mwh": ..., "total_cost": ..., "blackout_buses": [...]}
void write_dispatch_summary(const DispatchResult& r, std::ostream& out);

}  // namespace psps

