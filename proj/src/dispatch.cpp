#include "psps/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "psps/milp.hpp"
#include "psps/solver.hpp"

namespace psps {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// energized line ids under the plan at 1-based hour t
std::vector<int> lit_lines(const GridCase& c, const FirstStagePlan& plan, int t) {
  std::vector<int> ids;
  for (std::size_t lp = 0; lp < c.lines.size(); ++lp)
    if (plan.line_on[lp][static_cast<std::size_t>(t - 1)]) ids.push_back(c.lines[lp].id);
  return ids;
}

// buses that can reach a committed generator over energized lines at hour t
std::vector<bool> reachable_at(const GridCase& c, const FirstStagePlan& plan, int t,
                               std::vector<bool>& scratch_bus) {
  std::vector<bool> powered(c.buses.size(), false);
  scratch_bus.assign(c.buses.size(), false);
  for (std::size_t gp = 0; gp < c.generators.size(); ++gp)
    if (plan.gen_on[gp][static_cast<std::size_t>(t - 1)])
      scratch_bus[static_cast<std::size_t>(c.bus_pos(c.generators[gp].bus))] = true;
  for (const auto& group : islands(c, lit_lines(c, plan, t))) {
    bool live = false;
    for (int b : group) live = live || scratch_bus[static_cast<std::size_t>(c.bus_pos(b))];
    if (live)
      for (int b : group) powered[static_cast<std::size_t>(c.bus_pos(b))] = true;
  }
  return powered;
}

}  // namespace

RealizedDemand realized_from_profiles(const GridCase& c) {
  RealizedDemand r;
  for (const auto& d : c.demands) r.demand.push_back(d.profile);
  return r;
}

DispatchResult run_receding_horizon(const GridCase& c, const FirstStagePlan& plan,
                                    const RealizedDemand& realized, ForecastRule rule) {
  const int H = c.horizon();
  const std::size_t D = c.demands.size();
  {
    std::vector<std::string> err = validate_plan(c, plan);
    if (realized.demand.size() != D) {
      err.push_back("realization carries " + std::to_string(realized.demand.size()) +
                    " rows for " + std::to_string(D) + " case demands");
    } else {
      for (std::size_t dp = 0; dp < D; ++dp) {
        const auto& row = realized.demand[dp];
        bool clean = row.size() == static_cast<std::size_t>(H);
        for (double v : row) clean = clean && std::isfinite(v) && v >= 0.0;
        if (!clean)
          err.push_back("realization row " + std::to_string(dp) +
                        " must hold " + std::to_string(H) + " non-negative values");
      }
    }
    if (!err.empty()) {
      std::string msg = "run_receding_horizon:";
      for (const auto& e : err) msg += "\n  " + e;
      throw PspsError(msg);
    }
  }

  DispatchResult res;
  res.gen_output.assign(c.generators.size(), std::vector<double>(static_cast<std::size_t>(H), 0.0));
  res.served_frac.assign(D, std::vector<double>(static_cast<std::size_t>(H), 0.0));
  res.line_flow.assign(c.lines.size(), std::vector<double>(static_cast<std::size_t>(H), 0.0));

  std::vector<double> prev_aux(c.generators.size(), 0.0);
  for (int tau = 1; tau <= H; ++tau) {
    const int W = H - tau + 1;  // hours still ahead, including this one
    GridCase window = slice_hours(c, tau - 1, W);
    if (tau > 1)
      for (std::size_t gp = 0; gp < c.generators.size(); ++gp)
        window.generators[gp].initial_on = plan.gen_on[gp][static_cast<std::size_t>(tau - 2)];

    Scenario sc;
    sc.id = tau;
    sc.probability = 1.0;
    for (std::size_t dp = 0; dp < D; ++dp) {
      std::vector<double> row(static_cast<std::size_t>(W));
      for (int u = 0; u < W; ++u)
        row[static_cast<std::size_t>(u)] =
            realized.demand[dp][static_cast<std::size_t>(
                rule == ForecastRule::Perfect ? tau - 1 + u : tau - 1)];
      sc.demand.push_back(std::move(row));
    }

    MilpModel m = build_deterministic(window, sc, Nmk{0});
    std::vector<double> lb(m.vars.size()), ub(m.vars.size());
    for (std::size_t j = 0; j < m.vars.size(); ++j) {
      lb[j] = m.vars[j].lower;
      ub[j] = m.vars[j].upper;
    }
    auto pin = [&](const std::string& name, double v) {
      int id = m.var_id(name);
      lb[static_cast<std::size_t>(id)] = v;
      ub[static_cast<std::size_t>(id)] = v;
    };
    for (int u = 1; u <= W; ++u) {
      const auto t = static_cast<std::size_t>(tau + u - 2);  // plan column
      for (std::size_t gp = 0; gp < c.generators.size(); ++gp) {
        const int id = c.generators[gp].id;
        pin(make_name("z_g", {id, u}), plan.gen_on[gp][t] ? 1.0 : 0.0);
        pin(make_name("zu_g", {id, u}), plan.gen_up[gp][t] ? 1.0 : 0.0);
        pin(make_name("zd_g", {id, u}), plan.gen_dn[gp][t] ? 1.0 : 0.0);
      }
      for (std::size_t lp = 0; lp < c.lines.size(); ++lp)
        pin(make_name("z_l", {c.lines[lp].id, u}), plan.line_on[lp][t] ? 1.0 : 0.0);
    }
    if (tau > 1) {
      // the implemented level of the previous hour anchors this hour's ramp
      for (std::size_t gp = 0; gp < c.generators.size(); ++gp) {
        const Generator& g = c.generators[gp];
        const int id = m.var_id(make_name("paux", {g.id, 1, 1}));
        const auto j = static_cast<std::size_t>(id);
        lb[j] = std::max(lb[j], prev_aux[gp] + g.ramp_min);
        ub[j] = std::min(ub[j], prev_aux[gp] + g.ramp_max);
        if (lb[j] > ub[j] + 1e-9)
          throw PspsError("run_receding_horizon: hour " + std::to_string(tau) +
                          " leaves generator " + std::to_string(g.id) +
                          " no ramp-feasible output");
      }
    }

    LpResult lp = solve_lp(m, {}, nullptr, &lb, &ub);
    if (lp.status != SolveStatus::Optimal)
      throw PspsError("run_receding_horizon: hour " + std::to_string(tau) +
                      " dispatch is " +
                      (lp.status == SolveStatus::Infeasible ? "infeasible" : "unsolved"));

    const auto col = static_cast<std::size_t>(tau - 1);
    auto at = [&](const std::string& name) {
      return lp.x[static_cast<std::size_t>(m.var_id(name))];
    };
    for (std::size_t gp = 0; gp < c.generators.size(); ++gp) {
      res.gen_output[gp][col] = at(make_name("p_g", {c.generators[gp].id, 1, 1}));
      prev_aux[gp] = at(make_name("paux", {c.generators[gp].id, 1, 1}));
    }
    for (std::size_t lpos = 0; lpos < c.lines.size(); ++lpos)
      res.line_flow[lpos][col] = at(make_name("p_l", {c.lines[lpos].id, 1, 1}));
    for (std::size_t dp = 0; dp < D; ++dp)
      res.served_frac[dp][col] = at(make_name("x_d", {c.demands[dp].id, 1, 1}));
  }

  /* Settle the fractions the program leaves loose or noisy: a bus with no
   * energized path to a committed generator cannot be served at all, and a
   * zero-demand hour is trivially whole, so both get exact values instead
   * of solver residue. The rest is clamped to its own bounds. */
  std::vector<bool> scratch;
  std::vector<std::vector<bool>> powered;
  powered.reserve(static_cast<std::size_t>(H));
  for (int t = 1; t <= H; ++t) powered.push_back(reachable_at(c, plan, t, scratch));
  for (std::size_t dp = 0; dp < D; ++dp) {
    const auto bp = static_cast<std::size_t>(c.bus_pos(c.demands[dp].bus));
    for (int t = 0; t < H; ++t) {
      double& x = res.served_frac[dp][static_cast<std::size_t>(t)];
      if (!powered[static_cast<std::size_t>(t)][bp])
        x = 0.0;
      else if (realized.demand[dp][static_cast<std::size_t>(t)] == 0.0)
        x = 1.0;
      else
        x = std::min(1.0, std::max(0.0, x));
    }
  }

  double prod = 0.0, lost = 0.0;
  for (std::size_t gp = 0; gp < c.generators.size(); ++gp)
    for (int t = 0; t < H; ++t)
      prod += c.generators[gp].marginal_cost * res.gen_output[gp][static_cast<std::size_t>(t)];
  for (std::size_t dp = 0; dp < D; ++dp)
    for (int t = 0; t < H; ++t) {
      const double d = realized.demand[dp][static_cast<std::size_t>(t)];
      const double served = d * res.served_frac[dp][static_cast<std::size_t>(t)];
      res.served_mwh += served;
      lost += c.demands[dp].voll * (d - served);
    }
  double commit = 0.0;
  for (std::size_t gp = 0; gp < c.generators.size(); ++gp)
    for (int t = 0; t < H; ++t) {
      if (plan.gen_up[gp][static_cast<std::size_t>(t)]) commit += c.generators[gp].startup_cost;
      if (plan.gen_dn[gp][static_cast<std::size_t>(t)]) commit += c.generators[gp].shutdown_cost;
    }
  res.total_cost = prod + lost + commit;

  for (const auto& b : c.buses) {
    bool has_demand = false, shed = false;
    for (std::size_t dp = 0; dp < D; ++dp) {
      if (c.demands[dp].bus != b.id) continue;
      has_demand = true;
      for (int t = 0; t < H; ++t)
        shed = shed || realized.demand[dp][static_cast<std::size_t>(t)] *
                               (1.0 - res.served_frac[dp][static_cast<std::size_t>(t)]) >
                           1e-6;
    }
    if (!has_demand) continue;
    bool ever = false;
    const auto bp = static_cast<std::size_t>(c.bus_pos(b.id));
    for (int t = 0; t < H; ++t) ever = ever || powered[static_cast<std::size_t>(t)][bp];
    if (!ever)
      res.blackout_buses.push_back(b.id);
    else if (shed)
      res.partial_buses.push_back(b.id);
  }
  return res;
}

void write_generation_csv(const GridCase& c, const DispatchResult& r, std::ostream& out) {
  out << "hour,gen_id,p_mw\n";
  const std::size_t hours = r.gen_output.empty() ? 0 : r.gen_output[0].size();
  for (std::size_t t = 0; t < hours; ++t)
    for (std::size_t gp = 0; gp < c.generators.size(); ++gp)
      out << t + 1 << ',' << c.generators[gp].id << ',' << fmt(r.gen_output[gp][t]) << '\n';
}

void write_service_csv(const GridCase& c, const RealizedDemand& realized,
                       const DispatchResult& r, std::ostream& out) {
  out << "hour,demand_id,x_frac,shed_mw\n";
  const std::size_t hours = r.served_frac.empty() ? 0 : r.served_frac[0].size();
  for (std::size_t t = 0; t < hours; ++t)
    for (std::size_t dp = 0; dp < c.demands.size(); ++dp) {
      const double d = realized.demand[dp][t];
      out << t + 1 << ',' << c.demands[dp].id << ',' << fmt(r.served_frac[dp][t]) << ','
          << fmt(d * (1.0 - r.served_frac[dp][t])) << '\n';
    }
}

void write_dispatch_summary(const DispatchResult& r, std::ostream& out) {
  nlohmann::json j;
  j["served_mwh"] = r.served_mwh;
  j["total_cost"] = r.total_cost;
  j["blackout_buses"] = r.blackout_buses;
  out << j.dump(2) << '\n';
}

}  // namespace psps
