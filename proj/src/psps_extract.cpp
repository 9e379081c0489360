#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "psps/psps.hpp"
#include "psps_common.hpp"

namespace psps {

std::vector<std::string> validate_plan(const GridCase& c, const FirstStagePlan& plan) {
  std::vector<std::string> out;
  const std::size_t H = static_cast<std::size_t>(c.horizon());
  auto shaped = [&](const char* what, const std::vector<std::vector<bool>>& rows,
                    std::size_t want) {
    if (rows.size() != want) {
      out.push_back(std::string(what) + ": expected " + std::to_string(want) + " rows, got " +
                    std::to_string(rows.size()));
      return false;
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].size() != H) {
        out.push_back(std::string(what) + " row " + std::to_string(i) + ": expected " +
                      std::to_string(H) + " hours, got " + std::to_string(rows[i].size()));
        return false;
      }
    return true;
  };

  const bool g_ok = shaped("gen_on", plan.gen_on, c.generators.size());
  const bool u_ok = shaped("gen_up", plan.gen_up, c.generators.size());
  const bool d_ok = shaped("gen_dn", plan.gen_dn, c.generators.size());
  if (g_ok && u_ok && d_ok) {
    for (std::size_t gp = 0; gp < c.generators.size(); ++gp) {
      const auto& g = c.generators[gp];
      const auto& on = plan.gen_on[gp];
      const auto& up = plan.gen_up[gp];
      const auto& dn = plan.gen_dn[gp];
      auto tag = [&](std::size_t t) {
        return "generator " + std::to_string(g.id) + " hour " + std::to_string(t + 1);
      };
      for (std::size_t t = 0; t < H; ++t) {
        const int prev = t == 0 ? (g.initial_on ? 1 : 0) : (on[t - 1] ? 1 : 0);
        if ((on[t] ? 1 : 0) - prev != (up[t] ? 1 : 0) - (dn[t] ? 1 : 0))
          out.push_back(tag(t) + ": switching identity broken");
        if (up[t] && dn[t]) out.push_back(tag(t) + ": start and stop in the same hour");
        if (up[t])
          for (std::size_t s = t; s < std::min(H, t + static_cast<std::size_t>(g.min_up)); ++s)
            if (!on[s]) {
              out.push_back(tag(t) + ": shut down before min_up elapsed");
              break;
            }
        if (dn[t])
          for (std::size_t s = t; s < std::min(H, t + static_cast<std::size_t>(g.min_down)); ++s)
            if (on[s]) {
              out.push_back(tag(t) + ": restarted before min_down elapsed");
              break;
            }
      }
    }
  }

  if (shaped("line_on", plan.line_on, c.lines.size())) {
    for (std::size_t lp = 0; lp < c.lines.size(); ++lp)
      for (std::size_t t = 0; t + 1 < H; ++t)
        if (!plan.line_on[lp][t] && plan.line_on[lp][t + 1]) {
          out.push_back("line " + std::to_string(c.lines[lp].id) + " hour " +
                        std::to_string(t + 2) + ": re-energized after a shut-off");
          break;
        }
  }

  if (!std::isfinite(plan.r_slack)) out.push_back("r_slack must be finite");
  return out;
}

FirstStagePlan extract_plan(const GridCase& c, const MilpModel& m, const std::vector<double>& x,
                            double int_tol) {
  const auto st = detail::read_stamp(m);
  if (!st) throw PspsError("extract_plan: model '" + m.name + "' was not built by this module");
  if (st->horizon != c.horizon())
    throw PspsError("extract_plan: model horizon " + std::to_string(st->horizon) +
                    " does not match the case horizon " + std::to_string(c.horizon()));
  if (x.size() != m.vars.size())
    throw PspsError("extract_plan: solution has " + std::to_string(x.size()) + " values for " +
                    std::to_string(m.vars.size()) + " variables");
  const int H = st->horizon;

  auto bit = [&](const char* sym, int id, int t) {
    const std::string name = make_name(sym, {id, t});
    const int v = m.var_id(name);
    if (v < 0) throw PspsError("extract_plan: variable " + name + " is missing");
    const double val = x[static_cast<std::size_t>(v)];
    if (!(std::fabs(val) <= int_tol) && !(std::fabs(val - 1.0) <= int_tol))
      throw PspsError("extract_plan: " + name + " = " + std::to_string(val) +
                      " is not 0/1 within " + std::to_string(int_tol));
    return val > 0.5;
  };

  FirstStagePlan plan;
  plan.gen_on.resize(c.generators.size());
  plan.gen_up.resize(c.generators.size());
  plan.gen_dn.resize(c.generators.size());
  plan.line_on.resize(c.lines.size());
  for (std::size_t gp = 0; gp < c.generators.size(); ++gp) {
    const int id = c.generators[gp].id;
    auto& on = plan.gen_on[gp];
    auto& up = plan.gen_up[gp];
    auto& dn = plan.gen_dn[gp];
    on.resize(static_cast<std::size_t>(H));
    up.resize(static_cast<std::size_t>(H));
    dn.resize(static_cast<std::size_t>(H));
    for (int t = 1; t <= H; ++t) {
      on[static_cast<std::size_t>(t - 1)] = bit("z_g", id, t);
      up[static_cast<std::size_t>(t - 1)] = bit("zu_g", id, t);
      dn[static_cast<std::size_t>(t - 1)] = bit("zd_g", id, t);
    }
  }
  for (std::size_t lp = 0; lp < c.lines.size(); ++lp) {
    auto& on = plan.line_on[lp];
    on.resize(static_cast<std::size_t>(H));
    for (int t = 1; t <= H; ++t)
      on[static_cast<std::size_t>(t - 1)] = bit("z_l", c.lines[lp].id, t);
  }
  const int rs = m.var_id(make_name("r_slack", {}));
  if (rs >= 0) plan.r_slack = x[static_cast<std::size_t>(rs)];

  const auto problems = validate_plan(c, plan);
  if (!problems.empty())
    throw PspsError("extract_plan: solution violates plan invariants:\n" +
                    detail::join_lines(problems));
  return plan;
}

std::vector<double> energize_zero_risk_lines(const GridCase& c, const RiskMode& mode,
                                             const MilpModel& m, std::vector<double> x) {
  if (std::holds_alternative<Nmk>(mode) || std::holds_alternative<MnwfHeuristic>(mode)) return x;
  if (c.lines.empty()) return x;
  const auto st = detail::read_stamp(m);
  if (!st)
    throw PspsError("energize_zero_risk_lines: model '" + m.name +
                    "' was not built by this module");
  if (x.size() != m.vars.size())
    throw PspsError("energize_zero_risk_lines: solution has " + std::to_string(x.size()) +
                    " values for " + std::to_string(m.vars.size()) + " variables");
  const int H = st->horizon, W = st->scenarios;
  const bool wlfp = std::holds_alternative<WlfpLog>(mode);

  auto riskless = [&](const Line& l) {
    if (wlfp) return l.ignition_prob.has_value() && *l.ignition_prob <= 0.0;
    return l.wfpi <= 0.0;
  };
  auto need = [&](const std::string& name) {
    const int v = m.var_id(name);
    if (v < 0) throw PspsError("energize_zero_risk_lines: variable " + name + " is missing");
    return v;
  };
  auto zl = [&](std::size_t lp, int t) { return need(make_name("z_l", {c.lines[lp].id, t})); };
  auto th = [&](int bus, int t, int w) { return need(make_name("th", {bus, t, w})); };

  EvalReport base = evaluate_solution(m, x);
  auto clean = [&](const std::vector<double>& cand) {
    const EvalReport r = evaluate_solution(m, cand);
    return r.max_bound_violation <= base.max_bound_violation + 1e-9 &&
           r.max_constraint_violation <= base.max_constraint_violation + 1e-9 &&
           r.max_integrality_violation <= base.max_integrality_violation + 1e-9 &&
           std::fabs(r.objective - base.objective) <=
               1e-9 * std::max(1.0, std::fabs(base.objective));
  };
  auto energized_ids = [&](const std::vector<double>& v, int t) {
    std::vector<int> ids;
    for (std::size_t lp = 0; lp < c.lines.size(); ++lp)
      if (v[static_cast<std::size_t>(zl(lp, t))] > 0.5) ids.push_back(c.lines[lp].id);
    return ids;
  };

  /* Anchor every island's angles at its lowest bus so equally good solver
   * offsets cannot leak into the output. Kept only when it re-verifies. */
  {
    std::vector<double> cand = x;
    for (int t = 1; t <= H; ++t) {
      const auto groups = islands(c, energized_ids(cand, t));
      for (const auto& grp : groups) {
        const int anchor = grp.front();
        for (int w = 1; w <= W; ++w) {
          const double off = cand[static_cast<std::size_t>(th(anchor, t, w))];
          if (off == 0.0) continue;
          for (int b : grp) cand[static_cast<std::size_t>(th(b, t, w))] -= off;
        }
      }
    }
    if (clean(cand)) {
      x.swap(cand);
      base = evaluate_solution(m, x);
    }
  }

  /* Extend each riskless line's energized prefix through every later hour
   * where it bridges two islands. Non-increasing energization means a line
   * blocked at hour t (already inside one island there) can never relight
   * afterwards, so the extension stops at the first blocked hour. The
   * absorbed island's angles translate so the new line carries no flow,
   * and the patch survives only if the whole solution re-verifies with the
   * objective unchanged. */
  for (std::size_t lp = 0; lp < c.lines.size(); ++lp) {
    const auto& l = c.lines[lp];
    if (!riskless(l)) continue;

    int lit = 0;
    while (lit < H && x[static_cast<std::size_t>(zl(lp, lit + 1))] > 0.5) ++lit;

    int reach = lit;
    std::vector<std::vector<std::vector<int>>> groups_t;  // [t - lit - 1] -> islands
    for (int t = lit + 1; t <= H; ++t) {
      auto groups = islands(c, energized_ids(x, t));
      int ga = -1, gb = -1;
      for (std::size_t k = 0; k < groups.size(); ++k) {
        if (std::binary_search(groups[k].begin(), groups[k].end(), l.from))
          ga = static_cast<int>(k);
        if (std::binary_search(groups[k].begin(), groups[k].end(), l.to))
          gb = static_cast<int>(k);
      }
      if (ga < 0 || gb < 0 || ga == gb) break;
      groups_t.push_back(std::move(groups));
      reach = t;
    }
    if (reach == lit) continue;

    std::vector<double> cand = x;
    for (int t = lit + 1; t <= reach; ++t) {
      cand[static_cast<std::size_t>(zl(lp, t))] = 1.0;
      const auto& groups = groups_t[static_cast<std::size_t>(t - lit - 1)];
      const std::vector<int>* ga = nullptr;
      const std::vector<int>* gb = nullptr;
      for (const auto& grp : groups) {
        if (std::binary_search(grp.begin(), grp.end(), l.from)) ga = &grp;
        if (std::binary_search(grp.begin(), grp.end(), l.to)) gb = &grp;
      }
      // translate the island with the larger anchor id onto the other one
      const bool move_to_side = ga->front() < gb->front();
      const auto& grp = move_to_side ? *gb : *ga;
      for (int w = 1; w <= W; ++w) {
        const double delta = cand[static_cast<std::size_t>(th(l.from, t, w))] -
                             cand[static_cast<std::size_t>(th(l.to, t, w))];
        if (delta == 0.0) continue;
        const double shift = move_to_side ? delta : -delta;
        for (int b : grp) cand[static_cast<std::size_t>(th(b, t, w))] += shift;
      }
    }
    if (clean(cand)) {
      x.swap(cand);
      base = evaluate_solution(m, x);
    }
  }
  return x;
}

SolutionSummary summarize_solution(const GridCase& c, const MilpModel& m,
                                   const std::vector<double>& x) {
  const auto st = detail::read_stamp(m);
  if (!st)
    throw PspsError("summarize_solution: model '" + m.name + "' was not built by this module");
  if (x.size() != m.vars.size())
    throw PspsError("summarize_solution: solution has " + std::to_string(x.size()) +
                    " values for " + std::to_string(m.vars.size()) + " variables");
  const int H = st->horizon, W = st->scenarios;

  SolutionSummary out;
  out.objective = evaluate_solution(m, x).objective;

  auto val = [&](const std::string& name) {
    const int v = m.var_id(name);
    return v < 0 ? 0.0 : x[static_cast<std::size_t>(v)];
  };

  // the slack price is recovered from the cost identity row, so the summary
  // needs no sight of the build configuration
  double slack_price = 0.0;
  const int rs = m.var_id(make_name("r_slack", {}));
  if (rs >= 0) {
    out.r_slack = x[static_cast<std::size_t>(rs)];
    for (const auto& row : m.constraints) {
      if (row.name != "picost[1]") continue;
      for (const auto& tm : row.terms)
        if (tm.var == rs) {
          slack_price = -tm.coef;
          break;
        }
      break;
    }
  }

  for (const auto& g : c.generators) {
    bool on_any = false;
    for (int t = 1; t <= H; ++t) {
      out.commit_cost += g.startup_cost * val(make_name("zu_g", {g.id, t})) +
                         g.shutdown_cost * val(make_name("zd_g", {g.id, t}));
      on_any = on_any || val(make_name("z_g", {g.id, t})) > 0.5;
    }
    if (on_any) ++out.gens_committed;
  }

  out.hourly_risk.assign(static_cast<std::size_t>(H), 0.0);
  out.hourly_lines.assign(static_cast<std::size_t>(H), 0);
  for (const auto& l : c.lines)
    for (int t = 1; t <= H; ++t)
      if (val(make_name("z_l", {l.id, t})) > 0.5) {
        out.hourly_risk[static_cast<std::size_t>(t - 1)] += l.wfpi;
        ++out.hourly_lines[static_cast<std::size_t>(t - 1)];
      }

  // demand MW live in the balance rows as -d on the served fraction
  std::unordered_map<std::string, const LinearConstraint*> bal;
  for (const auto& row : m.constraints)
    if (row.name.rfind("bal[", 0) == 0) bal.emplace(row.name, &row);
  auto demand_mw = [&](const Demand& d, int t, int w) {
    const auto it = bal.find(make_name("bal", {d.bus, t, w}));
    if (it == bal.end()) return 0.0;
    const int xv = m.var_id(make_name("x_d", {d.id, t, w}));
    const auto& terms = it->second->terms;
    const auto pos = std::lower_bound(terms.begin(), terms.end(), xv,
                                      [](const LinearTerm& tm, int v) { return tm.var < v; });
    if (pos == terms.end() || pos->var != xv) return 0.0;
    return -pos->coef;
  };

  out.production_cost.assign(static_cast<std::size_t>(W), 0.0);
  out.voll_cost.assign(static_cast<std::size_t>(W), 0.0);
  out.scenario_cost.assign(static_cast<std::size_t>(W), 0.0);
  out.served_mwh.assign(static_cast<std::size_t>(W), 0.0);
  for (int w = 1; w <= W; ++w) {
    double prod = 0.0;
    for (const auto& g : c.generators)
      for (int t = 1; t <= H; ++t) prod += g.marginal_cost * val(make_name("p_g", {g.id, t, w}));
    double voll = 0.0, served = 0.0;
    for (const auto& d : c.demands)
      for (int t = 1; t <= H; ++t) {
        const double mw = demand_mw(d, t, w);
        if (mw == 0.0) continue;
        // served fractions carry simplex residue just outside their box
        const double frac =
            std::clamp(val(make_name("x_d", {d.id, t, w})), 0.0, 1.0);
        voll += d.voll * mw * (1.0 - frac);
        served += mw * frac;
      }
    out.production_cost[static_cast<std::size_t>(w - 1)] = prod;
    out.voll_cost[static_cast<std::size_t>(w - 1)] = voll;
    out.served_mwh[static_cast<std::size_t>(w - 1)] = served;
    out.scenario_cost[static_cast<std::size_t>(w - 1)] =
        out.commit_cost + prod + voll + slack_price * out.r_slack;
  }
  return out;
}

}  // namespace psps
