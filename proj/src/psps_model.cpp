#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "psps/psps.hpp"
#include "psps_common.hpp"

namespace psps {

namespace {

// Loose cap keeping bus angles bounded without a reference bus; real angle
// spreads are limited by the per-line bound below it.
constexpr double kThetaBox = 10.0;

void check_mode(const GridCase& c, const RiskMode& mode, std::vector<std::string>& err) {
  const int nlines = static_cast<int>(c.lines.size());
  std::visit(
      [&](const auto& md) {
        using T = std::decay_t<decltype(md)>;
        if constexpr (std::is_same_v<T, Nmk>) {
          if (md.k < 0 || md.k > nlines)
            err.push_back("Nmk.k must lie in [0, " + std::to_string(nlines) + "], got " +
                          std::to_string(md.k));
        } else if constexpr (std::is_same_v<T, WfpiTol>) {
          if (!std::isfinite(md.r_tol) || md.r_tol < 0.0)
            err.push_back("WfpiTol.r_tol must be finite and non-negative");
        } else if constexpr (std::is_same_v<T, WfpiSlack>) {
          if (!std::isfinite(md.r_tol) || md.r_tol < 0.0)
            err.push_back("WfpiSlack.r_tol must be finite and non-negative");
          if (!std::isfinite(md.r_slack_max) || md.r_slack_max < 0.0)
            err.push_back("WfpiSlack.r_slack_max must be finite and non-negative");
        } else if constexpr (std::is_same_v<T, MnwfHeuristic>) {
          if (md.active < 0 || md.active > nlines)
            err.push_back("MnwfHeuristic.active must lie in [0, " + std::to_string(nlines) +
                          "], got " + std::to_string(md.active));
        } else if constexpr (std::is_same_v<T, WlfpLog>) {
          if (!(md.pi_tol > 0.0) || !(md.pi_tol <= 1.0))
            err.push_back("WlfpLog.pi_tol must lie in (0, 1]");
          for (const auto& l : c.lines)
            if (!l.ignition_prob)
              err.push_back("WlfpLog needs an ignition_prob on line " + std::to_string(l.id));
        }
      },
      mode);
}

void check_cfg(const StochConfig& cfg, bool stochastic, std::vector<std::string>& err) {
  if (!std::isfinite(cfg.slack_weight) || cfg.slack_weight < 0.0)
    err.push_back("slack_weight must be finite and non-negative");
  if (!stochastic) return;
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) err.push_back("beta must lie in [0, 1]");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon < 1.0)) err.push_back("epsilon must lie in [0, 1)");
}

/* Shared core for both builders. demand[w - 1] points at a per-scenario
 * matrix indexed [demand position][hour]; prob is ignored when the model is
 * deterministic, as are beta and epsilon. */
MilpModel build_core(const GridCase& c,
                     const std::vector<const std::vector<std::vector<double>>*>& demand,
                     const std::vector<double>& prob, bool stochastic, const RiskMode& mode,
                     const StochConfig& cfg, const char* who) {
  std::vector<std::string> err;
  if (c.horizon() < 1) err.push_back("case horizon must be at least one hour");
  check_mode(c, mode, err);
  check_cfg(cfg, stochastic, err);
  if (!err.empty()) throw PspsError(std::string(who) + ": " + detail::join_lines(err));

  const int H = c.horizon();
  const int W = static_cast<int>(demand.size());
  const double thb = c.theta_bound();
  const bool use_cvar = stochastic && cfg.beta > 0.0;

  MilpModel m;
  m.name = detail::stamp_name(c.meta.name, H, W);

  // switching stage, shared by every scenario
  for (const auto& g : c.generators)
    for (int t = 1; t <= H; ++t) m.add_variable(make_name("z_g", {g.id, t}), VarKind::Binary, 0, 1);
  for (const auto& g : c.generators)
    for (int t = 1; t <= H; ++t) m.add_variable(make_name("zu_g", {g.id, t}), VarKind::Binary, 0, 1);
  for (const auto& g : c.generators)
    for (int t = 1; t <= H; ++t) m.add_variable(make_name("zd_g", {g.id, t}), VarKind::Binary, 0, 1);
  const auto* mnwf = std::get_if<MnwfHeuristic>(&mode);
  std::vector<bool> keep;
  if (mnwf) keep = mnwf_fix(c, mnwf->active);
  for (std::size_t lp = 0; lp < c.lines.size(); ++lp) {
    double lo = 0.0, hi = 1.0;
    if (mnwf) lo = hi = keep[lp] ? 1.0 : 0.0;
    for (int t = 1; t <= H; ++t)
      m.add_variable(make_name("z_l", {c.lines[lp].id, t}), VarKind::Binary, lo, hi);
  }
  int slack = -1;
  if (const auto* ws = std::get_if<WfpiSlack>(&mode))
    slack = m.add_variable(make_name("r_slack", {}), VarKind::Continuous, -ws->r_tol,
                           ws->r_slack_max);

  // recourse stage, one block per scenario
  for (int w = 1; w <= W; ++w) {
    for (const auto& g : c.generators)
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("p_g", {g.id, t, w}), VarKind::Continuous, 0, g.p_max);
    for (const auto& g : c.generators)
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("paux", {g.id, t, w}), VarKind::Continuous, 0, g.p_max - g.p_min);
    for (const auto& l : c.lines)
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("p_l", {l.id, t, w}), VarKind::Continuous, l.flow_min, l.flow_max);
    for (const auto& b : c.buses)
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("th", {b.id, t, w}), VarKind::Continuous, -kThetaBox, kThetaBox);
    for (const auto& d : c.demands)
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("x_d", {d.id, t, w}), VarKind::Continuous, 0, 1);
    m.add_variable(make_name("cost_w", {w}), VarKind::Continuous, -kInf, kInf);
  }
  int nu = -1;
  if (use_cvar) {
    nu = m.add_variable(make_name("nu", {}), VarKind::Continuous, -kInf, kInf);
    for (int w = 1; w <= W; ++w)
      m.add_variable(make_name("gam", {w}), VarKind::Continuous, 0, kInf);
  }

  auto vid = [&m](const char* sym, std::initializer_list<int> idx) {
    return m.var_id(make_name(sym, idx));
  };

  // commitment logic
  for (const auto& g : c.generators) {
    for (int t = 1; t <= H; ++t) {
      // switching identity; the first hour settles against the pre-horizon state
      std::vector<LinearTerm> tr{{vid("z_g", {g.id, t}), 1.0},
                                 {vid("zu_g", {g.id, t}), -1.0},
                                 {vid("zd_g", {g.id, t}), 1.0}};
      double rhs = g.initial_on ? 1.0 : 0.0;
      if (t > 1) {
        tr.push_back({vid("z_g", {g.id, t - 1}), -1.0});
        rhs = 0.0;
      }
      m.add_constraint(make_name("uc_tr", {g.id, t}), std::move(tr), Sense::Equal, rhs);
    }
    for (int t = 1; t <= H; ++t) {
      std::vector<LinearTerm> up{{vid("z_g", {g.id, t}), 1.0}};
      for (int s = std::max(1, t - g.min_up + 1); s <= t; ++s)
        up.push_back({vid("zu_g", {g.id, s}), -1.0});
      m.add_constraint(make_name("uc_up", {g.id, t}), std::move(up), Sense::GreaterEqual, 0.0);
      std::vector<LinearTerm> dn{{vid("z_g", {g.id, t}), -1.0}};
      for (int s = std::max(1, t - g.min_down + 1); s <= t; ++s)
        dn.push_back({vid("zd_g", {g.id, s}), -1.0});
      m.add_constraint(make_name("uc_dn", {g.id, t}), std::move(dn), Sense::GreaterEqual, -1.0);
      m.add_constraint(make_name("uc_ex", {g.id, t}),
                       {{vid("zu_g", {g.id, t}), 1.0}, {vid("zd_g", {g.id, t}), 1.0}},
                       Sense::LessEqual, 1.0);
    }
  }

  // a line shed during the horizon stays shed
  for (const auto& l : c.lines)
    for (int t = 1; t < H; ++t)
      m.add_constraint(make_name("pers", {l.id, t}),
                       {{vid("z_l", {l.id, t}), 1.0}, {vid("z_l", {l.id, t + 1}), -1.0}},
                       Sense::GreaterEqual, 0.0);

  // risk rows; the heuristic mode constrains through the z_l bounds instead
  std::visit(
      [&](const auto& md) {
        using T = std::decay_t<decltype(md)>;
        if constexpr (std::is_same_v<T, Nmk>) {
          if (c.lines.empty()) return;
          for (int t = 1; t <= H; ++t) {
            std::vector<LinearTerm> terms;
            terms.reserve(c.lines.size());
            for (const auto& l : c.lines) terms.push_back({vid("z_l", {l.id, t}), 1.0});
            m.add_constraint(make_name("risk", {t}), std::move(terms), Sense::LessEqual,
                             static_cast<double>(static_cast<int>(c.lines.size()) - md.k));
          }
        } else if constexpr (std::is_same_v<T, WfpiTol>) {
          bool any = false;
          for (const auto& l : c.lines) any = any || l.wfpi > 0.0;
          if (!any) return;
          for (int t = 1; t <= H; ++t) {
            std::vector<LinearTerm> terms;
            for (const auto& l : c.lines)
              if (l.wfpi > 0.0) terms.push_back({vid("z_l", {l.id, t}), l.wfpi});
            m.add_constraint(make_name("risk", {t}), std::move(terms), Sense::LessEqual, md.r_tol);
          }
        } else if constexpr (std::is_same_v<T, WfpiSlack>) {
          for (int t = 1; t <= H; ++t) {
            std::vector<LinearTerm> terms;
            for (const auto& l : c.lines)
              if (l.wfpi > 0.0) terms.push_back({vid("z_l", {l.id, t}), l.wfpi});
            terms.push_back({slack, -1.0});
            m.add_constraint(make_name("risk", {t}), std::move(terms), Sense::Equal, md.r_tol);
          }
        } else if constexpr (std::is_same_v<T, WlfpLog>) {
          double base = 0.0;
          bool any = false;
          for (const auto& l : c.lines)
            if (*l.ignition_prob > 0.0) {
              base += std::log(*l.ignition_prob);
              any = true;
            }
          // with no ignitable lines every topology is riskless
          if (!any) return;
          for (int t = 1; t <= H; ++t) {
            std::vector<LinearTerm> terms;
            for (const auto& l : c.lines) {
              const double ip = *l.ignition_prob;
              if (ip > 0.0)
                terms.push_back({vid("z_l", {l.id, t}), std::log1p(-ip) - std::log(ip)});
            }
            m.add_constraint(make_name("risk", {t}), std::move(terms), Sense::LessEqual,
                             std::log(md.pi_tol) - base);
          }
        }
      },
      mode);

  // adjacency by bus position, for the balance rows
  const std::size_t nb = c.buses.size();
  std::vector<std::vector<int>> gens_at(nb), dems_at(nb), in_at(nb), out_at(nb);
  for (std::size_t i = 0; i < c.generators.size(); ++i)
    gens_at[static_cast<std::size_t>(c.bus_pos(c.generators[i].bus))].push_back(
        static_cast<int>(i));
  for (std::size_t i = 0; i < c.lines.size(); ++i) {
    out_at[static_cast<std::size_t>(c.bus_pos(c.lines[i].from))].push_back(static_cast<int>(i));
    in_at[static_cast<std::size_t>(c.bus_pos(c.lines[i].to))].push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < c.demands.size(); ++i)
    dems_at[static_cast<std::size_t>(c.bus_pos(c.demands[i].bus))].push_back(static_cast<int>(i));

  for (int w = 1; w <= W; ++w) {
    const auto& dm = *demand[static_cast<std::size_t>(w - 1)];

    for (const auto& g : c.generators) {
      for (int t = 1; t <= H; ++t) {
        const int p = vid("p_g", {g.id, t, w});
        const int z = vid("z_g", {g.id, t});
        const int a = vid("paux", {g.id, t, w});
        m.add_constraint(make_name("gmin", {g.id, t, w}), {{p, 1.0}, {z, -g.p_min}},
                         Sense::GreaterEqual, 0.0);
        m.add_constraint(make_name("gmax", {g.id, t, w}), {{p, 1.0}, {z, -g.p_max}},
                         Sense::LessEqual, 0.0);
        // output above minimum, the quantity the ramps act on
        m.add_constraint(make_name("aux", {g.id, t, w}), {{a, 1.0}, {p, -1.0}, {z, g.p_min}},
                         Sense::Equal, 0.0);
      }
      for (int t = 2; t <= H; ++t) {
        const int a1 = vid("paux", {g.id, t, w});
        const int a0 = vid("paux", {g.id, t - 1, w});
        m.add_constraint(make_name("rup", {g.id, t, w}), {{a1, 1.0}, {a0, -1.0}},
                         Sense::LessEqual, g.ramp_max);
        m.add_constraint(make_name("rdn", {g.id, t, w}), {{a1, 1.0}, {a0, -1.0}},
                         Sense::GreaterEqual, g.ramp_min);
      }
    }

    for (const auto& l : c.lines) {
      // MW per radian on the 100 MVA system base
      const double k = 100.0 * l.susceptance;
      const double big = k * thb;
      for (int t = 1; t <= H; ++t) {
        const int p = vid("p_l", {l.id, t, w});
        const int z = vid("z_l", {l.id, t});
        const int ti = vid("th", {l.from, t, w});
        const int tj = vid("th", {l.to, t, w});
        // closed: flow pinned to the angle drop; open: the drop stays inside
        // the per-line angle bound while the thermal rows zero the flow
        m.add_constraint(make_name("fup", {l.id, t, w}),
                         {{p, 1.0}, {ti, -k}, {tj, k}, {z, big}}, Sense::LessEqual, big);
        m.add_constraint(make_name("flo", {l.id, t, w}),
                         {{p, 1.0}, {ti, -k}, {tj, k}, {z, -big}}, Sense::GreaterEqual, -big);
        m.add_constraint(make_name("tup", {l.id, t, w}), {{p, 1.0}, {z, -l.flow_max}},
                         Sense::LessEqual, 0.0);
        m.add_constraint(make_name("tlo", {l.id, t, w}), {{p, 1.0}, {z, -l.flow_min}},
                         Sense::GreaterEqual, 0.0);
      }
    }

    for (std::size_t bp = 0; bp < nb; ++bp) {
      for (int t = 1; t <= H; ++t) {
        std::vector<LinearTerm> terms;
        for (int gi : gens_at[bp]) terms.push_back({vid("p_g", {c.generators[gi].id, t, w}), 1.0});
        for (int li : in_at[bp]) terms.push_back({vid("p_l", {c.lines[li].id, t, w}), 1.0});
        for (int li : out_at[bp]) terms.push_back({vid("p_l", {c.lines[li].id, t, w}), -1.0});
        for (int di : dems_at[bp])
          terms.push_back({vid("x_d", {c.demands[di].id, t, w}),
                           -dm[static_cast<std::size_t>(di)][static_cast<std::size_t>(t - 1)]});
        if (terms.empty()) continue;
        m.add_constraint(make_name("bal", {c.buses[bp].id, t, w}), std::move(terms), Sense::Equal,
                         0.0);
      }
    }

    // per-scenario cost identity; constants all live on the right-hand side
    std::vector<LinearTerm> pirow{{vid("cost_w", {w}), 1.0}};
    double pirhs = 0.0;
    if (cfg.include_commitment_costs) {
      for (const auto& g : c.generators)
        for (int t = 1; t <= H; ++t) {
          pirow.push_back({vid("zu_g", {g.id, t}), -g.startup_cost});
          pirow.push_back({vid("zd_g", {g.id, t}), -g.shutdown_cost});
          pirow.push_back({vid("p_g", {g.id, t, w}), -g.marginal_cost});
        }
    }
    for (std::size_t dp = 0; dp < c.demands.size(); ++dp) {
      const auto& d = c.demands[dp];
      for (int t = 1; t <= H; ++t) {
        const double mw = dm[dp][static_cast<std::size_t>(t - 1)];
        pirow.push_back({vid("x_d", {d.id, t, w}), d.voll * mw});
        pirhs += d.voll * mw;
      }
    }
    if (slack >= 0) pirow.push_back({slack, -cfg.slack_weight});
    m.add_constraint(make_name("picost", {w}), std::move(pirow), Sense::Equal, pirhs);
  }

  if (use_cvar)
    for (int w = 1; w <= W; ++w)
      m.add_constraint(make_name("cvar", {w}),
                       {{vid("gam", {w}), 1.0}, {vid("cost_w", {w}), -1.0}, {nu, 1.0}},
                       Sense::GreaterEqual, 0.0);

  std::vector<LinearTerm> obj;
  if (!stochastic) {
    obj.push_back({vid("cost_w", {1}), 1.0});
  } else {
    for (int w = 1; w <= W; ++w)
      obj.push_back({vid("cost_w", {w}), (1.0 - cfg.beta) * prob[static_cast<std::size_t>(w - 1)]});
    if (use_cvar) {
      obj.push_back({nu, cfg.beta});
      for (int w = 1; w <= W; ++w)
        obj.push_back({vid("gam", {w}),
                       cfg.beta * prob[static_cast<std::size_t>(w - 1)] / (1.0 - cfg.epsilon)});
    }
  }
  m.set_objective(std::move(obj));
  return m;
}

}  // namespace

MilpModel build_deterministic(const GridCase& c, const Scenario& mean_demand, const RiskMode& mode,
                              const StochConfig& cfg) {
  std::vector<std::string> err;
  if (mean_demand.demand.size() != c.demands.size()) {
    err.push_back("mean_demand carries " + std::to_string(mean_demand.demand.size()) +
                  " rows for " + std::to_string(c.demands.size()) + " case demands");
  } else {
    for (std::size_t r = 0; r < mean_demand.demand.size(); ++r) {
      const auto& row = mean_demand.demand[r];
      if (row.size() != static_cast<std::size_t>(c.horizon())) {
        err.push_back("mean_demand row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " hours for a horizon of " +
                      std::to_string(c.horizon()));
        continue;
      }
      for (double v : row)
        if (!std::isfinite(v) || v < 0.0) {
          err.push_back("mean_demand row " + std::to_string(r) +
                        " holds a negative or non-finite value");
          break;
        }
    }
  }
  if (!err.empty()) throw PspsError("build_deterministic: " + detail::join_lines(err));
  const std::vector<const std::vector<std::vector<double>>*> dem{&mean_demand.demand};
  return build_core(c, dem, {1.0}, false, mode, cfg, "build_deterministic");
}

MilpModel build_stochastic_first_stage(const GridCase& c, const ScenarioSet& scenarios,
                                       const RiskMode& mode, const StochConfig& cfg) {
  std::vector<std::string> err = validate_scenarios(scenarios);
  if (scenarios.horizon != c.horizon())
    err.push_back("scenario horizon " + std::to_string(scenarios.horizon) +
                  " does not match the case horizon " + std::to_string(c.horizon()));
  std::vector<int> want;
  want.reserve(c.demands.size());
  for (const auto& d : c.demands) want.push_back(d.id);
  if (scenarios.demand_ids != want)
    err.push_back("scenario rows must be labelled with the case demand ids in case order");
  if (!err.empty()) throw PspsError("build_stochastic_first_stage: " + detail::join_lines(err));
  std::vector<const std::vector<std::vector<double>>*> dem;
  std::vector<double> prob;
  dem.reserve(scenarios.scenarios.size());
  prob.reserve(scenarios.scenarios.size());
  for (const auto& s : scenarios.scenarios) {
    dem.push_back(&s.demand);
    prob.push_back(s.probability);
  }
  return build_core(c, dem, prob, true, mode, cfg, "build_stochastic_first_stage");
}

std::vector<bool> mnwf_fix(const GridCase& c, int active) {
  if (active < 0 || active > static_cast<int>(c.lines.size()))
    throw PspsError("mnwf_fix: active must lie in [0, " + std::to_string(c.lines.size()) +
                    "], got " + std::to_string(active));
  std::vector<int> order(c.lines.size());
  std::iota(order.begin(), order.end(), 0);
  // stable sort keeps the id order inside equal-wfpi groups
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return c.lines[static_cast<std::size_t>(a)].wfpi <
                                              c.lines[static_cast<std::size_t>(b)].wfpi; });
  std::vector<bool> keep(c.lines.size(), false);
  for (int i = 0; i < active; ++i) keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  return keep;
}

double default_slack_cap(const GridCase& c) {
  double cap = 0.0;
  for (const auto& l : c.lines) cap = std::max(cap, l.wfpi);
  return cap;
}

double wlfp_zero_risk_tol(const GridCase& c) {
  double prod = 1.0;
  for (const auto& l : c.lines) {
    if (!l.ignition_prob)
      throw PspsError("wlfp_zero_risk_tol: line " + std::to_string(l.id) +
                      " has no ignition_prob");
    if (*l.ignition_prob > 0.0) prod *= *l.ignition_prob;
  }
  return prod;
}

void add_storage(MilpModel& m, const GridCase& c) {
  if (c.storages.empty()) return;
  const auto st = detail::read_stamp(m);
  if (!st)
    throw PspsError("add_storage: model '" + m.name + "' was not built by this module");
  // A model from another case would take the storage joins onto the wrong
  // balance rows, silently creating free energy, so reject it outright.
  if (st->horizon != c.horizon() ||
      m.name != detail::stamp_name(c.meta.name, st->horizon, st->scenarios))
    throw PspsError("add_storage: model '" + m.name + "' was not built from case '" +
                    c.meta.name + "'");
  const int H = st->horizon, W = st->scenarios;

  for (const auto& s : c.storages) {
    for (int t = 1; t <= H; ++t)
      m.add_variable(make_name("o_s", {s.id, t}), VarKind::Binary, 0, 1);
    for (int t = 1; t <= H; ++t)
      m.add_variable(make_name("z_s", {s.id, t}), VarKind::Binary, 0, 1);
    for (int t = 1; t <= H; ++t)
      m.add_variable(make_name("ech", {s.id, t}), VarKind::Binary, 0, 1);
    for (int t = 1; t <= H; ++t)
      m.add_variable(make_name("edis", {s.id, t}), VarKind::Binary, 0, 1);
    for (int w = 1; w <= W; ++w) {
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("pch", {s.id, t, w}), VarKind::Continuous, 0, s.charge_max);
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("pdis", {s.id, t, w}), VarKind::Continuous, 0, s.discharge_max);
      for (int t = 1; t <= H; ++t)
        m.add_variable(make_name("soc", {s.id, t, w}), VarKind::Continuous, 0, s.capacity);
    }
  }

  // appending to a balance row keeps its sorted-term invariant because the
  // storage variable ids are larger than everything already there
  std::unordered_map<std::string, int> bal;
  for (std::size_t i = 0; i < m.constraints.size(); ++i)
    if (m.constraints[i].name.rfind("bal[", 0) == 0)
      bal.emplace(m.constraints[i].name, static_cast<int>(i));

  for (const auto& s : c.storages) {
    for (int t = 1; t <= H; ++t) {
      const int o = m.var_id(make_name("o_s", {s.id, t}));
      const int z = m.var_id(make_name("z_s", {s.id, t}));
      const int ec = m.var_id(make_name("ech", {s.id, t}));
      const int ed = m.var_id(make_name("edis", {s.id, t}));
      // ech = z_s and o_s, edis = z_s and not o_s
      m.add_constraint(make_name("ech1", {s.id, t}), {{ec, 1.0}, {z, -1.0}}, Sense::LessEqual, 0.0);
      m.add_constraint(make_name("ech2", {s.id, t}), {{ec, 1.0}, {o, -1.0}}, Sense::LessEqual, 0.0);
      m.add_constraint(make_name("ech3", {s.id, t}), {{z, 1.0}, {o, 1.0}, {ec, -1.0}},
                       Sense::LessEqual, 1.0);
      m.add_constraint(make_name("edis1", {s.id, t}), {{ed, 1.0}, {z, -1.0}}, Sense::LessEqual,
                       0.0);
      m.add_constraint(make_name("edis2", {s.id, t}), {{ed, 1.0}, {o, 1.0}}, Sense::LessEqual,
                       1.0);
      m.add_constraint(make_name("edis3", {s.id, t}), {{z, 1.0}, {o, -1.0}, {ed, -1.0}},
                       Sense::LessEqual, 0.0);
    }
    const double half = s.capacity / 2.0;
    for (int w = 1; w <= W; ++w) {
      for (int t = 1; t <= H; ++t) {
        const int pc = m.var_id(make_name("pch", {s.id, t, w}));
        const int pd = m.var_id(make_name("pdis", {s.id, t, w}));
        const int b = m.var_id(make_name("soc", {s.id, t, w}));
        const int ec = m.var_id(make_name("ech", {s.id, t}));
        const int ed = m.var_id(make_name("edis", {s.id, t}));
        m.add_constraint(make_name("chcap", {s.id, t, w}), {{pc, 1.0}, {ec, -s.charge_max}},
                         Sense::LessEqual, 0.0);
        m.add_constraint(make_name("discap", {s.id, t, w}), {{pd, 1.0}, {ed, -s.discharge_max}},
                         Sense::LessEqual, 0.0);
        std::vector<LinearTerm> soc{{b, 1.0}, {pc, -s.eff_charge}, {pd, 1.0 / s.eff_discharge}};
        double rhs = half;  // the first hour settles against the half-full start
        if (t > 1) {
          soc.push_back({m.var_id(make_name("soc", {s.id, t - 1, w})), -1.0});
          rhs = 0.0;
        }
        m.add_constraint(make_name("soc", {s.id, t, w}), std::move(soc), Sense::Equal, rhs);

        const std::string bname = make_name("bal", {s.bus, t, w});
        const auto it = bal.find(bname);
        if (it == bal.end()) {
          const int row = m.add_constraint(bname, {{pc, -1.0}, {pd, 1.0}}, Sense::Equal, 0.0);
          bal.emplace(bname, row);
        } else {
          auto& terms = m.constraints[static_cast<std::size_t>(it->second)].terms;
          terms.push_back({pc, -1.0});
          terms.push_back({pd, 1.0});
        }
      }
      m.add_constraint(make_name("socend", {s.id, w}),
                       {{m.var_id(make_name("soc", {s.id, H, w})), 1.0}}, Sense::Equal, half);
    }
  }
}

}  // namespace psps
