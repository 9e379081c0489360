#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <queue>
#include <vector>

#include "simplex_impl.hpp"

namespace psps {

namespace {

struct BoundChange {
  int var;
  double lb, ub;
  std::shared_ptr<const BoundChange> parent;
};

struct Node {
  double bound = -kInf;
  long id = 0;
  std::shared_ptr<const BoundChange> changes;
  std::shared_ptr<const Basis> warm;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double rel_gap(double inc, double bound) {
  if (inc >= kInf || bound <= -kInf) return kInf;
  return (inc - bound) / std::max(1.0, std::fabs(inc));
}

void log_line(std::ostream* os, long node, double bound, double inc, double gap) {
  if (!os) return;
  char buf[160];
  std::snprintf(buf, sizeof buf, "node=%ld bound=%.8g incumbent=%.8g gap=%.3g\n", node, bound,
                inc, gap);
  (*os) << buf;
  os->flush();
}

/* Scaled feasibility check against the original rows; the simplex result is
 * never trusted on its own word. */
bool check_candidate(const MilpModel& m, const std::vector<double>& x, double feas_tol,
                     double int_tol) {
  for (const auto& v : m.vars) {
    double xv = x[static_cast<std::size_t>(v.id)];
    if (xv < v.lower - feas_tol || xv > v.upper + feas_tol) return false;
    if (v.kind == VarKind::Binary && std::fabs(xv - std::round(xv)) > int_tol) return false;
  }
  for (const auto& c : m.constraints) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    double slack = feas_tol * (1.0 + std::fabs(c.rhs));
    switch (c.sense) {
      case Sense::LessEqual:
        if (lhs > c.rhs + slack) return false;
        break;
      case Sense::GreaterEqual:
        if (lhs < c.rhs - slack) return false;
        break;
      case Sense::Equal:
        if (std::fabs(lhs - c.rhs) > slack) return false;
        break;
    }
  }
  return true;
}

}  // namespace

MipResult solve_mip(const MilpModel& m, const SolverConfig& cfg) {
  detail::SimplexEngine eng(m, cfg);
  const int n = static_cast<int>(m.vars.size());

  std::vector<int> bins;
  for (const auto& v : m.vars)
    if (v.kind == VarKind::Binary) bins.push_back(v.id);

  std::vector<double> lb0(static_cast<std::size_t>(n)), ub0(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    lb0[static_cast<std::size_t>(j)] = m.vars[static_cast<std::size_t>(j)].lower;
    ub0[static_cast<std::size_t>(j)] = m.vars[static_cast<std::size_t>(j)].upper;
  }

  std::optional<detail::Clock::time_point> deadline;
  if (cfg.time_limit_s > 0.0)
    deadline = detail::Clock::now() +
               std::chrono::duration_cast<detail::Clock::duration>(
                   std::chrono::duration<double>(cfg.time_limit_s));

  MipResult res;
  res.objective = kInf;
  double inc = kInf;
  std::vector<double> inc_x;
  double pruned_min = kInf;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{});
  long next_id = 1;
  long processed = 0;

  auto global_bound = [&](double extra) {
    double b = std::min(pruned_min, extra);
    if (!open.empty()) b = std::min(b, open.top().bound);
    if (b >= kInf && inc < kInf) b = inc;
    return b;
  };

  SolveStatus term = SolveStatus::Optimal;
  std::vector<double> lb(static_cast<std::size_t>(n)), ub(static_cast<std::size_t>(n));

  auto most_fractional = [&](const std::vector<double>& x) {
    int best = -1;
    double dist = cfg.int_tol;
    for (int j : bins) {
      double d = std::fabs(x[static_cast<std::size_t>(j)] -
                           std::round(x[static_cast<std::size_t>(j)]));
      if (d > dist) {
        dist = d;
        best = j;
      }
    }
    return best;
  };

  auto try_incumbent = [&](const std::vector<double>& x, double node_bound) {
    std::vector<double> xr = x;
    for (int j : bins) xr[static_cast<std::size_t>(j)] = std::round(xr[static_cast<std::size_t>(j)]);
    if (!check_candidate(m, xr, cfg.feas_tol, cfg.int_tol)) return false;
    double obj = m.objective_constant;
    for (const auto& t : m.objective) obj += t.coef * xr[static_cast<std::size_t>(t.var)];
    if (inc < kInf && obj >= inc - 1e-12 * std::max(1.0, std::fabs(obj))) return false;
    inc = obj;
    inc_x = std::move(xr);
    log_line(cfg.log, processed, global_bound(node_bound), inc, rel_gap(inc, global_bound(node_bound)));
    return true;
  };

  /* One greedy descent from a fractional relaxation: round the most
   * fractional binary, re-solve warm, flip the fix once if that kills the
   * LP. Finds a first incumbent long before best-first search would reach
   * an integral leaf. */
  auto dive = [&](const LpResult& from, const std::vector<double>& from_lb,
                  const std::vector<double>& from_ub) {
    std::vector<double> dlb = from_lb, dub = from_ub;
    LpResult cur = from;
    for (std::size_t step = 0; step < bins.size(); ++step) {
      int j = most_fractional(cur.x);
      if (j < 0) break;
      double v = std::round(cur.x[static_cast<std::size_t>(j)]);
      dlb[static_cast<std::size_t>(j)] = v;
      dub[static_cast<std::size_t>(j)] = v;
      Basis warm = cur.basis;
      LpResult next = eng.solve(&warm, &dlb, &dub, deadline);
      res.lp_iterations += next.iterations;
      if (next.status == SolveStatus::Infeasible) {
        dlb[static_cast<std::size_t>(j)] = 1.0 - v;
        dub[static_cast<std::size_t>(j)] = 1.0 - v;
        next = eng.solve(&warm, &dlb, &dub, deadline);
        res.lp_iterations += next.iterations;
      }
      if (next.status != SolveStatus::Optimal) return;
      cur = std::move(next);
    }
    try_incumbent(cur.x, from.objective);
  };
  bool dived = false;

  while (!open.empty()) {
    if (cfg.max_nodes > 0 && processed >= cfg.max_nodes) {
      term = SolveStatus::NodeLimit;
      break;
    }
    if (deadline && detail::Clock::now() > *deadline) {
      term = SolveStatus::TimeLimit;
      break;
    }

    Node node = open.top();
    open.pop();
    ++processed;

    double gap_slack = cfg.rel_mip_gap * std::max(1.0, std::fabs(inc));
    if (inc < kInf && inc - node.bound <= gap_slack) {
      pruned_min = std::min(pruned_min, node.bound);
      continue;
    }

    lb = lb0;
    ub = ub0;
    for (const BoundChange* bc = node.changes.get(); bc; bc = bc->parent.get()) {
      lb[static_cast<std::size_t>(bc->var)] = bc->lb;
      ub[static_cast<std::size_t>(bc->var)] = bc->ub;
    }

    LpResult lp = eng.solve(node.warm.get(), &lb, &ub, deadline);
    res.lp_iterations += lp.iterations;
    if (lp.status == SolveStatus::TimeLimit) {
      term = SolveStatus::TimeLimit;
      break;
    }
    if (lp.status == SolveStatus::IterLimit) {
      term = SolveStatus::IterLimit;
      break;
    }
    if (lp.status == SolveStatus::Unbounded) {
      res.status = SolveStatus::Unbounded;
      res.bound = -kInf;
      res.nodes = processed;
      return res;
    }
    if (lp.status == SolveStatus::Infeasible) {
      if (cfg.log && processed % cfg.log_every == 0)
        log_line(cfg.log, processed, global_bound(kInf), inc, rel_gap(inc, global_bound(kInf)));
      continue;
    }

    double beta = std::max(lp.objective, node.bound);
    if (inc < kInf && inc - beta <= gap_slack) {
      pruned_min = std::min(pruned_min, beta);
      continue;
    }

    int frac_var = most_fractional(lp.x);
    // re-dive while the incumbent is missing or far from this node's bound
    const bool poor = inc >= kInf || inc - beta > 0.5 * std::max(1.0, std::fabs(inc));
    if (frac_var >= 0 && (!dived || (poor && processed % 1000 == 0))) {
      dived = true;
      dive(lp, lb, ub);
    }

    if (frac_var < 0) {
      std::vector<double> xr = lp.x;
      for (int j : bins) xr[static_cast<std::size_t>(j)] = std::round(xr[static_cast<std::size_t>(j)]);
      bool ok = check_candidate(m, xr, cfg.feas_tol, cfg.int_tol);
      if (!ok && node.warm) {
        LpResult cold = eng.solve(nullptr, &lb, &ub, deadline);
        res.lp_iterations += cold.iterations;
        if (cold.status == SolveStatus::Optimal) {
          xr = cold.x;
          for (int j : bins)
            xr[static_cast<std::size_t>(j)] = std::round(xr[static_cast<std::size_t>(j)]);
          ok = check_candidate(m, xr, cfg.feas_tol, cfg.int_tol);
        }
      }
      if (ok) {
        double obj = m.objective_constant;
        for (const auto& t : m.objective)
          obj += t.coef * xr[static_cast<std::size_t>(t.var)];
        if (inc >= kInf || obj < inc - 1e-12 * std::max(1.0, std::fabs(obj))) {
          inc = obj;
          inc_x = std::move(xr);
          log_line(cfg.log, processed, global_bound(beta), inc, rel_gap(inc, global_bound(beta)));
        }
      }
      continue;
    }

    auto warm = std::make_shared<const Basis>(std::move(lp.basis));
    Node down;
    down.bound = beta;
    down.id = next_id++;
    down.changes = std::make_shared<const BoundChange>(
        BoundChange{frac_var, lb0[static_cast<std::size_t>(frac_var)], 0.0, node.changes});
    down.warm = warm;
    Node up;
    up.bound = beta;
    up.id = next_id++;
    up.changes = std::make_shared<const BoundChange>(
        BoundChange{frac_var, 1.0, ub0[static_cast<std::size_t>(frac_var)], node.changes});
    up.warm = warm;
    open.push(std::move(down));
    open.push(std::move(up));

    if (cfg.log && processed % cfg.log_every == 0)
      log_line(cfg.log, processed, global_bound(beta), inc, rel_gap(inc, global_bound(beta)));
  }

  res.nodes = processed;
  if (term != SolveStatus::Optimal) {
    res.status = term;
    res.objective = inc;
    res.x = inc_x;
    res.bound = global_bound(kInf);
    res.gap = rel_gap(inc, res.bound);
    return res;
  }
  if (inc >= kInf) {
    res.status = SolveStatus::Infeasible;
    res.bound = kInf;
    res.gap = kInf;
    return res;
  }
  res.status = SolveStatus::Optimal;
  res.objective = inc;
  res.x = std::move(inc_x);
  res.bound = std::min(inc, pruned_min);
  res.gap = rel_gap(inc, res.bound);
  log_line(cfg.log, processed, res.bound, res.objective, res.gap);
  return res;
}

}  // namespace psps
