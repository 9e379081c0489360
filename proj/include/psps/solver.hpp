#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "psps/milp.hpp"

namespace psps {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterLimit, NodeLimit, TimeLimit };

const char* to_string(SolveStatus s);

struct SolverConfig {
  double feas_tol = 1e-6;
  double opt_tol = 1e-7;
  double int_tol = 1e-6;
  double rel_mip_gap = 1e-6;
  int refactor_every = 50;
  long max_lp_iters = 500000;
  long max_nodes = 0;         // 0 means unlimited
  double time_limit_s = 0.0;  // 0 means unlimited
  std::ostream* log = nullptr;
  int log_every = 100;  // nodes between progress lines
};

/* Snapshot of a simplex vertex: which column (structural or slack) sits in
 * each basis slot, and at which bound every nonbasic column rests. */
struct Basis {
  std::vector<std::int32_t> basic;
  std::vector<std::int8_t> at_bound;  // 0 lower, 1 upper, 2 free-at-zero
  bool empty() const { return basic.empty(); }
};

struct LpResult {
  SolveStatus status = SolveStatus::IterLimit;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
  Basis basis;
};

struct MipResult {
  SolveStatus status = SolveStatus::IterLimit;
  double objective = 0.0;  // incumbent value when one exists
  double bound = -kInf;    // best proven lower bound
  double gap = kInf;       // (objective - bound) / max(1, |objective|)
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
};

/* Solves the continuous relaxation (integrality markers ignored). The
 * optional warm basis and bound overrides exist for branch-and-bound and
 * for re-solving with fixed binaries; plain callers omit them. */
LpResult solve_lp(const MilpModel& m, const SolverConfig& cfg = {});
LpResult solve_lp(const MilpModel& m, const SolverConfig& cfg, const Basis* warm,
                  const std::vector<double>* lower_override,
                  const std::vector<double>* upper_override);

/* Branch and bound over the binary variables: best-bound node order,
 * most-fractional branching, warm-started node LPs. Every candidate
 * incumbent is re-verified against the original model data before being
 * accepted, so a wrong simplex answer cannot become a silent wrong result. */
MipResult solve_mip(const MilpModel& m, const SolverConfig& cfg = {});

}  // namespace psps
