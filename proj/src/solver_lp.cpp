#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simplex_impl.hpp"

namespace psps {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterLimit: return "iter_limit";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

namespace detail {

namespace {
constexpr double kPivotTol = 1e-9;     // smallest |w| treated as a blocker
constexpr double kAcceptPivot = 1e-8;  // smallest |w| accepted as pivot element
constexpr double kRatioRelax = 1e-7;   // bound relaxation in the Harris pass
constexpr double kViolEps = 1e-11;     // classification slack in phase 1
constexpr int kStallLimit = 500;       // iterations without progress before Bland
}  // namespace

SimplexEngine::SimplexEngine(const MilpModel& m, const SolverConfig& cfg) : cfg_(cfg) {
  n_ = static_cast<int>(m.vars.size());
  m_ = static_cast<int>(m.constraints.size());
  N_ = n_ + m_;
  col_.assign(static_cast<std::size_t>(N_), {});
  rhs_.resize(m_);
  cost_.assign(static_cast<std::size_t>(N_), 0.0);
  cost_const_ = m.objective_constant;
  lb_base_.resize(static_cast<std::size_t>(N_));
  ub_base_.resize(static_cast<std::size_t>(N_));

  for (int j = 0; j < n_; ++j) {
    lb_base_[static_cast<std::size_t>(j)] = m.vars[static_cast<std::size_t>(j)].lower;
    ub_base_[static_cast<std::size_t>(j)] = m.vars[static_cast<std::size_t>(j)].upper;
  }
  for (const auto& t : m.objective) cost_[static_cast<std::size_t>(t.var)] = t.coef;

  for (int i = 0; i < m_; ++i) {
    const auto& c = m.constraints[static_cast<std::size_t>(i)];
    rhs_[i] = c.rhs;
    for (const auto& t : c.terms) {
      col_[static_cast<std::size_t>(t.var)].row.push_back(i);
      col_[static_cast<std::size_t>(t.var)].val.push_back(t.coef);
    }
    int sj = n_ + i;
    col_[static_cast<std::size_t>(sj)].row.push_back(i);
    col_[static_cast<std::size_t>(sj)].val.push_back(1.0);
    switch (c.sense) {
      case Sense::LessEqual:
        lb_base_[static_cast<std::size_t>(sj)] = 0.0;
        ub_base_[static_cast<std::size_t>(sj)] = kInf;
        break;
      case Sense::GreaterEqual:
        lb_base_[static_cast<std::size_t>(sj)] = -kInf;
        ub_base_[static_cast<std::size_t>(sj)] = 0.0;
        break;
      case Sense::Equal:
        lb_base_[static_cast<std::size_t>(sj)] = 0.0;
        ub_base_[static_cast<std::size_t>(sj)] = 0.0;
        break;
    }
  }
}

void SimplexEngine::reset_bounds(const std::vector<double>* lb_over,
                                 const std::vector<double>* ub_over) {
  lb_ = lb_base_;
  ub_ = ub_base_;
  if (lb_over) {
    if (static_cast<int>(lb_over->size()) != n_)
      throw std::invalid_argument("solve_lp: lower override size mismatch");
    std::copy(lb_over->begin(), lb_over->end(), lb_.begin());
  }
  if (ub_over) {
    if (static_cast<int>(ub_over->size()) != n_)
      throw std::invalid_argument("solve_lp: upper override size mismatch");
    std::copy(ub_over->begin(), ub_over->end(), ub_.begin());
  }
  for (int j = 0; j < N_; ++j)
    if (lb_[static_cast<std::size_t>(j)] > ub_[static_cast<std::size_t>(j)])
      throw std::invalid_argument("solve_lp: crossed bounds on column " + std::to_string(j));
}

void SimplexEngine::cold_start() {
  basic_.resize(static_cast<std::size_t>(m_));
  where_.assign(static_cast<std::size_t>(N_), 0);
  for (int j = 0; j < n_; ++j) {
    double l = lb_[static_cast<std::size_t>(j)], u = ub_[static_cast<std::size_t>(j)];
    std::int8_t w;
    if (std::isfinite(l))
      w = 0;
    else if (std::isfinite(u))
      w = 1;
    else
      w = 2;
    where_[static_cast<std::size_t>(j)] = w;
  }
  for (int i = 0; i < m_; ++i) {
    basic_[static_cast<std::size_t>(i)] = n_ + i;
    where_[static_cast<std::size_t>(n_ + i)] = -1;
  }
  lu_identity_ = true;
  etas_.clear();
}

bool SimplexEngine::install_warm(const Basis& warm) {
  if (static_cast<int>(warm.basic.size()) != m_ ||
      static_cast<int>(warm.at_bound.size()) != N_)
    return false;
  std::vector<char> seen(static_cast<std::size_t>(N_), 0);
  for (int i = 0; i < m_; ++i) {
    int j = warm.basic[static_cast<std::size_t>(i)];
    if (j < 0 || j >= N_ || seen[static_cast<std::size_t>(j)]) return false;
    seen[static_cast<std::size_t>(j)] = 1;
  }
  basic_.assign(warm.basic.begin(), warm.basic.end());
  where_.assign(static_cast<std::size_t>(N_), 0);
  for (int j = 0; j < N_; ++j) {
    if (seen[static_cast<std::size_t>(j)]) {
      where_[static_cast<std::size_t>(j)] = -1;
      continue;
    }
    std::int8_t w = warm.at_bound[static_cast<std::size_t>(j)];
    double l = lb_[static_cast<std::size_t>(j)], u = ub_[static_cast<std::size_t>(j)];
    if (w == 0 && !std::isfinite(l)) w = std::isfinite(u) ? 1 : 2;
    if (w == 1 && !std::isfinite(u)) w = std::isfinite(l) ? 0 : 2;
    if (w == 2 && (std::isfinite(l) || std::isfinite(u))) w = std::isfinite(l) ? 0 : 1;
    where_[static_cast<std::size_t>(j)] = w;
  }
  lu_identity_ = false;
  etas_.clear();
  return factorize();
}

bool SimplexEngine::factorize() {
  etas_.clear();
  bool identity = true;
  for (int i = 0; i < m_; ++i)
    if (basic_[static_cast<std::size_t>(i)] != n_ + i) identity = false;
  lu_identity_ = identity;
  if (identity || m_ == 0) return true;
  std::vector<Eigen::Triplet<double>> trip;
  std::size_t nnz = 0;
  for (int i = 0; i < m_; ++i)
    nnz += col_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])].row.size();
  trip.reserve(nnz);
  for (int i = 0; i < m_; ++i) {
    const auto& c = col_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
    for (std::size_t k = 0; k < c.row.size(); ++k) trip.emplace_back(c.row[k], i, c.val[k]);
  }
  Eigen::SparseMatrix<double> B(m_, m_);
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  lu_.compute(B);
  if (lu_.info() != Eigen::Success) return false;
  // The factorization only rejects exactly singular bases; probe with a known
  // solution so a numerically unusable one is refused as well. Unit entries
  // mixed with load-value coefficients push basis conditions to 1e8 and
  // beyond in healthy bases, so only gross failures may be refused here.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m_);
  Eigen::VectorXd r = B * ones;
  Eigen::VectorXd probe = lu_.solve(r);
  return (probe - ones).lpNorm<Eigen::Infinity>() < 1e-4;
}

void SimplexEngine::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  if (!lu_identity_) {
    Eigen::VectorXd t = lu_.solve(v);
    v.swap(t);
  }
  for (const auto& e : etas_) {
    double t = v[e.slot] / e.w[e.slot];
    if (t != 0.0) v -= t * e.w;
    v[e.slot] = t;
  }
}

void SimplexEngine::btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double dot = it->w.dot(v) - it->w[it->slot] * v[it->slot];
    v[it->slot] = (v[it->slot] - dot) / it->w[it->slot];
  }
  if (!lu_identity_) {
    Eigen::VectorXd t = lu_.transpose().solve(v);
    v.swap(t);
  }
}

Eigen::VectorXd SimplexEngine::column_dense(int j) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
  const auto& c = col_[static_cast<std::size_t>(j)];
  for (std::size_t k = 0; k < c.row.size(); ++k) a[c.row[k]] = c.val[k];
  return a;
}

double SimplexEngine::nonbasic_value(int j) const {
  switch (where_[static_cast<std::size_t>(j)]) {
    case 0: return lb_[static_cast<std::size_t>(j)];
    case 1: return ub_[static_cast<std::size_t>(j)];
    default: return 0.0;
  }
}

void SimplexEngine::compute_basic_values() {
  Eigen::VectorXd r = rhs_;
  for (int j = 0; j < N_; ++j) {
    if (where_[static_cast<std::size_t>(j)] == -1) continue;
    double v = nonbasic_value(j);
    if (v == 0.0) continue;
    const auto& c = col_[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < c.row.size(); ++k) r[c.row[k]] -= c.val[k] * v;
  }
  ftran(r);
  xB_ = r;
}

double SimplexEngine::infeasibility_sum() const {
  double s = 0.0;
  for (int i = 0; i < m_; ++i) {
    int j = basic_[static_cast<std::size_t>(i)];
    double v = xB_[i];
    double l = lb_[static_cast<std::size_t>(j)], u = ub_[static_cast<std::size_t>(j)];
    if (v < l) s += l - v;
    if (v > u) s += v - u;
  }
  return s;
}

void SimplexEngine::phase_costs(int phase, std::vector<double>& c) const {
  c.assign(static_cast<std::size_t>(N_), 0.0);
  if (phase == 2) {
    std::copy(cost_.begin(), cost_.end(), c.begin());
    return;
  }
  for (int i = 0; i < m_; ++i) {
    int j = basic_[static_cast<std::size_t>(i)];
    double v = xB_[i];
    double l = lb_[static_cast<std::size_t>(j)], u = ub_[static_cast<std::size_t>(j)];
    if (v < l - kViolEps)
      c[static_cast<std::size_t>(j)] = -1.0;
    else if (v > u + kViolEps)
      c[static_cast<std::size_t>(j)] = 1.0;
  }
}

double SimplexEngine::reduced_cost(int j, const Eigen::VectorXd& y,
                                   const std::vector<double>& c) const {
  double d = c[static_cast<std::size_t>(j)];
  const auto& cl = col_[static_cast<std::size_t>(j)];
  for (std::size_t k = 0; k < cl.row.size(); ++k) d -= y[cl.row[k]] * cl.val[k];
  return d;
}

SimplexEngine::Entering SimplexEngine::price(int /*phase*/, const std::vector<double>& c,
                                             bool bland) const {
  Eigen::VectorXd y(m_);
  for (int i = 0; i < m_; ++i) y[i] = c[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])];
  btran(y);

  Entering best;
  double best_score = cfg_.opt_tol;
  for (int j = 0; j < N_; ++j) {
    std::int8_t w = where_[static_cast<std::size_t>(j)];
    if (w == -1) continue;
    if (lb_[static_cast<std::size_t>(j)] == ub_[static_cast<std::size_t>(j)]) continue;
    double d = reduced_cost(j, y, c);
    int dir = 0;
    if (w == 0 && d < -cfg_.opt_tol)
      dir = 1;
    else if (w == 1 && d > cfg_.opt_tol)
      dir = -1;
    else if (w == 2 && d < -cfg_.opt_tol)
      dir = 1;
    else if (w == 2 && d > cfg_.opt_tol)
      dir = -1;
    if (dir == 0) continue;
    if (bland) return {j, dir, d};
    double score = std::fabs(d);
    if (score > best_score) {
      best_score = score;
      best = {j, dir, d};
    }
  }
  return best;
}

SimplexEngine::Block SimplexEngine::ratio_test(int phase, int enter, int dir,
                                               const Eigen::VectorXd& w, bool bland) const {
  Block blk;

  double el = lb_[static_cast<std::size_t>(enter)], eu = ub_[static_cast<std::size_t>(enter)];
  bool self = std::isfinite(el) && std::isfinite(eu) &&
              where_[static_cast<std::size_t>(enter)] != 2;
  double self_range = self ? eu - el : kInf;

  struct Blocker {
    int slot;
    int col;
    double exact;
    double relaxed;
    double absw;
    std::int8_t to;
  };
  std::vector<Blocker> blockers;
  blockers.reserve(16);

  for (int i = 0; i < m_; ++i) {
    double wi = w[i];
    if (std::fabs(wi) <= kPivotTol) continue;
    double delta_i = -dir * wi;  // movement of this basic per unit step
    int j = basic_[static_cast<std::size_t>(i)];
    double v = xB_[i];
    double l = lb_[static_cast<std::size_t>(j)], u = ub_[static_cast<std::size_t>(j)];
    double bound;
    std::int8_t to;
    if (phase == 1 && v < l - kViolEps) {
      if (delta_i <= 0) continue;
      bound = l;
      to = 0;
    } else if (phase == 1 && v > u + kViolEps) {
      if (delta_i >= 0) continue;
      bound = u;
      to = 1;
    } else if (delta_i > 0) {
      if (!std::isfinite(u)) continue;
      bound = u;
      to = 1;
    } else {
      if (!std::isfinite(l)) continue;
      bound = l;
      to = 0;
    }
    double r = (bound - v) / delta_i;
    if (r < 0.0) r = 0.0;
    blockers.push_back({i, j, r, r + kRatioRelax / std::fabs(delta_i), std::fabs(wi), to});
  }

  if (blockers.empty()) {
    if (self) {
      blk.kind = Block::SelfFlip;
      blk.delta = self_range;
    } else {
      blk.kind = Block::None;
      blk.delta = kInf;
    }
    return blk;
  }

  if (bland) {
    // exact smallest step, lowest column id; provably cycle-free
    double theta = kInf;
    for (const auto& b : blockers) theta = std::min(theta, b.exact);
    if (self && self_range < theta) {
      blk.kind = Block::SelfFlip;
      blk.delta = self_range;
      return blk;
    }
    const Blocker* pick = nullptr;
    for (const auto& b : blockers)
      if (b.exact <= theta && b.absw >= kAcceptPivot && (!pick || b.col < pick->col)) pick = &b;
    if (pick) {
      blk.kind = Block::Basic;
      blk.slot = pick->slot;
      blk.delta = std::max(0.0, pick->exact);
      blk.leave_to = pick->to;
      return blk;
    }
    blk.kind = Block::None;
    blk.delta = theta;
    return blk;
  }

  // Harris two-pass: relaxed minimum first, then the numerically best
  // pivot among blockers whose exact ratio fits under it
  double theta = kInf;
  for (const auto& b : blockers) theta = std::min(theta, b.relaxed);
  if (self && self_range <= theta) {
    blk.kind = Block::SelfFlip;
    blk.delta = self_range;
    return blk;
  }
  const Blocker* pick = nullptr;
  for (const auto& b : blockers) {
    if (b.exact > theta || b.absw < kAcceptPivot) continue;
    if (!pick || b.absw > pick->absw + 1e-15 ||
        (std::fabs(b.absw - pick->absw) <= 1e-15 && b.col < pick->col))
      pick = &b;
  }
  if (pick) {
    blk.kind = Block::Basic;
    blk.slot = pick->slot;
    blk.delta = std::max(0.0, pick->exact);
    blk.leave_to = pick->to;
    return blk;
  }
  blk.kind = Block::None;
  blk.delta = theta;
  return blk;
}

void SimplexEngine::apply_flip(int enter, int dir, const Eigen::VectorXd& w, double delta) {
  if (delta != 0.0)
    for (int i = 0; i < m_; ++i) xB_[i] -= dir * delta * w[i];
  where_[static_cast<std::size_t>(enter)] = dir > 0 ? 1 : 0;
}

void SimplexEngine::apply_pivot(int enter, int dir, const Eigen::VectorXd& w, const Block& blk) {
  double start = nonbasic_value(enter);
  if (blk.delta != 0.0)
    for (int i = 0; i < m_; ++i) xB_[i] -= dir * blk.delta * w[i];
  int leaving = basic_[static_cast<std::size_t>(blk.slot)];
  where_[static_cast<std::size_t>(leaving)] = blk.leave_to;
  basic_[static_cast<std::size_t>(blk.slot)] = enter;
  where_[static_cast<std::size_t>(enter)] = -1;
  xB_[blk.slot] = start + dir * blk.delta;
  etas_.push_back({blk.slot, w});
}

Basis SimplexEngine::snapshot() const {
  Basis b;
  b.basic.assign(basic_.begin(), basic_.end());
  b.at_bound.resize(static_cast<std::size_t>(N_));
  for (int j = 0; j < N_; ++j) {
    std::int8_t w = where_[static_cast<std::size_t>(j)];
    b.at_bound[static_cast<std::size_t>(j)] = w == -1 ? std::int8_t{0} : w;
  }
  return b;
}

LpResult SimplexEngine::extract(SolveStatus st) const {
  LpResult r;
  r.status = st;
  r.iterations = iters_;
  r.basis = snapshot();
  r.x.assign(static_cast<std::size_t>(n_), 0.0);
  std::vector<double> full(static_cast<std::size_t>(N_), 0.0);
  for (int j = 0; j < N_; ++j)
    if (where_[static_cast<std::size_t>(j)] != -1) full[static_cast<std::size_t>(j)] = nonbasic_value(j);
  for (int i = 0; i < m_; ++i) full[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])] = xB_[i];
  double obj = cost_const_;
  for (int j = 0; j < n_; ++j) {
    r.x[static_cast<std::size_t>(j)] = full[static_cast<std::size_t>(j)];
    obj += cost_[static_cast<std::size_t>(j)] * full[static_cast<std::size_t>(j)];
  }
  r.objective = obj;
  return r;
}

LpResult SimplexEngine::solve(const Basis* warm, const std::vector<double>* lb_over,
                              const std::vector<double>* ub_over,
                              std::optional<Clock::time_point> deadline) {
  reset_bounds(lb_over, ub_over);
  iters_ = 0;

  bool ok = false;
  if (warm && !warm->empty()) ok = install_warm(*warm);
  if (!ok) {
    cold_start();
    if (!factorize()) return extract(SolveStatus::IterLimit);
  }
  compute_basic_values();

  std::vector<double> c;
  int phase = infeasibility_sum() > cfg_.feas_tol ? 1 : 2;
  int restarts = 0;
  long stall = 0;
  double last_obj = kInf;

  while (true) {
    if (iters_ >= cfg_.max_lp_iters) return extract(SolveStatus::IterLimit);
    if (deadline && (iters_ % 64 == 0) && Clock::now() > *deadline)
      return extract(SolveStatus::TimeLimit);
    if (static_cast<int>(etas_.size()) >= cfg_.refactor_every) {
      if (!factorize()) {
        cold_start();
        if (!factorize()) return extract(SolveStatus::IterLimit);
        phase = 1;
      }
      compute_basic_values();
      if (phase == 2 && infeasibility_sum() > cfg_.feas_tol) phase = 1;
    }

    double cur_obj;
    if (phase == 1) {
      cur_obj = infeasibility_sum();
      if (cur_obj <= cfg_.feas_tol) {
        phase = 2;
        stall = 0;
        last_obj = kInf;
        continue;
      }
    } else {
      cur_obj = 0.0;
      for (int i = 0; i < m_; ++i)
        cur_obj += cost_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(i)])] * xB_[i];
      for (int j = 0; j < N_; ++j)
        if (where_[static_cast<std::size_t>(j)] != -1)
          cur_obj += cost_[static_cast<std::size_t>(j)] * nonbasic_value(j);
    }
    if (last_obj == kInf || cur_obj < last_obj - 1e-10 * (1.0 + std::fabs(cur_obj))) {
      stall = 0;
      last_obj = cur_obj;
    } else {
      ++stall;
    }
    bool bland = stall > kStallLimit;
    phase_costs(phase, c);
    Entering e = price(phase, c, bland);
    if (e.col < 0) {
      if (!etas_.empty()) {
        // clean factorization before declaring anything
        if (!factorize()) {
          cold_start();
          factorize();
          phase = 1;
          compute_basic_values();
          continue;
        }
        compute_basic_values();
        double inf = infeasibility_sum();
        if (phase == 2 && inf > cfg_.feas_tol) {
          phase = 1;
          continue;
        }
        phase_costs(phase, c);
        Entering e2 = price(phase, c, bland);
        if (e2.col >= 0) continue;
      }
      if (phase == 1) {
        if (infeasibility_sum() <= cfg_.feas_tol) {
          phase = 2;
          stall = 0;
          last_obj = kInf;
          continue;
        }
        return extract(SolveStatus::Infeasible);
      }
      return extract(SolveStatus::Optimal);
    }

    ++iters_;
    Eigen::VectorXd w = column_dense(e.col);
    ftran(w);
    Block blk = ratio_test(phase, e.col, e.dir, w, bland);

    if (blk.kind == Block::Basic) {
      apply_pivot(e.col, e.dir, w, blk);
    } else if (blk.kind == Block::SelfFlip) {
      apply_flip(e.col, e.dir, w, blk.delta);
    } else if (std::isfinite(blk.delta)) {
      // every blocker was below the pivot tolerance; refactorize and retry,
      // falling back to a fresh basis if it keeps happening
      if (!etas_.empty()) {
        factorize();
        compute_basic_values();
        continue;
      }
      if (restarts++ < 2) {
        cold_start();
        factorize();
        compute_basic_values();
        phase = 1;
        stall = 0;
        continue;
      }
      return extract(SolveStatus::IterLimit);
    } else {
      if (phase == 1) {
        // a feasibility phase cannot be unbounded; this is numerical noise
        if (!etas_.empty()) {
          factorize();
          compute_basic_values();
          continue;
        }
        return extract(SolveStatus::IterLimit);
      }
      if (!etas_.empty()) {
        factorize();
        compute_basic_values();
        continue;
      }
      return extract(SolveStatus::Unbounded);
    }
  }
}

}  // namespace detail

LpResult solve_lp(const MilpModel& m, const SolverConfig& cfg) {
  return solve_lp(m, cfg, nullptr, nullptr, nullptr);
}

LpResult solve_lp(const MilpModel& m, const SolverConfig& cfg, const Basis* warm,
                  const std::vector<double>* lower_override,
                  const std::vector<double>* upper_override) {
  detail::SimplexEngine eng(m, cfg);
  std::optional<detail::Clock::time_point> deadline;
  if (cfg.time_limit_s > 0.0)
    deadline = detail::Clock::now() +
               std::chrono::duration_cast<detail::Clock::duration>(
                   std::chrono::duration<double>(cfg.time_limit_s));
  return eng.solve(warm, lower_override, upper_override, deadline);
}

}  // namespace psps
