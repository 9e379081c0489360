#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <chrono>
#include <optional>
#include <vector>

#include "psps/solver.hpp"

namespace psps::detail {

using Clock = std::chrono::steady_clock;

struct SparseCol {
  std::vector<int> row;
  std::vector<double> val;
};

/* Bounded-variable primal simplex over the columns of one MilpModel.
 *
 * Every row is turned into an equality with one slack column whose bounds
 * encode the sense. The basis inverse is kept as a sparse LU factorization
 * plus product-form eta updates and is refactorized on a fixed cadence.
 * Phase 1 drives a piecewise-linear infeasibility sum to zero without
 * artificial columns: basic variables may sit outside their bounds and the
 * ratio test blocks wherever a slope changes.
 *
 * The engine is built once per model and may be re-solved many times with
 * different structural bounds (branch and bound does this); constraint
 * data is immutable after construction.
 */
class SimplexEngine {
 public:
  SimplexEngine(const MilpModel& m, const SolverConfig& cfg);

  LpResult solve(const Basis* warm, const std::vector<double>* lb_over,
                 const std::vector<double>* ub_over,
                 std::optional<Clock::time_point> deadline);

  int num_rows() const { return m_; }
  int num_structural() const { return n_; }

 private:
  struct Eta {
    int slot;
    Eigen::VectorXd w;
  };
  struct Entering {
    int col = -1;
    int dir = 0;  // +1 increase, -1 decrease
    double dj = 0.0;
  };
  struct Block {
    enum Kind { None, SelfFlip, Basic } kind = None;
    int slot = -1;
    double delta = 0.0;
    std::int8_t leave_to = 0;  // bound the leaving variable lands on
  };

  void reset_bounds(const std::vector<double>* lb_over, const std::vector<double>* ub_over);
  void cold_start();
  bool install_warm(const Basis& warm);
  bool factorize();
  void compute_basic_values();
  double nonbasic_value(int j) const;
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  Eigen::VectorXd column_dense(int j) const;
  double reduced_cost(int j, const Eigen::VectorXd& y, const std::vector<double>& c) const;
  double infeasibility_sum() const;
  void phase_costs(int phase, std::vector<double>& c) const;
  Entering price(int phase, const std::vector<double>& c, bool bland) const;
  Block ratio_test(int phase, int enter, int dir, const Eigen::VectorXd& w, bool bland) const;
  void apply_flip(int enter, int dir, const Eigen::VectorXd& w, double delta);
  void apply_pivot(int enter, int dir, const Eigen::VectorXd& w, const Block& blk);
  Basis snapshot() const;
  LpResult extract(SolveStatus st) const;

  const SolverConfig cfg_;
  int n_ = 0;  // structural columns
  int m_ = 0;  // rows == basis size
  int N_ = 0;  // n_ + m_
  std::vector<SparseCol> col_;
  Eigen::VectorXd rhs_;
  std::vector<double> cost_;
  double cost_const_ = 0.0;
  std::vector<double> lb_base_, ub_base_;

  std::vector<double> lb_, ub_;
  std::vector<int> basic_;
  std::vector<std::int8_t> where_;  // -1 basic, 0 lower, 1 upper, 2 free at zero
  Eigen::VectorXd xB_;
  // mutable because Eigen's SparseLU::transpose() is not const-qualified even
  // though solving against the factorization leaves it untouched
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool lu_identity_ = true;
  std::vector<Eta> etas_;
  long iters_ = 0;
};

}  // namespace psps::detail
