#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace psps {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Sense { LessEqual, GreaterEqual, Equal };

struct LinearTerm {
  int var = -1;
  double coef = 0.0;
};

struct Variable {
  int id = -1;
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = -kInf;
  double upper = kInf;
};

/* Rows keep their term lists sorted by variable id with one entry per
 * variable; add_constraint takes care of aggregation. */
struct LinearConstraint {
  std::string name;
  std::vector<LinearTerm> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

struct EvalReport {
  double objective = 0.0;
  double max_bound_violation = 0.0;
  double max_constraint_violation = 0.0;
  double max_integrality_violation = 0.0;
  int worst_constraint = -1;
};

/* In-memory minimization MILP. Variable ids are dense and append-only, so
 * builders may cache them and rows stay valid as the model grows. */
struct MilpModel {
  std::string name = "model";
  std::vector<Variable> vars;
  std::vector<LinearConstraint> constraints;
  std::vector<LinearTerm> objective;
  double objective_constant = 0.0;

  // Returns the new variable id. Throws on duplicate or malformed names
  // and on lower > upper.
  int add_variable(const std::string& vname, VarKind kind, double lower, double upper);

  // Terms are sorted, duplicates aggregated, exact zeros dropped. Returns
  // the row index. Throws on unknown variable ids or non-finite data.
  int add_constraint(const std::string& cname, std::vector<LinearTerm> terms,
                     Sense sense, double rhs);

  void set_objective(std::vector<LinearTerm> terms, double constant = 0.0);
  void add_objective_term(int var, double coef);

  int var_id(const std::string& vname) const;  // -1 when absent
  const Variable& var(int id) const { return vars.at(static_cast<std::size_t>(id)); }
  std::size_t num_binaries() const;

  // Structural problems no single add call can see: duplicate row names,
  // empty rows, fixed-infeasible bound pairs. Empty result means clean.
  std::vector<std::string> validate() const;

  // CPLEX LP-format text, suitable for feeding to external solvers when
  // cross-checking by hand.
  std::string to_lp_string() const;

 private:
  std::unordered_map<std::string, int> name_index_;
  static std::vector<LinearTerm> canonicalize(std::vector<LinearTerm> terms, int num_vars,
                                              const char* where);
};

// Structured names: make_name("p_g", {3, 16}) == "p_g[3,16]". parse_name
// inverts it and rejects anything make_name cannot produce.
std::string make_name(const std::string& symbol, std::initializer_list<int> idx);
std::string make_name(const std::string& symbol, const std::vector<int>& idx);
bool parse_name(const std::string& name, std::string& symbol, std::vector<int>& idx);

// Plugs x into the model without consulting any solver state. Used for the
// independent re-check of every candidate incumbent and in tests.
EvalReport evaluate_solution(const MilpModel& m, const std::vector<double>& x);

}  // namespace psps
