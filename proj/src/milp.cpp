#include "psps/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace psps {

namespace {

bool valid_symbol(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return !std::isdigit(static_cast<unsigned char>(s[0]));
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string make_name(const std::string& symbol, std::initializer_list<int> idx) {
  return make_name(symbol, std::vector<int>(idx));
}

std::string make_name(const std::string& symbol, const std::vector<int>& idx) {
  if (!valid_symbol(symbol)) throw std::invalid_argument("make_name: bad symbol '" + symbol + "'");
  std::string out = symbol;
  out += '[';
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(idx[i]);
  }
  out += ']';
  return out;
}

bool parse_name(const std::string& name, std::string& symbol, std::vector<int>& idx) {
  auto lb = name.find('[');
  if (lb == std::string::npos || name.back() != ']') return false;
  symbol = name.substr(0, lb);
  if (!valid_symbol(symbol)) return false;
  idx.clear();
  std::size_t pos = lb + 1;
  std::size_t end = name.size() - 1;
  if (pos == end) return true;
  while (pos < end) {
    bool neg = false;
    if (name[pos] == '-') {
      neg = true;
      ++pos;
    }
    if (pos >= end || !std::isdigit(static_cast<unsigned char>(name[pos]))) return false;
    long v = 0;
    while (pos < end && std::isdigit(static_cast<unsigned char>(name[pos]))) {
      v = v * 10 + (name[pos] - '0');
      if (v > std::numeric_limits<int>::max()) return false;
      ++pos;
    }
    idx.push_back(static_cast<int>(neg ? -v : v));
    if (pos < end) {
      if (name[pos] != ',') return false;
      ++pos;
      if (pos == end) return false;
    }
  }
  return true;
}

int MilpModel::add_variable(const std::string& vname, VarKind kind, double lower, double upper) {
  if (vname.empty()) throw std::invalid_argument("add_variable: empty name");
  if (name_index_.count(vname))
    throw std::invalid_argument("add_variable: duplicate name '" + vname + "'");
  if (std::isnan(lower) || std::isnan(upper))
    throw std::invalid_argument("add_variable: NaN bound on '" + vname + "'");
  if (lower > upper)
    throw std::invalid_argument("add_variable: lower > upper on '" + vname + "'");
  if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
    throw std::invalid_argument("add_variable: binary bounds outside [0,1] on '" + vname + "'");
  Variable v;
  v.id = static_cast<int>(vars.size());
  v.name = vname;
  v.kind = kind;
  v.lower = lower;
  v.upper = upper;
  name_index_.emplace(vname, v.id);
  vars.push_back(std::move(v));
  return vars.back().id;
}

std::vector<LinearTerm> MilpModel::canonicalize(std::vector<LinearTerm> terms, int num_vars,
                                                const char* where) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_vars)
      throw std::invalid_argument(std::string(where) + ": unknown variable id " +
                                  std::to_string(t.var));
    if (!std::isfinite(t.coef))
      throw std::invalid_argument(std::string(where) + ": non-finite coefficient on var " +
                                  std::to_string(t.var));
  }
  std::sort(terms.begin(), terms.end(),
            [](const LinearTerm& a, const LinearTerm& b) { return a.var < b.var; });
  std::vector<LinearTerm> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    if (!out.empty() && out.back().var == t.var)
      out.back().coef += t.coef;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const LinearTerm& t) { return t.coef == 0.0; }),
            out.end());
  return out;
}

int MilpModel::add_constraint(const std::string& cname, std::vector<LinearTerm> terms,
                              Sense sense, double rhs) {
  if (cname.empty()) throw std::invalid_argument("add_constraint: empty name");
  if (!std::isfinite(rhs))
    throw std::invalid_argument("add_constraint: non-finite rhs on '" + cname + "'");
  LinearConstraint c;
  c.name = cname;
  c.terms = canonicalize(std::move(terms), static_cast<int>(vars.size()), "add_constraint");
  c.sense = sense;
  c.rhs = rhs;
  constraints.push_back(std::move(c));
  return static_cast<int>(constraints.size()) - 1;
}

void MilpModel::set_objective(std::vector<LinearTerm> terms, double constant) {
  if (!std::isfinite(constant))
    throw std::invalid_argument("set_objective: non-finite constant");
  objective = canonicalize(std::move(terms), static_cast<int>(vars.size()), "set_objective");
  objective_constant = constant;
}

void MilpModel::add_objective_term(int var, double coef) {
  if (var < 0 || var >= static_cast<int>(vars.size()))
    throw std::invalid_argument("add_objective_term: unknown variable id " + std::to_string(var));
  if (!std::isfinite(coef))
    throw std::invalid_argument("add_objective_term: non-finite coefficient");
  if (coef == 0.0) return;
  auto it = std::lower_bound(objective.begin(), objective.end(), var,
                             [](const LinearTerm& t, int v) { return t.var < v; });
  if (it != objective.end() && it->var == var) {
    it->coef += coef;
    if (it->coef == 0.0) objective.erase(it);
  } else {
    objective.insert(it, LinearTerm{var, coef});
  }
}

int MilpModel::var_id(const std::string& vname) const {
  auto it = name_index_.find(vname);
  return it == name_index_.end() ? -1 : it->second;
}

std::size_t MilpModel::num_binaries() const {
  std::size_t n = 0;
  for (const auto& v : vars)
    if (v.kind == VarKind::Binary) ++n;
  return n;
}

std::vector<std::string> MilpModel::validate() const {
  std::vector<std::string> issues;
  for (const auto& v : vars) {
    if (!std::isfinite(v.lower) && v.lower != -kInf)
      issues.push_back("variable '" + v.name + "' has NaN lower bound");
    if (!std::isfinite(v.upper) && v.upper != kInf)
      issues.push_back("variable '" + v.name + "' has NaN upper bound");
    if (v.lower > v.upper) issues.push_back("variable '" + v.name + "' has lower > upper");
  }
  std::unordered_map<std::string, int> row_names;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    auto [it, fresh] = row_names.emplace(c.name, static_cast<int>(i));
    if (!fresh)
      issues.push_back("constraint name '" + c.name + "' reused at rows " +
                       std::to_string(it->second) + " and " + std::to_string(i));
    if (c.terms.empty()) {
      bool ok = (c.sense == Sense::LessEqual && c.rhs >= 0.0) ||
                (c.sense == Sense::GreaterEqual && c.rhs <= 0.0) ||
                (c.sense == Sense::Equal && c.rhs == 0.0);
      if (!ok) issues.push_back("constraint '" + c.name + "' is empty and unsatisfiable");
    }
    for (std::size_t k = 1; k < c.terms.size(); ++k)
      if (c.terms[k - 1].var >= c.terms[k].var) {
        issues.push_back("constraint '" + c.name + "' has unsorted or duplicate terms");
        break;
      }
  }
  return issues;
}

std::string MilpModel::to_lp_string() const {
  std::ostringstream os;
  os << "\\ " << name << "\n";
  os << "Minimize\n obj:";
  bool first = true;
  for (const auto& t : objective) {
    double c = t.coef;
    os << (c < 0 ? " - " : (first ? " " : " + ")) << fmt_num(std::fabs(c)) << ' '
       << vars[static_cast<std::size_t>(t.var)].name;
    first = false;
  }
  if (objective_constant != 0.0) {
    double c = objective_constant;
    os << (c < 0 ? " - " : (first ? " " : " + ")) << fmt_num(std::fabs(c));
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (const auto& c : constraints) {
    os << ' ' << c.name << ':';
    bool f2 = true;
    for (const auto& t : c.terms) {
      os << (t.coef < 0 ? " - " : (f2 ? " " : " + ")) << fmt_num(std::fabs(t.coef)) << ' '
         << vars[static_cast<std::size_t>(t.var)].name;
      f2 = false;
    }
    if (f2) os << " 0";
    const char* op = c.sense == Sense::LessEqual ? "<=" : (c.sense == Sense::GreaterEqual ? ">=" : "=");
    os << ' ' << op << ' ' << fmt_num(c.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : vars) {
    if (v.lower == 0.0 && v.upper == kInf) continue;
    if (v.lower == -kInf && v.upper == kInf) {
      os << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      os << ' ' << v.name << " = " << fmt_num(v.lower) << "\n";
    } else {
      os << ' ';
      if (v.lower == -kInf)
        os << "-inf";
      else
        os << fmt_num(v.lower);
      os << " <= " << v.name << " <= ";
      if (v.upper == kInf)
        os << "+inf";
      else
        os << fmt_num(v.upper);
      os << "\n";
    }
  }
  bool any_bin = false;
  for (const auto& v : vars)
    if (v.kind == VarKind::Binary) {
      if (!any_bin) os << "Binaries\n";
      any_bin = true;
      os << ' ' << v.name << "\n";
    }
  os << "End\n";
  return os.str();
}

EvalReport evaluate_solution(const MilpModel& m, const std::vector<double>& x) {
  if (x.size() != m.vars.size())
    throw std::invalid_argument("evaluate_solution: size mismatch");
  EvalReport r;
  r.objective = m.objective_constant;
  for (const auto& t : m.objective) r.objective += t.coef * x[static_cast<std::size_t>(t.var)];
  for (const auto& v : m.vars) {
    double xv = x[static_cast<std::size_t>(v.id)];
    double viol = 0.0;
    if (xv < v.lower) viol = v.lower - xv;
    if (xv > v.upper) viol = std::max(viol, xv - v.upper);
    r.max_bound_violation = std::max(r.max_bound_violation, viol);
    if (v.kind == VarKind::Binary)
      r.max_integrality_violation =
          std::max(r.max_integrality_violation, std::fabs(xv - std::round(xv)));
  }
  for (std::size_t i = 0; i < m.constraints.size(); ++i) {
    const auto& c = m.constraints[i];
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    double viol = 0.0;
    switch (c.sense) {
      case Sense::LessEqual: viol = lhs - c.rhs; break;
      case Sense::GreaterEqual: viol = c.rhs - lhs; break;
      case Sense::Equal: viol = std::fabs(lhs - c.rhs); break;
    }
    if (viol > r.max_constraint_violation) {
      r.max_constraint_violation = viol;
      r.worst_constraint = static_cast<int>(i);
    }
  }
  return r;
}

}  // namespace psps
