#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "psps/milp.hpp"

using namespace psps;

TEST_CASE("structured names round-trip") {
  CHECK(make_name("p_g", {3, 16}) == "p_g[3,16]");
  CHECK(make_name("z", {0}) == "z[0]");
  CHECK(make_name("nu", {}) == "nu[]");
  CHECK(make_name("th", {-2, 7}) == "th[-2,7]");

  std::string sym;
  std::vector<int> idx;
  REQUIRE(parse_name("p_g[3,16]", sym, idx));
  CHECK(sym == "p_g");
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 3);
  CHECK(idx[1] == 16);

  REQUIRE(parse_name("nu[]", sym, idx));
  CHECK(sym == "nu");
  CHECK(idx.empty());

  REQUIRE(parse_name("th[-2,7]", sym, idx));
  CHECK(idx[0] == -2);

  CHECK_FALSE(parse_name("noindex", sym, idx));
  CHECK_FALSE(parse_name("[1]", sym, idx));
  CHECK_FALSE(parse_name("x[1,]", sym, idx));
  CHECK_FALSE(parse_name("x[a]", sym, idx));
  CHECK_FALSE(parse_name("x[1", sym, idx));
  CHECK_FALSE(parse_name("1x[1]", sym, idx));
  CHECK_FALSE(parse_name("x y[1]", sym, idx));
}

TEST_CASE("variables are append-only with unique names") {
  MilpModel m;
  int a = m.add_variable("a[]", VarKind::Continuous, 0.0, 1.0);
  int b = m.add_variable("b[]", VarKind::Binary, 0.0, 1.0);
  CHECK(a == 0);
  CHECK(b == 1);
  CHECK(m.var_id("a[]") == 0);
  CHECK(m.var_id("missing") == -1);
  CHECK(m.num_binaries() == 1);

  CHECK_THROWS_AS(m.add_variable("a[]", VarKind::Continuous, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.add_variable("c[]", VarKind::Continuous, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.add_variable("d[]", VarKind::Binary, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.add_variable("", VarKind::Continuous, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("constraint terms are sorted, aggregated, zero-free") {
  MilpModel m;
  m.add_variable("x[]", VarKind::Continuous, 0.0, 10.0);
  m.add_variable("y[]", VarKind::Continuous, 0.0, 10.0);

  int r = m.add_constraint("r[]", {{1, 2.0}, {0, 1.0}, {1, 3.0}}, Sense::LessEqual, 4.0);
  const auto& c = m.constraints[static_cast<std::size_t>(r)];
  REQUIRE(c.terms.size() == 2);
  CHECK(c.terms[0].var == 0);
  CHECK(c.terms[0].coef == 1.0);
  CHECK(c.terms[1].var == 1);
  CHECK(c.terms[1].coef == 5.0);

  int r2 = m.add_constraint("r2[]", {{0, 1.0}, {0, -1.0}}, Sense::LessEqual, 1.0);
  CHECK(m.constraints[static_cast<std::size_t>(r2)].terms.empty());

  CHECK_THROWS_AS(m.add_constraint("bad[]", {{7, 1.0}}, Sense::Equal, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(m.add_constraint("bad2[]", {{0, std::nan("")}}, Sense::Equal, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(m.add_constraint("bad3[]", {{0, 1.0}}, Sense::Equal, kInf),
                  std::invalid_argument);
}

TEST_CASE("objective helpers aggregate") {
  MilpModel m;
  m.add_variable("x[]", VarKind::Continuous, 0.0, 1.0);
  m.add_variable("y[]", VarKind::Continuous, 0.0, 1.0);
  m.set_objective({{1, 2.0}, {0, 1.0}}, 5.0);
  m.add_objective_term(0, 3.0);
  m.add_objective_term(1, -2.0);
  REQUIRE(m.objective.size() == 1);
  CHECK(m.objective[0].var == 0);
  CHECK(m.objective[0].coef == 4.0);
  CHECK(m.objective_constant == 5.0);
}

TEST_CASE("validate flags structural problems one add cannot see") {
  MilpModel m;
  m.add_variable("x[]", VarKind::Continuous, 0.0, 1.0);
  m.add_constraint("dup[]", {{0, 1.0}}, Sense::LessEqual, 1.0);
  m.add_constraint("dup[]", {{0, 1.0}}, Sense::LessEqual, 2.0);
  m.add_constraint("empty[]", {{0, 1.0}, {0, -1.0}}, Sense::GreaterEqual, 3.0);
  auto issues = m.validate();
  REQUIRE(issues.size() == 2);
  CHECK(issues[0].find("dup[]") != std::string::npos);
  CHECK(issues[1].find("empty[]") != std::string::npos);

  MilpModel clean;
  clean.add_variable("x[]", VarKind::Continuous, 0.0, 1.0);
  clean.add_constraint("r[]", {{0, 1.0}}, Sense::LessEqual, 1.0);
  CHECK(clean.validate().empty());
}

TEST_CASE("evaluate_solution reports violations against raw data") {
  MilpModel m;
  m.add_variable("x[]", VarKind::Continuous, 0.0, 2.0);
  m.add_variable("z[]", VarKind::Binary, 0.0, 1.0);
  m.set_objective({{0, 3.0}, {1, 10.0}}, 1.0);
  m.add_constraint("le[]", {{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 2.0);
  m.add_constraint("eq[]", {{0, 2.0}}, Sense::Equal, 2.0);

  auto rep = evaluate_solution(m, {1.0, 1.0});
  CHECK(rep.objective == doctest::Approx(14.0));
  CHECK(rep.max_bound_violation == 0.0);
  CHECK(rep.max_constraint_violation == 0.0);
  CHECK(rep.max_integrality_violation == 0.0);

  rep = evaluate_solution(m, {2.5, 0.4});
  CHECK(rep.max_bound_violation == doctest::Approx(0.5));
  CHECK(rep.max_integrality_violation == doctest::Approx(0.4));
  CHECK(rep.max_constraint_violation == doctest::Approx(3.0));  // eq row: |5 - 2|
  CHECK(rep.worst_constraint == 1);

  CHECK_THROWS_AS(evaluate_solution(m, {1.0}), std::invalid_argument);
}

TEST_CASE("lp text export carries the whole model") {
  MilpModel m;
  m.name = "export_demo";
  m.add_variable("x[1]", VarKind::Continuous, 0.0, kInf);
  m.add_variable("y[1]", VarKind::Continuous, -kInf, kInf);
  m.add_variable("z[1]", VarKind::Binary, 0.0, 1.0);
  m.add_variable("w[1]", VarKind::Continuous, -1.5, 2.5);
  m.set_objective({{0, 1.0}, {1, -2.0}, {2, 4.0}});
  m.add_constraint("c[1]", {{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 5.0);
  m.add_constraint("c[2]", {{1, -1.0}, {2, 2.0}}, Sense::Equal, 1.0);
  m.add_constraint("c[3]", {{3, 1.0}}, Sense::GreaterEqual, -1.0);

  std::string lp = m.to_lp_string();
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find("c[2]: - 1 y[1] + 2 z[1] = 1") != std::string::npos);
  CHECK(lp.find("y[1] free") != std::string::npos);
  CHECK(lp.find("-1.5 <= w[1] <= 2.5") != std::string::npos);
  CHECK(lp.find("Binaries") != std::string::npos);
  CHECK(lp.find("End") != std::string::npos);
}
