#include <cmath>
#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "psps/solver.hpp"

using namespace psps;

namespace {

MilpModel two_var_box() {
  MilpModel m;
  m.add_variable("x[0]", VarKind::Continuous, 0.0, 1.0);
  m.add_variable("x[1]", VarKind::Continuous, 0.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("simplex solves textbook instances exactly") {
  SUBCASE("corner of a simplex face") {
    MilpModel m = two_var_box();
    m.set_objective({{0, -1.0}, {1, -1.0}});
    m.add_constraint("cap[]", {{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 1.0);
    auto r = solve_lp(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("bound flips reach the optimum without pivots") {
    MilpModel m = two_var_box();
    m.set_objective({{0, -1.0}, {1, -2.0}});
    m.add_constraint("cap[]", {{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 1.5);
    auto r = solve_lp(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-2.5).epsilon(1e-9));
    CHECK(r.x[1] == doctest::Approx(1.0));
    CHECK(r.x[0] == doctest::Approx(0.5));
  }
  SUBCASE("free variables on an equality") {
    MilpModel m;
    m.add_variable("x[]", VarKind::Continuous, -kInf, kInf);
    m.add_variable("y[]", VarKind::Continuous, -kInf, kInf);
    m.set_objective({{0, 1.0}, {1, 1.0}});
    m.add_constraint("eq[]", {{0, 1.0}, {1, -1.0}}, Sense::Equal, 2.0);
    m.add_constraint("lo[]", {{0, 1.0}, {1, 1.0}}, Sense::GreaterEqual, 1.0);
    auto r = solve_lp(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.x[0] == doctest::Approx(1.5));
    CHECK(r.x[1] == doctest::Approx(-0.5));
  }
  SUBCASE("single free variable pushed to a row bound") {
    MilpModel m;
    m.add_variable("x[]", VarKind::Continuous, -kInf, kInf);
    m.set_objective({{0, 1.0}});
    m.add_constraint("lo[]", {{0, 1.0}}, Sense::GreaterEqual, 3.0);
    auto r = solve_lp(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("negative costs over an unbounded ray") {
    MilpModel m;
    m.add_variable("x[]", VarKind::Continuous, 0.0, kInf);
    m.set_objective({{0, -1.0}});
    m.add_constraint("lo[]", {{0, 1.0}}, Sense::GreaterEqual, 1.0);
    auto r = solve_lp(m);
    CHECK(r.status == SolveStatus::Unbounded);
  }
  SUBCASE("crossed row and bound is infeasible") {
    MilpModel m;
    m.add_variable("x[]", VarKind::Continuous, 0.0, 1.0);
    m.set_objective({{0, 1.0}});
    m.add_constraint("hi[]", {{0, 1.0}}, Sense::LessEqual, -1.0);
    auto r = solve_lp(m);
    CHECK(r.status == SolveStatus::Infeasible);
  }
  SUBCASE("objective constant carried through") {
    MilpModel m;
    m.add_variable("x[]", VarKind::Continuous, 0.0, 4.0);
    m.set_objective({{0, 2.0}}, 7.0);
    auto r = solve_lp(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(7.0));
  }
  SUBCASE("model with no rows at all") {
    MilpModel m;
    m.add_variable("x[]", VarKind::Continuous, -2.0, 5.0);
    m.add_variable("y[]", VarKind::Continuous, -1.0, 1.0);
    m.set_objective({{0, 1.0}, {1, -1.0}});
    auto r = solve_lp(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-3.0));
  }
}

TEST_CASE("degenerate and redundant rows do not cycle") {
  MilpModel m;
  for (int j = 0; j < 3; ++j)
    m.add_variable(make_name("x", {j}), VarKind::Continuous, 0.0, 10.0);
  m.set_objective({{0, -1.0}, {1, -1.0}, {2, -1.0}});
  // several rows active at the same corner
  m.add_constraint("a[]", {{0, 1.0}, {1, 1.0}}, Sense::LessEqual, 2.0);
  m.add_constraint("b[]", {{0, 1.0}, {1, 1.0}, {2, 0.0}}, Sense::LessEqual, 2.0);
  m.add_constraint("c[]", {{0, 2.0}, {1, 2.0}}, Sense::LessEqual, 4.0);
  m.add_constraint("d[]", {{2, 1.0}}, Sense::LessEqual, 1.0);
  auto r = solve_lp(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("random instances agree with vertex enumeration") {
  int feasible_seen = 0, infeasible_seen = 0;
  for (unsigned seed = 1; seed <= 50; ++seed) {
    CAPTURE(seed);
    MilpModel m = oracle::random_lp(seed);
    auto truth = oracle::vertex_enumerate(oracle::to_dense(m));
    auto got = solve_lp(m);
    if (truth.feasible) {
      ++feasible_seen;
      REQUIRE(got.status == SolveStatus::Optimal);
      CHECK(std::fabs(got.objective - truth.objective) <=
            1e-6 * std::max(1.0, std::fabs(truth.objective)));
      auto rep = evaluate_solution(m, got.x);
      CHECK(rep.max_bound_violation <= 1e-6);
      CHECK(rep.max_constraint_violation <= 1e-5);
    } else {
      ++infeasible_seen;
      REQUIRE(got.status == SolveStatus::Infeasible);
    }
  }
  // the generator is tuned to produce a mix; make sure it still does
  CHECK(feasible_seen >= 25);
  CHECK(infeasible_seen >= 3);
}

TEST_CASE("warm started resolve matches cold solve") {
  MilpModel m = oracle::random_lp(7);
  auto first = solve_lp(m);
  REQUIRE(first.status == SolveStatus::Optimal);

  std::vector<double> lb(m.vars.size()), ub(m.vars.size());
  for (const auto& v : m.vars) {
    lb[static_cast<std::size_t>(v.id)] = v.lower;
    ub[static_cast<std::size_t>(v.id)] = v.upper;
  }
  // tighten one variable around the midpoint of its range
  double mid = 0.5 * (lb[0] + ub[0]);
  ub[0] = mid;

  SolverConfig cfg;
  auto warm = solve_lp(m, cfg, &first.basis, &lb, &ub);
  auto cold = solve_lp(m, cfg, nullptr, &lb, &ub);
  REQUIRE(warm.status == cold.status);
  if (warm.status == SolveStatus::Optimal)
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
}

TEST_CASE("lp solves are bit-for-bit deterministic") {
  MilpModel m = oracle::random_lp(21);
  auto a = solve_lp(m);
  auto b = solve_lp(m);
  REQUIRE(a.status == b.status);
  REQUIRE(a.x.size() == b.x.size());
  CHECK(std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) == 0);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}
