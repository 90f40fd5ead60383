#include <gtest/gtest.h>

#include "nomapair/conic/program.hpp"
#include "nomapair/conic/solver.hpp"

namespace nomapair::conic {
namespace {

// max -beta  s.t. beta >= 3
TEST(ConicSolver, TrivialLowerBound) {
  ConeProgram p;
  const int beta = p.add_variable({.name = "beta"});
  p.objective = AffineExpr::variable(beta, -1.0);
  p.add_linear(AffineExpr::variable(beta), 3.0, kInf, Family::generic);
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_NEAR(sol.primal(beta), 3.0, 1e-7);
  EXPECT_NEAR(sol.objective_value, -3.0, 1e-7);
}

// max x + y + z  s.t. ||(x, 2y, 3z)|| <= 1, 0 <= x,y,z <= 1.
// Optimum (6/7, 3/14, 2/21), value 7/6.
TEST(ConicSolver, SimpleSoc) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  const int y = p.add_variable({.name = "y"});
  const int z = p.add_variable({.name = "z"});
  p.objective = AffineExpr::variable(x) + AffineExpr::variable(y) + AffineExpr::variable(z);
  p.add_soc(AffineExpr(1.0), {AffineExpr::variable(x), AffineExpr::variable(y, 2.0), AffineExpr::variable(z, 3.0)},
            Family::generic);
  for (int v : {x, y, z}) p.add_linear(AffineExpr::variable(v), 0.0, 1.0, Family::generic);
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_NEAR(sol.objective_value, 7.0 / 6.0, 1e-7);
  EXPECT_NEAR(sol.primal(x), 6.0 / 7.0, 1e-6);
  EXPECT_NEAR(sol.primal(y), 3.0 / 14.0, 1e-6);
  EXPECT_NEAR(sol.primal(z), 2.0 / 21.0, 1e-6);
}

// max x + y s.t. ||(x,2y)|| <= 2x+3, ||(2x,y)|| <= 2y+3, 0 <= x,y <= 1 -> (1,1).
// Without the box the cones alone bind at x = y = 3/(sqrt(5)-2).
TEST(ConicSolver, TwoSocs) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  const int y = p.add_variable({.name = "y"});
  p.objective = AffineExpr::variable(x) + AffineExpr::variable(y);
  p.add_soc(AffineExpr(3.0).add(x, 2.0), {AffineExpr::variable(x), AffineExpr::variable(y, 2.0)}, Family::generic);
  p.add_soc(AffineExpr(3.0).add(y, 2.0), {AffineExpr::variable(x, 2.0), AffineExpr::variable(y)}, Family::generic);
  const Solution unboxed = solve(p);
  ASSERT_EQ(unboxed.status, SolveStatus::optimal) << unboxed.message;
  EXPECT_NEAR(unboxed.primal(x), 3.0 / (std::sqrt(5.0) - 2.0), 1e-6);
  for (int v : {x, y}) p.add_linear(AffineExpr::variable(v), 0.0, 1.0, Family::generic);
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_NEAR(sol.primal(x), 1.0, 1e-6);
  EXPECT_NEAR(sol.primal(y), 1.0, 1e-6);
}

// max -t s.t. t * 1 >= x^2, x >= 2  -> t = 4 (rotated cone).
TEST(ConicSolver, RotatedCone) {
  ConeProgram p;
  const int t = p.add_variable({.name = "t"});
  const int x = p.add_variable({.name = "x"});
  p.objective = AffineExpr::variable(t, -1.0);
  p.add_rsoc(AffineExpr::variable(t), AffineExpr(1.0), {AffineExpr::variable(x)}, Family::generic);
  p.add_linear(AffineExpr::variable(x), 2.0, kInf, Family::generic);
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_NEAR(sol.primal(t), 4.0, 1e-6);
}

// Geometric-mean maximization: max u s.t. x*y >= u^2, x + y <= 2 -> u = 1.
TEST(ConicSolver, RotatedConeBothVariable) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  const int y = p.add_variable({.name = "y"});
  const int u = p.add_variable({.name = "u"});
  p.objective = AffineExpr::variable(u);
  p.add_rsoc(AffineExpr::variable(x), AffineExpr::variable(y), {AffineExpr::variable(u)}, Family::generic);
  p.add_linear(AffineExpr::variable(x) + AffineExpr::variable(y), -kInf, 2.0, Family::generic);
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_NEAR(sol.primal(u), 1.0, 1e-6);
}

TEST(ConicSolver, EqualityConstraint) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  const int y = p.add_variable({.name = "y"});
  // max -(x^2 + y^2) surrogate: min t, t >= ||(x, y)||, x + y = 2 -> x = y = 1.
  const int t = p.add_variable({.name = "t"});
  p.objective = AffineExpr::variable(t, -1.0);
  p.add_soc(AffineExpr::variable(t), {AffineExpr::variable(x), AffineExpr::variable(y)}, Family::generic);
  p.add_linear(AffineExpr::variable(x) + AffineExpr::variable(y), 2.0, 2.0, Family::generic);
  const Solution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.message;
  EXPECT_NEAR(sol.primal(x), 1.0, 1e-6);
  EXPECT_NEAR(sol.primal(y), 1.0, 1e-6);
  EXPECT_NEAR(sol.primal(t), std::sqrt(2.0), 1e-6);
}

TEST(ConicSolver, ContradictoryBoundsAreInfeasible) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  p.objective = AffineExpr::variable(x);
  p.add_linear(AffineExpr::variable(x), 2.0, kInf, Family::generic);
  p.add_linear(AffineExpr::variable(x), -kInf, 1.0, Family::generic);
  const Solution sol = solve(p);
  EXPECT_EQ(sol.status, SolveStatus::infeasible);
  EXPECT_EQ(sol.primal.size(), 0);
}

TEST(ConicSolver, InfeasibleCone) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  p.objective = AffineExpr::variable(x);
  p.add_soc(AffineExpr(1.0), {AffineExpr::variable(x)}, Family::generic);
  p.add_linear(AffineExpr::variable(x), 2.0, kInf, Family::generic);
  EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
}

TEST(ConicSolver, UnboundedIsReported) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  p.objective = AffineExpr::variable(x);
  p.add_linear(AffineExpr::variable(x), 0.0, kInf, Family::generic);
  EXPECT_EQ(solve(p).status, SolveStatus::unbounded);
}

TEST(ConicSolver, Deterministic) {
  ConeProgram p;
  const int x = p.add_variable({.name = "x"});
  const int y = p.add_variable({.name = "y"});
  p.objective = AffineExpr::variable(x) + AffineExpr::variable(y, 0.5);
  p.add_soc(AffineExpr(1.0), {AffineExpr::variable(x), AffineExpr::variable(y)}, Family::generic);
  const Solution a = solve(p);
  const Solution b = solve(p);
  ASSERT_TRUE(a.optimal());
  EXPECT_EQ(a.primal, b.primal);
}

TEST(ConeProgram, NamedIndexIsBijective) {
  ConeProgram p;
  const int a = p.add_variable({.name = "a"});
  const int b = p.add_variable({.name = "b"});
  EXPECT_EQ(p.index_of("a"), a);
  EXPECT_EQ(p.index_of("b"), b);
  EXPECT_THROW(p.index_of("c"), std::out_of_range);
  EXPECT_THROW(p.add_variable({.name = "a"}), std::invalid_argument);
}

TEST(ConeProgram, RejectsBadCoordinates) {
  ConeProgram p;
  p.add_variable({.name = "a"});
  p.add_linear(AffineExpr::variable(3), 0.0, 1.0, Family::generic);
  EXPECT_THROW(p.validate(), std::out_of_range);
}

}  // namespace
}  // namespace nomapair::conic
