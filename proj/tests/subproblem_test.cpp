#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "nomapair/conic/solver.hpp"
#include "nomapair/conic/subproblem.hpp"
#include "nomapair/sca.hpp"

namespace nomapair::conic {
namespace {

Scenario make(int M, int N, int L, std::uint64_t seed, double pmax_dbm = 30.0) {
  SystemConfig c;
  c.num_near = M;
  c.num_far = N;
  c.num_antennas = L;
  c.pmax_dbm = pmax_dbm;
  return normalize(generate_scenario(c, seed));
}

const RsocConstraint& rsoc(const ConeProgram& p, const std::string& label) {
  for (const auto& c : p.rsoc) {
    if (c.label == label) return c;
  }
  throw std::out_of_range("no cone row '" + label + "'");
}

bool has_rsoc(const ConeProgram& p, const std::string& label) {
  for (const auto& c : p.rsoc) {
    if (c.label == label) return true;
  }
  return false;
}

std::string tag(int m, int n) { return std::to_string(m + 1) + "," + std::to_string(n + 1); }

// A random primal vector around the injected expansion point.
Eigen::VectorXd perturbed(const Subproblem& sub, const IteratePoint& p, Rng& rng, double spread) {
  Eigen::VectorXd x = inject(sub, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += spread * (2.0 * rng.uniform() - 1.0) * std::max(1.0, std::abs(x(i)));
  // keep alpha and tau in their domains
  if (!sub.layout.fixed_alpha) {
    for (int m = 0; m < sub.layout.alpha.rows(); ++m) {
      for (int n = 0; n < sub.layout.alpha.cols(); ++n) {
        const double a0 = sub.layout.alpha_offset(m, n), as = sub.layout.alpha_scale(m, n);
        x(sub.layout.alpha(m, n)) = std::clamp(x(sub.layout.alpha(m, n)), (0.01 - a0) / as, (0.99 - a0) / as);
        x(sub.layout.tau(m, n)) = std::abs(x(sub.layout.tau(m, n)));
      }
    }
  }
  x(sub.layout.beta) = std::abs(x(sub.layout.beta));
  return x;
}

TEST(Subproblem, DimensionsMatchCountsOnGrid) {
  for (int M = 1; M <= 3; ++M) {
    for (int N = 1; N <= 5; ++N) {
      for (int L : {1, 2, 6}) {
        const Scenario s = make(M, N, L, 17);
        const Subproblem sub = build_subproblem(s, initialize(s));
        const SubproblemDims d = relaxed_dims(M, N, L);
        EXPECT_EQ(static_cast<long>(sub.program.num_model_constraints()), d.constraints) << M << N << L;
        EXPECT_EQ(sub.program.num_decision_symbols(), d.variables) << M << N << L;
        EXPECT_EQ(sub.program.count(Family::near_sinr), static_cast<std::size_t>(M));
        EXPECT_EQ(sub.program.count(Family::far_direct), static_cast<std::size_t>(N));
        EXPECT_EQ(sub.program.count(Family::far_sic), static_cast<std::size_t>(M * N));
        EXPECT_EQ(sub.program.count(Family::tau_bound), static_cast<std::size_t>(M * N));
      }
    }
  }
  const SubproblemDims d = relaxed_dims(3, 5, 6);
  EXPECT_EQ(d.constraints, 62);
  EXPECT_EQ(d.variables, 79);
}

TEST(Subproblem, VariableNames) {
  const Scenario s = make(3, 5, 6, 1);
  const Subproblem sub = build_subproblem(s, initialize(s));
  const ConeProgram& p = sub.program;
  EXPECT_EQ(p.index_of("w[1,1][1].re"), sub.layout.w_re[0][0]);
  EXPECT_EQ(p.index_of("w[2,5][6].im"), sub.layout.w_im[7][5]);
  EXPECT_EQ(p.index_of("alpha[3,5]"), sub.layout.alpha(2, 4));
  EXPECT_EQ(p.index_of("tau[2,4]"), sub.layout.tau(1, 3));
  EXPECT_EQ(p.index_of("beta"), sub.layout.beta);
  EXPECT_EQ(p.num_vars(), 2 * 6 * 8 + 2 * 15 + 1);
  EXPECT_NO_THROW(p.validate());
}

TEST(Subproblem, FixedBuildDropsPairingVariables) {
  const Scenario s = make(3, 5, 6, 2);
  const IteratePoint p0 = initialize(s);
  const PairingMatrix none = PairingMatrix::zeros(3, 5);
  const Subproblem a = build_subproblem(s, p0, none);
  EXPECT_EQ(a.program.count(Family::far_sic), 0u);
  EXPECT_EQ(a.program.count(Family::tau_bound), 0u);
  EXPECT_FALSE(a.program.has_variable("tau[1,1]"));
  EXPECT_FALSE(a.program.has_variable("alpha[1,1]"));

  PairingMatrix one = none;
  one(1, 3) = 1.0;
  const Subproblem b = build_subproblem(s, p0, one);
  EXPECT_EQ(b.program.count(Family::far_sic), 1u);
  EXPECT_TRUE(has_rsoc(b.program, "sic 2,4"));

  PairingMatrix bad = none;
  bad(0, 0) = bad(0, 1) = 1.0;
  EXPECT_THROW(build_subproblem(s, p0, bad), std::invalid_argument);
}

TEST(Subproblem, RejectsPointOutsideClamps) {
  const Scenario s = make(2, 2, 2, 3);
  IteratePoint p = initialize(s);
  p.alpha(0, 0) = 0.0;
  EXPECT_THROW(build_subproblem(s, p), std::domain_error);
  p = initialize(s);
  p.beta = 0.0;
  EXPECT_THROW(build_subproblem(s, p), std::domain_error);
}

// The cone rows, mapped back to model units, must equal f*beta minus the
// interference bound computed by the surrogate and metrics code.
TEST(Subproblem, ConeRowsMatchSurrogates) {
  Rng rng(99);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Scenario s = make(1 + static_cast<int>(seed % 3), 1 + static_cast<int>(seed % 5), 1 + static_cast<int>(seed % 4), seed);
    const IteratePoint p = initialize(s);
    const Subproblem sub = build_subproblem(s, p);
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd x = perturbed(sub, p, rng, 0.3);
      const IteratePoint v = read_point(sub, x, p);
      for (int m = 0; m < s.M(); ++m) {
        const double want = f1(m, v.w, p, s) * v.beta - hat_xi(m, v.w, v.alpha, v.tau, p, s);
        EXPECT_NEAR(rsoc(sub.program, "near " + std::to_string(m + 1)).residual(x), want, 1e-9 * std::max(1.0, std::abs(want)));
        for (int n = 0; n < s.N(); ++n) {
          const double sic = f_tilde(m, n, v.w, v.alpha(m, n), p, s) * v.beta - psi(m, n, v.w, s);
          EXPECT_NEAR(rsoc(sub.program, "sic " + tag(m, n)).residual(x), sic, 1e-9 * std::max(1.0, std::abs(sic)));
          const double tb = v.tau(m, n) - gain(s.h_near(m), v.w.far(s, n));
          EXPECT_NEAR(rsoc(sub.program, "tau " + tag(m, n)).residual(x), tb, 1e-9 * std::max(1.0, std::abs(tb)));
        }
      }
      for (int n = 0; n < s.N(); ++n) {
        const double want = f2(n, v.w, p, s) * v.beta - phi(n, v.w, s);
        EXPECT_NEAR(rsoc(sub.program, "far " + std::to_string(n + 1)).residual(x), want, 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(Subproblem, FixedConeRowsMatchExactInterference) {
  Rng rng(7);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario s = make(3, 4, 3, seed);
    const PairingMatrix pairing =
        PairingMatrix({(Eigen::MatrixXd(3, 4) << 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0).finished()}, PairingMatrix::Mode::binary);
    IteratePoint p = initialize(s);
    p.alpha = pairing;
    const Subproblem sub = build_subproblem(s, p, pairing);
    const Eigen::VectorXd x = perturbed(sub, p, rng, 0.3);
    const IteratePoint v = read_point(sub, x, p);
    for (int m = 0; m < s.M(); ++m) {
      const double want = f1(m, v.w, p, s) * v.beta - xi(m, v.w, pairing, s);
      EXPECT_NEAR(rsoc(sub.program, "near " + std::to_string(m + 1)).residual(x), want, 1e-9 * std::max(1.0, std::abs(want)));
    }
    for (int m = 0; m < s.M(); ++m) {
      for (int n = 0; n < s.N(); ++n) {
        if (pairing(m, n) == 0.0) continue;
        const double want = linearized_gain(s.h_near(m), p.w.far(s, n), v.w.far(s, n)) * v.beta - psi(m, n, v.w, s);
        EXPECT_NEAR(rsoc(sub.program, "sic " + tag(m, n)).residual(x), want, 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(Subproblem, InjectReadRoundTrip) {
  const Scenario s = make(3, 5, 6, 4);
  const IteratePoint p = initialize(s);
  const Subproblem sub = build_subproblem(s, p);
  const Eigen::VectorXd x = inject(sub, p);
  const IteratePoint back = read_point(sub, x, p);
  for (std::size_t u = 0; u < p.w.w.size(); ++u) EXPECT_LE((back.w.w[u] - p.w.w[u]).norm(), 1e-14 * p.w.w[u].norm());
  EXPECT_LE((back.alpha.alpha - p.alpha.alpha).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(((back.tau - p.tau).array() / p.tau.array()).abs().maxCoeff(), 1e-14);
  EXPECT_NEAR(back.beta, p.beta, 1e-14 * p.beta);
  // the initial point is strictly feasible for its own subproblem
  EXPECT_LE(sub.program.max_violation(x), 1e-12);
  EXPECT_NEAR(sub.program.objective.eval(x), 1.0 / p.beta, 1e-12 / p.beta);
}

TEST(Subproblem, ExtractAppliesClamps) {
  const Scenario s = make(2, 2, 2, 5);
  const IteratePoint p = initialize(s);
  const Subproblem sub = build_subproblem(s, p);
  Solution sol;
  sol.status = SolveStatus::optimal;
  sol.primal = inject(sub, p);
  const auto& lay = sub.layout;
  sol.primal(lay.alpha(0, 0)) = (0.99995 - lay.alpha_offset(0, 0)) / lay.alpha_scale(0, 0);
  sol.primal(lay.alpha(1, 1)) = (-1e-9 - lay.alpha_offset(1, 1)) / lay.alpha_scale(1, 1);
  sol.primal(sub.layout.beta) = 1e-12 / sub.layout.beta_scale;
  const Clamps c;
  const IteratePoint next = extract_iterate(sol, sub, p, c);
  EXPECT_DOUBLE_EQ(next.alpha(0, 0), 1.0 - c.eps_alpha);
  EXPECT_DOUBLE_EQ(next.alpha(1, 1), c.eps_alpha);
  EXPECT_DOUBLE_EQ(next.beta, c.beta_min);
  EXPECT_EQ(next.iteration, p.iteration + 1);

  sol.status = SolveStatus::numerical_failure;
  EXPECT_THROW(extract_iterate(sol, sub, p, c), std::runtime_error);
}

// Any point feasible for the subproblem is feasible for the relaxed
// problem: 1/beta below every exact SINR.
TEST(Subproblem, FeasiblePointsAreConservative) {
  Rng rng(3);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const Scenario s = make(2, 3, 3, seed);
    const IteratePoint p = initialize(s);
    const Subproblem sub = build_subproblem(s, p);
    const Solution sol = solve(sub.program);
    ASSERT_TRUE(sol.optimal()) << sol.message;
    const Eigen::VectorXd x0 = inject(sub, p);
    for (int k = 0; k < 20; ++k) {
      // Random points on the segment between two feasible points, pushed
      // outward and pulled back into the feasible set by raising beta.
      const double t = rng.uniform();
      Eigen::VectorXd x = (1.0 - t) * x0 + t * sol.primal;
      Eigen::VectorXd dir = Eigen::VectorXd::Random(x.size());
      dir(sub.layout.beta) = 0.0;
      x += 0.002 * dir;
      double lo = x(sub.layout.beta), hi = std::max(1.0, 2.0 * lo);
      auto ok = [&](double b) {
        Eigen::VectorXd y = x;
        y(sub.layout.beta) = b;
        return sub.program.max_violation(y) <= 0.0;
      };
      int grow = 0;
      while (!ok(hi) && grow++ < 60) hi *= 2.0;
      if (!ok(hi)) continue;  // outside the w/alpha/tau part of the feasible set
      for (int it = 0; it < 60 && !ok(lo); ++it) lo = 0.5 * (lo + hi);
      x(sub.layout.beta) = ok(lo) ? lo : hi;
      const IteratePoint v = read_point(sub, x, p);
      const double g = min_sinr(v.w, v.alpha, s);
      EXPECT_GE(v.beta * g, 1.0 - 1e-9) << "seed " << seed;
      EXPECT_LE(v.w.total_power(), s.pmax_w * (1.0 + 1e-9));
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Subproblem, SolvedIterateImprovesObjective) {
  const Scenario s = make(3, 5, 6, 1);
  const IteratePoint p = initialize(s);
  const Subproblem sub = build_subproblem(s, p);
  const Solution sol = solve(sub.program);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  EXPECT_GE(sol.objective_value, 1.0 / p.beta - 1e-9);
  EXPECT_LE(sub.program.max_violation(sol.primal), 1e-7);
}

TEST(Subproblem, DumpListsRows) {
  const Scenario s = make(1, 1, 1, 1);
  const Subproblem sub = build_subproblem(s, initialize(s));
  std::ostringstream os;
  dump(os, sub.program);
  const std::string text = os.str();
  for (const char* key : {"maximize", "w[1,1][1].re", "alpha[1,1]", "near 1", "far 1", "sic 1,1", "tau 1,1", "power"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace nomapair::conic
