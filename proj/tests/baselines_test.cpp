#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "nomapair/baselines.hpp"

namespace nomapair {
namespace {

Scenario make(int M, int N, int L, std::uint64_t seed, double pmax_dbm = 30.0) {
  SystemConfig c;
  c.num_near = M;
  c.num_far = N;
  c.num_antennas = L;
  c.pmax_dbm = pmax_dbm;
  return normalize(generate_scenario(c, seed));
}

// Brute force over every subset of the M x N edges.
std::uint64_t brute_force_matchings(int M, int N) {
  std::uint64_t count = 0;
  const int E = M * N;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << E); ++mask) {
    std::vector<int> row(static_cast<std::size_t>(M)), col(static_cast<std::size_t>(N));
    bool ok = true;
    for (int e = 0; e < E && ok; ++e) {
      if (!(mask >> e & 1u)) continue;
      ok = ++row[static_cast<std::size_t>(e / N)] == 1 && ++col[static_cast<std::size_t>(e % N)] == 1;
    }
    count += ok;
  }
  return count;
}

TEST(Matchings, Counts) {
  EXPECT_EQ(count_matchings(1, 1), 2u);
  EXPECT_EQ(count_matchings(2, 2), 7u);
  EXPECT_EQ(count_matchings(3, 5), 136u);
  for (int M = 1; M <= 3; ++M) {
    for (int N = 1; N <= 5; ++N) {
      EXPECT_EQ(count_matchings(M, N), brute_force_matchings(M, N)) << M << "x" << N;
      EXPECT_EQ(count_matchings(M, N), count_matchings(N, M));
    }
  }
  EXPECT_EQ(count_matchings(200, 200), std::numeric_limits<std::uint64_t>::max());
}

TEST(Matchings, EnumerationIsCompleteAndValid) {
  const auto all = enumerate_matchings(3, 5);
  ASSERT_EQ(all.size(), 136u);
  std::set<PairingAssignment> distinct(all.begin(), all.end());
  EXPECT_EQ(distinct.size(), all.size());
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(all.front().size(), 0u);
  for (const auto& a : all) EXPECT_TRUE(a.valid(3, 5)) << a.to_string();
}

TEST(Matchings, LimitIsEnforced) {
  try {
    enumerate_matchings(10, 10);
    FAIL() << "expected length_error";
  } catch (const std::length_error& e) {
    EXPECT_NE(std::string(e.what()).find("limit"), std::string::npos);
  }
  EXPECT_THROW(enumerate_matchings(0, 2), std::invalid_argument);
}

TEST(Assignment, StringRoundTrip) {
  const PairingAssignment a({{2, 4}, {0, 1}});
  EXPECT_EQ(a.to_string(), "1-2;3-5");
  EXPECT_EQ(PairingAssignment::parse("3-5;1-2"), a);
  EXPECT_EQ(PairingAssignment::parse("").size(), 0u);
  EXPECT_EQ(PairingAssignment{}.to_string(), "");
  EXPECT_THROW(PairingAssignment::parse("1-"), std::invalid_argument);
  EXPECT_THROW(PairingAssignment::parse("0-1"), std::invalid_argument);
  EXPECT_THROW(PairingAssignment::parse("1x2"), std::invalid_argument);
  EXPECT_THROW(PairingAssignment::parse("1-2a"), std::invalid_argument);

  const PairingMatrix m = a.to_matrix(3, 5);
  EXPECT_EQ(PairingAssignment::from_matrix(m), a);
  EXPECT_THROW(a.to_matrix(2, 5), std::out_of_range);
  EXPECT_FALSE(PairingAssignment({{0, 1}, {1, 1}}).valid(2, 2));
  EXPECT_FALSE(PairingAssignment({{0, 0}, {0, 1}}).valid(2, 2));
}

TEST(RandomPairing, MaximalAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PairingMatrix a = random_pairing(3, 5, seed);
    EXPECT_EQ(PairingAssignment::from_matrix(a).size(), 3u);
    EXPECT_TRUE(PairingAssignment::from_matrix(a).valid(3, 5));
    EXPECT_TRUE(random_pairing(3, 5, seed).alpha == a.alpha);
    const PairingMatrix b = random_pairing(5, 3, seed);
    EXPECT_EQ(PairingAssignment::from_matrix(b).size(), 3u);
    EXPECT_TRUE(PairingAssignment::from_matrix(b).valid(5, 3));
  }
}

TEST(RandomPairing, Uniform) {
  // 2x2: the two perfect matchings are equally likely.
  int diagonal = 0;
  for (std::uint64_t seed = 0; seed < 6000; ++seed) diagonal += random_pairing(2, 2, seed)(0, 0) > 0.5;
  EXPECT_NEAR(diagonal, 3000, 150);

  // 3x5: each far user receives near user 1 with probability 1/5.
  std::vector<int> hits(5);
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    const PairingMatrix a = random_pairing(3, 5, seed);
    for (int n = 0; n < 5; ++n) hits[static_cast<std::size_t>(n)] += a(0, n) > 0.5;
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 120);
}

TEST(FixedPairing, EmptyAssignmentIsOma) {
  const Scenario s = make(2, 3, 4, 3);
  const FixedPairingResult r = solve_fixed_pairing(s, PairingAssignment{});
  EXPECT_EQ(r.pairing.alpha.sum(), 0.0);
  // without pairs every user decodes its own signal directly
  const PairingMatrix zero = PairingMatrix::zeros(2, 3);
  for (int n = 0; n < 3; ++n) EXPECT_DOUBLE_EQ(sinr_far(n, r.w, zero, s), sinr_far_direct(n, r.w, s));
  EXPECT_NEAR(r.report.mmr, min_rate(r.w, zero, s), 1e-12);
  const auto feas = check_feasibility(r.w, r.pairing, s, 1e-6, true);
  EXPECT_TRUE(feas.feasible());
  EXPECT_THROW(solve_fixed_pairing(s, PairingAssignment({{0, 0}, {1, 0}})), std::invalid_argument);
}

TEST(FixedPairing, WarmResolveDoesNotLose) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Scenario s = make(3, 5, 6, seed);
    const RunResult alg = run(s);
    const FixedPairingResult r = solve_fixed_pairing(s, PairingAssignment::from_matrix(alg.pairing), {}, &alg.w);
    EXPECT_GE(r.report.mmr, alg.report.mmr - 1e-6) << "seed " << seed;
  }
}

TEST(FixedPairing, SinglePairScalarCase) {
  // L = 1: with one near and one far user the fixed-pairing problem is a
  // scalar power split, solved here on a fine grid.
  const Scenario s = make(1, 1, 1, 7);
  const double a = std::norm(s.h_near(0)(0)), b = std::norm(s.h_far(0)(0)), P = s.pmax_w;
  // Co-phased scalar beams: near power p1, far power p2 = P - p1.
  auto oma_min = [&](double p1) {
    const double p2 = P - p1;
    return std::min(a * p1 / (1.0 + a * p2), b * p2 / (1.0 + b * p1));
  };
  auto noma_min = [&](double p1) {
    const double p2 = P - p1;
    return std::min({a * p1 / 1.0, b * p2 / (1.0 + b * p1), a * p2 / (1.0 + a * p1)});
  };
  auto best = [&](auto f) {
    double v = 0.0;
    for (int k = 1; k < 200000; ++k) v = std::max(v, f(P * k / 200000.0));
    return std::log2(1.0 + v);
  };
  const FixedPairingResult oma = solve_fixed_pairing(s, PairingAssignment{});
  const FixedPairingResult noma = solve_fixed_pairing(s, PairingAssignment({{0, 0}}));
  EXPECT_NEAR(oma.report.mmr, best(oma_min), 1e-3 * best(oma_min));
  EXPECT_NEAR(noma.report.mmr, best(noma_min), 1e-3 * best(noma_min));
}

TEST(Oracle, TableAndBest) {
  const Scenario s = make(2, 2, 3, 5);
  const OracleResult r = exhaustive_oracle(s, {}, nullptr, 2);
  ASSERT_EQ(r.table.size(), 8u);
  int warm = 0;
  for (const auto& e : r.table) {
    warm += e.warm_start;
    if (e.status == "ok") EXPECT_GE(r.mmr, e.mmr);
  }
  EXPECT_EQ(warm, 1);
  EXPECT_GE(r.mmr, r.algorithm.report.mmr - 1e-3);
  // the best entry reproduces its rate
  const PairingMatrix best = r.best.to_matrix(2, 2);
  EXPECT_NEAR(min_rate(r.w, best, s), r.mmr, 1e-9);

  std::ostringstream os;
  write_oracle_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "assignment,mmr_bps_hz,iterations,status");
  int rows = 0, warm_rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    warm_rows += line.find(" (warm)\"") != std::string::npos;
    EXPECT_EQ(line.front(), '"');
  }
  EXPECT_EQ(rows, 8);
  EXPECT_EQ(warm_rows, 1);
}

TEST(Oracle, ReusesSuppliedRun) {
  const Scenario s = make(1, 2, 2, 9);
  const RunResult alg = run(s);
  const OracleResult r = exhaustive_oracle(s, {}, &alg);
  EXPECT_EQ(r.table.size(), count_matchings(1, 2) + 1);
  EXPECT_DOUBLE_EQ(r.algorithm.report.mmr, alg.report.mmr);
}

}  // namespace
}  // namespace nomapair
