#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nomapair/metrics.hpp"
#include "nomapair/parallel.hpp"
#include "nomapair/rng.hpp"
#include "nomapair/sca.hpp"
#include "nomapair/scenario.hpp"

namespace nomapair {

/// A partial matching between near users (m) and far users (n), zero-based,
/// kept sorted by m.
struct PairingAssignment {
  std::vector<std::pair<int, int>> pairs;

  PairingAssignment() = default;
  explicit PairingAssignment(std::vector<std::pair<int, int>> p) : pairs(std::move(p)) {
    std::sort(pairs.begin(), pairs.end());
  }

  static PairingAssignment from_matrix(const PairingMatrix& a) {
    PairingAssignment out;
    for (int m = 0; m < a.M(); ++m) {
      for (int n = 0; n < a.N(); ++n) {
        if (a(m, n) > 0.5) out.pairs.emplace_back(m, n);
      }
    }
    return out;
  }

  PairingMatrix to_matrix(int M, int N) const {
    PairingMatrix a = PairingMatrix::zeros(M, N);
    for (const auto& [m, n] : pairs) {
      if (m < 0 || m >= M || n < 0 || n >= N) throw std::out_of_range("pair index outside M x N");
      a(m, n) = 1.0;
    }
    return a;
  }

  bool valid(int M, int N) const {
    std::vector<bool> row(static_cast<std::size_t>(std::max(M, 0))), col(static_cast<std::size_t>(std::max(N, 0)));
    for (const auto& [m, n] : pairs) {
      if (m < 0 || m >= M || n < 0 || n >= N) return false;
      if (row[static_cast<std::size_t>(m)] || col[static_cast<std::size_t>(n)]) return false;
      row[static_cast<std::size_t>(m)] = col[static_cast<std::size_t>(n)] = true;
    }
    return true;
  }

  std::size_t size() const { return pairs.size(); }

  /// One-based "m-n;m-n" encoding; the empty matching is "".
  std::string to_string() const {
    std::string s;
    for (const auto& [m, n] : pairs) {
      if (!s.empty()) s += ';';
      s += std::to_string(m + 1) + "-" + std::to_string(n + 1);
    }
    return s;
  }

  static PairingAssignment parse(const std::string& text) {
    PairingAssignment out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
      if (item.empty()) continue;
      const auto dash = item.find('-');
      if (dash == std::string::npos) throw std::invalid_argument("pair '" + item + "' is not of the form m-n");
      try {
        std::size_t used_m = 0, used_n = 0;
        const int m = std::stoi(item.substr(0, dash), &used_m);
        const int n = std::stoi(item.substr(dash + 1), &used_n);
        if (used_m != dash || used_n != item.size() - dash - 1 || m < 1 || n < 1) throw std::invalid_argument("");
        out.pairs.emplace_back(m - 1, n - 1);
      } catch (const std::exception&) {
        throw std::invalid_argument("pair '" + item + "' is not of the form m-n with positive integers");
      }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
  }

  auto operator<=>(const PairingAssignment&) const = default;
};

inline constexpr std::uint64_t kMaxMatchings = 1000000;

/// Number of partial matchings sum_k C(M,k) C(N,k) k!, saturating at
/// UINT64_MAX.
inline std::uint64_t count_matchings(int M, int N) {
  if (M < 0 || N < 0) throw std::invalid_argument("count_matchings: negative size");
  constexpr std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  // term_k = C(M,k) C(N,k) k! ; term_{k+1} = term_k (M-k)(N-k)/(k+1)
  long double term = 1.0L;
  long double total = 1.0L;
  for (int k = 0; k < std::min(M, N); ++k) {
    term = term * static_cast<long double>(M - k) * static_cast<long double>(N - k) / static_cast<long double>(k + 1);
    total += term;
    if (total >= static_cast<long double>(cap)) return cap;
  }
  return static_cast<std::uint64_t>(std::llround(total));
}

/// Every partial matching of an M x N bipartite graph, including the empty
/// one, in lexicographic order of their sorted pair lists.
inline std::vector<PairingAssignment> enumerate_matchings(int M, int N) {
  if (M < 1 || N < 1) throw std::invalid_argument("enumerate_matchings: M and N must be at least 1");
  const std::uint64_t count = count_matchings(M, N);
  if (count > kMaxMatchings) {
    throw std::length_error("enumerate_matchings: " + std::to_string(M) + "x" + std::to_string(N) + " has " +
                            std::to_string(count) + " matchings (limit " + std::to_string(kMaxMatchings) +
                            "); use smaller M and N");
  }
  std::vector<PairingAssignment> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<bool> used(static_cast<std::size_t>(N));
  std::vector<std::pair<int, int>> cur;
  auto rec = [&](auto&& self, int m) -> void {
    if (m == M) {
      PairingAssignment a;
      a.pairs = cur;
      out.push_back(std::move(a));
      return;
    }
    self(self, m + 1);
    for (int n = 0; n < N; ++n) {
      if (used[static_cast<std::size_t>(n)]) continue;
      used[static_cast<std::size_t>(n)] = true;
      cur.emplace_back(m, n);
      self(self, m + 1);
      cur.pop_back();
      used[static_cast<std::size_t>(n)] = false;
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

/// Uniformly random maximal matching of size min(M, N): the smaller side is
/// matched to the first entries of a random permutation of the larger side.
inline PairingMatrix random_pairing(int M, int N, std::uint64_t seed) {
  if (M < 1 || N < 1) throw std::invalid_argument("random_pairing: M and N must be at least 1");
  Rng rng(seed);
  const int big = std::max(M, N);
  std::vector<int> perm(static_cast<std::size_t>(big));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = big - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  PairingMatrix a = PairingMatrix::zeros(M, N);
  for (int k = 0; k < std::min(M, N); ++k) {
    const int other = perm[static_cast<std::size_t>(k)];
    if (M <= N) {
      a(k, other) = 1.0;
    } else {
      a(other, k) = 1.0;
    }
  }
  return a;
}

inline PairingMatrix random_pairing(const Scenario& s, std::uint64_t seed) { return random_pairing(s.M(), s.N(), seed); }

struct FixedPairingResult {
  BeamformerSet w;
  PairingMatrix pairing;
  RateReport report;
  Trace trace;
};

/// Beamforming with the pairing held fixed, started from the matched-filter
/// point, or from `warm` when it is feasible for the pairing.
inline FixedPairingResult solve_fixed_pairing(const Scenario& scenario, const PairingAssignment& assignment,
                                              const AlgoOptions& o = {}, const BeamformerSet* warm = nullptr) {
  if (!assignment.valid(scenario.M(), scenario.N())) {
    throw std::invalid_argument("solve_fixed_pairing: '" + assignment.to_string() + "' is not a valid matching");
  }
  const Scenario s = scenario.normalized ? scenario : normalize(scenario);
  FixedPairingResult r;
  r.pairing = assignment.to_matrix(s.M(), s.N());
  const IteratePoint p = phase2(s, r.pairing, warm, o, r.trace);
  r.w = p.w;
  r.report = rate_report(r.w, r.pairing, s);
  return r;
}

struct OracleEntry {
  PairingAssignment assignment;
  bool warm_start = false;  // the re-solve of the two-phase algorithm's pairing
  double mmr = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string status;  // "ok" or the failure reason
  BeamformerSet w;
};

struct OracleResult {
  PairingAssignment best;
  BeamformerSet w;
  double mmr = -std::numeric_limits<double>::infinity();
  std::vector<OracleEntry> table;
  RunResult algorithm;  // the two-phase run whose pairing was re-solved warm
};

namespace detail {

inline std::string failure_status(const std::exception& e) {
  if (const auto* se = dynamic_cast<const SolverError*>(&e)) {
    if (!se->trace().records.empty()) return conic::to_string(se->trace().records.back().status);
  }
  return "error";
}

inline OracleEntry oracle_entry(const Scenario& s, const PairingAssignment& a, const AlgoOptions& o,
                                const BeamformerSet* warm) {
  OracleEntry e;
  e.assignment = a;
  e.warm_start = warm != nullptr;
  try {
    FixedPairingResult r = solve_fixed_pairing(s, a, o, warm);
    e.mmr = r.report.mmr;
    e.iterations = r.trace.iterations(Phase::fixed);
    e.status = "ok";
    e.w = std::move(r.w);
  } catch (const std::exception& ex) {
    e.status = failure_status(ex);
  }
  return e;
}

}  // namespace detail

/// Solves every partial matching with the pairing fixed, plus the two-phase
/// algorithm's own pairing warm-started from its beamformers, and returns
/// the best. `algorithm` supplies a precomputed two-phase run; otherwise one
/// is made. The table is sorted by assignment (cold entry before warm).
inline OracleResult exhaustive_oracle(const Scenario& scenario, const AlgoOptions& o = {},
                                      const RunResult* algorithm = nullptr, int workers = 1) {
  const Scenario s = scenario.normalized ? scenario : normalize(scenario);
  const std::vector<PairingAssignment> all = enumerate_matchings(s.M(), s.N());
  OracleResult out;
  out.algorithm = algorithm ? *algorithm : run(s, o);
  const PairingAssignment chosen = PairingAssignment::from_matrix(out.algorithm.pairing);

  out.table.resize(all.size() + 1);
  parallel_for(all.size() + 1, workers, [&](std::size_t i) {
    if (i < all.size()) {
      out.table[i] = detail::oracle_entry(s, all[i], o, nullptr);
    } else {
      out.table[i] = detail::oracle_entry(s, chosen, o, &out.algorithm.w);
    }
  });
  std::stable_sort(out.table.begin(), out.table.end(), [](const OracleEntry& a, const OracleEntry& b) {
    if (a.assignment != b.assignment) return a.assignment < b.assignment;
    return !a.warm_start && b.warm_start;
  });
  for (const auto& e : out.table) {
    if (e.status == "ok" && e.mmr > out.mmr) {
      out.mmr = e.mmr;
      out.best = e.assignment;
      out.w = e.w;
    }
  }
  if (!std::isfinite(out.mmr)) throw std::runtime_error("exhaustive_oracle: every pairing failed to solve");
  return out;
}

/// CSV table: assignment, mmr_bps_hz, iterations, status. The warm-started
/// entry is marked by a trailing " (warm)" on its assignment field.
inline void write_oracle_csv(std::ostream& os, const OracleResult& r) {
  const auto old = os.precision(12);
  os << "assignment,mmr_bps_hz,iterations,status\n";
  for (const auto& e : r.table) {
    os << '"' << e.assignment.to_string() << (e.warm_start ? " (warm)" : "") << "\",";
    if (std::isfinite(e.mmr)) os << e.mmr;
    os << ',' << e.iterations << ',' << e.status << '\n';
  }
  os.precision(old);
}

}  // namespace nomapair
