#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nomapair/conic/solver.hpp"
#include "nomapair/conic/subproblem.hpp"
#include "nomapair/metrics.hpp"
#include "nomapair/scenario.hpp"
#include "nomapair/surrogate.hpp"

namespace nomapair {

struct AlgoOptions {
  double tol = 1e-3;
  int max_iter = 100;
  Clamps clamps;
  /// Initial relaxed pairing value; 0 picks 1/(2 max(M,N)) clipped to the box.
  double init_alpha = 0.0;
  /// Margin of the initial beta above the tightest feasible value.
  double beta_margin = 1e-3;
  conic::SolverOptions solver;
  /// Overrides the embedded interior-point solver when set.
  std::shared_ptr<const conic::ConeSolver> backend;
};

enum class Phase { relaxed = 1, fixed = 2 };

struct IterationRecord {
  Phase phase = Phase::relaxed;
  int kappa = 0;
  double eta = 0.0;       // subproblem optimum
  double beta = 0.0;      // beta returned by the solver, model units
  double min_sinr = 0.0;  // min SINR of the returned (w, alpha), computed directly
  conic::SolveStatus status = conic::SolveStatus::optimal;
  int solver_iterations = 0;
  double wall_ms = 0.0;
};

struct Trace {
  std::vector<IterationRecord> records;

  int iterations(Phase p) const {
    return static_cast<int>(std::count_if(records.begin(), records.end(),
                                          [p](const IterationRecord& r) { return r.phase == p; }));
  }
  std::vector<double> etas(Phase p) const {
    std::vector<double> v;
    for (const auto& r : records) {
      if (r.phase == p) v.push_back(r.eta);
    }
    return v;
  }
};

/// A subproblem could not be solved; carries the trace up to the failure.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Trace t) : std::runtime_error(what), trace_(std::move(t)) {}
  const Trace& trace() const { return trace_; }

 private:
  Trace trace_;
};

namespace detail {

inline double ratio(double interference, double signal) {
  if (!(signal > 0.0)) return std::numeric_limits<double>::infinity();
  return interference / signal;
}

inline double default_init_alpha(const Scenario& s, const AlgoOptions& o) {
  const double a = o.init_alpha > 0.0 ? o.init_alpha : 0.5 / std::max(s.M(), s.N());
  return std::clamp(a, o.clamps.eps_alpha, 1.0 - o.clamps.eps_alpha);
}

inline const conic::ConeSolver& solver_for(const AlgoOptions& o, std::unique_ptr<conic::ConeSolver>& holder) {
  if (o.backend) return *o.backend;
  holder = std::make_unique<conic::InteriorPointSolver>(o.solver);
  return *holder;
}

}  // namespace detail

/// Smallest beta with 1/beta <= every relaxed SINR, using the slack tau in
/// place of the near-user cross interference.
inline double tightest_beta(const Scenario& s, const BeamformerSet& w, const PairingMatrix& alpha,
                            const Eigen::MatrixXd& tau) {
  double b = 0.0;
  for (int m = 0; m < s.M(); ++m) {
    b = std::max(b, detail::ratio(xi_tau(m, w, alpha, tau, s), gain(s.h_near(m), w.near(s, m))));
  }
  for (int n = 0; n < s.N(); ++n) {
    b = std::max(b, detail::ratio(phi(n, w, s), gain(s.h_far(n), w.far(s, n))));
    for (int m = 0; m < s.M(); ++m) {
      const double a = alpha(m, n);
      if (a > 0.0) b = std::max(b, detail::ratio(a * psi(m, n, w, s), gain(s.h_near(m), w.far(s, n))));
    }
  }
  return b;
}

/// Smallest beta with 1/beta <= every SINR under the exact model.
inline double tightest_beta(const Scenario& s, const BeamformerSet& w, const PairingMatrix& alpha) {
  const double g = min_sinr(w, alpha, s);
  return g > 0.0 ? 1.0 / g : std::numeric_limits<double>::infinity();
}

/// Matched-filter start with equal power split, constant relaxed pairing.
inline IteratePoint initialize(const Scenario& s, const AlgoOptions& o = {}) {
  if (!s.normalized) throw std::invalid_argument("initialize: scenario must be normalized");
  IteratePoint p;
  p.w = BeamformerSet::zeros(s);
  const double amp = std::sqrt(s.pmax_w / s.num_users());
  for (int u = 0; u < s.num_users(); ++u) {
    const CVector& h = s.channels[static_cast<std::size_t>(u)];
    const double nrm = h.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("initialize: zero channel for user " + std::to_string(u));
    p.w.w[static_cast<std::size_t>(u)] = amp * h / nrm;
  }
  p.alpha = PairingMatrix::constant(s.M(), s.N(), detail::default_init_alpha(s, o));
  p.tau.resize(s.M(), s.N());
  for (int m = 0; m < s.M(); ++m) {
    for (int n = 0; n < s.N(); ++n) {
      p.tau(m, n) = std::max(gain(s.h_near(m), p.w.far(s, n)), o.clamps.tau_min);
    }
  }
  const double b = tightest_beta(s, p.w, p.alpha, p.tau);
  if (!std::isfinite(b)) throw std::runtime_error("initialize: initial point has a zero useful signal");
  p.beta = std::clamp((1.0 + o.beta_margin) * b, o.clamps.beta_min, o.clamps.beta_max);
  p.iteration = 0;
  return p;
}

/// Scales w onto the power budget when it exceeds it.
inline void project_power(const Scenario& s, BeamformerSet& w) {
  const double p = w.total_power();
  if (p > s.pmax_w) {
    const double k = std::sqrt(s.pmax_w / p);
    for (auto& v : w.w) v *= k;
  }
}

namespace detail {

// |eta - eta_prev| < tol, measured relative to eta when eta < 1. The
// linearized objective can at most double per iteration, so a purely
// absolute test would stop at once from a start with min-SINR below tol.
inline bool converged(double eta, double eta_prev, double tol) {
  return std::abs(eta - eta_prev) < tol * std::min(1.0, std::abs(eta));
}

// Runs inner-approximation iterations from `point` until the objective
// change falls below tol. Records every subproblem into `trace`.
inline IteratePoint iterate(const Scenario& s, IteratePoint point, const std::optional<PairingMatrix>& fixed,
                            const AlgoOptions& o, Phase phase, Trace& trace) {
  std::unique_ptr<conic::ConeSolver> holder;
  const conic::ConeSolver& solver = solver_for(o, holder);
  double eta_prev = 1.0 / point.beta;
  for (int k = 1; k <= o.max_iter; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const conic::Subproblem sub = conic::build_subproblem(s, point, fixed, o.clamps);
    const conic::Solution sol = solver.solve(sub.program);
    IterationRecord rec;
    rec.phase = phase;
    rec.kappa = k;
    rec.status = sol.status;
    rec.solver_iterations = sol.iterations;
    if (!sol.optimal()) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      trace.records.push_back(rec);
      throw SolverError("subproblem " + std::to_string(k) + " of phase " + std::to_string(static_cast<int>(phase)) +
                            " ended with status " + conic::to_string(sol.status) + ": " + sol.message,
                        trace);
    }
    const IteratePoint raw = conic::read_point(sub, sol.primal, point);
    IteratePoint next = conic::extract_iterate(sol, sub, point, o.clamps);
    const PairingMatrix& a_eval = fixed ? *fixed : raw.alpha;
    rec.eta = sol.objective_value;
    rec.beta = raw.beta;
    rec.min_sinr = min_sinr(raw.w, a_eval, s);

    // Keep the next expansion point inside the feasible set even if the
    // solver returned it with tiny residuals.
    project_power(s, next.w);
    if (!fixed) {
      for (int m = 0; m < s.M(); ++m) {
        for (int n = 0; n < s.N(); ++n) {
          next.tau(m, n) = std::max(next.tau(m, n), gain(s.h_near(m), next.w.far(s, n)));
        }
      }
      next.beta = std::max(next.beta, tightest_beta(s, next.w, next.alpha, next.tau));
    } else {
      next.beta = std::max(next.beta, tightest_beta(s, next.w, *fixed));
    }
    next.beta = std::clamp(next.beta, o.clamps.beta_min, o.clamps.beta_max);
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    trace.records.push_back(rec);

    point = std::move(next);
    if (converged(rec.eta, eta_prev, o.tol)) break;
    eta_prev = rec.eta;
  }
  return point;
}

}  // namespace detail

/// Relaxed-pairing phase from a feasible initial point.
inline IteratePoint phase1(const Scenario& s, const IteratePoint& init, const AlgoOptions& o, Trace& trace) {
  return detail::iterate(s, init, std::nullopt, o, Phase::relaxed, trace);
}

/// Rounds each entry to the nearest integer, then drops conflicting ones:
/// candidates are kept greedily in descending relaxed value (ties broken by
/// (m, n)) when their row and column are still free.
inline PairingMatrix round_and_repair(const PairingMatrix& relaxed) {
  const int M = relaxed.M(), N = relaxed.N();
  std::vector<std::tuple<double, int, int>> cand;
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      if (std::floor(relaxed(m, n) + 0.5) >= 1.0) cand.emplace_back(relaxed(m, n), m, n);
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  PairingMatrix out = PairingMatrix::zeros(M, N);
  std::vector<bool> row(static_cast<std::size_t>(M)), col(static_cast<std::size_t>(N));
  for (const auto& [v, m, n] : cand) {
    if (row[static_cast<std::size_t>(m)] || col[static_cast<std::size_t>(n)]) continue;
    row[static_cast<std::size_t>(m)] = col[static_cast<std::size_t>(n)] = true;
    out(m, n) = 1.0;
  }
  return out;
}

/// Starting point for a fixed binary pairing: warm beamformers when they
/// give a finite, in-range beta, else the matched-filter start.
inline IteratePoint fixed_start(const Scenario& s, const PairingMatrix& pairing, const BeamformerSet* warm,
                                const AlgoOptions& o) {
  auto attempt = [&](BeamformerSet w) -> std::optional<IteratePoint> {
    if (static_cast<int>(w.w.size()) != s.num_users()) return std::nullopt;
    if (w.total_power() > s.pmax_w * (1.0 + kDefaultPowerTolerance)) return std::nullopt;
    project_power(s, w);
    const double b = (1.0 + o.beta_margin) * tightest_beta(s, w, pairing);
    if (!std::isfinite(b) || b > o.clamps.beta_max) return std::nullopt;
    IteratePoint p;
    p.w = w;
    p.alpha = pairing;
    p.tau = Eigen::MatrixXd::Zero(s.M(), s.N());
    p.beta = std::max(b, o.clamps.beta_min);
    return p;
  };
  if (warm) {
    if (auto p = attempt(*warm)) return *p;
  }
  if (auto p = attempt(initialize(s, o).w)) return *p;
  throw std::runtime_error("fixed_start: no feasible starting point for the pairing");
}

/// Beamforming refinement with the pairing held fixed.
inline IteratePoint phase2(const Scenario& s, const PairingMatrix& pairing, const BeamformerSet* warm,
                           const AlgoOptions& o, Trace& trace) {
  return detail::iterate(s, fixed_start(s, pairing, warm, o), pairing, o, Phase::fixed, trace);
}

struct RunResult {
  BeamformerSet w;
  PairingMatrix pairing;  // binary
  PairingMatrix relaxed;  // phase-1 output
  RateReport report;
  Trace trace;
  IteratePoint phase1_point;
};

/// Full two-phase procedure. A non-normalized scenario is normalized first;
/// rates do not depend on the normalization.
inline RunResult run(const Scenario& scenario, const AlgoOptions& o = {}) {
  const Scenario s = scenario.normalized ? scenario : normalize(scenario);
  RunResult r;
  const IteratePoint p1 = phase1(s, initialize(s, o), o, r.trace);
  r.phase1_point = p1;
  r.relaxed = p1.alpha;
  r.pairing = round_and_repair(p1.alpha);
  const IteratePoint p2 = phase2(s, r.pairing, &p1.w, o, r.trace);
  r.w = p2.w;
  r.report = rate_report(r.w, r.pairing, s);
  return r;
}

}  // namespace nomapair
