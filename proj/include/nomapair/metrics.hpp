#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nomapair/scenario.hpp"

namespace nomapair {

/// Pairing coefficients alpha(m, n) between near user m and far user n.
/// Relaxed matrices hold values in [0,1]; binary ones hold 0/1 only.
struct PairingMatrix {
  enum class Mode { relaxed, binary };

  Eigen::MatrixXd alpha;
  Mode mode = Mode::relaxed;

  PairingMatrix() = default;
  PairingMatrix(Eigen::MatrixXd a, Mode md) : alpha(std::move(a)), mode(md) {}

  static PairingMatrix zeros(int M, int N, Mode md = Mode::binary) {
    return {Eigen::MatrixXd::Zero(M, N), md};
  }
  static PairingMatrix constant(int M, int N, double v) {
    return {Eigen::MatrixXd::Constant(M, N, v), Mode::relaxed};
  }

  int M() const { return static_cast<int>(alpha.rows()); }
  int N() const { return static_cast<int>(alpha.cols()); }
  double operator()(int m, int n) const { return alpha(m, n); }
  double& operator()(int m, int n) { return alpha(m, n); }

  int num_pairs() const {
    int k = 0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) k += alpha.data()[i] > 0.5 ? 1 : 0;
    return k;
  }

  bool operator==(const PairingMatrix& o) const {
    return mode == o.mode && alpha.rows() == o.alpha.rows() && alpha.cols() == o.alpha.cols() &&
           alpha == o.alpha;
  }
};

/// One beamforming vector per user, flat order (1,1)..(1,M),(2,1)..(2,N).
struct BeamformerSet {
  std::vector<CVector> w;

  static BeamformerSet zeros(const Scenario& s) {
    BeamformerSet b;
    b.w.assign(static_cast<std::size_t>(s.num_users()), CVector::Zero(s.L()));
    return b;
  }

  double total_power() const {
    double p = 0.0;
    for (const auto& v : w) p += v.squaredNorm();
    return p;
  }

  const CVector& near(const Scenario& s, int m) const { return w.at(static_cast<std::size_t>(s.near_user(m))); }
  const CVector& far(const Scenario& s, int n) const { return w.at(static_cast<std::size_t>(s.far_user(n))); }
  CVector& near(const Scenario& s, int m) { return w.at(static_cast<std::size_t>(s.near_user(m))); }
  CVector& far(const Scenario& s, int n) { return w.at(static_cast<std::size_t>(s.far_user(n))); }
};

struct RateReport {
  std::vector<double> gamma;  // linear SINR per user
  std::vector<double> rate;   // bps/Hz per user
  double mmr = 0.0;
  double total_power = 0.0;
};

/// |h^H w|^2
inline double gain(const CVector& h, const CVector& w) { return std::norm(h.dot(w)); }

namespace detail {

inline void check_near(const Scenario& s, int m) {
  if (m < 0 || m >= s.M()) throw std::out_of_range("near-user index " + std::to_string(m) + " out of range");
}
inline void check_far(const Scenario& s, int n) {
  if (n < 0 || n >= s.N()) throw std::out_of_range("far-user index " + std::to_string(n) + " out of range");
}
inline void check_shapes(const Scenario& s, const BeamformerSet& w) {
  if (static_cast<int>(w.w.size()) != s.num_users()) {
    throw std::invalid_argument("beamformer count does not match the scenario");
  }
}
inline void check_shapes(const Scenario& s, const PairingMatrix& a) {
  if (a.M() != s.M() || a.N() != s.N()) throw std::invalid_argument("pairing matrix shape does not match M x N");
}

}  // namespace detail

/// Interference-plus-noise at near user m after SIC of its partner(s).
inline double xi(int m, const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  detail::check_near(s, m);
  detail::check_shapes(s, w);
  detail::check_shapes(s, alpha);
  const CVector& h = s.h_near(m);
  double acc = s.noise_near(m);
  for (int mp = 0; mp < s.M(); ++mp) {
    if (mp != m) acc += gain(h, w.near(s, mp));
  }
  for (int n = 0; n < s.N(); ++n) acc += (1.0 - alpha(m, n)) * gain(h, w.far(s, n));
  return acc;
}

/// Interference-plus-noise at far user n when decoding its own message.
inline double phi(int n, const BeamformerSet& w, const Scenario& s) {
  detail::check_far(s, n);
  detail::check_shapes(s, w);
  const CVector& h = s.h_far(n);
  const int self = s.far_user(n);
  double acc = s.noise_far(n);
  for (int u = 0; u < s.num_users(); ++u) {
    if (u != self) acc += gain(h, w.w[static_cast<std::size_t>(u)]);
  }
  return acc;
}

/// Interference-plus-noise at near user m when decoding far user n's message.
/// Includes near user m's own stream.
inline double psi(int m, int n, const BeamformerSet& w, const Scenario& s) {
  detail::check_near(s, m);
  detail::check_far(s, n);
  detail::check_shapes(s, w);
  const CVector& h = s.h_near(m);
  const int skip = s.far_user(n);
  double acc = s.noise_near(m);
  for (int u = 0; u < s.num_users(); ++u) {
    if (u != skip) acc += gain(h, w.w[static_cast<std::size_t>(u)]);
  }
  return acc;
}

inline double sinr_near(int m, const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  return gain(s.h_near(m), w.near(s, m)) / xi(m, w, alpha, s);
}

/// SINR of far user n's own decoding at user n.
inline double sinr_far_direct(int n, const BeamformerSet& w, const Scenario& s) {
  return gain(s.h_far(n), w.far(s, n)) / phi(n, w, s);
}

/// SINR of far user n's message at near user m, divided by alpha(m,n).
/// A zero coefficient means no SIC is required and yields +inf.
inline double sinr_far_at_near(int m, int n, const BeamformerSet& w, const PairingMatrix& alpha,
                               const Scenario& s) {
  const double a = alpha(m, n);
  if (a <= 0.0) return std::numeric_limits<double>::infinity();
  return gain(s.h_near(m), w.far(s, n)) / (a * psi(m, n, w, s));
}

inline double sinr_far(int n, const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  double g = sinr_far_direct(n, w, s);
  for (int m = 0; m < s.M(); ++m) g = std::min(g, sinr_far_at_near(m, n, w, alpha, s));
  return g;
}

/// SINR of user (zone, j) with j zero-based within its zone.
inline double sinr(Zone zone, int j, const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  return zone == Zone::near ? sinr_near(j, w, alpha, s) : sinr_far(j, w, alpha, s);
}

inline std::vector<double> all_sinr(const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(s.num_users()));
  for (int m = 0; m < s.M(); ++m) g.push_back(sinr_near(m, w, alpha, s));
  for (int n = 0; n < s.N(); ++n) g.push_back(sinr_far(n, w, alpha, s));
  return g;
}

inline double min_sinr(const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  const auto g = all_sinr(w, alpha, s);
  return *std::min_element(g.begin(), g.end());
}

inline RateReport rate_report(const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  RateReport r;
  r.gamma = all_sinr(w, alpha, s);
  r.rate.reserve(r.gamma.size());
  for (double g : r.gamma) r.rate.push_back(std::log2(1.0 + g));
  r.mmr = *std::min_element(r.rate.begin(), r.rate.end());
  r.total_power = w.total_power();
  return r;
}

inline double min_rate(const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s) {
  return rate_report(w, alpha, s).mmr;
}

// ---------------------------------------------------------------------------

struct Violation {
  enum class Kind { power, entry_range, not_binary, row_sum, column_sum, shape };
  Kind kind;
  int index = -1;         // row / column / flat entry, when applicable
  double magnitude = 0.0;  // amount by which the limit is exceeded
  std::string message;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

inline constexpr double kDefaultPowerTolerance = 1e-6;

/// Checks the power budget and the matching constraints on alpha. Never throws.
inline FeasibilityReport check_feasibility(const BeamformerSet& w, const PairingMatrix& alpha, const Scenario& s,
                                           double tol = kDefaultPowerTolerance, bool require_binary = false) {
  FeasibilityReport rep;
  auto add = [&](Violation::Kind k, int idx, double mag, std::string msg) {
    rep.violations.push_back({k, idx, mag, std::move(msg)});
  };
  if (static_cast<int>(w.w.size()) != s.num_users() || alpha.M() != s.M() || alpha.N() != s.N()) {
    add(Violation::Kind::shape, -1, 0.0, "beamformer or pairing shape does not match the scenario");
    return rep;
  }
  const double p = w.total_power();
  if (p > s.pmax_w * (1.0 + tol)) {
    std::ostringstream os;
    os << "total power " << p << " exceeds budget " << s.pmax_w << " by " << (p - s.pmax_w);
    add(Violation::Kind::power, -1, p - s.pmax_w, os.str());
  }
  const bool binary = require_binary || alpha.mode == PairingMatrix::Mode::binary;
  constexpr double kEntryTol = 1e-9;
  for (int m = 0; m < alpha.M(); ++m) {
    for (int n = 0; n < alpha.N(); ++n) {
      const double a = alpha(m, n);
      const int flat = m * alpha.N() + n;
      if (!(a >= -kEntryTol && a <= 1.0 + kEntryTol)) {
        add(Violation::Kind::entry_range, flat, a < 0 ? -a : a - 1.0,
            "alpha(" + std::to_string(m + 1) + "," + std::to_string(n + 1) + ") outside [0,1]");
      } else if (binary && a != 0.0 && a != 1.0) {
        add(Violation::Kind::not_binary, flat, std::min(a, 1.0 - a),
            "alpha(" + std::to_string(m + 1) + "," + std::to_string(n + 1) + ") is not binary");
      }
    }
  }
  for (int m = 0; m < alpha.M(); ++m) {
    const double r = alpha.alpha.row(m).sum();
    if (r > 1.0 + kEntryTol) {
      add(Violation::Kind::row_sum, m, r - 1.0,
          "row " + std::to_string(m + 1) + " of alpha sums to " + std::to_string(r) + " > 1");
    }
  }
  for (int n = 0; n < alpha.N(); ++n) {
    const double c = alpha.alpha.col(n).sum();
    if (c > 1.0 + kEntryTol) {
      add(Violation::Kind::column_sum, n, c - 1.0,
          "column " + std::to_string(n + 1) + " of alpha sums to " + std::to_string(c) + " > 1");
    }
  }
  return rep;
}

}  // namespace nomapair
