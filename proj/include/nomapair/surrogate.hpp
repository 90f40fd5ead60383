#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nomapair/metrics.hpp"
#include "nomapair/scenario.hpp"

namespace nomapair {

/// Keeps expansion points strictly inside the domain where the bounds are
/// defined (alpha away from 0 and 1, tau and beta away from 0).
struct Clamps {
  double eps_alpha = 1e-3;
  double tau_min = 1e-12;
  double beta_min = 1e-6;
  double beta_max = 1e9;
};

/// Expansion point (w^k, alpha^k, beta^k, tau^k) of the inner approximation.
struct IteratePoint {
  BeamformerSet w;
  PairingMatrix alpha;  // relaxed
  double beta = 1.0;
  Eigen::MatrixXd tau;  // M x N
  int iteration = 0;
};

/// Throws std::domain_error if the point violates the clamp box. alpha and
/// tau are only checked when `check_pairing` is set (the fixed-pairing
/// subproblem does not use them).
inline void check_point(const IteratePoint& p, const Clamps& c, bool check_pairing = true) {
  if (!(p.beta >= c.beta_min && p.beta <= c.beta_max)) {
    throw std::domain_error("expansion beta " + std::to_string(p.beta) + " outside [beta_min, beta_max]");
  }
  if (!check_pairing) return;
  constexpr double slack = 1e-12;
  for (Eigen::Index k = 0; k < p.alpha.alpha.size(); ++k) {
    const double a = p.alpha.alpha.data()[k];
    if (!(a >= c.eps_alpha - slack && a <= 1.0 - c.eps_alpha + slack)) {
      throw std::domain_error("expansion alpha " + std::to_string(a) + " outside [eps, 1-eps]");
    }
  }
  for (Eigen::Index k = 0; k < p.tau.size(); ++k) {
    if (!(p.tau.data()[k] >= c.tau_min)) throw std::domain_error("expansion tau below tau_min");
  }
}

/// First-order lower bound of 1/beta around beta_k; tight at beta = beta_k.
inline double eta_lin(double beta, double beta_k) {
  if (!(beta_k > 0.0)) throw std::domain_error("eta_lin: expansion beta must be positive");
  return 2.0 / beta_k - beta / (beta_k * beta_k);
}

inline double eta_lin(double beta, const IteratePoint& p) { return eta_lin(beta, p.beta); }

/// Affine minorant of |h^H w|^2 around w_k:
/// 2 Re{(h^H w_k)^* (h^H w)} - |h^H w_k|^2.
inline double linearized_gain(const CVector& h, const CVector& w_k, const CVector& w) {
  const std::complex<double> ck = h.dot(w_k);
  const std::complex<double> c = h.dot(w);
  return 2.0 * (std::conj(ck) * c).real() - std::norm(ck);
}

inline double f1(int m, const BeamformerSet& w, const IteratePoint& p, const Scenario& s) {
  detail::check_near(s, m);
  return linearized_gain(s.h_near(m), p.w.near(s, m), w.near(s, m));
}

inline double f2(int n, const BeamformerSet& w, const IteratePoint& p, const Scenario& s) {
  detail::check_far(s, n);
  return linearized_gain(s.h_far(n), p.w.far(s, n), w.far(s, n));
}

/// Affine minorant of |h_{1,m}^H w_{2,n}|^2 / alpha around (w_k, alpha_k),
/// jointly in (w, alpha).
inline double f_tilde(int m, int n, const BeamformerSet& w, double alpha, const IteratePoint& p,
                      const Scenario& s, const Clamps& c = {}) {
  detail::check_near(s, m);
  detail::check_far(s, n);
  const double ak = p.alpha(m, n);
  if (!(ak >= c.eps_alpha - 1e-12 && ak <= 1.0 - c.eps_alpha + 1e-12)) {
    throw std::domain_error("f_tilde: expansion alpha outside [eps, 1-eps]");
  }
  const CVector& h = s.h_near(m);
  const std::complex<double> ck = h.dot(p.w.far(s, n));
  const std::complex<double> cw = h.dot(w.far(s, n));
  return 2.0 * (std::conj(ck) * cw).real() / ak - std::norm(ck) / (ak * ak) * alpha;
}

/// Xi_m with the cross-interference powers replaced by the slack tau:
/// sum_{m' != m} |h_{1,m}^H w_{1,m'}|^2 + sum_n (1 - alpha_{m,n}) tau_{m,n} + sigma^2.
inline double xi_tau(int m, const BeamformerSet& w, const PairingMatrix& alpha, const Eigen::MatrixXd& tau,
                     const Scenario& s) {
  detail::check_near(s, m);
  const CVector& h = s.h_near(m);
  double acc = s.noise_near(m);
  for (int mp = 0; mp < s.M(); ++mp) {
    if (mp != m) acc += gain(h, w.near(s, mp));
  }
  for (int n = 0; n < s.N(); ++n) acc += (1.0 - alpha(m, n)) * tau(m, n);
  return acc;
}

/// Convex majorant of xi_tau: each bilinear (1 - alpha) tau term is replaced
/// by its arithmetic-geometric-mean bound around (alpha_k, tau_k).
inline double hat_xi(int m, const BeamformerSet& w, const PairingMatrix& alpha, const Eigen::MatrixXd& tau,
                     const IteratePoint& p, const Scenario& s, const Clamps& c = {}) {
  detail::check_near(s, m);
  const CVector& h = s.h_near(m);
  double acc = s.noise_near(m);
  for (int mp = 0; mp < s.M(); ++mp) {
    if (mp != m) acc += gain(h, w.near(s, mp));
  }
  for (int n = 0; n < s.N(); ++n) {
    const double ak = p.alpha(m, n);
    const double tk = p.tau(m, n);
    if (!(tk >= c.tau_min) || !(ak <= 1.0 - c.eps_alpha + 1e-12)) {
      throw std::domain_error("hat_xi: expansion point outside clamps");
    }
    const double one_minus = 1.0 - alpha(m, n);
    acc += 0.5 * (1.0 - ak) / tk * tau(m, n) * tau(m, n) + 0.5 * tk / (1.0 - ak) * one_minus * one_minus;
  }
  return acc;
}

}  // namespace nomapair
