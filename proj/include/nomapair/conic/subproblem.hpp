#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nomapair/conic/program.hpp"
#include "nomapair/conic/solver.hpp"
#include "nomapair/metrics.hpp"
#include "nomapair/scenario.hpp"
#include "nomapair/surrogate.hpp"

namespace nomapair::conic {

/// Counts of the pairing/beamforming subproblem: x modelled constraints and
/// y decision symbols (complex beamformer entries counted once).
struct SubproblemDims {
  long constraints = 0;
  long variables = 0;
};

inline SubproblemDims relaxed_dims(long M, long N, long L) {
  return {2 * (M + N) + 3 * M * N + 1, L * (M + N) + 2 * M * N + 1};
}

/// Coordinates of the decision symbols inside a built program.
struct SubproblemLayout {
  std::vector<std::vector<int>> w_re;  // [user][antenna]
  std::vector<std::vector<int>> w_im;
  Eigen::MatrixXi alpha;  // -1 when alpha is fixed
  Eigen::MatrixXi tau;    // -1 when absent
  int beta = -1;
  double w_scale = 1.0;
  Eigen::MatrixXd alpha_offset;  // alpha = alpha_offset + alpha_scale * x_alpha
  Eigen::MatrixXd alpha_scale;
  Eigen::MatrixXd tau_scale;
  double beta_scale = 1.0;
  bool fixed_alpha = false;
};

struct Subproblem {
  ConeProgram program;
  SubproblemLayout layout;
  /// The pairing used for a fixed-pairing build.
  std::optional<PairingMatrix> fixed;
};

namespace detail {

inline std::string user_tag(const Scenario& s, int u) {
  return u < s.M() ? "1," + std::to_string(u + 1) : "2," + std::to_string(u - s.M() + 1);
}

// Re and Im of h^H w_u as affine expressions in the scaled coordinates.
inline std::pair<AffineExpr, AffineExpr> inner(const CVector& h, const SubproblemLayout& lay, int u) {
  AffineExpr re, im;
  const auto uu = static_cast<std::size_t>(u);
  for (Eigen::Index l = 0; l < h.size(); ++l) {
    const double p = h(l).real();
    const double q = h(l).imag();
    const int xr = lay.w_re[uu][static_cast<std::size_t>(l)];
    const int xi = lay.w_im[uu][static_cast<std::size_t>(l)];
    // conj(h) w = (p - iq)(a + ib) = (pa + qb) + i(pb - qa)
    re.add(xr, lay.w_scale * p).add(xi, lay.w_scale * q);
    im.add(xi, lay.w_scale * p).add(xr, -lay.w_scale * q);
  }
  return {std::move(re), std::move(im)};
}

// 2 Re{c_k^* (h^H w_u)} / divisor as an affine expression (no constant).
inline AffineExpr linear_part(const CVector& h, const CVector& w_k, const SubproblemLayout& lay, int u,
                              double divisor = 1.0) {
  const std::complex<double> ck = h.dot(w_k);
  auto [re, im] = inner(h, lay, u);
  return (2.0 * ck.real() / divisor) * re + (2.0 * ck.imag() / divisor) * im;
}

// Adds s t >= ||u||^2 with s, t divided by their expansion-point values.
inline void add_scaled_rsoc(ConeProgram& p, AffineExpr s, AffineExpr t, std::vector<AffineExpr> u, double s0,
                            double t0, Family f, std::string label) {
  const double inv = 1.0 / std::sqrt(s0 * t0);
  for (auto& e : u) e *= inv;
  p.add_rsoc((1.0 / s0) * std::move(s), (1.0 / t0) * std::move(t), std::move(u), f, std::move(label), s0 * t0);
}

}  // namespace detail

/// Builds the convex inner approximation around `point`. With
/// `fixed_alpha` the pairing is a constant binary matching: the slack tau
/// disappears, near-user interference enters exactly, and the SIC rows are
/// generated only for paired users.
///
/// Variables are scaled so that the point maps to O(1) coordinates:
/// w = sqrt(pmax) * x_w, alpha = alpha_k + min(alpha_k, 1 - alpha_k) * x_alpha,
/// tau = tau_scale * x_tau, beta = beta_k * x_beta.
/// Cone rows are divided by their expansion-point values.
inline Subproblem build_subproblem(const Scenario& s, const IteratePoint& point,
                                   const std::optional<PairingMatrix>& fixed_alpha = std::nullopt,
                                   const Clamps& clamps = {}) {
  const int M = s.M(), N = s.N(), L = s.L(), U = s.num_users();
  const bool fixed = fixed_alpha.has_value();
  check_point(point, clamps, !fixed);
  if (static_cast<int>(point.w.w.size()) != U) throw std::invalid_argument("build_subproblem: beamformer count");
  if (fixed) {
    const auto rep = check_feasibility(BeamformerSet::zeros(s), *fixed_alpha, s, 0.0, true);
    if (!rep.feasible()) throw std::invalid_argument("build_subproblem: fixed pairing is not a binary matching");
  } else if (point.alpha.M() != M || point.alpha.N() != N || point.tau.rows() != M || point.tau.cols() != N) {
    throw std::invalid_argument("build_subproblem: pairing/tau shape");
  }

  Subproblem sub;
  if (fixed) sub.fixed = fixed_alpha;
  ConeProgram& p = sub.program;
  SubproblemLayout& lay = sub.layout;
  lay.fixed_alpha = fixed;
  lay.w_scale = std::sqrt(s.pmax_w);
  lay.beta_scale = point.beta;

  lay.w_re.assign(static_cast<std::size_t>(U), std::vector<int>(static_cast<std::size_t>(L)));
  lay.w_im = lay.w_re;
  for (int u = 0; u < U; ++u) {
    for (int l = 0; l < L; ++l) {
      const std::string base = "w[" + detail::user_tag(s, u) + "][" + std::to_string(l + 1) + "]";
      lay.w_re[static_cast<std::size_t>(u)][static_cast<std::size_t>(l)] =
          p.add_variable({base + ".re", SymbolKind::w_re, u, l, -1, -1, lay.w_scale});
      lay.w_im[static_cast<std::size_t>(u)][static_cast<std::size_t>(l)] =
          p.add_variable({base + ".im", SymbolKind::w_im, u, l, -1, -1, lay.w_scale});
    }
  }
  lay.alpha = Eigen::MatrixXi::Constant(M, N, -1);
  lay.tau = Eigen::MatrixXi::Constant(M, N, -1);
  lay.alpha_offset = Eigen::MatrixXd::Zero(M, N);
  lay.alpha_scale = Eigen::MatrixXd::Ones(M, N);
  lay.tau_scale = Eigen::MatrixXd::Ones(M, N);
  if (!fixed) {
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) {
        const std::string tag = "[" + std::to_string(m + 1) + "," + std::to_string(n + 1) + "]";
        const double ak = point.alpha(m, n);
        lay.alpha_offset(m, n) = ak;
        lay.alpha_scale(m, n) = std::min(ak, 1.0 - ak);
        lay.alpha(m, n) =
            p.add_variable({"alpha" + tag, SymbolKind::alpha, -1, -1, m, n, lay.alpha_scale(m, n), ak});
      }
    }
    for (int m = 0; m < M; ++m) {
      const double floor_scale = 1e-9 * s.h_near(m).squaredNorm() * s.pmax_w;
      for (int n = 0; n < N; ++n) {
        const std::string tag = "[" + std::to_string(m + 1) + "," + std::to_string(n + 1) + "]";
        lay.tau_scale(m, n) = std::max({point.tau(m, n), floor_scale, clamps.tau_min});
        lay.tau(m, n) = p.add_variable({"tau" + tag, SymbolKind::tau, -1, -1, m, n, lay.tau_scale(m, n)});
      }
    }
  }
  lay.beta = p.add_variable({"beta", SymbolKind::beta, -1, -1, -1, -1, lay.beta_scale});

  // Objective: 2/beta_k - beta/beta_k^2 with beta = beta_k * x_beta.
  p.objective = AffineExpr(2.0 / point.beta).add(lay.beta, -1.0 / point.beta);
  const AffineExpr beta_expr = AffineExpr::variable(lay.beta, lay.beta_scale);

  auto alpha_expr = [&](int m, int n) {
    return AffineExpr(lay.alpha_offset(m, n)).add(lay.alpha(m, n), lay.alpha_scale(m, n));
  };
  auto tau_expr = [&](int m, int n) { return AffineExpr::variable(lay.tau(m, n), lay.tau_scale(m, n)); };
  auto push_inner = [&](std::vector<AffineExpr>& u, const CVector& h, int user) {
    auto [re, im] = detail::inner(h, lay, user);
    u.push_back(std::move(re));
    u.push_back(std::move(im));
  };

  // Power budget.
  {
    std::vector<AffineExpr> u;
    for (int uu = 0; uu < U; ++uu) {
      for (int l = 0; l < L; ++l) {
        u.push_back(AffineExpr::variable(lay.w_re[static_cast<std::size_t>(uu)][static_cast<std::size_t>(l)]));
        u.push_back(AffineExpr::variable(lay.w_im[static_cast<std::size_t>(uu)][static_cast<std::size_t>(l)]));
      }
    }
    p.add_soc(AffineExpr(1.0), std::move(u), Family::power, "power");
  }

  if (!fixed) {
    for (int m = 0; m < M; ++m) {
      AffineExpr row;
      for (int n = 0; n < N; ++n) row += alpha_expr(m, n);
      p.add_linear(std::move(row), -kInf, 1.0, Family::row_sum, "row " + std::to_string(m + 1));
    }
    for (int n = 0; n < N; ++n) {
      AffineExpr col;
      for (int m = 0; m < M; ++m) col += alpha_expr(m, n);
      p.add_linear(std::move(col), -kInf, 1.0, Family::column_sum, "column " + std::to_string(n + 1));
    }
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) {
        const double a0 = lay.alpha_offset(m, n), as = lay.alpha_scale(m, n);
        p.add_linear(AffineExpr::variable(lay.alpha(m, n)), (clamps.eps_alpha - a0) / as,
                     (1.0 - clamps.eps_alpha - a0) / as,
                     Family::alpha_box,
                     "alpha " + std::to_string(m + 1) + "," + std::to_string(n + 1));
      }
    }
    // |h_{1,m}^H w_{2,n}|^2 <= tau_{m,n}
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) {
        std::vector<AffineExpr> u;
        push_inner(u, s.h_near(m), s.far_user(n));
        detail::add_scaled_rsoc(p, tau_expr(m, n), AffineExpr(1.0), std::move(u), lay.tau_scale(m, n), 1.0,
                                Family::tau_bound, "tau " + std::to_string(m + 1) + "," + std::to_string(n + 1));
      }
    }
  }

  // Near users: Xi-hat (or exact Xi when alpha is fixed) <= f1 * beta.
  for (int m = 0; m < M; ++m) {
    const CVector& h = s.h_near(m);
    const CVector& wk = point.w.near(s, m);
    const double ck2 = gain(h, wk);
    AffineExpr f1 = detail::linear_part(h, wk, lay, s.near_user(m));
    f1.constant = -ck2;
    std::vector<AffineExpr> u;
    for (int mp = 0; mp < M; ++mp) {
      if (mp != m) push_inner(u, h, s.near_user(mp));
    }
    u.emplace_back(std::sqrt(s.noise_near(m)));
    for (int n = 0; n < N; ++n) {
      if (fixed) {
        if ((*fixed_alpha)(m, n) == 0.0) push_inner(u, h, s.far_user(n));
      } else {
        const double ak = point.alpha(m, n);
        const double tk = point.tau(m, n);
        const double a = (1.0 - ak) / tk;
        const double b = tk / (1.0 - ak);
        u.push_back(std::sqrt(0.5 * a) * tau_expr(m, n));
        u.push_back(std::sqrt(0.5 * b) * (AffineExpr(1.0) - alpha_expr(m, n)));
      }
    }
    p.add_linear((1.0 / ck2) * f1, 0.0, kInf, Family::auxiliary, "f1 >= 0, m=" + std::to_string(m + 1));
    detail::add_scaled_rsoc(p, std::move(f1), beta_expr, std::move(u), ck2, point.beta, Family::near_sinr,
                            "near " + std::to_string(m + 1));
  }

  // Far users, own decoding: Phi <= f2 * beta.
  for (int n = 0; n < N; ++n) {
    const CVector& h = s.h_far(n);
    const CVector& wk = point.w.far(s, n);
    const double ck2 = gain(h, wk);
    AffineExpr f2 = detail::linear_part(h, wk, lay, s.far_user(n));
    f2.constant = -ck2;
    std::vector<AffineExpr> u;
    for (int uu = 0; uu < U; ++uu) {
      if (uu != s.far_user(n)) push_inner(u, h, uu);
    }
    u.emplace_back(std::sqrt(s.noise_far(n)));
    p.add_linear((1.0 / ck2) * f2, 0.0, kInf, Family::auxiliary, "f2 >= 0, n=" + std::to_string(n + 1));
    detail::add_scaled_rsoc(p, std::move(f2), beta_expr, std::move(u), ck2, point.beta, Family::far_direct,
                            "far " + std::to_string(n + 1));
  }

  // Far user n decoded at near user m: Psi <= f~ * beta.
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      if (fixed && (*fixed_alpha)(m, n) == 0.0) continue;
      const CVector& h = s.h_near(m);
      const CVector& wk = point.w.far(s, n);
      const double ck2 = gain(h, wk);
      const double ak = fixed ? 1.0 : point.alpha(m, n);
      AffineExpr ft = detail::linear_part(h, wk, lay, s.far_user(n), ak);
      if (fixed) {
        ft.constant = -ck2;
      } else {
        ft += (-ck2 / (ak * ak)) * alpha_expr(m, n);
      }
      const double ft0 = ck2 / ak;
      std::vector<AffineExpr> u;
      for (int uu = 0; uu < U; ++uu) {
        if (uu != s.far_user(n)) push_inner(u, h, uu);
      }
      u.emplace_back(std::sqrt(s.noise_near(m)));
      const std::string tag = std::to_string(m + 1) + "," + std::to_string(n + 1);
      p.add_linear((1.0 / ft0) * ft, 0.0, kInf, Family::auxiliary, "f~ >= 0, " + tag);
      detail::add_scaled_rsoc(p, std::move(ft), beta_expr, std::move(u), ft0, point.beta, Family::far_sic,
                              "sic " + tag);
    }
  }

  p.add_linear(AffineExpr::variable(lay.beta), clamps.beta_min / lay.beta_scale, kInf, Family::auxiliary,
               "beta >= beta_min");
  if (!fixed) {
    for (int m = 0; m < M; ++m) {
      for (int n = 0; n < N; ++n) {
        p.add_linear(AffineExpr::variable(lay.tau(m, n)), clamps.tau_min / lay.tau_scale(m, n), kInf,
                     Family::auxiliary, "tau >= tau_min");
      }
    }
  }
  return sub;
}

/// Scaled primal vector representing the values of `point` (alpha, tau
/// taken from the point; ignored for fixed builds).
inline Eigen::VectorXd inject(const Subproblem& sub, const IteratePoint& point) {
  const auto& lay = sub.layout;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sub.program.num_vars());
  for (std::size_t u = 0; u < lay.w_re.size(); ++u) {
    for (std::size_t l = 0; l < lay.w_re[u].size(); ++l) {
      const auto v = point.w.w[u](static_cast<Eigen::Index>(l));
      x(lay.w_re[u][l]) = v.real() / lay.w_scale;
      x(lay.w_im[u][l]) = v.imag() / lay.w_scale;
    }
  }
  if (!lay.fixed_alpha) {
    for (int m = 0; m < lay.alpha.rows(); ++m) {
      for (int n = 0; n < lay.alpha.cols(); ++n) {
        x(lay.alpha(m, n)) = (point.alpha(m, n) - lay.alpha_offset(m, n)) / lay.alpha_scale(m, n);
        x(lay.tau(m, n)) = point.tau(m, n) / lay.tau_scale(m, n);
      }
    }
  }
  x(lay.beta) = point.beta / lay.beta_scale;
  return x;
}

/// Reads (w, alpha, beta, tau) from a scaled primal vector without clamping.
inline IteratePoint read_point(const Subproblem& sub, const Eigen::VectorXd& x, const IteratePoint& previous) {
  const auto& lay = sub.layout;
  IteratePoint next = previous;
  for (std::size_t u = 0; u < lay.w_re.size(); ++u) {
    CVector w(static_cast<Eigen::Index>(lay.w_re[u].size()));
    for (std::size_t l = 0; l < lay.w_re[u].size(); ++l) {
      w(static_cast<Eigen::Index>(l)) = {lay.w_scale * x(lay.w_re[u][l]), lay.w_scale * x(lay.w_im[u][l])};
    }
    next.w.w[u] = std::move(w);
  }
  if (!lay.fixed_alpha) {
    for (int m = 0; m < lay.alpha.rows(); ++m) {
      for (int n = 0; n < lay.alpha.cols(); ++n) {
        next.alpha(m, n) = lay.alpha_offset(m, n) + lay.alpha_scale(m, n) * x(lay.alpha(m, n));
        next.tau(m, n) = lay.tau_scale(m, n) * x(lay.tau(m, n));
      }
    }
    next.alpha.mode = PairingMatrix::Mode::relaxed;
  } else {
    next.alpha = *sub.fixed;
  }
  next.beta = lay.beta_scale * x(lay.beta);
  return next;
}

/// New expansion point from an optimal solution, clamped into the box.
inline IteratePoint extract_iterate(const Solution& sol, const Subproblem& sub, const IteratePoint& previous,
                                    const Clamps& clamps = {}) {
  if (!sol.optimal()) {
    throw std::runtime_error(std::string("extract_iterate: solver status ") + to_string(sol.status));
  }
  IteratePoint next = read_point(sub, sol.primal, previous);
  if (!sub.layout.fixed_alpha) {
    next.alpha.alpha = next.alpha.alpha.cwiseMax(clamps.eps_alpha).cwiseMin(1.0 - clamps.eps_alpha);
    next.tau = next.tau.cwiseMax(clamps.tau_min);
  }
  next.beta = std::clamp(next.beta, clamps.beta_min, clamps.beta_max);
  next.iteration = previous.iteration + 1;
  return next;
}

}  // namespace nomapair::conic
