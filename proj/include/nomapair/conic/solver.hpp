#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "nomapair/conic/program.hpp"

namespace nomapair::conic {

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

struct Solution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd primal;  // empty unless optimal
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  std::chrono::duration<double> solve_time{0.0};
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  std::string message;
  /// Optimal only to the reduced tolerances (feastol_inacc, reltol_inacc).
  bool inaccurate = false;

  bool optimal() const { return status == SolveStatus::optimal; }
};

struct SolverOptions {
  double feastol = 1e-8;
  double reltol = 1e-8;
  int max_iter = 100;
  double step_fraction = 0.99;
  int refinement_steps = 3;
  /// Fallback tolerances accepted when the full ones cannot be reached.
  double feastol_inacc = 1e-6;
  double reltol_inacc = 1e-6;
  /// Iterations without improvement before giving up on full accuracy.
  int stall_iterations = 3;
  /// Post-solve check on the original program rows (stored units).
  double max_constraint_violation = 1e-7;
};

/// Anything that solves a ConeProgram under the Solution contract.
class ConeSolver {
 public:
  virtual ~ConeSolver() = default;
  virtual Solution solve(const ConeProgram& p) const = 0;
};

namespace ipm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Standard form:  minimize c'x  s.t.  A x = b,  G x + s = h,  s in K,
/// with K = R_+^lp x SOC(q_1) x ... x SOC(q_k).
struct StandardForm {
  VectorXd c;
  MatrixXd A;
  VectorXd b;
  MatrixXd G;
  VectorXd h;
  int lp = 0;
  std::vector<int> soc;
  double objective_offset = 0.0;  // maximize objective = -(c'x) + offset
};

inline StandardForm to_standard_form(const ConeProgram& p) {
  const int n = p.num_vars();
  std::vector<std::pair<AffineExpr, double>> eq;       // expr == value
  std::vector<std::pair<AffineExpr, double>> lp_rows;  // row . x <= h
  for (const auto& c : p.linear) {
    if (c.is_equality()) {
      eq.emplace_back(c.expr, c.lo);
      continue;
    }
    if (std::isfinite(c.hi)) lp_rows.emplace_back(c.expr, c.hi);
    if (std::isfinite(c.lo)) lp_rows.emplace_back(-1.0 * c.expr, -c.lo);
  }
  // Each cone is a list of affine entries (t, u...) with t >= ||u||.
  std::vector<std::vector<AffineExpr>> cones;
  for (const auto& c : p.soc) {
    std::vector<AffineExpr> rows{c.t};
    rows.insert(rows.end(), c.u.begin(), c.u.end());
    cones.push_back(std::move(rows));
  }
  for (const auto& c : p.rsoc) {
    std::vector<AffineExpr> rows{c.s + c.t, c.s - c.t};
    for (const auto& e : c.u) rows.push_back(2.0 * e);
    cones.push_back(std::move(rows));
  }

  StandardForm f;
  f.c = VectorXd::Zero(n);
  for (const auto& [i, v] : p.objective.terms) f.c(i) -= v;
  f.objective_offset = p.objective.constant;

  f.A = MatrixXd::Zero(static_cast<Eigen::Index>(eq.size()), n);
  f.b = VectorXd::Zero(static_cast<Eigen::Index>(eq.size()));
  for (std::size_t r = 0; r < eq.size(); ++r) {
    for (const auto& [i, v] : eq[r].first.terms) f.A(static_cast<Eigen::Index>(r), i) += v;
    f.b(static_cast<Eigen::Index>(r)) = eq[r].second - eq[r].first.constant;
  }

  f.lp = static_cast<int>(lp_rows.size());
  Eigen::Index m = f.lp;
  for (const auto& c : cones) {
    f.soc.push_back(static_cast<int>(c.size()));
    m += static_cast<Eigen::Index>(c.size());
  }
  f.G = MatrixXd::Zero(m, n);
  f.h = VectorXd::Zero(m);
  Eigen::Index r = 0;
  for (const auto& [e, hi] : lp_rows) {
    for (const auto& [i, v] : e.terms) f.G(r, i) += v;
    f.h(r) = hi - e.constant;
    ++r;
  }
  // Cone entry e(x) = const + a'x must equal s = h - G x, so G = -a, h = const.
  for (const auto& c : cones) {
    for (const auto& e : c) {
      for (const auto& [i, v] : e.terms) f.G(r, i) -= v;
      f.h(r) = e.constant;
      ++r;
    }
  }
  return f;
}

/// Nesterov-Todd scaling for the product cone.
class Scaling {
 public:
  Scaling(int lp, const std::vector<int>& soc) : lp_(lp), soc_(soc) {
    lp_w_ = VectorXd::Ones(lp);
    for (int q : soc) {
      eta_.push_back(1.0);
      wbar_.push_back(VectorXd::Unit(q, 0));
    }
  }

  /// Returns false if s or z has left the interior of the cone.
  bool update(const VectorXd& s, const VectorXd& z) {
    for (int i = 0; i < lp_; ++i) {
      if (!(s(i) > 0.0 && z(i) > 0.0)) return false;
      lp_w_(i) = std::sqrt(s(i) / z(i));
    }
    Eigen::Index k = lp_;
    for (std::size_t c = 0; c < soc_.size(); ++c) {
      const int q = soc_[c];
      const auto sk = s.segment(k, q);
      const auto zk = z.segment(k, q);
      const double sn = sk.tail(q - 1).norm();
      const double zn = zk.tail(q - 1).norm();
      const double sres = (sk(0) - sn) * (sk(0) + sn);
      const double zres = (zk(0) - zn) * (zk(0) + zn);
      if (!(sres > 0.0 && zres > 0.0 && sk(0) > 0.0 && zk(0) > 0.0)) return false;
      const VectorXd sbar = sk / std::sqrt(sres);
      const VectorXd zbar = zk / std::sqrt(zres);
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      VectorXd w(q);
      w(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
      w.tail(q - 1) = (sbar.tail(q - 1) - zbar.tail(q - 1)) / (2.0 * gamma);
      // Renormalize onto the hyperboloid w0^2 - |w1|^2 = 1.
      w(0) = std::sqrt(1.0 + w.tail(q - 1).squaredNorm());
      wbar_[c] = std::move(w);
      eta_[c] = std::pow(sres / zres, 0.25);
      k += q;
    }
    return true;
  }

  /// y = W v (W symmetric).
  VectorXd apply(const VectorXd& v) const { return apply_impl(v, false); }
  /// y = W^{-1} v
  VectorXd apply_inv(const VectorXd& v) const { return apply_impl(v, true); }

  /// Column-wise W^{-1} G.
  MatrixXd apply_inv_cols(const MatrixXd& G) const {
    MatrixXd out(G.rows(), G.cols());
    for (int i = 0; i < lp_; ++i) out.row(i) = G.row(i) / lp_w_(i);
    Eigen::Index k = lp_;
    for (std::size_t c = 0; c < soc_.size(); ++c) {
      const int q = soc_[c];
      const VectorXd& w = wbar_[c];
      const double eta = 1.0 / eta_[c];
      const auto w1 = w.tail(q - 1);
      const auto g0 = G.row(k);
      const auto g1 = G.middleRows(k + 1, q - 1);
      const Eigen::RowVectorXd zeta = w1.transpose() * g1;
      out.row(k) = eta * (w(0) * g0 - zeta);
      out.middleRows(k + 1, q - 1) = eta * (g1 + w1 * (zeta / (1.0 + w(0)) - g0));
      k += q;
    }
    return out;
  }

 private:
  VectorXd apply_impl(const VectorXd& v, bool inverse) const {
    VectorXd y(v.size());
    for (int i = 0; i < lp_; ++i) y(i) = inverse ? v(i) / lp_w_(i) : v(i) * lp_w_(i);
    Eigen::Index k = lp_;
    for (std::size_t c = 0; c < soc_.size(); ++c) {
      const int q = soc_[c];
      const VectorXd& w = wbar_[c];
      const double eta = inverse ? 1.0 / eta_[c] : eta_[c];
      const double v0 = v(k);
      const auto v1 = v.segment(k + 1, q - 1);
      const auto w1 = w.tail(q - 1);
      const double zeta = w1.dot(v1);
      if (!inverse) {
        y(k) = eta * (w(0) * v0 + zeta);
        y.segment(k + 1, q - 1) = eta * (v1 + (v0 + zeta / (1.0 + w(0))) * w1);
      } else {
        y(k) = eta * (w(0) * v0 - zeta);
        y.segment(k + 1, q - 1) = eta * (v1 + (-v0 + zeta / (1.0 + w(0))) * w1);
      }
      k += q;
    }
    return y;
  }

  int lp_;
  std::vector<int> soc_;
  VectorXd lp_w_;
  std::vector<double> eta_;
  std::vector<VectorXd> wbar_;
};

/// Jordan product u o v.
inline VectorXd cone_product(const VectorXd& u, const VectorXd& v, int lp, const std::vector<int>& soc) {
  VectorXd w(u.size());
  w.head(lp) = u.head(lp).cwiseProduct(v.head(lp));
  Eigen::Index k = lp;
  for (int q : soc) {
    w(k) = u.segment(k, q).dot(v.segment(k, q));
    w.segment(k + 1, q - 1) = u(k) * v.segment(k + 1, q - 1) + v(k) * u.segment(k + 1, q - 1);
    k += q;
  }
  return w;
}

/// Solves u o x = w for x.
inline VectorXd cone_division(const VectorXd& u, const VectorXd& w, int lp, const std::vector<int>& soc) {
  VectorXd x(u.size());
  x.head(lp) = w.head(lp).cwiseQuotient(u.head(lp));
  Eigen::Index k = lp;
  for (int q : soc) {
    const double u0 = u(k);
    const double w0 = w(k);
    const auto u1 = u.segment(k + 1, q - 1);
    const auto w1 = w.segment(k + 1, q - 1);
    const double rho = u0 * u0 - u1.squaredNorm();
    const double x0 = (u0 * w0 - u1.dot(w1)) / rho;
    x(k) = x0;
    x.segment(k + 1, q - 1) = (w1 - x0 * u1) / u0;
    k += q;
  }
  return x;
}

/// Identity element of the cone.
inline VectorXd cone_identity(Eigen::Index m, int lp, const std::vector<int>& soc) {
  VectorXd e = VectorXd::Zero(m);
  e.head(lp).setOnes();
  Eigen::Index k = lp;
  for (int q : soc) {
    e(k) = 1.0;
    k += q;
  }
  return e;
}

/// Largest alpha >= 0 with u + alpha d in the cone (u interior), or +inf.
inline double max_step(const VectorXd& u, const VectorXd& d, int lp, const std::vector<int>& soc) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < lp; ++i) {
    if (d(i) < 0.0) alpha = std::min(alpha, -u(i) / d(i));
  }
  Eigen::Index k = lp;
  for (int q : soc) {
    const double u0 = u(k);
    const double d0 = d(k);
    const auto u1 = u.segment(k + 1, q - 1);
    const auto d1 = d.segment(k + 1, q - 1);
    const double a = d0 * d0 - d1.squaredNorm();
    const double b = u0 * d0 - u1.dot(d1);
    const double un = u1.norm();
    const double c = std::max((u0 - un) * (u0 + un), 0.0);
    k += q;
    if (a >= 0.0 && b >= 0.0 && d0 >= 0.0) continue;
    const double disc = std::max(b * b - a * c, 0.0);
    const double denom = std::sqrt(disc) - b;
    double step = denom > 0.0 ? c / denom : 0.0;
    if (d0 < 0.0) step = std::min(step, -u0 / d0);
    alpha = std::min(alpha, step);
  }
  return alpha;
}

/// Shifts r into the interior of the cone along the identity direction.
inline VectorXd bring_to_cone(const VectorXd& r, int lp, const std::vector<int>& soc) {
  double worst = 0.0;
  for (int i = 0; i < lp; ++i) worst = std::max(worst, -r(i));
  Eigen::Index k = lp;
  for (int q : soc) {
    worst = std::max(worst, r.segment(k + 1, q - 1).norm() - r(k));
    k += q;
  }
  VectorXd s = r;
  if (worst >= 0.0) s += (1.0 + worst) * cone_identity(r.size(), lp, soc);
  return s;
}

/// Reduced KKT system
///   [ 0  A'  G'   ] [dx]   [r1]
///   [ A  0   0    ] [dy] = [r2]
///   [ G  0  -W'W  ] [dz]   [r3]
/// solved through the normal equations G'W^-2 G with iterative refinement.
class KktSolver {
 public:
  KktSolver(const StandardForm& f, int refinement) : f_(f), refinement_(refinement) {}

  bool factor(const Scaling& w) {
    w_ = &w;
    const Eigen::Index n = f_.G.cols();
    const MatrixXd V = w.apply_inv_cols(f_.G);
    MatrixXd H = MatrixXd::Zero(n, n);
    H.selfadjointView<Eigen::Lower>().rankUpdate(V.transpose());
    const double diag_max = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    double reg = 1e-13 * diag_max;
    for (int attempt = 0;; ++attempt) {
      MatrixXd Hr = H;
      Hr.diagonal().array() += reg;
      llt_.compute(Hr);
      if (llt_.info() == Eigen::Success) break;
      if (attempt == 5) return false;
      reg *= 100.0;
    }
    if (f_.A.rows() > 0) {
      const MatrixXd HinvAt = llt_.solve(f_.A.transpose());
      schur_.compute(f_.A * HinvAt);
      if (schur_.info() != Eigen::Success) return false;
    }
    return true;
  }

  void solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx, VectorXd& dy,
             VectorXd& dz) const {
    solve_once(r1, r2, r3, dx, dy, dz);
    for (int it = 0; it < refinement_; ++it) {
      const VectorXd e1 = r1 - f_.A.transpose() * dy - f_.G.transpose() * dz;
      const VectorXd e2 = r2 - f_.A * dx;
      const VectorXd e3 = r3 - (f_.G * dx - w_->apply(w_->apply(dz)));
      const double err = std::max({e1.lpNorm<Eigen::Infinity>(), e2.size() ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                   e3.lpNorm<Eigen::Infinity>()});
      const double scale = std::max({1.0, r1.lpNorm<Eigen::Infinity>(), r3.lpNorm<Eigen::Infinity>()});
      if (err <= 1e-15 * scale) break;
      VectorXd cx, cy, cz;
      solve_once(e1, e2, e3, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

 private:
  void solve_once(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx, VectorXd& dy,
                  VectorXd& dz) const {
    // dz = W^-2 (G dx - r3);  H dx + A'dy = r1 + G' W^-2 r3;  A dx = r2.
    const VectorXd winv2_r3 = w_->apply_inv(w_->apply_inv(r3));
    const VectorXd q = r1 + f_.G.transpose() * winv2_r3;
    if (f_.A.rows() > 0) {
      const VectorXd Hq = hsolve(q);
      dy = schur_.solve(f_.A * Hq - r2);
      dx = hsolve(q - f_.A.transpose() * dy);
    } else {
      dy = VectorXd::Zero(0);
      dx = hsolve(q);
    }
    dz = w_->apply_inv(w_->apply_inv(f_.G * dx)) - winv2_r3;
  }

  const StandardForm& f_;
  int refinement_;
  const Scaling* w_ = nullptr;
  template <typename Rhs>
  MatrixXd hsolve(const Rhs& b) const {
    return llt_.solve(b);
  }

  Eigen::LLT<MatrixXd> llt_;
  Eigen::LLT<MatrixXd> schur_;
};

/// Homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
struct Result {
  SolveStatus status = SolveStatus::numerical_failure;
  VectorXd x, y, z, s;
  int iterations = 0;
  double pres = 0.0, dres = 0.0, relgap = 0.0;
  std::string message;
  bool inaccurate = false;
};

inline Result solve_standard(const StandardForm& f, const SolverOptions& opt) {
  const Eigen::Index n = f.c.size();
  const Eigen::Index p = f.A.rows();
  const Eigen::Index m = f.G.rows();
  const int lp = f.lp;
  const auto& soc = f.soc;
  const double degree = static_cast<double>(lp) + static_cast<double>(soc.size());

  Result res;
  Scaling W(lp, soc);
  KktSolver kkt(f, opt.refinement_steps);
  if (!kkt.factor(W)) {
    res.message = "initial factorization failed";
    return res;
  }

  VectorXd x, y, z, s;
  {
    VectorXd dx, dy, dz;
    kkt.solve(VectorXd::Zero(n), f.b, f.h, dx, dy, dz);
    x = dx;
    s = bring_to_cone(-dz, lp, soc);
    kkt.solve(-f.c, VectorXd::Zero(p), VectorXd::Zero(m), dx, dy, dz);
    y = dy;
    z = bring_to_cone(dz, lp, soc);
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double nb = std::max(1.0, f.b.size() ? f.b.norm() : 0.0);
  const double nh = std::max(1.0, f.h.norm());
  const double nc = std::max(1.0, f.c.norm());
  const VectorXd e = cone_identity(m, lp, soc);

  Result best;
  double best_merit = std::numeric_limits<double>::infinity();
  int since_best = 0;
  // Falls back to the best iterate seen when it meets the reduced tolerances.
  auto fallback = [&](std::string why) {
    if (best.status == SolveStatus::optimal && best.pres < opt.feastol_inacc && best.dres < opt.feastol_inacc &&
        best.relgap < opt.reltol_inacc) {
      best.inaccurate = true;
      best.iterations = res.iterations;
      best.message = "reduced accuracy (" + why + ")";
      return best;
    }
    res.message = std::move(why);
    return res;
  };

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    res.iterations = iter;
    const VectorXd rx = -f.A.transpose() * y - f.G.transpose() * z - tau * f.c;
    const VectorXd ry = f.A * x - tau * f.b;
    const VectorXd rz = s + f.G * x - tau * f.h;
    const double cx = f.c.dot(x);
    const double by = p ? f.b.dot(y) : 0.0;
    const double hz = f.h.dot(z);
    const double rt = kappa + cx + by + hz;

    const double gap = s.dot(z) / (tau * tau);
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);
    const double pcost = cx / tau;
    const double dcost = -(by + hz) / tau;
    const double pres = std::max(p ? ry.norm() / nb : 0.0, rz.norm() / nh) / tau;
    const double dres = rx.norm() / nc / tau;
    const double relgap = gap / std::max(1.0, std::min(std::abs(pcost), std::abs(dcost)));
    res.pres = pres;
    res.dres = dres;
    res.relgap = relgap;

    if (pres < opt.feastol && dres < opt.feastol && relgap < opt.reltol &&
        std::isfinite(pcost)) {
      res.status = SolveStatus::optimal;
      res.x = x / tau;
      res.y = y / tau;
      res.z = z / tau;
      res.s = s / tau;
      return res;
    }
    if (std::isfinite(pcost)) {
      const double merit = std::max({pres, dres, relgap});
      if (merit < best_merit) {
        best_merit = merit;
        since_best = 0;
        best.status = SolveStatus::optimal;
        best.x = x / tau;
        best.y = y / tau;
        best.z = z / tau;
        best.s = s / tau;
        best.pres = pres;
        best.dres = dres;
        best.relgap = relgap;
      } else if (++since_best >= opt.stall_iterations && best_merit < opt.feastol_inacc) {
        return fallback("stalled");
      }
    }
    // Infeasibility certificates.
    const double nyz = std::max(1.0, y.norm() + z.norm());
    const double nx = std::max(1.0, x.norm());
    if ((hz + by) / nyz < -opt.reltol && tau < kappa) {
      const double pinf = (f.A.transpose() * y + f.G.transpose() * z).norm() / nyz;
      if (pinf < opt.feastol) {
        res.status = SolveStatus::infeasible;
        res.message = "primal infeasibility certificate";
        return res;
      }
    }
    if (cx / nx < -opt.reltol && tau < kappa) {
      const double dinf = std::max(p ? (f.A * x).norm() / nx : 0.0, (f.G * x + s).norm() / std::max(1.0, x.norm() + s.norm()));
      if (dinf < opt.feastol) {
        res.status = SolveStatus::unbounded;
        res.message = "dual infeasibility certificate";
        return res;
      }
    }
    if (iter == opt.max_iter) break;

    if (!W.update(s, z) || !kkt.factor(W)) return fallback("scaling update or factorization failed");
    const VectorXd lambda = W.apply(z);

    VectorXd x1, y1, z1;
    kkt.solve(-f.c, f.b, f.h, x1, y1, z1);
    const double denom = kappa / tau - f.c.dot(x1) - (p ? f.b.dot(y1) : 0.0) - f.h.dot(z1);

    // Predictor.
    VectorXd x2, y2, z2;
    kkt.solve(rx, -ry, -rz + s, x2, y2, z2);
    const double dtau_aff = (rt - kappa + f.c.dot(x2) + (p ? f.b.dot(y2) : 0.0) + f.h.dot(z2)) / denom;
    const VectorXd dz_aff = z2 + dtau_aff * z1;
    const VectorXd Wdz_aff = W.apply(dz_aff);
    const VectorXd Winv_ds_aff = -lambda - Wdz_aff;
    const double dkappa_aff = -kappa - kappa / tau * dtau_aff;
    double step_aff = std::min(max_step(lambda, Winv_ds_aff, lp, soc), max_step(lambda, Wdz_aff, lp, soc));
    if (dtau_aff < 0.0) step_aff = std::min(step_aff, -tau / dtau_aff);
    if (dkappa_aff < 0.0) step_aff = std::min(step_aff, -kappa / dkappa_aff);
    step_aff = std::min(step_aff, 1.0);
    const double sigma = std::clamp(std::pow(1.0 - step_aff, 3), 1e-4, 1.0);

    // Corrector.
    const VectorXd bs =
        cone_product(lambda, lambda, lp, soc) + cone_product(Winv_ds_aff, Wdz_aff, lp, soc) - sigma * mu * e;
    const VectorXd lam_bs = cone_division(lambda, bs, lp, soc);
    const VectorXd W_lam_bs = W.apply(lam_bs);
    kkt.solve((1.0 - sigma) * rx, -(1.0 - sigma) * ry, -(1.0 - sigma) * rz + W_lam_bs, x2, y2, z2);
    const double bkappa = kappa * tau + dkappa_aff * dtau_aff - sigma * mu;
    const double dtau =
        ((1.0 - sigma) * rt - bkappa / tau + f.c.dot(x2) + (p ? f.b.dot(y2) : 0.0) + f.h.dot(z2)) / denom;
    const VectorXd dx = x2 + dtau * x1;
    const VectorXd dy = y2 + dtau * y1;
    const VectorXd dz = z2 + dtau * z1;
    const VectorXd Wdz = W.apply(dz);
    const VectorXd Winv_ds = -lam_bs - Wdz;
    const VectorXd ds = W.apply(Winv_ds);
    const double dkappa = -(bkappa + kappa * dtau) / tau;

    double step = std::min(max_step(s, ds, lp, soc), max_step(z, dz, lp, soc));
    if (dtau < 0.0) step = std::min(step, -tau / dtau);
    if (dkappa < 0.0) step = std::min(step, -kappa / dkappa);
    step = std::min(1.0, opt.step_fraction * step);
    if (!(step > 0.0) || !std::isfinite(step)) return fallback("line search failed");
    x += step * dx;
    y += step * dy;
    z += step * dz;
    s += step * ds;
    tau += step * dtau;
    kappa += step * dkappa;
    if (!(tau > 0.0 && kappa > 0.0) || !x.allFinite()) return fallback("iterate left the cone");
  }
  return fallback("iteration limit reached");
}

}  // namespace ipm

/// Embedded interior-point solver.
class InteriorPointSolver final : public ConeSolver {
 public:
  InteriorPointSolver() = default;
  explicit InteriorPointSolver(SolverOptions opts) : opts_(opts) {}

  Solution solve(const ConeProgram& p) const override {
    const auto t0 = std::chrono::steady_clock::now();
    Solution sol;
    p.validate();
    const ipm::StandardForm f = ipm::to_standard_form(p);
    const ipm::Result r = ipm::solve_standard(f, opts_);
    sol.iterations = r.iterations;
    sol.primal_residual = r.pres;
    sol.dual_residual = r.dres;
    sol.relative_gap = r.relgap;
    sol.message = r.message;
    sol.status = r.status;
    sol.inaccurate = r.inaccurate;
    if (r.status == SolveStatus::optimal) {
      const double viol = p.max_violation(r.x);
      if (viol > opts_.max_constraint_violation) {
        sol.status = SolveStatus::numerical_failure;
        sol.message = "solution violates constraints by " + std::to_string(viol);
      } else {
        sol.primal = r.x;
        sol.objective_value = p.objective.eval(r.x);
      }
    }
    sol.solve_time = std::chrono::steady_clock::now() - t0;
    return sol;
  }

  const SolverOptions& options() const { return opts_; }

 private:
  SolverOptions opts_;
};

inline Solution solve(const ConeProgram& p, const SolverOptions& opts = {}) {
  return InteriorPointSolver(opts).solve(p);
}

}  // namespace nomapair::conic
