#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nomapair::conic {

/// Sparse affine functional  constant + sum_k coeff_k * x[var_k].
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}

  static AffineExpr variable(int index, double coeff = 1.0) {
    AffineExpr e;
    e.terms.emplace_back(index, coeff);
    return e;
  }

  AffineExpr& add(int index, double coeff) {
    if (coeff != 0.0) terms.emplace_back(index, coeff);
    return *this;
  }

  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [i, c] : terms) v += c * x(i);
    return v;
  }

  AffineExpr& operator+=(const AffineExpr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }
  AffineExpr& operator*=(double k) {
    for (auto& t : terms) t.second *= k;
    constant *= k;
    return *this;
  }
  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator*(double k, AffineExpr a) { return a *= k; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a += -1.0 * b; }
};

/// Which part of the model a constraint encodes. Everything except
/// `auxiliary` and `generic` is one of the counted constraint families of
/// the pairing/beamforming subproblem.
enum class Family {
  power,
  row_sum,
  column_sum,
  alpha_box,
  tau_bound,
  near_sinr,
  far_direct,
  far_sic,
  auxiliary,
  generic,
};

inline const char* to_string(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::row_sum: return "row_sum";
    case Family::column_sum: return "column_sum";
    case Family::alpha_box: return "alpha_box";
    case Family::tau_bound: return "tau_bound";
    case Family::near_sinr: return "near_sinr";
    case Family::far_direct: return "far_direct";
    case Family::far_sic: return "far_sic";
    case Family::auxiliary: return "auxiliary";
    case Family::generic: return "generic";
  }
  return "?";
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// lo <= expr <= hi; lo == hi is an equality.
struct LinearConstraint {
  AffineExpr expr;
  double lo = -kInf;
  double hi = kInf;
  Family family = Family::generic;
  std::string label;

  bool is_equality() const { return lo == hi; }
  /// Amount by which x violates the constraint (0 when satisfied).
  double violation(const Eigen::VectorXd& x) const {
    const double v = expr.eval(x);
    return std::max({0.0, lo - v, v - hi});
  }
};

/// ||u|| <= t
struct SocConstraint {
  AffineExpr t;
  std::vector<AffineExpr> u;
  Family family = Family::generic;
  std::string label;

  double violation(const Eigen::VectorXd& x) const {
    double n2 = 0.0;
    for (const auto& e : u) n2 += std::pow(e.eval(x), 2);
    return std::max(0.0, std::sqrt(n2) - t.eval(x));
  }
};

/// s >= 0, t >= 0, s * t >= ||u||^2.
/// `scale` maps the stored (row-scaled) residual back to model units:
/// model residual = scale * (s t - ||u||^2).
struct RsocConstraint {
  AffineExpr s;
  AffineExpr t;
  std::vector<AffineExpr> u;
  Family family = Family::generic;
  std::string label;
  double scale = 1.0;

  double residual(const Eigen::VectorXd& x) const {
    double n2 = 0.0;
    for (const auto& e : u) n2 += std::pow(e.eval(x), 2);
    return scale * (s.eval(x) * t.eval(x) - n2);
  }

  /// Violation measured in the equivalent second-order cone
  /// ||(s - t, 2u)|| <= s + t, i.e. in the stored units.
  double violation(const Eigen::VectorXd& x) const {
    const double sv = s.eval(x);
    const double tv = t.eval(x);
    double n2 = std::pow(sv - tv, 2);
    for (const auto& e : u) n2 += 4.0 * std::pow(e.eval(x), 2);
    return std::max(0.0, std::sqrt(n2) - (sv + tv));
  }
};

enum class SymbolKind { w_re, w_im, alpha, tau, beta, generic };

/// Metadata for one real coordinate. The model value of the symbol is
/// `offset + scale * x[index]`.
struct VariableInfo {
  std::string name;
  SymbolKind kind = SymbolKind::generic;
  int user = -1;     // flat user index for w components
  int antenna = -1;  // antenna index for w components
  int m = -1;        // pairing row for alpha / tau
  int n = -1;        // pairing column for alpha / tau
  double scale = 1.0;
  double offset = 0.0;
};

/// A second-order-cone program: maximize an affine objective subject to
/// linear, second-order-cone and rotated-cone constraints.
class ConeProgram {
 public:
  int add_variable(VariableInfo info) {
    const int idx = static_cast<int>(variables_.size());
    if (!info.name.empty()) {
      if (!index_.emplace(info.name, idx).second) {
        throw std::invalid_argument("duplicate variable name '" + info.name + "'");
      }
    }
    variables_.push_back(std::move(info));
    return idx;
  }

  int num_vars() const { return static_cast<int>(variables_.size()); }
  const std::vector<VariableInfo>& variables() const { return variables_; }
  const VariableInfo& variable(int i) const { return variables_.at(static_cast<std::size_t>(i)); }

  /// Coordinate of a named symbol; throws std::out_of_range if unknown.
  int index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown variable '" + name + "'");
    return it->second;
  }
  bool has_variable(const std::string& name) const { return index_.count(name) != 0; }

  /// Number of decision symbols with complex beamformer entries counted once.
  int num_decision_symbols() const {
    int k = 0;
    for (const auto& v : variables_) k += v.kind == SymbolKind::w_im ? 0 : 1;
    return k;
  }

  AffineExpr objective;  // maximized

  std::vector<LinearConstraint> linear;
  std::vector<SocConstraint> soc;
  std::vector<RsocConstraint> rsoc;

  void add_linear(AffineExpr e, double lo, double hi, Family f, std::string label = {}) {
    linear.push_back({std::move(e), lo, hi, f, std::move(label)});
  }
  void add_soc(AffineExpr t, std::vector<AffineExpr> u, Family f, std::string label = {}) {
    soc.push_back({std::move(t), std::move(u), f, std::move(label)});
  }
  void add_rsoc(AffineExpr s, AffineExpr t, std::vector<AffineExpr> u, Family f, std::string label = {},
                double scale = 1.0) {
    rsoc.push_back({std::move(s), std::move(t), std::move(u), f, std::move(label), scale});
  }

  /// Logical constraints in family f (a two-sided linear row counts once).
  std::size_t count(Family f) const {
    auto pred = [f](const auto& c) { return c.family == f; };
    return static_cast<std::size_t>(std::count_if(linear.begin(), linear.end(), pred) +
                                    std::count_if(soc.begin(), soc.end(), pred) +
                                    std::count_if(rsoc.begin(), rsoc.end(), pred));
  }

  /// Number of modelled (non-auxiliary) constraints.
  std::size_t num_model_constraints() const {
    std::size_t k = 0;
    for (Family f : {Family::power, Family::row_sum, Family::column_sum, Family::alpha_box, Family::tau_bound,
                     Family::near_sinr, Family::far_direct, Family::far_sic}) {
      k += count(f);
    }
    return k;
  }

  /// Largest constraint violation at x, in stored units.
  double max_violation(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& c : linear) v = std::max(v, c.violation(x));
    for (const auto& c : soc) v = std::max(v, c.violation(x));
    for (const auto& c : rsoc) v = std::max(v, c.violation(x));
    return v;
  }

  /// Checks that every expression references a valid coordinate.
  void validate() const {
    const int n = num_vars();
    auto check = [n](const AffineExpr& e) {
      for (const auto& [i, c] : e.terms) {
        if (i < 0 || i >= n) throw std::out_of_range("affine expression references coordinate " + std::to_string(i));
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite coefficient in cone program");
      }
      if (!std::isfinite(e.constant)) throw std::invalid_argument("non-finite constant in cone program");
    };
    check(objective);
    for (const auto& c : linear) check(c.expr);
    for (const auto& c : soc) {
      check(c.t);
      for (const auto& e : c.u) check(e);
    }
    for (const auto& c : rsoc) {
      check(c.s);
      check(c.t);
      for (const auto& e : c.u) check(e);
    }
  }

 private:
  std::vector<VariableInfo> variables_;
  std::unordered_map<std::string, int> index_;
};

namespace detail {

inline void dump_expr(std::ostream& os, const AffineExpr& e) {
  os << e.constant;
  for (const auto& [i, c] : e.terms) os << (c < 0 ? " - " : " + ") << std::abs(c) << "*x" << i;
}

}  // namespace detail

/// Plain-text listing of a program: one line per variable, the objective,
/// then one line per constraint row. Stable across runs for diffing.
inline void dump(std::ostream& os, const ConeProgram& p) {
  const auto old_prec = os.precision(17);
  os << "# cone program: " << p.num_vars() << " variables, " << p.linear.size() << " linear, " << p.soc.size()
     << " soc, " << p.rsoc.size() << " rsoc\n";
  for (int i = 0; i < p.num_vars(); ++i) {
    const auto& v = p.variable(i);
    os << "var x" << i << " " << (v.name.empty() ? "_" : v.name) << " scale " << v.scale;
    if (v.offset != 0.0) os << " offset " << v.offset;
    os << "\n";
  }
  os << "maximize ";
  detail::dump_expr(os, p.objective);
  os << "\n";
  for (const auto& c : p.linear) {
    os << "linear " << to_string(c.family) << " [" << c.label << "] " << c.lo << " <= ";
    detail::dump_expr(os, c.expr);
    os << " <= " << c.hi << "\n";
  }
  for (const auto& c : p.soc) {
    os << "soc " << to_string(c.family) << " [" << c.label << "] t = ";
    detail::dump_expr(os, c.t);
    for (const auto& e : c.u) {
      os << " ; u = ";
      detail::dump_expr(os, e);
    }
    os << "\n";
  }
  for (const auto& c : p.rsoc) {
    os << "rsoc " << to_string(c.family) << " [" << c.label << "] scale " << c.scale << " s = ";
    detail::dump_expr(os, c.s);
    os << " ; t = ";
    detail::dump_expr(os, c.t);
    for (const auto& e : c.u) {
      os << " ; u = ";
      detail::dump_expr(os, e);
    }
    os << "\n";
  }
  os.precision(old_prec);
}

}  // namespace nomapair::conic
