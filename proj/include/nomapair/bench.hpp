#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nomapair/baselines.hpp"
#include "nomapair/conic/subproblem.hpp"
#include "nomapair/parallel.hpp"
#include "nomapair/sca.hpp"
#include "nomapair/scenario.hpp"

namespace nomapair {

enum class Scheme { optimal, random, oma, oracle };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::optimal: return "optimal";
    case Scheme::random: return "random";
    case Scheme::oma: return "oma";
    case Scheme::oracle: return "oracle";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::optimal, Scheme::random, Scheme::oma, Scheme::oracle}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name + "' (expected optimal, random, oma or oracle)");
}

struct Campaign {
  std::vector<double> pmax_dbm{10, 15, 20, 25, 30};
  std::vector<int> antennas{6};
  int trials = 100;
  SystemConfig base;
  std::vector<Scheme> schemes{Scheme::optimal, Scheme::random, Scheme::oma};
  std::uint64_t seed = 1;
  std::filesystem::path output = "campaign";
  int workers = 1;
  /// Write wall-clock solve times; off gives byte-identical reruns.
  bool timings = true;
  AlgoOptions algo;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("campaign: trials must be at least 1");
    if (pmax_dbm.empty() || antennas.empty()) throw std::invalid_argument("campaign: grids must be nonempty");
    if (schemes.empty()) throw std::invalid_argument("campaign: no schemes selected");
    for (int L : antennas) {
      if (L < 1) throw std::invalid_argument("campaign: antenna counts must be positive");
    }
    for (double p : pmax_dbm) {
      if (!std::isfinite(p)) throw std::invalid_argument("campaign: power grid must be finite");
    }
    base.validate();
    if (std::find(schemes.begin(), schemes.end(), Scheme::oracle) != schemes.end() &&
        count_matchings(base.num_near, base.num_far) > kMaxMatchings) {
      throw std::invalid_argument("campaign: oracle scheme needs a smaller M x N");
    }
  }
};

struct ResultRow {
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::optimal;
  double pmax_dbm = 0.0;
  int L = 0, M = 0, N = 0;
  int iterations_phase1 = 0;
  int iterations_phase2 = 0;
  double mmr = std::numeric_limits<double>::quiet_NaN();
  std::string pairs;
  double solve_time_ms = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct AggregateRow {
  Scheme scheme = Scheme::optimal;
  double pmax_dbm = 0.0;
  int L = 0;
  int trials = 0;  // successful trials entering the statistics
  double mean_mmr = std::numeric_limits<double>::quiet_NaN();
  double stderr_mmr = std::numeric_limits<double>::quiet_NaN();
};

struct CampaignResult {
  std::vector<ResultRow> rows;
  std::vector<AggregateRow> aggregate;
  std::filesystem::path raw_csv, aggregate_csv, plot_svg;
};

/// Seed of the random pairing drawn for a trial; decorrelated from the
/// stream that generated the trial's scenario.
inline std::uint64_t pairing_seed(std::uint64_t trial_seed) { return trial_seed ^ 0x9e3779b97f4a7c15ULL; }

/// Runs one scheme on one scenario.
inline ResultRow run_trial(const Scenario& scenario, Scheme scheme, const AlgoOptions& o) {
  ResultRow r;
  r.seed = scenario.seed;
  r.scheme = scheme;
  r.pmax_dbm = scenario.config.pmax_dbm;
  r.L = scenario.L();
  r.M = scenario.M();
  r.N = scenario.N();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Scenario s = scenario.normalized ? scenario : normalize(scenario);
    switch (scheme) {
      case Scheme::optimal: {
        const RunResult res = run(s, o);
        r.iterations_phase1 = res.trace.iterations(Phase::relaxed);
        r.iterations_phase2 = res.trace.iterations(Phase::fixed);
        r.mmr = res.report.mmr;
        r.pairs = PairingAssignment::from_matrix(res.pairing).to_string();
        break;
      }
      case Scheme::random:
      case Scheme::oma: {
        const PairingAssignment a = scheme == Scheme::random
                                        ? PairingAssignment::from_matrix(random_pairing(s, pairing_seed(scenario.seed)))
                                        : PairingAssignment{};
        const FixedPairingResult res = solve_fixed_pairing(s, a, o);
        r.iterations_phase2 = res.trace.iterations(Phase::fixed);
        r.mmr = res.report.mmr;
        r.pairs = a.to_string();
        break;
      }
      case Scheme::oracle: {
        const OracleResult res = exhaustive_oracle(s, o);
        r.iterations_phase1 = res.algorithm.trace.iterations(Phase::relaxed);
        for (const auto& e : res.table) r.iterations_phase2 += e.iterations;
        r.mmr = res.mmr;
        r.pairs = res.best.to_string();
        break;
      }
    }
  } catch (const std::exception& e) {
    r.status = detail::failure_status(e);
    r.mmr = std::numeric_limits<double>::quiet_NaN();
    if (const auto* se = dynamic_cast<const SolverError*>(&e)) {
      r.iterations_phase1 = se->trace().iterations(Phase::relaxed);
      r.iterations_phase2 = se->trace().iterations(Phase::fixed);
    }
  }
  r.solve_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Mean and standard error (sample standard deviation / sqrt(n)) of the
/// successful rows of each (scheme, pmax, L) group.
inline std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<Scheme, double, int>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.scheme, r.pmax_dbm, r.L}];
    if (r.ok() && std::isfinite(r.mmr)) g.push_back(r.mmr);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, v] : groups) {
    AggregateRow a;
    std::tie(a.scheme, a.pmax_dbm, a.L) = key;
    a.trials = static_cast<int>(v.size());
    if (!v.empty()) {
      double sum = 0.0;
      for (double x : v) sum += x;
      a.mean_mmr = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - a.mean_mmr) * (x - a.mean_mmr);
      a.stderr_mmr = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))
                                  : 0.0;
    }
    out.push_back(a);
  }
  return out;
}

namespace detail {

inline void write_double(std::ostream& os, double v) {
  if (std::isfinite(v)) os << v;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace detail

inline void write_raw_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool timings = true) {
  const auto old = os.precision(17);
  os << "seed,scheme,pmax_dbm,L,M,N,iterations_phase1,iterations_phase2,mmr_bps_hz,pairs,solve_time_ms,status\n";
  for (const auto& r : rows) {
    os << r.seed << ',' << to_string(r.scheme) << ',' << r.pmax_dbm << ',' << r.L << ',' << r.M << ',' << r.N << ','
       << r.iterations_phase1 << ',' << r.iterations_phase2 << ',';
    detail::write_double(os, r.mmr);
    os << ',' << detail::csv_quote(r.pairs) << ',';
    if (timings) detail::write_double(os, r.solve_time_ms);
    os << ',' << detail::csv_quote(r.status) << '\n';
  }
  os.precision(old);
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  const auto old = os.precision(17);
  os << "scheme,pmax_dbm,L,trials,mean_mmr,stderr_mmr\n";
  for (const auto& a : rows) {
    os << to_string(a.scheme) << ',' << a.pmax_dbm << ',' << a.L << ',' << a.trials << ',';
    detail::write_double(os, a.mean_mmr);
    os << ',';
    detail::write_double(os, a.stderr_mmr);
    os << '\n';
  }
  os.precision(old);
}

// ---------------------------------------------------------------------------
// Plots

struct Series {
  std::string name;
  std::vector<double> x, y;
};

namespace detail {

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double k : {1.0, 2.0, 5.0, 10.0}) {
    step = k * mag;
    if (step >= raw) break;
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

}  // namespace detail

/// Self-contained SVG line chart.
inline void write_svg_chart(std::ostream& os, const std::vector<Series>& series, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel) {
  constexpr double W = 720, H = 480, left = 70, right = 170, top = 40, bottom = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::xml_escape(title) << "</text>\n";
  for (double t : detail::nice_ticks(xmin, xmax)) {
    os << "<line x1=\"" << X(t) << "\" y1=\"" << top << "\" x2=\"" << X(t) << "\" y2=\"" << top + ph
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << X(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << detail::fmt(t)
       << "</text>\n";
  }
  for (double t : detail::nice_ticks(ymin, ymax)) {
    os << "<line x1=\"" << left << "\" y1=\"" << Y(t) << "\" x2=\"" << left + pw << "\" y2=\"" << Y(t)
       << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << Y(t) + 4 << "\" text-anchor=\"end\">" << detail::fmt(t)
       << "</text>\n";
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
     << detail::xml_escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::xml_escape(ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.y[i])) os << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.y[i])) {
        os << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
      }
    }
    const double ly = top + 16 + 20 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(s.name)
       << "</text>\n";
  }
  os << "</svg>\n";
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return f;
}

}  // namespace detail

/// Runs every (scheme, pmax, L, trial) combination, then writes
/// <output>/campaign_raw.csv, campaign_aggregate.csv and campaign.svg.
/// Rows are sorted by scheme, grid point and seed.
inline CampaignResult run_campaign(const Campaign& c) {
  c.validate();
  struct Task {
    Scheme scheme;
    double pmax;
    int L;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Scheme sc : c.schemes) {
    for (double p : c.pmax_dbm) {
      for (int L : c.antennas) {
        for (int t = 0; t < c.trials; ++t) tasks.push_back({sc, p, L, c.seed + static_cast<std::uint64_t>(t)});
      }
    }
  }
  CampaignResult out;
  out.rows.resize(tasks.size());
  parallel_for(tasks.size(), c.workers, [&](std::size_t i) {
    const Task& t = tasks[i];
    SystemConfig cfg = c.base;
    cfg.pmax_dbm = t.pmax;
    cfg.num_antennas = t.L;
    ResultRow r;
    try {
      r = run_trial(generate_scenario(cfg, t.seed), t.scheme, c.algo);
    } catch (const std::exception&) {
      r.seed = t.seed;
      r.scheme = t.scheme;
      r.pmax_dbm = t.pmax;
      r.L = t.L;
      r.M = cfg.num_near;
      r.N = cfg.num_far;
      r.status = "error";
    }
    out.rows[i] = std::move(r);
  });
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scheme, a.pmax_dbm, a.L, a.seed) < std::tie(b.scheme, b.pmax_dbm, b.L, b.seed);
  });
  out.aggregate = aggregate(out.rows);

  out.raw_csv = c.output / "campaign_raw.csv";
  out.aggregate_csv = c.output / "campaign_aggregate.csv";
  out.plot_svg = c.output / "campaign.svg";
  {
    auto f = detail::open_out(out.raw_csv);
    write_raw_csv(f, out.rows, c.timings);
  }
  {
    auto f = detail::open_out(out.aggregate_csv);
    write_aggregate_csv(f, out.aggregate);
  }
  std::vector<Series> series;
  for (Scheme sc : c.schemes) {
    for (int L : c.antennas) {
      Series s;
      s.name = std::string(to_string(sc)) + (c.antennas.size() > 1 ? " L=" + std::to_string(L) : "");
      for (const auto& a : out.aggregate) {
        if (a.scheme == sc && a.L == L) {
          s.x.push_back(a.pmax_dbm);
          s.y.push_back(a.mean_mmr);
        }
      }
      series.push_back(std::move(s));
    }
  }
  auto f = detail::open_out(out.plot_svg);
  write_svg_chart(f, series, "Average max-min rate", "Pmax [dBm]", "max-min rate [bps/Hz]");
  return out;
}

// ---------------------------------------------------------------------------
// Convergence traces

struct ConvergenceRun {
  int L = 0;
  std::string status = "ok";
  Trace trace;
  double mmr = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
  std::vector<ConvergenceRun> runs;
  std::filesystem::path trace_csv, plot_svg;
};

inline void write_trace_csv(std::ostream& os, const std::vector<ConvergenceRun>& runs, bool timings = true) {
  const auto old = os.precision(17);
  os << "L,phase,iteration,eta,beta,min_sinr,solver_status,solver_iterations,wall_ms\n";
  for (const auto& r : runs) {
    for (const auto& rec : r.trace.records) {
      os << r.L << ',' << static_cast<int>(rec.phase) << ',' << rec.kappa << ',' << rec.eta << ',' << rec.beta << ','
         << rec.min_sinr << ',' << conic::to_string(rec.status) << ',' << rec.solver_iterations << ',';
      if (timings) os << rec.wall_ms;
      os << '\n';
    }
  }
  os.precision(old);
}

/// One scenario (same seed) per antenna count; writes
/// <output>/convergence.csv and convergence.svg (relaxed-phase objective
/// against iteration).
inline ConvergenceReport convergence_report(const std::vector<int>& antennas, double pmax_dbm, std::uint64_t seed,
                                            const SystemConfig& base = {}, const AlgoOptions& o = {},
                                            const std::filesystem::path& output = "convergence",
                                            int workers = 1, bool timings = true) {
  if (antennas.empty()) throw std::invalid_argument("convergence_report: no antenna counts");
  ConvergenceReport rep;
  rep.runs.resize(antennas.size());
  parallel_for(antennas.size(), workers, [&](std::size_t i) {
    ConvergenceRun& r = rep.runs[i];
    r.L = antennas[i];
    try {
      SystemConfig cfg = base;
      cfg.num_antennas = r.L;
      cfg.pmax_dbm = pmax_dbm;
      const RunResult res = run(generate_scenario(cfg, seed), o);
      r.trace = res.trace;
      r.mmr = res.report.mmr;
    } catch (const SolverError& e) {
      r.trace = e.trace();
      r.status = detail::failure_status(e);
    } catch (const std::exception&) {
      r.status = "error";
    }
  });
  rep.trace_csv = output / "convergence.csv";
  rep.plot_svg = output / "convergence.svg";
  {
    auto f = detail::open_out(rep.trace_csv);
    write_trace_csv(f, rep.runs, timings);
  }
  std::vector<Series> series;
  for (const auto& r : rep.runs) {
    Series s;
    s.name = "L=" + std::to_string(r.L);
    for (const auto& rec : r.trace.records) {
      if (rec.phase != Phase::relaxed) continue;
      s.x.push_back(rec.kappa);
      s.y.push_back(rec.eta);
    }
    series.push_back(std::move(s));
  }
  auto f = detail::open_out(rep.plot_svg);
  write_svg_chart(f, series, "Convergence at " + detail::fmt(pmax_dbm) + " dBm", "iteration", "objective eta");
  return rep;
}

// ---------------------------------------------------------------------------
// Subproblem size

struct DimsReport {
  long constraints = 0;  // x
  long variables = 0;    // y
  std::string complexity;
};

/// Constraint and variable counts of one relaxed subproblem, with the
/// per-iteration interior-point cost O(x^2.5 (y^2 + x)).
inline DimsReport subproblem_dims(int M, int N, int L) {
  if (M < 1 || N < 1 || L < 1) throw std::invalid_argument("subproblem_dims: M, N, L must be positive");
  const conic::SubproblemDims d = conic::relaxed_dims(M, N, L);
  DimsReport r{d.constraints, d.variables, {}};
  const double x = static_cast<double>(d.constraints), y = static_cast<double>(d.variables);
  std::ostringstream os;
  os << "O(x^2.5 (y^2 + x)) = O(" << d.constraints << "^2.5 * (" << d.variables << "^2 + " << d.constraints
     << ")) ~ " << std::setprecision(3) << std::scientific << std::pow(x, 2.5) * (y * y + x);
  r.complexity = os.str();
  return r;
}

/// Counts taken from an actual relaxed build at the initial point of a
/// generated scenario.
inline DimsReport measured_dims(int M, int N, int L, std::uint64_t seed = 0) {
  SystemConfig cfg;
  cfg.num_near = M;
  cfg.num_far = N;
  cfg.num_antennas = L;
  const Scenario s = normalize(generate_scenario(cfg, seed));
  const AlgoOptions o;
  const conic::Subproblem sub = conic::build_subproblem(s, initialize(s, o), std::nullopt, o.clamps);
  DimsReport r;
  r.constraints = static_cast<long>(sub.program.num_model_constraints());
  r.variables = sub.program.num_decision_symbols();
  return r;
}

}  // namespace nomapair
