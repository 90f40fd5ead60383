// nomapair: scenario generation, single solves and Monte-Carlo campaigns
// for joint NOMA pairing and beamforming.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "nomapair/nomapair.hpp"

namespace {

using namespace nomapair;

struct Common {
  std::uint64_t seed = 1;
  int m = 3;
  int n = 5;
  std::vector<int> l{6};
  std::vector<double> pmax_dbm{30};
  int trials = 100;
  double tol = 1e-3;
  int max_iter = 100;
  std::vector<std::string> scheme{"optimal"};
  std::string out;
  int workers = 1;
};

// Flags shared by the subcommands. Each falls back to NOMAPAIR_<NAME> when
// not given on the command line.
void add_seed(CLI::App* c, Common& o) {
  c->add_option("--seed", o.seed, "base random seed")->envname("NOMAPAIR_SEED")->capture_default_str();
}
void add_sizes(CLI::App* c, Common& o) {
  c->add_option("--m", o.m, "near users")->envname("NOMAPAIR_M")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--n", o.n, "far users")->envname("NOMAPAIR_N")->check(CLI::PositiveNumber)->capture_default_str();
}
void add_l(CLI::App* c, Common& o, bool list) {
  auto* opt = c->add_option("--l", o.l, list ? "antenna counts (comma separated)" : "antennas")
                  ->envname("NOMAPAIR_L")
                  ->check(CLI::PositiveNumber)
                  ->capture_default_str();
  if (list) {
    opt->delimiter(',');
  } else {
    opt->expected(1);
  }
}
void add_pmax(CLI::App* c, Common& o, bool list) {
  auto* opt = c->add_option("--pmax-dbm", o.pmax_dbm, list ? "transmit power grid in dBm (comma separated)" : "transmit power in dBm")
                  ->envname("NOMAPAIR_PMAX_DBM")
                  ->capture_default_str();
  if (list) {
    opt->delimiter(',');
  } else {
    opt->expected(1);
  }
}
void add_algo(CLI::App* c, Common& o) {
  c->add_option("--tol", o.tol, "objective-change threshold")->envname("NOMAPAIR_TOL")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--max-iter", o.max_iter, "iteration cap per phase")->envname("NOMAPAIR_MAX_ITER")->check(CLI::PositiveNumber)->capture_default_str();
}
void add_workers(CLI::App* c, Common& o) {
  c->add_option("--workers", o.workers, "worker threads")->envname("NOMAPAIR_WORKERS")->check(CLI::PositiveNumber)->capture_default_str();
}
void add_out(CLI::App* c, Common& o, const std::string& what) {
  c->add_option("--out", o.out, what)->envname("NOMAPAIR_OUT");
}
void add_scheme(CLI::App* c, Common& o, bool list) {
  auto* opt = c->add_option("--scheme", o.scheme, list ? "schemes: optimal,random,oma,oracle" : "optimal, random, oma or oracle")
                  ->envname("NOMAPAIR_SCHEME")
                  ->capture_default_str();
  if (list) {
    opt->delimiter(',');
  } else {
    opt->expected(1);
  }
}

SystemConfig config_from(const Common& o) {
  SystemConfig c;
  c.num_near = o.m;
  c.num_far = o.n;
  c.num_antennas = o.l.front();
  c.pmax_dbm = o.pmax_dbm.front();
  c.validate();
  return c;
}

AlgoOptions algo_from(const Common& o) {
  AlgoOptions a;
  a.tol = o.tol;
  a.max_iter = o.max_iter;
  return a;
}

void print_report(std::ostream& os, const Scenario& s, const PairingMatrix& pairing, const RateReport& r) {
  os << std::setprecision(6);
  os << "pairs: " << (pairing.num_pairs() ? PairingAssignment::from_matrix(pairing).to_string() : "(none)") << "\n";
  os << "user      sinr_db    rate_bps_hz\n";
  for (int u = 0; u < s.num_users(); ++u) {
    const std::string name = u < s.M() ? "near " + std::to_string(u + 1) : "far " + std::to_string(u - s.M() + 1);
    os << std::left << std::setw(8) << name << std::right << std::setw(11) << 10.0 * std::log10(r.gamma[u])
       << std::setw(15) << r.rate[u] << "\n";
  }
  os << "max-min rate: " << r.mmr << " bps/Hz\n";
  os << "total power:  " << r.total_power << " W (budget " << s.pmax_w << " W)\n";
}

int cmd_generate(const Common& o) {
  const Scenario s = generate_scenario(config_from(o), o.seed);
  if (o.out.empty() || o.out == "-") {
    std::cout << to_json(s).dump(2) << "\n";
  } else {
    save_scenario(s, o.out);
    std::cerr << "wrote " << o.out << "\n";
  }
  return 0;
}

int cmd_solve(const Common& o, const std::string& scenario_file) {
  const Scenario raw = scenario_file.empty() ? generate_scenario(config_from(o), o.seed) : load_scenario(scenario_file);
  const Scenario s = raw.normalized ? raw : normalize(raw);
  const AlgoOptions a = algo_from(o);
  const Scheme scheme = parse_scheme(o.scheme.front());
  Trace trace;
  PairingMatrix pairing;
  RateReport report;
  try {
    switch (scheme) {
      case Scheme::optimal: {
        RunResult r = run(s, a);
        trace = r.trace;
        pairing = r.pairing;
        report = r.report;
        break;
      }
      case Scheme::random:
      case Scheme::oma: {
        const PairingAssignment pa = scheme == Scheme::random
                                         ? PairingAssignment::from_matrix(random_pairing(s, pairing_seed(raw.seed)))
                                         : PairingAssignment{};
        FixedPairingResult r = solve_fixed_pairing(s, pa, a);
        trace = r.trace;
        pairing = r.pairing;
        report = r.report;
        break;
      }
      case Scheme::oracle: {
        const OracleResult r = exhaustive_oracle(s, a, nullptr, o.workers);
        pairing = r.best.to_matrix(s.M(), s.N());
        report = rate_report(r.w, pairing, s);
        trace = r.algorithm.trace;
        break;
      }
    }
  } catch (const SolverError& e) {
    std::cerr << "solve failed: " << e.what() << "\n";
    trace = e.trace();
    if (!o.out.empty()) {
      std::ofstream f(o.out);
      write_trace_csv(f, {ConvergenceRun{s.L(), "failed", trace, NAN}});
    }
    return 2;
  }
  print_report(std::cout, s, pairing, report);
  std::cout << "iterations: phase 1 " << trace.iterations(Phase::relaxed) << ", phase 2 "
            << trace.iterations(Phase::fixed) << "\n";
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot open '" + o.out + "'");
    write_trace_csv(f, {ConvergenceRun{s.L(), "ok", trace, report.mmr}});
    std::cerr << "wrote trace " << o.out << "\n";
  }
  return 0;
}

int cmd_campaign(const Common& o, bool no_timings) {
  Campaign c;
  c.pmax_dbm = o.pmax_dbm;
  c.antennas = o.l;
  c.trials = o.trials;
  c.base = config_from(o);
  c.schemes.clear();
  for (const auto& name : o.scheme) c.schemes.push_back(parse_scheme(name));
  c.seed = o.seed;
  c.output = o.out.empty() ? "campaign" : o.out;
  c.workers = o.workers;
  c.timings = !no_timings;
  c.algo = algo_from(o);
  const CampaignResult r = run_campaign(c);
  int failed = 0;
  for (const auto& row : r.rows) failed += row.ok() ? 0 : 1;
  std::cout << std::setprecision(4);
  std::cout << "scheme    pmax_dbm   L  trials  mean_mmr  stderr\n";
  for (const auto& a : r.aggregate) {
    std::cout << std::left << std::setw(9) << to_string(a.scheme) << std::right << std::setw(9) << a.pmax_dbm
              << std::setw(4) << a.L << std::setw(8) << a.trials << std::setw(10) << a.mean_mmr << std::setw(8)
              << a.stderr_mmr << "\n";
  }
  std::cout << r.rows.size() << " rows, " << failed << " failed\n";
  std::cout << "wrote " << r.raw_csv.string() << ", " << r.aggregate_csv.string() << ", " << r.plot_svg.string() << "\n";
  return 0;
}

int cmd_convergence(const Common& o) {
  const std::filesystem::path out = o.out.empty() ? "convergence" : o.out;
  SystemConfig base = config_from(o);
  const ConvergenceReport rep = convergence_report(o.l, o.pmax_dbm.front(), o.seed, base, algo_from(o), out, o.workers);
  for (const auto& r : rep.runs) {
    std::cout << "L=" << r.L << ": " << r.status << ", phase 1 " << r.trace.iterations(Phase::relaxed)
              << " iterations, phase 2 " << r.trace.iterations(Phase::fixed) << ", max-min rate " << r.mmr << "\n";
  }
  std::cout << "wrote " << rep.trace_csv.string() << ", " << rep.plot_svg.string() << "\n";
  return 0;
}

int cmd_oracle(const Common& o) {
  const Scenario s = normalize(generate_scenario(config_from(o), o.seed));
  const OracleResult r = exhaustive_oracle(s, algo_from(o), nullptr, o.workers);
  if (o.out.empty() || o.out == "-") {
    write_oracle_csv(std::cout, r);
  } else {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot open '" + o.out + "'");
    write_oracle_csv(f, r);
  }
  const PairingAssignment chosen = PairingAssignment::from_matrix(r.algorithm.pairing);
  std::cerr << std::setprecision(6) << "best: \"" << r.best.to_string() << "\" " << r.mmr << " bps/Hz; two-phase: \""
            << chosen.to_string() << "\" " << r.algorithm.report.mmr << " bps/Hz\n";
  return 0;
}

int cmd_dims(const Common& o) {
  const DimsReport d = subproblem_dims(o.m, o.n, o.l.front());
  const DimsReport b = measured_dims(o.m, o.n, o.l.front());
  std::cout << "constraints x = " << d.constraints << " (builder: " << b.constraints << ")\n";
  std::cout << "variables   y = " << d.variables << " (builder: " << b.variables << ")\n";
  std::cout << "per-iteration cost " << d.complexity << "\n";
  return d.constraints == b.constraints && d.variables == b.variables ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint NOMA user pairing and beamforming for max-min rate"};
  app.require_subcommand(1);
  Common o;
  std::string scenario_file;
  bool no_timings = false;

  auto* gen = app.add_subcommand("generate", "draw a scenario and write it as JSON");
  add_seed(gen, o);
  add_sizes(gen, o);
  add_l(gen, o, false);
  add_pmax(gen, o, false);
  add_out(gen, o, "output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve one scenario with one scheme");
  solve->add_option("--scenario", scenario_file, "scenario JSON (default: generate from the flags)")
      ->check(CLI::ExistingFile);
  add_seed(solve, o);
  add_sizes(solve, o);
  add_l(solve, o, false);
  add_pmax(solve, o, false);
  add_algo(solve, o);
  add_scheme(solve, o, false);
  add_workers(solve, o);
  add_out(solve, o, "trace CSV");

  auto* camp = app.add_subcommand("campaign", "Monte-Carlo average max-min rate over a power grid");
  add_seed(camp, o);
  add_sizes(camp, o);
  add_l(camp, o, true);
  add_pmax(camp, o, true);
  camp->add_option("--trials", o.trials, "trials per grid point")
      ->envname("NOMAPAIR_TRIALS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_algo(camp, o);
  add_scheme(camp, o, true);
  add_workers(camp, o);
  add_out(camp, o, "output directory (default ./campaign)");
  camp->add_flag("--no-timings", no_timings, "leave solve_time_ms empty so reruns are byte-identical");

  auto* conv = app.add_subcommand("convergence", "per-iteration objective traces for several antenna counts");
  add_seed(conv, o);
  add_sizes(conv, o);
  add_l(conv, o, true);
  add_pmax(conv, o, false);
  add_algo(conv, o);
  add_workers(conv, o);
  add_out(conv, o, "output directory (default ./convergence)");

  auto* orc = app.add_subcommand("oracle", "solve every pairing of a small instance");
  add_seed(orc, o);
  add_sizes(orc, o);
  add_l(orc, o, false);
  add_pmax(orc, o, false);
  add_algo(orc, o);
  add_workers(orc, o);
  add_out(orc, o, "table CSV (default stdout)");

  auto* dims = app.add_subcommand("dims", "subproblem size and per-iteration cost");
  add_sizes(dims, o);
  add_l(dims, o, false);

  // Defaults that differ per subcommand.
  conv->get_option("--l")->default_str("6,16");
  camp->get_option("--pmax-dbm")->default_str("10,15,20,25,30");
  camp->get_option("--scheme")->default_str("optimal,random,oma");
  orc->get_option("--m")->default_str("2");
  orc->get_option("--n")->default_str("2");
  orc->get_option("--l")->default_str("2");
  conv->preparse_callback([&](std::size_t) { o.l = {6, 16}; });
  camp->preparse_callback([&](std::size_t) {
    o.pmax_dbm = {10, 15, 20, 25, 30};
    o.scheme = {"optimal", "random", "oma"};
  });
  orc->preparse_callback([&](std::size_t) {
    o.m = 2;
    o.n = 2;
    o.l = {2};
  });

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(o);
    if (*solve) return cmd_solve(o, scenario_file);
    if (*camp) return cmd_campaign(o, no_timings);
    if (*conv) return cmd_convergence(o);
    if (*orc) return cmd_oracle(o);
    if (*dims) return cmd_dims(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
