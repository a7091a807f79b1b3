// nedpca: exact tables, partition functions, simulation and verification
// for the m-neighbourhood evaporation-deposition automaton.
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nedpca/closed_forms.hpp"
#include "nedpca/exact_solver.hpp"
#include "nedpca/io.hpp"
#include "nedpca/m2_analytics.hpp"
#include "nedpca/montecarlo.hpp"
#include "nedpca/verify.hpp"

namespace {

using nedpca::Json;
using nedpca::format_double;

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;

// Largest ring accepted by the partition subcommand; the term count grows
// polynomially in n with big-integer multiplicities.
constexpr int kPartitionMaxSites = 1000;

struct RunConfig {
  int n = 0;
  int m = 2;
  std::string p1 = "0.5";
  std::string p2 = "0.5";
  std::uint64_t seed = 1;
  int chains = 1;
  long burn_in = 10'000;
  long samples = 100'000;
  long thin = 1;
  std::string format = "json";
  bool exact_rational = false;
  std::string grid;
  std::string out;
  std::string config;
  std::string trace;
  bool series = false;
  bool quick = false;
  bool full = false;
  std::vector<std::string> criteria;
};

double parse_real(const std::string& text) {
  if (text.find('/') != std::string::npos) return nedpca::to_double(nedpca::parse_rational(text));
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw nedpca::InvalidParams("not a number: '" + text + "'");
  }
  if (used != text.size()) throw nedpca::InvalidParams("not a number: '" + text + "'");
  return value;
}

nedpca::ModelParams model(const RunConfig& c) {
  return nedpca::make_params(c.n, c.m, parse_real(c.p1), parse_real(c.p2));
}

nedpca::ExactParams exact_model(const RunConfig& c) {
  return nedpca::make_params(c.n, c.m, nedpca::parse_rational(c.p1), nedpca::parse_rational(c.p2));
}

// "K" or "K,lo,hi": K evenly spaced values from lo to hi (default 0.02..0.98).
std::vector<double> grid_axis(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  if (parts.size() != 1 && parts.size() != 3) throw nedpca::InvalidParams("--grid expects K or K,lo,hi");
  const double k = parse_real(parts[0]);
  if (!(k >= 1) || k != std::floor(k) || k > 100'000) throw nedpca::InvalidParams("--grid K must be a positive integer");
  const double lo = parts.size() == 3 ? parse_real(parts[1]) : 0.02;
  const double hi = parts.size() == 3 ? parse_real(parts[2]) : 0.98;
  std::vector<double> axis;
  const int count = static_cast<int>(k);
  for (int i = 0; i < count; ++i) axis.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return axis;
}

// Flat key=value file; '#' starts a comment. Keys are long flag names
// without dashes (n, m, p1, p2, seed, burn-in, ...).
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nedpca::InvalidParams("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw nedpca::InvalidParams(path + ":" + std::to_string(number) + ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Applies config values to options that were not given on the command line.
void apply_config(CLI::App& app, const std::string& path) {
  for (const auto& [key, value] : read_config(path)) {
    CLI::Option* opt = nullptr;
    for (const std::string name : {"-" + key, "--" + key}) {
      try {
        opt = app.get_option(name);
        break;
      } catch (const CLI::OptionNotFound&) {
      }
    }
    if (opt == nullptr || key == "config") throw nedpca::InvalidParams("unknown config key '" + key + "'");
    if (opt->count() != 0) continue;
    if (opt->get_type_size() == 0) {
      if (value != "true" && value != "false") throw nedpca::InvalidParams("flag '" + key + "' takes true or false");
      if (value == "false") continue;
    }
    opt->add_result(opt->get_type_size() == 0 ? std::string("true") : value);
    opt->run_callback();
  }
}

Json table_rows(const nedpca::StationaryTable<double>& table) {
  Json probs = Json::array();
  for (double p : table.probs) probs.push_back(p);
  return probs;
}

double site_one_marginal(const nedpca::StationaryTable<double>& table) {
  double sum = 0.0;
  for (std::uint64_t s = 1; s < table.size(); s += 2) sum += table[s];
  return sum;
}

int cmd_exact(const RunConfig& c, std::ostream& out) {
  if (c.exact_rational) {
    const auto p = exact_model(c);
    const auto matrix = nedpca::build_matrix(p);
    const auto solved = nedpca::solve_stationary(matrix);
    const auto formula = nedpca::stationary_table_formula(p);
    const auto audit = nedpca::audit_detailed_balance(solved, matrix);
    nedpca::Rational site_one = 0;
    for (std::uint64_t s = 1; s < solved.size(); s += 2) site_one += solved[s];
    Json rows = Json::array();
    for (std::uint64_t s = 0; s < solved.size(); ++s)
      rows.push_back({{"config", nedpca::Configuration(p.n, s).to_string()},
                      {"formula", nedpca::format_rational(formula[s])},
                      {"solver", nedpca::format_rational(solved[s])}});
    Json doc{{"n", p.n},
             {"m", p.m},
             {"p1", nedpca::format_rational(p.p1)},
             {"p2", nedpca::format_rational(p.p2)},
             {"table", rows},
             {"tables_equal", nedpca::sup_norm_gap(solved, formula) == 0.0},
             {"Z", {{"formula", nedpca::format_rational(nedpca::partition_formula(p))},
                    {"bruteforce", nedpca::format_rational(nedpca::partition_bruteforce(p))}}},
             {"density", {{"formula", nedpca::format_rational(nedpca::density_formula(p))},
                          {"solver", nedpca::format_rational(site_one)}}},
             {"balance_residual", nedpca::balance_residual(formula, matrix)},
             {"detailed_balance", nedpca::to_json(audit, p.n)}};
    out << doc.dump(2) << '\n';
    return kExitOk;
  }

  const auto p = model(c);
  const auto matrix = nedpca::build_matrix(p);
  const auto solved = nedpca::solve_stationary(matrix);
  const auto formula = nedpca::stationary_table_formula(p);
  const auto audit = nedpca::audit_detailed_balance(formula, matrix);
  const double gap = nedpca::sup_norm_gap(formula, solved);
  const double z_formula = nedpca::partition_formula(p);
  const double z_brute = nedpca::partition_bruteforce(p);
  const double d_formula = nedpca::density_formula(p);
  const double d_solver = site_one_marginal(solved);
  const double residual = nedpca::balance_residual(formula, matrix);

  if (c.format == "csv") {
    out << "config,formula,solver\n";
    for (std::uint64_t s = 0; s < solved.size(); ++s)
      out << nedpca::Configuration(p.n, s).to_string() << ',' << format_double(formula[s]) << ','
          << format_double(solved[s]) << '\n';
    out << "# sup_norm_gap=" << format_double(gap) << '\n'
        << "# Z_formula=" << format_double(z_formula) << '\n'
        << "# Z_bruteforce=" << format_double(z_brute) << '\n'
        << "# density_formula=" << format_double(d_formula) << '\n'
        << "# density_solver=" << format_double(d_solver) << '\n'
        << "# balance_residual=" << format_double(residual) << '\n'
        << "# detailed_balance=" << (audit.reversible() ? "reversible" : "irreversible") << '\n';
    if (audit.one_way_witness)
      out << "# one_way_witness=" << nedpca::Configuration(p.n, audit.one_way_witness->first).to_string() << "->"
          << nedpca::Configuration(p.n, audit.one_way_witness->second).to_string() << '\n';
    return kExitOk;
  }

  Json configs = Json::array();
  for (std::uint64_t s = 0; s < solved.size(); ++s) configs.push_back(nedpca::Configuration(p.n, s).to_string());
  Json doc{{"n", p.n},
           {"m", p.m},
           {"p1", p.p1},
           {"p2", p.p2},
           {"configs", configs},
           {"formula", table_rows(formula)},
           {"solver", table_rows(solved)},
           {"sup_norm_gap", gap},
           {"Z", {{"formula", z_formula}, {"bruteforce", z_brute}}},
           {"density", {{"formula", d_formula}, {"solver", d_solver}}},
           {"balance_residual", residual},
           {"irreducible_aperiodic", nedpca::check_irreducible_aperiodic(matrix)},
           {"detailed_balance", nedpca::to_json(audit, p.n)}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

void check_partition_budget(int n) {
  if (n > kPartitionMaxSites)
    throw nedpca::BudgetExceeded("n=" + std::to_string(n) + " exceeds the partition cap of " +
                                 std::to_string(kPartitionMaxSites));
}

int cmd_partition(const RunConfig& c, std::ostream& out) {
  check_partition_budget(c.n);
  if (!c.grid.empty()) {
    const auto axis = grid_axis(c.grid);
    out << "n,m,p1,p2,Z,density\n";
    for (double p1 : axis)
      for (double p2 : axis) {
        const auto p = nedpca::make_params(c.n, c.m, p1, p2);
        out << p.n << ',' << p.m << ',' << format_double(p1) << ',' << format_double(p2) << ','
            << format_double(nedpca::partition_formula(p)) << ',' << format_double(nedpca::density_formula(p))
            << '\n';
      }
    return kExitOk;
  }

  if (c.exact_rational) {
    const auto p = exact_model(c);
    Json doc{{"n", p.n},
             {"m", p.m},
             {"p1", nedpca::format_rational(p.p1)},
             {"p2", nedpca::format_rational(p.p2)},
             {"Z", nedpca::format_rational(nedpca::partition_formula(p))},
             {"density", nedpca::format_rational(nedpca::density_formula(p))}};
    if (p.n <= 12) doc["Z_bruteforce"] = nedpca::format_rational(nedpca::partition_bruteforce(p, 12));
    if (c.format == "csv")
      out << "n,m,p1,p2,Z,density\n"
          << p.n << ',' << p.m << ',' << doc["p1"].get<std::string>() << ',' << doc["p2"].get<std::string>() << ','
          << doc["Z"].get<std::string>() << ',' << doc["density"].get<std::string>() << '\n';
    else
      out << doc.dump(2) << '\n';
    return kExitOk;
  }

  const auto p = model(c);
  const double z = nedpca::partition_formula(p);
  const double density = nedpca::density_formula(p);
  if (c.format == "csv") {
    out << "n,m,p1,p2,Z,density\n"
        << p.n << ',' << p.m << ',' << format_double(p.p1) << ',' << format_double(p.p2) << ','
        << format_double(z) << ',' << format_double(density) << '\n';
    return kExitOk;
  }
  Json doc{{"n", p.n}, {"m", p.m}, {"p1", p.p1}, {"p2", p.p2}};
  doc["Z"] = std::isfinite(z) ? Json(z) : Json(nullptr);
  doc["log_Z"] = nedpca::log_partition_formula(p);
  doc["density"] = density;
  if (p.n <= 20) doc["Z_bruteforce"] = nedpca::partition_bruteforce(p);
  if (p.m == 2) doc["Z_recurrence"] = nedpca::m2::z2_recurrence(std::max(p.n, 2), p.p1, p.p2)[p.n];
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  nedpca::SimulationPlan plan;
  plan.params = model(c);
  plan.seed = c.seed;
  plan.chains = c.chains;
  plan.burn_in = c.burn_in;
  plan.samples = c.samples;
  plan.thin = c.thin;
  nedpca::validate(plan);
  std::unique_ptr<std::ofstream> trace;
  if (!c.trace.empty()) {
    trace = std::make_unique<std::ofstream>(c.trace);
    if (!*trace) throw nedpca::InvalidParams("cannot write trace file '" + c.trace + "'");
  }
  const auto summary = nedpca::run(plan, trace.get());
  out << nedpca::to_json(summary, plan).dump(2) << '\n';
  std::cerr << "throughput: " << format_double(summary.steps_per_second) << " steps/s\n";
  return kExitOk;
}

int cmd_m2(const RunConfig& c, std::ostream& out) {
  if (c.series) {
    const double p1 = parse_real(c.p1), p2 = parse_real(c.p2);
    const int n_max = c.n > 0 ? c.n : 50;
    const auto z = nedpca::m2::z2_series(n_max, p1, p2);
    const auto rec = nedpca::m2::z2_recurrence(std::max(n_max, 2), p1, p2);
    const auto d = nedpca::m2::density_series(n_max, p1, p2);
    out << "n,Z,Z_recurrence,density\n";
    for (int n = 0; n <= n_max; ++n)
      out << n << ',' << format_double(z.coeffs[n]) << ',' << format_double(rec[n]) << ','
          << format_double(d.coeffs[n] / z.coeffs[n]) << '\n';
    return kExitOk;
  }
  out << "p1,p2,F\n";
  if (c.grid.empty()) {
    const double p1 = parse_real(c.p1), p2 = parse_real(c.p2);
    out << format_double(p1) << ',' << format_double(p2) << ',' << format_double(nedpca::m2::free_energy(p1, p2))
        << '\n';
    return kExitOk;
  }
  const auto axis = grid_axis(c.grid);
  for (double p1 : axis)
    for (double p2 : axis)
      out << format_double(p1) << ',' << format_double(p2) << ',' << format_double(nedpca::m2::free_energy(p1, p2))
          << '\n';
  return kExitOk;
}

int cmd_edges(const RunConfig& c, std::ostream& out) {
  const auto p = model(c);
  const auto matrix = nedpca::build_matrix(p);
  if (c.format == "json") {
    Json edges = Json::array();
    for (std::uint64_t a = 0; a < matrix.n_states; ++a)
      for (std::uint64_t b = 0; b < matrix.n_states; ++b)
        if (matrix(a, b) > 0.0)
          edges.push_back({{"from", nedpca::Configuration(p.n, a).to_string()},
                           {"to", nedpca::Configuration(p.n, b).to_string()},
                           {"prob", matrix(a, b)},
                           {"reverse", matrix(b, a) > 0.0}});
    out << Json{{"n", p.n}, {"m", p.m}, {"p1", p.p1}, {"p2", p.p2}, {"edges", edges}}.dump(2) << '\n';
    return kExitOk;
  }
  out << "from,to,prob,reverse\n";
  for (std::uint64_t a = 0; a < matrix.n_states; ++a)
    for (std::uint64_t b = 0; b < matrix.n_states; ++b)
      if (matrix(a, b) > 0.0)
        out << nedpca::Configuration(p.n, a).to_string() << ',' << nedpca::Configuration(p.n, b).to_string() << ','
            << format_double(matrix(a, b)) << ',' << (matrix(b, a) > 0.0 ? 1 : 0) << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  using namespace nedpca::verify;
  if (c.quick && c.full) throw nedpca::InvalidParams("choose one of --quick and --full");
  const Level level = c.quick ? Level::Quick : Level::Full;
  int failures = 0, ran = 0;
  for (const Check& check : checks()) {
    if (!c.criteria.empty() && std::find(c.criteria.begin(), c.criteria.end(), check.id) == c.criteria.end())
      continue;
    const Report report = run_check(check, level);
    out << format_report(report) << std::endl;
    failures += !report.passed;
    ++ran;
  }
  if (ran == 0) throw nedpca::InvalidParams("no criterion matched");
  out << (ran - failures) << "/" << ran << " criteria passed\n";
  return failures == 0 ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"m-neighbourhood evaporation-deposition automaton on a ring"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("-n", c.n, "ring size");
  app.add_option("-m", c.m, "neighbourhood size");
  app.add_option("--p1", c.p1, "deposition probability (decimal or a/b)");
  app.add_option("--p2", c.p2, "blocking probability (decimal or a/b)");
  app.add_option("--seed", c.seed, "random seed");
  app.add_option("--chains", c.chains, "independent chains");
  app.add_option("--burn-in", c.burn_in, "steps discarded per chain");
  app.add_option("--samples", c.samples, "recorded states per chain");
  app.add_option("--thin", c.thin, "steps between recorded states");
  app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--exact-rational", c.exact_rational, "exact rational arithmetic");
  app.add_option("--grid", c.grid, "grid spec K or K,lo,hi");
  app.add_option("--out", c.out, "write output to FILE");
  app.add_option("--config", c.config, "flat key=value file; flags override it");

  auto* exact = app.add_subcommand("exact", "formula and solver stationary tables, Z, density, balance audit");
  auto* partition = app.add_subcommand("partition", "partition function and density");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo summary as JSON");
  simulate->add_option("--trace", c.trace, "newline-delimited states of chain 0 (capped at 100000)");
  auto* m2 = app.add_subcommand("m2", "m=2 free energy (p1,p2,F) or series");
  m2->alias("free-energy-grid");
  m2->add_flag("--series", c.series, "Z_n and density for n=0..N (N from -n, default 50)");
  auto* edges = app.add_subcommand("edges", "transition edge list");
  auto* verify = app.add_subcommand("verify", "acceptance checks");
  verify->add_flag("--quick", c.quick, "reduced sweeps");
  verify->add_flag("--full", c.full, "full sweeps (default)");
  verify->add_option("criteria", c.criteria, "criterion ids to run (default all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (!c.config.empty()) apply_config(app, c.config);
    if (edges->parsed() && app.get_option("-n")->count() == 0 && c.n == 0) c.n = 3;

    std::ofstream file;
    if (!c.out.empty()) {
      file.open(c.out);
      if (!file) throw nedpca::InvalidParams("cannot write '" + c.out + "'");
    }
    std::ostream& out = c.out.empty() ? std::cout : file;
    out.precision(17);

    if (exact->parsed()) return cmd_exact(c, out);
    if (partition->parsed()) return cmd_partition(c, out);
    if (simulate->parsed()) return cmd_simulate(c, out);
    if (m2->parsed()) return cmd_m2(c, out);
    if (edges->parsed()) return cmd_edges(c, out);
    if (verify->parsed()) return cmd_verify(c, out);
  } catch (const nedpca::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const nedpca::SolveFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerify;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
