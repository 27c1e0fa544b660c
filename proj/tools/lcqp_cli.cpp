// Command-line front end: solve problem files, run the control benchmark,
// and cross-check small instances against the enumeration oracle.
//
// Exit codes for `solve`: 0 STATIONARY_POINT, 2 PENALTY_LIMIT or
// ITERATION_LIMIT, 3 INFEASIBLE, 1 usage/parse/runtime errors.
// LCQP_LOG ∈ {off, info, trace} controls stderr verbosity (default off).

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcqp/bench.hpp"
#include "lcqp/errors.hpp"
#include "lcqp/oracle.hpp"
#include "lcqp/problem.hpp"
#include "lcqp/solver.hpp"

namespace {

using nlohmann::ordered_json;

enum class LogLevel { Off, Info, Trace };

LogLevel log_level() {
  const char* env = std::getenv("LCQP_LOG");
  if (env == nullptr) return LogLevel::Off;
  const std::string v(env);
  if (v == "trace") return LogLevel::Trace;
  if (v == "info") return LogLevel::Info;
  if (v != "off" && !v.empty())
    std::cerr << "lcqp: unknown LCQP_LOG value '" << v << "', using off\n";
  return LogLevel::Off;
}

int status_exit_code(lcqp::SolveStatus s) {
  switch (s) {
    case lcqp::SolveStatus::StationaryPoint: return 0;
    case lcqp::SolveStatus::PenaltyLimit: return 2;
    case lcqp::SolveStatus::IterationLimit: return 2;
    case lcqp::SolveStatus::Infeasible: return 3;
  }
  return 1;
}

std::vector<double> parse_comma_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw lcqp::InvalidValue("cannot parse '" + tok + "' as a number");
    }
    if (used != tok.size())
      throw lcqp::InvalidValue("cannot parse '" + tok + "' as a number");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Solver flags shared by solve/bench/check; values bound directly so CLI11
// help shows the library defaults.
void add_solver_flags(CLI::App* sub, lcqp::SolverOptions* opts,
                      std::string* init_mode) {
  sub->add_option("--rho0", opts->rho0, "Initial penalty weight")
      ->capture_default_str();
  sub->add_option("--beta", opts->beta, "Penalty growth factor (> 1)")
      ->capture_default_str();
  sub->add_option("--tol-stat", opts->tol_stationarity,
                  "Stationarity tolerance for the inner loop")
      ->capture_default_str();
  sub->add_option("--tol-comp", opts->tol_complementarity,
                  "Complementarity tolerance for termination")
      ->capture_default_str();
  sub->add_option("--rho-max", opts->rho_max, "Penalty weight cap")
      ->capture_default_str();
  sub->add_option("--max-inner", opts->max_inner,
                  "Inner iteration cap per penalty stage")
      ->capture_default_str();
  sub->add_option("--activity-tol", opts->activity_tol,
                  "Absolute activity tolerance for the certificate")
      ->capture_default_str();
  sub->add_option("--init", *init_mode,
                  "Initialization: qp0 (penalty-free QP) or given (use x0)")
      ->check(CLI::IsMember({"qp0", "given"}));
}

void apply_init_mode(const std::string& init_mode, lcqp::SolverOptions* opts) {
  if (init_mode == "qp0") opts->init_mode = lcqp::InitMode::ZeroPenaltyQp;
  else if (init_mode == "given") opts->init_mode = lcqp::InitMode::GivenX0;
}

ordered_json certificate_to_json(const lcqp::CertificateReport& c) {
  ordered_json j;
  j["holds"] = c.holds;
  j["max_violation"] = c.max_violation;
  j["activity_tol"] = c.activity_tol;
  j["active_left"] = c.active_left;
  j["active_right"] = c.active_right;
  j["weakly_active"] = c.weakly_active;
  j["violations"] = c.violations;
  return j;
}

ordered_json result_to_json(const lcqp::SolverResult& res, bool full_trace) {
  ordered_json j;
  j["status"] = lcqp::to_string(res.status);
  j["objective"] = res.objective;
  j["phi"] = res.phi;
  j["stationarity"] = res.stationarity;
  j["final_rho"] = res.final_rho;
  j["outer_iterations"] = res.outer_iterations;
  j["inner_iterations"] = res.inner_iterations;
  j["factorization_count"] = res.factorization_count;
  j["refinement_count"] = res.refinement_count;
  j["active_set_changes"] = res.active_set_changes;
  j["x"] = res.x;
  ordered_json duals;
  duals["general"] = res.y_general;
  duals["left"] = res.y_left;
  duals["right"] = res.y_right;
  duals["box"] = res.y_box;
  j["duals"] = duals;
  j["certificate"] = certificate_to_json(res.certificate);

  // Per-stage summary: last record of each penalty stage.
  ordered_json stages = ordered_json::array();
  for (std::size_t i = 0; i < res.trace.records.size(); ++i) {
    const lcqp::TraceRecord& r = res.trace.records[i];
    const bool stage_end = i + 1 == res.trace.records.size() ||
                           res.trace.records[i + 1].outer != r.outer;
    if (!stage_end) continue;
    ordered_json s;
    s["stage"] = r.outer;
    s["rho"] = r.rho;
    s["inner_iterations"] = r.inner;
    s["stationarity"] = r.stationarity;
    s["phi"] = r.phi;
    s["merit"] = r.merit_value;
    stages.push_back(s);
  }
  ordered_json trace;
  trace["iterations"] = res.trace.records.size();
  trace["stages"] = stages;
  if (full_trace) {
    ordered_json recs = ordered_json::array();
    for (const lcqp::TraceRecord& r : res.trace.records) {
      ordered_json t;
      t["outer"] = r.outer;
      t["inner"] = r.inner;
      t["rho"] = r.rho;
      t["alpha"] = r.alpha;
      t["merit"] = r.merit_value;
      t["stationarity"] = r.stationarity;
      t["phi"] = r.phi;
      t["descent"] = r.descent;
      t["step_norm"] = r.step_norm;
      t["qp_changes"] = r.qp_changes;
      recs.push_back(t);
    }
    trace["records"] = recs;
  }
  j["trace"] = trace;
  return j;
}

void log_stage_summary(const lcqp::SolverResult& res, LogLevel lvl) {
  if (lvl == LogLevel::Off) return;
  if (lvl == LogLevel::Trace) {
    for (const lcqp::TraceRecord& r : res.trace.records)
      std::fprintf(stderr,
                   "lcqp: stage %d iter %d rho=%.3e alpha=%.3e stat=%.3e "
                   "phi=%.3e merit=%.9e\n",
                   r.outer, r.inner, r.rho, r.alpha, r.stationarity, r.phi,
                   r.merit_value);
  } else {
    int last_outer = -1;
    for (std::size_t i = 0; i < res.trace.records.size(); ++i) {
      const lcqp::TraceRecord& r = res.trace.records[i];
      const bool stage_end = i + 1 == res.trace.records.size() ||
                             res.trace.records[i + 1].outer != r.outer;
      if (!stage_end || r.outer == last_outer) continue;
      last_outer = r.outer;
      std::fprintf(stderr,
                   "lcqp: stage %d rho=%.3e inner=%d stat=%.3e phi=%.3e\n",
                   r.outer, r.rho, r.inner, r.stationarity, r.phi);
    }
  }
  std::fprintf(stderr, "lcqp: %s objective=%.9e phi=%.3e\n",
               lcqp::to_string(res.status), res.objective, res.phi);
}

void emit(const ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw lcqp::Error("cannot open output file: " + out_path);
  out << text;
  if (!out) throw lcqp::Error("failed writing output file: " + out_path);
}

int run_solve(const std::string& path, lcqp::SolverOptions opts,
              const std::string& init_mode, const std::string& x0_text,
              bool have_seed, std::uint64_t seed, const std::string& out_path) {
  lcqp::validate(opts);
  lcqp::LcqpProblem p = lcqp::load_problem(path);
  if (!x0_text.empty()) {
    lcqp::Vector x0 = parse_comma_list(x0_text);
    if (x0.size() != p.n())
      throw lcqp::InvalidValue("--x0 has " + std::to_string(x0.size()) +
                               " entries, problem has " +
                               std::to_string(p.n()));
    p.x0 = std::move(x0);
  } else if (have_seed && p.x0.empty()) {
    // Seeded random guess in [-2, 2]^n, same generator as the benchmark.
    std::mt19937_64 gen(seed);
    p.x0.resize(p.n());
    for (double& v : p.x0)
      v = -2.0 + 4.0 * (static_cast<double>(gen() >> 11) *
                        (1.0 / 9007199254740992.0));
  }
  apply_init_mode(init_mode, &opts);

  const lcqp::SolverResult res = lcqp::solve(p, opts);
  log_stage_summary(res, log_level());
  emit(result_to_json(res, log_level() == LogLevel::Trace), out_path);
  return status_exit_code(res.status);
}

int run_bench(const std::string& suite, lcqp::BenchConfig cfg,
              const std::string& init_mode, const std::string& out_path) {
  if (suite != "ivocp")
    throw lcqp::InvalidValue("unknown benchmark suite '" + suite +
                             "' (available: ivocp)");
  lcqp::validate(cfg.solver);
  lcqp::SolverOptions opts = cfg.solver;
  apply_init_mode(init_mode, &opts);
  cfg.solver = opts;

  const std::vector<lcqp::RunRecord> records = lcqp::run_ivocp_bench(cfg);

  if (out_path.empty()) {
    std::cout << lcqp::csv_header();
    for (const lcqp::RunRecord& r : records) std::cout << lcqp::csv_row(r);
  } else {
    lcqp::write_csv(out_path, records);
  }

  // Aggregate table (Table-I style) on the channel not carrying the CSV.
  std::FILE* tab = out_path.empty() ? stderr : stdout;
  std::fprintf(tab,
               "%6s %6s %10s %14s %14s %14s %12s\n", "N", "runs",
               "stationary", "mean_phi", "mean_x0_err", "mean_traj_rms",
               "mean_ms");
  for (const lcqp::BenchAggregate& g : lcqp::aggregate(records))
    std::fprintf(tab, "%6d %6d %10d %14.6e %14.6e %14.6e %12.3f\n", g.N,
                 g.runs, g.stationary, g.mean_phi, g.mean_x0_error,
                 g.mean_trajectory_rms, g.mean_wall_ms);
  return 0;
}

int run_check(const std::string& path, lcqp::SolverOptions opts,
              const std::string& init_mode, const std::string& out_path) {
  lcqp::validate(opts);
  apply_init_mode(init_mode, &opts);
  const lcqp::LcqpProblem p = lcqp::load_problem(path);

  const lcqp::oracle::GlobalResult gres =
      lcqp::oracle::global_solve_by_enumeration(p);
  const lcqp::SolverResult res = lcqp::solve(p, opts);
  log_stage_summary(res, log_level());

  ordered_json j;
  ordered_json solver;
  solver["status"] = lcqp::to_string(res.status);
  solver["objective"] = res.objective;
  solver["phi"] = res.phi;
  solver["x"] = res.x;
  solver["certificate_holds"] = res.certificate.holds;
  j["solver"] = solver;

  ordered_json orc;
  orc["feasible"] = gres.feasible;
  if (gres.feasible) {
    orc["objective"] = gres.objective;
    orc["x"] = gres.x;
    ordered_json sides = ordered_json::array();
    for (lcqp::oracle::BranchSide s : gres.branch)
      sides.push_back(s == lcqp::oracle::BranchSide::LeftZero ? "left_zero"
                                                              : "right_zero");
    orc["branch"] = sides;
  }
  orc["branches_total"] = gres.reports.size();
  j["oracle"] = orc;

  if (gres.feasible && res.status != lcqp::SolveStatus::Infeasible) {
    j["gap"] = res.objective - gres.objective;
    // Branch stationarity: the solver's point must coincide with the optimum
    // of some feasible branch.
    double best_dist = std::numeric_limits<double>::infinity();
    int best_branch = -1;
    for (std::size_t bi = 0; bi < gres.reports.size(); ++bi) {
      const lcqp::oracle::BranchReport& br = gres.reports[bi];
      if (!br.feasible) continue;
      double d = 0.0;
      for (std::size_t i = 0; i < res.x.size(); ++i)
        d = std::max(d, std::abs(res.x[i] - br.x[i]));
      if (d < best_dist) {
        best_dist = d;
        best_branch = static_cast<int>(bi);
      }
    }
    j["branch_distance"] = best_dist;
    j["branch_index"] = best_branch;
    j["branch_stationary"] = best_dist <= 1e-6;
  }
  emit(j, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LCQP toolkit: penalty-homotopy solver, benchmark, oracle check"};
  app.require_subcommand(1);

  // solve
  std::string solve_path, solve_init, solve_x0, solve_out;
  std::uint64_t solve_seed = 0;
  lcqp::SolverOptions solve_opts;
  CLI::App* solve = app.add_subcommand("solve", "Solve a problem file");
  solve->add_option("problem", solve_path, "Problem file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  add_solver_flags(solve, &solve_opts, &solve_init);
  solve->add_option("--x0", solve_x0, "Initial guess, comma-separated");
  CLI::Option* seed_opt =
      solve->add_option("--seed", solve_seed,
                        "Seed for a random initial guess in [-2,2]^n "
                        "(ignored when --x0 or a file x0 is present)");
  solve->add_option("--out", solve_out, "Write the JSON report here");

  // bench
  std::string bench_suite, bench_init, bench_out;
  lcqp::BenchConfig bench_cfg;
  bench_cfg.grid_sizes.clear();
  bench_cfg.jobs = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));
  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("suite", bench_suite, "Benchmark suite (ivocp)")
      ->required();
  bench->add_option("--N", bench_cfg.grid_sizes,
                    "Discretization size, repeatable")
      ->expected(-1);
  bench->add_option("--runs", bench_cfg.runs, "Runs per grid size")
      ->capture_default_str();
  bench->add_option("--seed", bench_cfg.seed, "Master seed")
      ->capture_default_str();
  bench->add_option("--jobs", bench_cfg.jobs, "Worker threads")
      ->capture_default_str();
  bench->add_option("--out", bench_out, "Write the CSV here");
  add_solver_flags(bench, &bench_cfg.solver, &bench_init);

  // check
  std::string check_path, check_init, check_out;
  lcqp::SolverOptions check_opts;
  CLI::App* check =
      app.add_subcommand("check", "Compare against the enumeration oracle");
  check->add_option("problem", check_path, "Problem file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  check->add_option("--out", check_out, "Write the JSON report here");
  add_solver_flags(check, &check_opts, &check_init);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed())
      return run_solve(solve_path, solve_opts, solve_init, solve_x0,
                       seed_opt->count() > 0, solve_seed, solve_out);
    if (bench->parsed()) {
      if (bench_cfg.grid_sizes.empty()) bench_cfg.grid_sizes.push_back(50);
      return run_bench(bench_suite, bench_cfg, bench_init, bench_out);
    }
    if (check->parsed())
      return run_check(check_path, check_opts, check_init, check_out);
  } catch (const lcqp::Error& e) {
    std::cerr << "lcqp: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lcqp: internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
