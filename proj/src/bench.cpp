#include "lcqp/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <thread>

#include "lcqp/errors.hpp"

namespace lcqp {

namespace {

// SplitMix64 finalizer: decorrelates consecutive instance ids so every run
// owns an independent stream regardless of worker scheduling.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_run_seed(std::uint64_t master_seed, int instance_id) {
  return mix(master_seed + 0x9E3779B97F4A7C15ULL *
                               (static_cast<std::uint64_t>(instance_id) + 1));
}

double draw_initial_state(std::uint64_t run_seed) {
  std::mt19937_64 gen(run_seed);
  const double u =
      static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
  return -2.0 + 4.0 * u;
}

RunRecord run_ivocp_instance(int instance_id, int N, std::uint64_t run_seed,
                             const SolverOptions& solver, SolverResult* full) {
  IvocpConfig cfg;
  cfg.N = N;
  IvocpProblem built = build_ivocp(cfg);

  const double x0_guess = draw_initial_state(run_seed);
  built.problem.x0 = forward_simulate(cfg, x0_guess);

  const auto t0 = std::chrono::steady_clock::now();
  SolverResult res = solve(built.problem, solver);
  const auto t1 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.instance_id = instance_id;
  rec.run_seed = run_seed;
  rec.N = N;
  rec.status = res.status;
  rec.objective = res.objective;
  rec.phi = res.phi;
  rec.stationarity = res.stationarity;
  rec.inner_iterations = res.inner_iterations;
  rec.outer_iterations = res.outer_iterations;
  rec.factorization_count = res.factorization_count;
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  rec.x0_guess = x0_guess;

  const double x0_star = analytic_optimal_x0();
  rec.x0_error = std::abs(extract_x0(res.x, built.map) - x0_star);

  const AnalyticTrajectory best = analytic_trajectory(x0_star);
  double acc = 0.0;
  for (int k = 0; k <= built.map.N; ++k) {
    const double t = built.h * static_cast<double>(k);
    const double d = res.x[built.map.state(k)] - best.state_at(t);
    acc += d * d;
  }
  rec.trajectory_rms = std::sqrt(acc / static_cast<double>(built.map.N + 1));

  if (full != nullptr) *full = std::move(res);
  return rec;
}

std::vector<RunRecord> run_ivocp_bench(const BenchConfig& cfg) {
  if (cfg.runs <= 0) throw InvalidValue("bench runs must be positive");
  if (cfg.grid_sizes.empty())
    throw InvalidValue("bench needs at least one grid size");
  for (int N : cfg.grid_sizes)
    if (N <= 0) throw InvalidValue("bench grid sizes must be positive");
  if (cfg.jobs < 1) throw InvalidValue("bench jobs must be positive");

  struct Task {
    int instance_id;
    int N;
    std::uint64_t run_seed;
  };
  std::vector<Task> tasks;
  tasks.reserve(cfg.grid_sizes.size() * static_cast<std::size_t>(cfg.runs));
  int id = 0;
  for (int N : cfg.grid_sizes)
    for (int r = 0; r < cfg.runs; ++r, ++id)
      tasks.push_back({id, N, derive_run_seed(cfg.seed, id)});

  std::vector<RunRecord> records(tasks.size());
  auto worker_loop = [&](std::atomic<std::size_t>& next) {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      records[i] = run_ivocp_instance(t.instance_id, t.N, t.run_seed,
                                      cfg.solver);
    }
  };

  const int jobs = cfg.jobs;
  if (jobs == 1) {
    std::atomic<std::size_t> next{0};
    worker_loop(next);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] { worker_loop(next); });
    for (auto& th : pool) th.join();
  }
  return records;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string csv_header() {
  return "# lcqp-bench v1\n"
         "instance,seed,N,status,objective,phi,stationarity,x0_error,"
         "inner_iterations,outer_iterations,factorization_count,wall_ms\n";
}

std::string csv_row(const RunRecord& r) {
  char head[96];
  std::snprintf(head, sizeof(head), "%d,%llu,%d,", r.instance_id,
                static_cast<unsigned long long>(r.run_seed), r.N);
  char tail[160];
  std::snprintf(tail, sizeof(tail), ",%ld,%d,%ld,%.3f\n", r.inner_iterations,
                r.outer_iterations, r.factorization_count, r.wall_ms);
  std::string row(head);
  row += to_string(r.status);
  row += ',';
  row += fmt_double(r.objective);
  row += ',';
  row += fmt_double(r.phi);
  row += ',';
  row += fmt_double(r.stationarity);
  row += ',';
  row += fmt_double(r.x0_error);
  row += tail;
  return row;
}

void write_csv(const std::string& path,
               const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << csv_header();
  for (const RunRecord& r : records) out << csv_row(r);
  if (!out) throw Error("failed writing output file: " + path);
}

std::vector<BenchAggregate> aggregate(const std::vector<RunRecord>& records) {
  std::vector<BenchAggregate> groups;
  for (const RunRecord& r : records) {
    BenchAggregate* g = nullptr;
    for (BenchAggregate& cand : groups)
      if (cand.N == r.N) g = &cand;
    if (g == nullptr) {
      groups.push_back({});
      g = &groups.back();
      g->N = r.N;
    }
    ++g->runs;
    if (r.status == SolveStatus::StationaryPoint) ++g->stationary;
    g->mean_phi += r.phi;
    g->mean_x0_error += r.x0_error;
    g->mean_trajectory_rms += r.trajectory_rms;
    g->mean_wall_ms += r.wall_ms;
  }
  for (BenchAggregate& g : groups) {
    const double inv = 1.0 / static_cast<double>(g.runs);
    g.mean_phi *= inv;
    g.mean_x0_error *= inv;
    g.mean_trajectory_rms *= inv;
    g.mean_wall_ms *= inv;
  }
  return groups;
}

}  // namespace lcqp
