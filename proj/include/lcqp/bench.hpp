#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcqp/solver.hpp"
#include "lcqp/transcription.hpp"

namespace lcqp {

struct BenchConfig {
  std::vector<int> grid_sizes{50};
  int runs = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
  SolverOptions solver;
};

struct RunRecord {
  int instance_id = 0;
  std::uint64_t run_seed = 0;
  int N = 0;
  SolveStatus status = SolveStatus::IterationLimit;
  double objective = 0.0;
  double phi = 0.0;
  double stationarity = 0.0;
  double x0_error = 0.0;  // |x_0 - continuous-time optimum|
  long inner_iterations = 0;
  int outer_iterations = 0;
  long factorization_count = 0;
  double wall_ms = 0.0;
  // Derived diagnostics, not serialized to CSV.
  double x0_guess = 0.0;
  double trajectory_rms = 0.0;  // state RMS distance to the continuous optimum
};

// Uniform draw in [-2, 2] from a counter-derived generator; depends only on
// the run seed.
double draw_initial_state(std::uint64_t run_seed);
std::uint64_t derive_run_seed(std::uint64_t master_seed, int instance_id);

// One benchmark instance: build the discretization, simulate the guessed
// initial state forward for a feasible start, solve, and score. `full`
// receives the complete solver result when non-null.
RunRecord run_ivocp_instance(int instance_id, int N, std::uint64_t run_seed,
                             const SolverOptions& solver,
                             SolverResult* full = nullptr);

// Full benchmark sweep. Rows are ordered grid-size-major, run-minor, and
// every non-timing field depends only on the configuration, independent of
// the number of worker threads.
std::vector<RunRecord> run_ivocp_bench(const BenchConfig& cfg);

// CSV serialization; first line is the format marker "# lcqp-bench v1".
std::string csv_header();
std::string csv_row(const RunRecord& r);
void write_csv(const std::string& path, const std::vector<RunRecord>& records);

struct BenchAggregate {
  int N = 0;
  int runs = 0;
  int stationary = 0;  // runs that ended at a certified stationary point
  double mean_phi = 0.0;
  double mean_x0_error = 0.0;
  double mean_trajectory_rms = 0.0;
  double mean_wall_ms = 0.0;
};

std::vector<BenchAggregate> aggregate(const std::vector<RunRecord>& records);

}  // namespace lcqp
