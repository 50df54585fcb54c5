#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dislab/densities.hpp"
#include "dislab/interaction.hpp"
#include "dislab/io.hpp"
#include "dislab/potential.hpp"
#include "dislab/rw_simulator.hpp"

namespace dislab {

const std::vector<std::string>& experiment_ids();

// Parsed from a JSON object; see README for the key list.
struct ExperimentConfig {
  std::string experiment;
  std::vector<double> eps, beta, delta, T;
  std::vector<int> n;
  std::vector<double> snapshot_times;  // empty: only T
  long replications = 0;
  std::uint64_t seed = 0;
  InitialCondition initial;
  Mollifier mollifier = Mollifier::bump;
  GreenNormalization green = GreenNormalization::poisson;
  double C = 1.0, C1 = 1.0, C2 = 1.0;  // C, C', C''
  std::string output;                  // directory for <experiment>.csv; empty: no file
  std::string potential_cache;         // empty: no cache
  int threads = 0;                     // 0: hardware concurrency
  std::size_t max_states = 1u << 22;   // largest state space / transport problem accepted

  // Model knobs.
  int mf_grid = 0;        // 0: automatic
  int fp_grid = 0;        // 0: automatic
  int bl_coarse = 32;     // block grid for atomizing continuum densities
  double mf_dt = 1e-3;
  double mfe_dt = 0.0;    // 0: largest stable step
  double sde_dt = 0.0;    // 0: default_sde_step
  KernelEval kernel = KernelEval::interpolated;
  Scheduler scheduler = Scheduler::gillespie;
  bool random_signs = false;
  bool coupling = false;  // rw-vs-mfe: also report the coupling identity per direction
  std::string test_function = "product";
  std::string force = "pinned";
  double force_strength = 1.0;
  std::vector<std::string> bounds;  // bounds-only: ids to evaluate (default all)
  double initial_difference = 0.0;  // bounds-only input
  double kappa = 0.0;               // bounds-only input
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};
ValidationReport validate_config(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> failures;  // one message per cell that did not complete
};

// Runs every grid cell; rows are also streamed to `csv` (header first) in a
// fixed order. Throws std::invalid_argument when validation fails.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* csv = nullptr);

// Seed of one grid cell, derived from the master seed and the cell's own
// parameters so a single row can be rerun in isolation.
std::uint64_t cell_seed(std::uint64_t master, double eps, int n, double beta, double delta, double T);
std::uint64_t replication_seed(std::uint64_t cell, long replication);

// Calls body(i) for i in [0, count) on `threads` workers. Exceptions are
// rethrown after all workers stop (the lowest failing index wins).
void parallel_for(long count, int threads, const std::function<void(long)>& body);

// Sums over both species of ||f||_{1,inf} = sup|f| + sup|grad f| and of sup|f|
// for the initial density f = d rho0 / d nu, on an m x m grid.
struct InitialNorms {
  double lip_sum = 0.0;
  double sup_sum = 0.0;
};
InitialNorms initial_norms(const InitialCondition& ic, int m = 256);

}  // namespace dislab
