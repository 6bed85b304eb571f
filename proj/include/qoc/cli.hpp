#pragma once

#include <string>
#include <vector>

#include "qoc/config.hpp"
#include "qoc/problem.hpp"
#include "qoc/runtime.hpp"

namespace qoc {

struct BuiltProblem {
  Problem problem;
  SystemSpec spec;
  long long requested_steps = 0;  // before rounding up to a multiple of M
  int effective_workers = 1;
};

/// Validates the config and compiles it into an immutable Problem. Rounds
/// total_steps up to the next multiple of the window count (recorded via
/// requested_steps vs grid.total_steps) and resolves the defaulted
/// coefficients mu = 2/n and gamma_tikhonov = 1e-3/d.
BuiltProblem build_problem(const RunConfig& config);

struct SigmaScanEntry {
  double sigma = 0.0;
  int iterations = 0;
  std::string status;
  double rollout_estimate = 0.0;
  double infidelity = 0.0;
};

struct OptimizeOutcome {
  std::string status;
  int iterations = 0;
  double final_objective = 0.0;
  double final_infidelity = 0.0;      // J_V(U^M) at the final iterate
  double rollout_estimate = 0.0;
  double rollout_infidelity = 0.0;    // true value from the post-hoc roll-out
  std::vector<double> constraint_norms;
  double sigma = 0.0;
  double walltime_s = 0.0;
  std::vector<SigmaScanEntry> scan;
};

/// Random initial controls, roll-out initialized intermediate states,
/// projected L-BFGS (scanning sigma when a list is given and keeping the
/// run with the fewest iterations), one final sequential roll-out, and the
/// history.csv / pulses.csv / params.json / report.json artifacts.
OptimizeOutcome run_optimize(const RunConfig& config);

struct GradCheckBlock {
  std::string name;
  int tested = 0;
  double max_rel = 0.0;
};

struct GradCheckOutcome {
  double max_rel = 0.0;
  std::vector<GradCheckBlock> blocks;
  int components = 0;
  double fd_step = 0.0;
};

/// Central finite differences of the packed objective against the adjoint
/// gradient on a random subset of components (stratified over the alpha,
/// Re W and Im W blocks), at a seeded random infeasible point.
GradCheckOutcome run_gradcheck(const RunConfig& config, int components, double fd_step,
                               bool write_files);

struct SimulateOutcome {
  double trace_infidelity = 0.0;
  double generalized_infidelity = 0.0;
  double unitarity_defect = 0.0;
};

/// Sequential roll-out of a stored control vector (params.json or any JSON
/// document with an "alpha" array); writes the final state and infidelities.
SimulateOutcome run_simulate(const RunConfig& config, const std::string& alpha_file);

std::vector<BenchmarkRow> run_benchmark(const RunConfig& config, const std::vector<int>& windows,
                                        const std::vector<int>& workers, int repeats);

// Subcommand wrappers: exit code 0 = ok, 1 = numerical failure, 2 = config error.
int cmd_optimize(const RunConfig& config);
int cmd_simulate(const RunConfig& config, const std::string& alpha_file);
int cmd_gradcheck(const RunConfig& config, int components, double fd_step);
int cmd_benchmark(const RunConfig& config, const std::vector<int>& windows,
                  const std::vector<int>& workers, int repeats);

}  // namespace qoc
