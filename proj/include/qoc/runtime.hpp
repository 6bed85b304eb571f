#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qoc/shooting.hpp"

namespace qoc {

/// Fixed pool of workers executing an indexed batch of independent tasks.
/// The calling thread participates, so workers == 1 runs everything inline
/// on the caller. Task outputs must go to per-index slots; any reduction is
/// done by the caller afterwards, in a fixed order, which is what makes the
/// evaluators bitwise-independent of the worker count and of scheduling.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int workers() const { return workers_; }

  /// Runs task(i) for every i in [0, count); blocks until all complete.
  /// If tasks throw, the exception with the smallest task index is rethrown.
  void run(int count, const std::function<void(int)>& task);

 private:
  void worker_loop();
  void drain();

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable work_ready_, batch_done_;
  const std::function<void(int)>* task_ = nullptr;
  int count_ = 0;
  int next_ = 0;
  int completed_ = 0;
  long long generation_ = 0;
  bool stopping_ = false;
  std::vector<std::pair<int, std::exception_ptr>> errors_;
};

/// Penalty objective evaluated over the (window x column-block) task grid.
/// Identical output for every worker count: per-task results land in their
/// own slots and the combination runs serially in (m, block) order.
ObjectiveReport evaluate_objective_parallel(const Problem& problem, const ShootingVariables& vars,
                                            WorkerPool& pool);

/// Objective and packed gradient over the task grid: a forward phase, a
/// serial exchange assembling constraint terms and adjoint terminal
/// conditions (the shared-memory analogue of the neighbor exchange), and a
/// backward phase. Deterministic for every worker count.
GradientResult evaluate_gradient_parallel(const Problem& problem, const ShootingVariables& vars,
                                          WorkerPool& pool);

struct BenchmarkRow {
  std::string testcase;
  int windows = 0;
  int workers = 0;
  double grad_walltime_s = 0.0;
  double speedup = 0.0;  // relative to M=1, workers=1
};

/// Times one gradient evaluation per (M, workers) combination; wall times
/// are the minimum over `repeats` runs. The M=1, workers=1 reference is
/// always measured (and reported only if requested).
std::vector<BenchmarkRow> benchmark_gradient(const Problem& base_problem,
                                             const std::string& testcase,
                                             const std::vector<int>& window_counts,
                                             const std::vector<int>& worker_counts, int repeats,
                                             unsigned seed);

}  // namespace qoc
