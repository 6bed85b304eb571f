#include "qoc/runtime.hpp"

#include <chrono>
#include <limits>
#include <random>
#include <stdexcept>

namespace qoc {

WorkerPool::WorkerPool(int workers) : workers_(workers) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  threads_.reserve(workers - 1);
  for (int i = 0; i + 1 < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stopping_ = true;
  }
  work_ready_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::worker_loop() {
  long long seen = 0;
  for (;;) {
    {
      std::unique_lock<std::mutex> lock(mutex_);
      work_ready_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
    }
    drain();
  }
}

void WorkerPool::drain() {
  for (;;) {
    int index;
    const std::function<void(int)>* task;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (next_ >= count_) return;
      index = next_++;
      task = task_;
    }
    std::exception_ptr error;
    try {
      (*task)(index);
    } catch (...) {
      error = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (error) errors_.emplace_back(index, error);
      if (++completed_ == count_) batch_done_.notify_all();
    }
  }
}

void WorkerPool::run(int count, const std::function<void(int)>& task) {
  if (count <= 0) return;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    task_ = &task;
    count_ = count;
    next_ = 0;
    completed_ = 0;
    errors_.clear();
    ++generation_;
  }
  work_ready_.notify_all();
  drain();  // the caller participates
  std::unique_lock<std::mutex> lock(mutex_);
  batch_done_.wait(lock, [&] { return completed_ == count_; });
  task_ = nullptr;
  if (!errors_.empty()) {
    auto first = errors_.front();
    for (const auto& e : errors_)
      if (e.first < first.first) first = e;
    std::rethrow_exception(first.second);
  }
}

namespace {

struct ForwardOutputs {
  std::vector<ComplexMatrix> end_blocks;                // per task
  std::vector<std::vector<ComplexMatrix>> trajectories;  // per task (store mode)
  std::vector<ComplexMatrix> u_end;                     // per window, assembled
};

/// Phase A: forward-propagate every (window, column-block) task and
/// assemble the per-window end states.
ForwardOutputs run_forward_phase(const Problem& problem, const ShootingVariables& vars,
                                 WorkerPool& pool, bool keep_trajectories) {
  const int m_count = problem.grid.num_windows;
  const int n = problem.dim();
  const int width = problem.block_width();
  const int blocks = problem.num_blocks();
  const int tasks = m_count * blocks;

  ForwardOutputs out;
  out.end_blocks.resize(tasks);
  if (keep_trajectories) out.trajectories.resize(tasks);

  const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
  pool.run(tasks, [&](int tid) {
    const int m = tid / blocks;
    const int b = tid % blocks;
    try {
      const ComplexMatrix& w_init = (m == 0) ? identity : vars.windows[m - 1];
      Propagator prop(problem.model, problem.param, problem.grid);
      out.end_blocks[tid] =
          prop.propagate_window(w_init.middleCols(b * width, width), m, vars.alpha,
                                keep_trajectories ? &out.trajectories[tid] : nullptr);
    } catch (const std::exception& e) {
      throw std::runtime_error("task (window " + std::to_string(m) + ", block " +
                               std::to_string(b) + "): " + e.what());
    }
  });

  out.u_end.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    out.u_end[m].resize(n, n);
    for (int b = 0; b < blocks; ++b)
      out.u_end[m].middleCols(b * width, width) = out.end_blocks[m * blocks + b];
  }
  return out;
}

/// Serial exchange: per-window constraint norms (ascending m) and the
/// final-window infidelity, shared by the objective and gradient paths.
ObjectiveReport reduce_report(const Problem& problem, const ShootingVariables& vars,
                              const std::vector<ComplexMatrix>& u_end) {
  const int m_count = problem.grid.num_windows;
  std::vector<double> norms;
  norms.reserve(m_count - 1);
  for (int m = 0; m + 1 < m_count; ++m) norms.push_back((u_end[m] - vars.windows[m]).norm());
  const double j_final = generalized_infidelity(u_end[m_count - 1], problem.target);
  return finalize_report(problem, vars.alpha, j_final, std::move(norms));
}

}  // namespace

ObjectiveReport evaluate_objective_parallel(const Problem& problem, const ShootingVariables& vars,
                                            WorkerPool& pool) {
  if (static_cast<int>(vars.windows.size()) != problem.grid.num_windows - 1)
    throw std::invalid_argument("expected M-1 intermediate states");
  const auto fwd = run_forward_phase(problem, vars, pool, /*keep_trajectories=*/false);
  return reduce_report(problem, vars, fwd.u_end);
}

GradientResult evaluate_gradient_parallel(const Problem& problem, const ShootingVariables& vars,
                                          WorkerPool& pool) {
  if (static_cast<int>(vars.windows.size()) != problem.grid.num_windows - 1)
    throw std::invalid_argument("expected M-1 intermediate states");
  const int m_count = problem.grid.num_windows;
  const int n = problem.dim();
  const int width = problem.block_width();
  const int blocks = problem.num_blocks();
  const int tasks = m_count * blocks;
  const bool store = problem.storage == AdjointStorage::Store;

  auto fwd = run_forward_phase(problem, vars, pool, store);
  ObjectiveReport report = reduce_report(problem, vars, fwd.u_end);

  // Terminal conditions need the fully assembled end states (the final
  // window's involves the global overlap <V, U^M>), so they sit between the
  // two parallel phases.
  std::vector<ComplexMatrix> terminals(m_count);
  for (int m = 0; m < m_count; ++m) {
    terminals[m] = terminal_condition(m, m_count, fwd.u_end[m],
                                      m < m_count - 1 ? &vars.windows[m] : nullptr, problem.target,
                                      problem.mu);
  }

  std::vector<ComplexMatrix> lambda_blocks(tasks);
  std::vector<RealVector> grad_partials(tasks);
  pool.run(tasks, [&](int tid) {
    const int m = tid / blocks;
    const int b = tid % blocks;
    try {
      Propagator prop(problem.model, problem.param, problem.grid);
      const ComplexMatrix u_end_block = fwd.u_end[m].middleCols(b * width, width);
      auto adj = prop.propagate_adjoint_window(
          terminals[m].middleCols(b * width, width), m, vars.alpha,
          store ? &fwd.trajectories[tid] : nullptr, store ? nullptr : &u_end_block);
      lambda_blocks[tid] = std::move(adj.lambda_start);
      grad_partials[tid] = std::move(adj.grad_alpha);
    } catch (const std::exception& e) {
      throw std::runtime_error("task (window " + std::to_string(m) + ", block " +
                               std::to_string(b) + "): " + e.what());
    }
  });

  RealVector grad_alpha = RealVector::Zero(problem.param.total_params());
  for (int tid = 0; tid < tasks; ++tid) grad_alpha += grad_partials[tid];
  grad_alpha += 2.0 * problem.reg.gamma_tikhonov * vars.alpha;
  grad_alpha +=
      problem.reg.gamma_energy *
      energy_penalty(vars.alpha, problem.param, problem.grid.dt(), problem.grid.total_steps).grad;

  std::vector<ComplexMatrix> grad_w;
  grad_w.reserve(m_count - 1);
  for (int m = 0; m + 1 < m_count; ++m) {
    ComplexMatrix lambda_start(n, n);
    for (int b = 0; b < blocks; ++b)
      lambda_start.middleCols(b * width, width) = lambda_blocks[(m + 1) * blocks + b];
    grad_w.push_back(problem.mu * (vars.windows[m] - fwd.u_end[m]) - 2.0 * lambda_start);
  }

  GradientResult out;
  out.report = std::move(report);
  out.gradient = pack_gradient(grad_alpha, grad_w, vars.sigma);
  return out;
}

std::vector<BenchmarkRow> benchmark_gradient(const Problem& base_problem,
                                             const std::string& testcase,
                                             const std::vector<int>& window_counts,
                                             const std::vector<int>& worker_counts, int repeats,
                                             unsigned seed) {
  using clock = std::chrono::steady_clock;
  if (repeats < 1) repeats = 1;

  auto problem_for = [&](int m) {
    Problem p = base_problem;
    const long long steps = ((base_problem.grid.total_steps + m - 1) / m) * m;
    p.grid = WindowGrid::create(base_problem.grid.duration_ns, steps, m);
    return p;
  };
  auto vars_for = [&](const Problem& p) {
    std::mt19937_64 rng(seed);
    RealVector alpha(p.param.total_params());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      alpha[i] = mhz_to_radns(10.0) * (2.0 * u - 1.0);
    }
    return init_by_rollout(p, alpha, 0.1);
  };
  auto time_once = [&](const Problem& p, const ShootingVariables& v, int workers) {
    WorkerPool pool(workers);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < repeats; ++r) {
      const auto t0 = clock::now();
      evaluate_gradient_parallel(p, v, pool);
      const auto t1 = clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };

  const Problem reference_problem = problem_for(1);
  const auto reference_vars = vars_for(reference_problem);
  const double reference_time = time_once(reference_problem, reference_vars, 1);

  std::vector<BenchmarkRow> rows;
  for (int m : window_counts) {
    const Problem p = problem_for(m);
    const auto vars = vars_for(p);
    for (int workers : worker_counts) {
      BenchmarkRow row;
      row.testcase = testcase;
      row.windows = m;
      row.workers = workers;
      row.grad_walltime_s = (m == 1 && workers == 1) ? reference_time : time_once(p, vars, workers);
      row.speedup = reference_time / row.grad_walltime_s;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace qoc
