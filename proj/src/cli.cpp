#include "qoc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <thread>

#include <json.hpp>

#include "qoc/optimizer.hpp"

namespace qoc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

ComplexMatrix load_target_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open target file \"" + path + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("target file is not valid JSON: ") + e.what());
  }
  if (!j.contains("re") || !j.contains("im"))
    throw ConfigError("target file must contain \"re\" and \"im\" matrices");
  const auto re = j["re"].get<std::vector<std::vector<double>>>();
  const auto im = j["im"].get<std::vector<std::vector<double>>>();
  if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
    throw ConfigError("target matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  ComplexMatrix v(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(re[i].size()) != n || static_cast<int>(im[i].size()) != n)
      throw ConfigError("target matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    for (int k = 0; k < n; ++k) v(i, k) = Complex(re[i][k], im[i][k]);
  }
  if ((v.adjoint() * v - ComplexMatrix::Identity(n, n)).norm() > 1e-12)
    throw ConfigError("target matrix is not unitary (V^t V != I beyond 1e-12)");
  return v;
}

/// Box bounds in packed coordinates: the control block gets the physical
/// amplitude limit (optionally pinning the first/last spline coefficients
/// to zero), the W blocks are unconstrained.
std::pair<RealVector, RealVector> make_bounds(const Problem& problem, const RunConfig& cfg,
                                              long long packed_len) {
  const double inf = std::numeric_limits<double>::infinity();
  const double box = mhz_to_radns(cfg.box_bound_mhz);
  const int d = problem.param.total_params();
  RealVector lower = RealVector::Constant(packed_len, -inf);
  RealVector upper = RealVector::Constant(packed_len, inf);
  lower.head(d).setConstant(-box);
  upper.head(d).setConstant(box);
  if (cfg.pin_boundary_splines) {
    const auto& p = problem.param;
    for (int j = 0; j < p.num_qubits(); ++j)
      for (int f = 0; f < p.num_carriers(j); ++f)
        for (int part = 0; part < 2; ++part)
          for (int s : {0, p.num_splines - 1}) {
            const int idx = p.param_index(j, f, s, part);
            lower[idx] = upper[idx] = 0.0;
          }
  }
  return {std::move(lower), std::move(upper)};
}

void apply_pinning(const Problem& problem, const RunConfig& cfg, RealVector& alpha) {
  if (!cfg.pin_boundary_splines) return;
  const auto& p = problem.param;
  for (int j = 0; j < p.num_qubits(); ++j)
    for (int f = 0; f < p.num_carriers(j); ++f)
      for (int part = 0; part < 2; ++part)
        for (int s : {0, p.num_splines - 1}) alpha[p.param_index(j, f, s, part)] = 0.0;
}

void write_history_csv(const fs::path& path, const std::vector<IterationRecord>& history) {
  std::string text =
      "iter,total_objective,infidelity,penalty,rollout_estimate,proj_grad_norm,step_length,"
      "walltime_s\n";
  for (const auto& r : history) {
    text += std::to_string(r.iter) + "," + fmt17(r.total) + "," + fmt17(r.infidelity) + "," +
            fmt17(r.penalty) + "," + fmt17(r.estimate) + "," + fmt17(r.proj_grad_norm) + "," +
            fmt17(r.step_length) + "," + fmt17(r.walltime_s) + "\n";
  }
  write_text(path, text);
}

void write_pulses_csv(const fs::path& path, const Problem& problem, const RealVector& alpha) {
  std::string text = "t_ns,qubit,re_d_mhz,im_d_mhz\n";
  const long long steps = problem.grid.total_steps;
  for (long long k = 0; k <= steps; ++k) {
    const double t = problem.grid.step_time(k);
    for (int j = 0; j < problem.model.num_qubits; ++j) {
      const Complex d = eval_control(j, t, alpha, problem.param);
      text += fmt17(t) + "," + std::to_string(j + 1) + "," + fmt17(radns_to_mhz(d.real())) + "," +
              fmt17(radns_to_mhz(d.imag())) + "\n";
    }
  }
  write_text(path, text);
}

json report_common(const BuiltProblem& bp, const RunConfig& cfg) {
  json j;
  j["windows"] = bp.problem.grid.num_windows;
  j["total_steps_requested"] = bp.requested_steps;
  j["total_steps_effective"] = bp.problem.grid.total_steps;
  j["mu"] = bp.problem.mu;
  j["gamma_tikhonov"] = bp.problem.reg.gamma_tikhonov;
  j["gamma_energy"] = bp.problem.reg.gamma_energy;
  j["num_params"] = bp.problem.param.total_params();
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

BuiltProblem build_problem(const RunConfig& cfg) {
  try {
    BuiltProblem bp;
    bp.spec.num_qubits = cfg.num_qubits;
    bp.spec.freq_ghz = cfg.freq_ghz;
    bp.spec.coupling_mhz = cfg.coupling_mhz;
    bp.spec.carrier_mhz = cfg.carrier_mhz;
    bp.spec.rot_freq_ghz =
        cfg.rot_freq_ghz ? *cfg.rot_freq_ghz : SystemSpec::default_rot_freq(cfg.freq_ghz);
    bp.spec.validate();

    Problem& p = bp.problem;
    p.model = Model::build(bp.spec);
    p.param = ControlParameterization::create(cfg.duration_ns, cfg.knot_spacing_ns, cfg.carrier_mhz);

    if (cfg.windows < 1) throw ConfigError("windows must be >= 1");
    if (cfg.total_steps < cfg.windows) throw ConfigError("total_steps must be >= windows");
    bp.requested_steps = cfg.total_steps;
    const long long steps =
        ((cfg.total_steps + cfg.windows - 1) / cfg.windows) * static_cast<long long>(cfg.windows);
    p.grid = WindowGrid::create(cfg.duration_ns, steps, cfg.windows);

    const int n = p.model.dim;
    if (cfg.target == "qft")
      p.target = qft_target(n);
    else
      p.target = load_target_file(cfg.target, n);

    p.mu = cfg.mu ? *cfg.mu : 2.0 / static_cast<double>(n);
    if (p.mu <= 0.0) throw ConfigError("mu must be positive");
    p.reg.gamma_tikhonov =
        cfg.gamma_tikhonov ? *cfg.gamma_tikhonov : 1e-3 / static_cast<double>(p.param.total_params());
    p.reg.gamma_energy = cfg.gamma_energy;

    if (cfg.adjoint_storage == "store")
      p.storage = AdjointStorage::Store;
    else if (cfg.adjoint_storage == "recompute")
      p.storage = AdjointStorage::Recompute;
    else
      throw ConfigError("adjoint_storage must be \"store\" or \"recompute\"");

    p.columns_per_block = cfg.columns_per_block;
    if (p.columns_per_block < 0 || (p.columns_per_block > 0 && n % p.columns_per_block != 0))
      throw ConfigError("columns_per_block must divide the Hilbert dimension");

    if (cfg.sigma.empty()) throw ConfigError("sigma list must not be empty");
    for (double s : cfg.sigma)
      if (s <= 0.0) throw ConfigError("sigma values must be positive");
    if (cfg.init_amplitude_mhz > cfg.box_bound_mhz)
      throw ConfigError("init_amplitude_mhz must not exceed box_bound_mhz");

    bp.effective_workers =
        cfg.workers > 0 ? cfg.workers
                        : std::max(1u, std::thread::hardware_concurrency());
    return bp;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

OptimizeOutcome run_optimize(const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  BuiltProblem bp = build_problem(cfg);
  const Problem& problem = bp.problem;
  const int n = problem.dim();
  const int m_count = problem.grid.num_windows;
  const int d = problem.param.total_params();

  WorkerPool pool(bp.effective_workers);
  RealVector alpha0 = random_init_alpha(problem.param, cfg.seed, cfg.init_amplitude_mhz);
  apply_pinning(problem, cfg, alpha0);

  OptimizerConfig ocfg;
  ocfg.max_iters = cfg.max_iters;
  ocfg.tol_estimate = cfg.tol_estimate;
  ocfg.tol_gradnorm = cfg.tol_gradnorm;
  ocfg.stop_below_infidelity = cfg.stop_below_infidelity;

  OptimizeOutcome out;
  MinimizeResult best;
  bool have_best = false;
  for (double sigma : cfg.sigma) {
    ShootingVariables vars = init_by_rollout(problem, alpha0, sigma);
    RealVector x0 = pack(vars);
    auto [lower, upper] = make_bounds(problem, cfg, x0.size());
    auto oracle = [&](const RealVector& x) {
      ShootingVariables v = unpack(x, d, n, m_count, sigma);
      GradientResult g = evaluate_gradient_parallel(problem, v, pool);
      return OracleEval{g.report.total, std::move(g.gradient), std::move(g.report)};
    };
    MinimizeResult res = minimize(oracle, std::move(x0), lower, upper, ocfg);

    SigmaScanEntry entry;
    entry.sigma = sigma;
    entry.iterations = res.iterations;
    entry.status = to_string(res.status);
    entry.rollout_estimate = res.history.back().estimate;
    entry.infidelity = res.history.back().infidelity;
    out.scan.push_back(entry);

    if (!have_best || res.iterations < best.iterations) {
      best = std::move(res);
      out.sigma = sigma;
      have_best = true;
    }
  }

  ShootingVariables final_vars = unpack(best.x, d, n, m_count, out.sigma);
  const ObjectiveReport report = evaluate_objective_parallel(problem, final_vars, pool);

  Propagator prop(problem.model, problem.param, problem.grid);
  const ComplexMatrix u_rollout = prop.rollout(final_vars.alpha);
  out.rollout_infidelity = generalized_infidelity(u_rollout, problem.target);

  out.status = to_string(best.status);
  out.iterations = best.iterations;
  out.final_objective = report.total;
  out.final_infidelity = report.generalized_infidelity;
  out.rollout_estimate = report.rollout_estimate;
  out.constraint_norms = report.constraint_norms;
  out.walltime_s = std::chrono::duration<double>(clock::now() - t_start).count();

  // Artifacts.
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_history_csv(dir / "history.csv", best.history);
  write_pulses_csv(dir / "pulses.csv", problem, final_vars.alpha);

  json params;
  params["alpha"] = std::vector<double>(final_vars.alpha.data(),
                                        final_vars.alpha.data() + final_vars.alpha.size());
  params["sigma"] = out.sigma;
  json cfg_echo = json::parse(config_to_json(cfg));
  // Run-environment fields that do not affect the numbers; dropping them
  // keeps artifacts byte-identical across worker counts and directories.
  cfg_echo.erase("workers");
  cfg_echo.erase("output_dir");
  params["config"] = std::move(cfg_echo);
  write_text(dir / "params.json", params.dump(2) + "\n");

  json rep = report_common(bp, cfg);
  rep["status"] = out.status;
  rep["iterations"] = out.iterations;
  rep["final_objective"] = out.final_objective;
  rep["final_generalized_infidelity"] = out.final_infidelity;
  rep["rollout_estimate"] = out.rollout_estimate;
  rep["rollout_infidelity"] = out.rollout_infidelity;
  rep["constraint_norms"] = out.constraint_norms;
  rep["sigma"] = out.sigma;
  rep["tikhonov"] = report.tikhonov;
  rep["energy"] = report.energy;
  rep["penalty_value"] = report.penalty_value;
  json scan = json::array();
  for (const auto& e : out.scan) {
    scan.push_back({{"sigma", e.sigma},
                    {"iterations", e.iterations},
                    {"status", e.status},
                    {"rollout_estimate", e.rollout_estimate},
                    {"infidelity", e.infidelity}});
  }
  rep["sigma_scan"] = scan;
  rep["walltime_s"] = out.walltime_s;
  write_text(dir / "report.json", rep.dump(2) + "\n");
  return out;
}

GradCheckOutcome run_gradcheck(const RunConfig& cfg, int components, double fd_step,
                               bool write_files) {
  BuiltProblem bp = build_problem(cfg);
  const Problem& problem = bp.problem;
  const int n = problem.dim();
  const int m_count = problem.grid.num_windows;
  const int d = problem.param.total_params();
  const double sigma = cfg.sigma.front();

  // Random infeasible point: random controls, roll-out W plus noise.
  RealVector alpha = random_init_alpha(problem.param, cfg.seed, cfg.init_amplitude_mhz);
  ShootingVariables vars = init_by_rollout(problem, alpha, sigma);
  std::mt19937_64 rng(cfg.seed + 1);
  auto uniform = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  for (ComplexMatrix& w : vars.windows)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) w(i, k) += 0.05 * Complex(uniform(), uniform());

  const RealVector x = pack(vars);
  const GradientResult analytic = assemble_gradient(problem, vars);
  const RealVector& grad = analytic.gradient;
  const double filter = 1e-10 * grad.norm();

  auto objective_at = [&](const RealVector& xq) {
    const ShootingVariables v = unpack(xq, d, n, m_count, sigma);
    return penalty_objective(problem, v.alpha, v.windows).total;
  };

  // Stratified component selection: half from the control block, the rest
  // split between the Re W and Im W coordinates.
  const long long packed_len = x.size();
  std::vector<long long> alpha_idx, wre_idx, wim_idx;
  for (long long i = 0; i < packed_len; ++i) {
    if (i < d)
      alpha_idx.push_back(i);
    else if (((i - d) / (static_cast<long long>(n) * n)) % 2 == 0)
      wre_idx.push_back(i);
    else
      wim_idx.push_back(i);
  }
  std::shuffle(alpha_idx.begin(), alpha_idx.end(), rng);
  std::shuffle(wre_idx.begin(), wre_idx.end(), rng);
  std::shuffle(wim_idx.begin(), wim_idx.end(), rng);
  const int want_alpha = m_count > 1 ? (components + 1) / 2 : components;
  const int want_wre = m_count > 1 ? (components - want_alpha + 1) / 2 : 0;
  const int want_wim = m_count > 1 ? components - want_alpha - want_wre : 0;
  std::vector<long long> selected;
  for (int i = 0; i < want_alpha && i < static_cast<int>(alpha_idx.size()); ++i)
    selected.push_back(alpha_idx[i]);
  for (int i = 0; i < want_wre && i < static_cast<int>(wre_idx.size()); ++i)
    selected.push_back(wre_idx[i]);
  for (int i = 0; i < want_wim && i < static_cast<int>(wim_idx.size()); ++i)
    selected.push_back(wim_idx[i]);

  GradCheckOutcome out;
  out.fd_step = fd_step;
  out.components = static_cast<int>(selected.size());
  out.blocks = {{"alpha", 0, 0.0}, {"w_re", 0, 0.0}, {"w_im", 0, 0.0}};

  RealVector xq = x;
  for (long long i : selected) {
    xq[i] = x[i] + fd_step;
    const double f_plus = objective_at(xq);
    xq[i] = x[i] - fd_step;
    const double f_minus = objective_at(xq);
    xq[i] = x[i];
    const double fd = (f_plus - f_minus) / (2.0 * fd_step);
    const double ad = grad[i];
    if (std::abs(ad) <= filter && std::abs(fd) <= filter) continue;
    const double rel = std::abs(ad - fd) / std::max(std::abs(ad), std::abs(fd));
    GradCheckBlock& block =
        out.blocks[i < d ? 0 : (((i - d) / (static_cast<long long>(n) * n)) % 2 == 0 ? 1 : 2)];
    block.tested += 1;
    block.max_rel = std::max(block.max_rel, rel);
    out.max_rel = std::max(out.max_rel, rel);
  }

  if (write_files) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    json j = report_common(bp, cfg);
    j["fd_step"] = out.fd_step;
    j["components"] = out.components;
    j["max_rel_error"] = out.max_rel;
    for (const auto& b : out.blocks) {
      j["blocks"][b.name] = {{"tested", b.tested}, {"max_rel_error", b.max_rel}};
    }
    write_text(dir / "gradcheck.json", j.dump(2) + "\n");
  }
  return out;
}

SimulateOutcome run_simulate(const RunConfig& cfg, const std::string& alpha_file) {
  BuiltProblem bp = build_problem(cfg);
  const Problem& problem = bp.problem;
  const int n = problem.dim();

  std::ifstream in(alpha_file);
  if (!in) throw ConfigError("cannot open alpha file \"" + alpha_file + "\"");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("alpha file is not valid JSON: ") + e.what());
  }
  if (!j.contains("alpha")) throw ConfigError("alpha file must contain an \"alpha\" array");
  const auto values = j["alpha"].get<std::vector<double>>();
  if (static_cast<int>(values.size()) != problem.param.total_params())
    throw ConfigError("alpha has length " + std::to_string(values.size()) + ", expected " +
                      std::to_string(problem.param.total_params()));
  RealVector alpha = Eigen::Map<const RealVector>(values.data(), values.size());

  Propagator prop(problem.model, problem.param, problem.grid);
  const ComplexMatrix u = prop.rollout(alpha);

  SimulateOutcome out;
  out.trace_infidelity = trace_infidelity(u, problem.target);
  out.generalized_infidelity = generalized_infidelity(u, problem.target);
  out.unitarity_defect = (u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm();

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::string csv = "row,col,re,im\n";
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      csv += std::to_string(i) + "," + std::to_string(k) + "," + fmt17(u(i, k).real()) + "," +
             fmt17(u(i, k).imag()) + "\n";
  write_text(dir / "final_state.csv", csv);

  json rep = report_common(bp, cfg);
  rep["trace_infidelity"] = out.trace_infidelity;
  rep["generalized_infidelity"] = out.generalized_infidelity;
  rep["unitarity_defect"] = out.unitarity_defect;
  write_text(dir / "simulate.json", rep.dump(2) + "\n");
  return out;
}

std::vector<BenchmarkRow> run_benchmark(const RunConfig& cfg, const std::vector<int>& windows,
                                        const std::vector<int>& workers, int repeats) {
  BuiltProblem bp = build_problem(cfg);
  const std::string testcase = cfg.target == "qft"
                                   ? "qft" + std::to_string(bp.problem.dim())
                                   : "q" + std::to_string(cfg.num_qubits);
  auto rows = benchmark_gradient(bp.problem, testcase, windows, workers, repeats,
                                 static_cast<unsigned>(cfg.seed));
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::string csv = "testcase,M,workers,grad_walltime_s,speedup\n";
  for (const auto& r : rows) {
    csv += r.testcase + "," + std::to_string(r.windows) + "," + std::to_string(r.workers) + "," +
           fmt17(r.grad_walltime_s) + "," + fmt17(r.speedup) + "\n";
  }
  write_text(dir / "benchmark.csv", csv);
  return rows;
}

int cmd_optimize(const RunConfig& cfg) {
  try {
    const OptimizeOutcome out = run_optimize(cfg);
    std::cout << "status: " << out.status << "\n"
              << "iterations: " << out.iterations << "\n"
              << "sigma: " << fmt17(out.sigma) << "\n"
              << "final objective: " << fmt17(out.final_objective) << "\n"
              << "final generalized infidelity: " << fmt17(out.final_infidelity) << "\n"
              << "rollout estimate: " << fmt17(out.rollout_estimate) << "\n"
              << "rollout infidelity (post-hoc): " << fmt17(out.rollout_infidelity) << "\n"
              << "artifacts: " << cfg.output_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const RunConfig& cfg, const std::string& alpha_file) {
  try {
    const SimulateOutcome out = run_simulate(cfg, alpha_file);
    std::cout << "trace infidelity: " << fmt17(out.trace_infidelity) << "\n"
              << "generalized infidelity: " << fmt17(out.generalized_infidelity) << "\n"
              << "unitarity defect: " << fmt17(out.unitarity_defect) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_gradcheck(const RunConfig& cfg, int components, double fd_step) {
  try {
    const GradCheckOutcome out = run_gradcheck(cfg, components, fd_step, /*write_files=*/true);
    for (const auto& b : out.blocks) {
      std::cout << "block " << b.name << ": tested " << b.tested
                << ", max rel error " << fmt17(b.max_rel) << "\n";
    }
    std::cout << "max rel error: " << fmt17(out.max_rel) << "\n";
    if (out.max_rel > 1e-5) {
      std::cerr << "gradient check failed (max rel error " << fmt17(out.max_rel) << " > 1e-5)\n";
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_benchmark(const RunConfig& cfg, const std::vector<int>& windows,
                  const std::vector<int>& workers, int repeats) {
  try {
    const auto rows = run_benchmark(cfg, windows, workers, repeats);
    std::cout << "testcase,M,workers,grad_walltime_s,speedup\n";
    for (const auto& r : rows) {
      std::cout << r.testcase << "," << r.windows << "," << r.workers << ","
                << fmt17(r.grad_walltime_s) << "," << fmt17(r.speedup) << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qoc
