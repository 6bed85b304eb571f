#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qoc/cli.hpp"
#include "qoc/config.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stoi(item));
  }
  if (values.empty()) throw qoc::ConfigError("empty integer list \"" + text + "\"");
  return values;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  if (values.empty()) throw qoc::ConfigError("empty value list \"" + text + "\"");
  return values;
}

struct CommonArgs {
  std::string config_file;
  std::string preset;
  std::string windows;
  std::string workers;
  std::string sigma;
  std::optional<unsigned long long> seed;
  std::string out_dir;
  std::optional<int> max_iters;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_file, "JSON config file");
  sub->add_option("--preset", args.preset, "builtin test case: qft4, qft8 or qft16");
  sub->add_option("--windows", args.windows, "time windows M (comma list for benchmark)");
  sub->add_option("--workers", args.workers, "worker threads (comma list for benchmark)");
  sub->add_option("--sigma", args.sigma, "intermediate-state scaling, comma list to scan");
  sub->add_option("--seed", args.seed, "random seed");
  sub->add_option("--out", args.out_dir, "output directory");
  sub->add_option("--max-iters", args.max_iters, "optimizer iteration cap");
}

qoc::RunConfig resolve_config(const CommonArgs& args, bool list_flags_allowed) {
  if (!args.preset.empty() && !args.config_file.empty())
    throw qoc::ConfigError("--preset and --config are mutually exclusive");
  if (args.preset.empty() && args.config_file.empty())
    throw qoc::ConfigError("missing required field \"--preset or --config\"");

  qoc::RunConfig cfg = args.preset.empty() ? qoc::load_config_file(args.config_file)
                                           : qoc::preset_config(args.preset);
  if (!args.windows.empty() && !list_flags_allowed) {
    const auto w = parse_int_list(args.windows);
    if (w.size() != 1) throw qoc::ConfigError("--windows takes a single value here");
    cfg.windows = w.front();
  }
  if (!args.workers.empty() && !list_flags_allowed) {
    const auto w = parse_int_list(args.workers);
    if (w.size() != 1) throw qoc::ConfigError("--workers takes a single value here");
    cfg.workers = w.front();
  }
  if (!args.sigma.empty()) cfg.sigma = parse_double_list(args.sigma);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.max_iters) cfg.max_iters = *args.max_iters;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-windowed multiple-shooting optimal control for multi-qubit gates"};
  app.require_subcommand(1);

  CommonArgs opt_args, sim_args, grad_args, bench_args;
  std::string alpha_file;
  int components = 50;
  double fd_step = 1e-5;
  int repeats = 3;

  CLI::App* opt = app.add_subcommand("optimize", "run the penalty optimization");
  add_common(opt, opt_args);

  CLI::App* sim = app.add_subcommand("simulate", "roll out a stored control vector");
  add_common(sim, sim_args);
  sim->add_option("--alpha", alpha_file, "params.json (or any JSON with an \"alpha\" array)")
      ->required();

  CLI::App* grad = app.add_subcommand("gradcheck", "adjoint gradient vs finite differences");
  add_common(grad, grad_args);
  grad->add_option("--components", components, "number of packed components to test");
  grad->add_option("--fd-step", fd_step, "central-difference step");

  CLI::App* bench = app.add_subcommand("benchmark", "time gradient evaluations");
  add_common(bench, bench_args);
  bench->add_option("--repeats", repeats, "timing repetitions (minimum is kept)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (opt->parsed()) return qoc::cmd_optimize(resolve_config(opt_args, false));
    if (sim->parsed()) return qoc::cmd_simulate(resolve_config(sim_args, false), alpha_file);
    if (grad->parsed())
      return qoc::cmd_gradcheck(resolve_config(grad_args, false), components, fd_step);
    if (bench->parsed()) {
      const qoc::RunConfig cfg = resolve_config(bench_args, true);
      const std::vector<int> windows =
          bench_args.windows.empty() ? std::vector<int>{cfg.windows} : parse_int_list(bench_args.windows);
      const std::vector<int> workers =
          bench_args.workers.empty() ? std::vector<int>{1} : parse_int_list(bench_args.workers);
      return qoc::cmd_benchmark(cfg, windows, workers, repeats);
    }
  } catch (const qoc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
