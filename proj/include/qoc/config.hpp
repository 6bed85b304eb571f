#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qoc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One flat, diffable document describing a run. Frequencies are linear
/// (value/2pi) in GHz/MHz exactly as in the physical tables; conversion to
/// angular units happens once when the problem is built.
struct RunConfig {
  // system
  int num_qubits = 0;
  std::vector<double> freq_ghz;
  std::vector<double> coupling_mhz;
  std::optional<double> rot_freq_ghz;  // default: mean of freq_ghz
  std::vector<std::vector<double>> carrier_mhz;
  std::string target = "qft";  // "qft" or a path to a JSON matrix file

  // discretization
  double duration_ns = 0.0;
  long long total_steps = 0;
  int windows = 1;
  double knot_spacing_ns = 3.0;

  // objective
  std::optional<double> mu;              // default 2/n
  std::vector<double> sigma = {0.1};     // scan list
  std::optional<double> gamma_tikhonov;  // default 1e-3/d
  double gamma_energy = 1e-3;

  // optimizer
  double box_bound_mhz = 25.0;
  double init_amplitude_mhz = 10.0;
  unsigned long long seed = 1;
  double tol_estimate = 1e-3;
  double tol_gradnorm = 1e-8;
  int max_iters = 5000;
  std::optional<double> stop_below_infidelity;
  bool pin_boundary_splines = false;

  // runtime
  int workers = 0;            // 0 = hardware concurrency
  int columns_per_block = 0;  // 0 = all n columns in one block
  std::string adjoint_storage = "store";  // or "recompute"
  std::string output_dir = "qoc_out";
};

/// Builtin test cases qft4 | qft8 | qft16 with the published system
/// parameters, gate durations and step counts.
RunConfig preset_config(const std::string& name);

/// Parses a JSON config document; missing required fields and unknown keys
/// raise ConfigError naming the field.
RunConfig parse_config_json(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Serializes the config back to JSON (sorted keys, value-preserving).
std::string config_to_json(const RunConfig& config);

}  // namespace qoc
