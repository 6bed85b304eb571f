#include "qoc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qoc {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownFields = {
    "num_qubits",    "freq_ghz",       "coupling_mhz",      "rot_freq_ghz",
    "carrier_mhz",   "target",         "duration_ns",       "total_steps",
    "windows",       "knot_spacing_ns", "mu",               "sigma",
    "gamma_tikhonov", "gamma_energy",  "box_bound_mhz",     "init_amplitude_mhz",
    "seed",          "tol_estimate",   "tol_gradnorm",      "max_iters",
    "stop_below_infidelity", "pin_boundary_splines", "workers",
    "columns_per_block", "adjoint_storage", "output_dir"};

const json& require_field(const json& j, const std::string& name) {
  auto it = j.find(name);
  if (it == j.end()) throw ConfigError("missing required field \"" + name + "\"");
  return *it;
}

template <typename T>
T field_as(const json& j, const std::string& name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field \"" + name + "\" has the wrong type");
  }
}

template <typename T>
void read_optional(const json& j, const std::string& name, T& out) {
  auto it = j.find(name);
  if (it != j.end()) out = field_as<T>(*it, name);
}

}  // namespace

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "qft4") {
    c.num_qubits = 2;
    c.freq_ghz = {5.18, 5.12};
    c.coupling_mhz = {5.0};
    c.carrier_mhz = {{-30.41, 30.41}, {-30.41, 30.41}};
    c.duration_ns = 190.0;
    c.total_steps = 2252;
  } else if (name == "qft8") {
    c.num_qubits = 3;
    c.freq_ghz = {5.18, 5.12, 5.06};
    c.coupling_mhz = {5.0, 5.0};
    c.carrier_mhz = {{0.0, -60.4}, {60.4, 0.0, -60.4}, {60.4, 0.0}};
    c.duration_ns = 500.0;
    c.total_steps = 19806;
  } else if (name == "qft16") {
    c.num_qubits = 4;
    c.freq_ghz = {5.18, 5.12, 5.06, 5.0};
    c.coupling_mhz = {5.0, 5.0, 5.0};
    c.carrier_mhz = {{-30.0, -90.41}, {30.0, -30.0, -90.41}, {90.41, 30.0, -30.0}, {90.41, -30.0}};
    c.duration_ns = 900.0;
    c.total_steps = 106072;
  } else {
    throw ConfigError("unknown preset \"" + name + "\" (expected qft4, qft8 or qft16)");
  }
  return c;
}

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (kKnownFields.find(item.key()) == kKnownFields.end())
      throw ConfigError("unknown field \"" + item.key() + "\"");
  }

  RunConfig c;
  c.num_qubits = field_as<int>(require_field(j, "num_qubits"), "num_qubits");
  c.freq_ghz = field_as<std::vector<double>>(require_field(j, "freq_ghz"), "freq_ghz");
  c.coupling_mhz =
      field_as<std::vector<double>>(require_field(j, "coupling_mhz"), "coupling_mhz");
  c.carrier_mhz = field_as<std::vector<std::vector<double>>>(require_field(j, "carrier_mhz"),
                                                             "carrier_mhz");
  c.duration_ns = field_as<double>(require_field(j, "duration_ns"), "duration_ns");
  c.total_steps = field_as<long long>(require_field(j, "total_steps"), "total_steps");

  if (j.contains("rot_freq_ghz")) c.rot_freq_ghz = field_as<double>(j["rot_freq_ghz"], "rot_freq_ghz");
  if (j.contains("mu")) c.mu = field_as<double>(j["mu"], "mu");
  if (j.contains("gamma_tikhonov"))
    c.gamma_tikhonov = field_as<double>(j["gamma_tikhonov"], "gamma_tikhonov");
  if (j.contains("stop_below_infidelity"))
    c.stop_below_infidelity = field_as<double>(j["stop_below_infidelity"], "stop_below_infidelity");
  if (j.contains("sigma")) {
    const json& s = j["sigma"];
    if (s.is_array())
      c.sigma = field_as<std::vector<double>>(s, "sigma");
    else
      c.sigma = {field_as<double>(s, "sigma")};
  }

  read_optional(j, "target", c.target);
  read_optional(j, "windows", c.windows);
  read_optional(j, "knot_spacing_ns", c.knot_spacing_ns);
  read_optional(j, "gamma_energy", c.gamma_energy);
  read_optional(j, "box_bound_mhz", c.box_bound_mhz);
  read_optional(j, "init_amplitude_mhz", c.init_amplitude_mhz);
  read_optional(j, "seed", c.seed);
  read_optional(j, "tol_estimate", c.tol_estimate);
  read_optional(j, "tol_gradnorm", c.tol_gradnorm);
  read_optional(j, "max_iters", c.max_iters);
  read_optional(j, "pin_boundary_splines", c.pin_boundary_splines);
  read_optional(j, "workers", c.workers);
  read_optional(j, "columns_per_block", c.columns_per_block);
  read_optional(j, "adjoint_storage", c.adjoint_storage);
  read_optional(j, "output_dir", c.output_dir);
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["num_qubits"] = c.num_qubits;
  j["freq_ghz"] = c.freq_ghz;
  j["coupling_mhz"] = c.coupling_mhz;
  if (c.rot_freq_ghz) j["rot_freq_ghz"] = *c.rot_freq_ghz;
  j["carrier_mhz"] = c.carrier_mhz;
  j["target"] = c.target;
  j["duration_ns"] = c.duration_ns;
  j["total_steps"] = c.total_steps;
  j["windows"] = c.windows;
  j["knot_spacing_ns"] = c.knot_spacing_ns;
  if (c.mu) j["mu"] = *c.mu;
  j["sigma"] = c.sigma;
  if (c.gamma_tikhonov) j["gamma_tikhonov"] = *c.gamma_tikhonov;
  j["gamma_energy"] = c.gamma_energy;
  j["box_bound_mhz"] = c.box_bound_mhz;
  j["init_amplitude_mhz"] = c.init_amplitude_mhz;
  j["seed"] = c.seed;
  j["tol_estimate"] = c.tol_estimate;
  j["tol_gradnorm"] = c.tol_gradnorm;
  j["max_iters"] = c.max_iters;
  if (c.stop_below_infidelity) j["stop_below_infidelity"] = *c.stop_below_infidelity;
  j["pin_boundary_splines"] = c.pin_boundary_splines;
  j["workers"] = c.workers;
  j["columns_per_block"] = c.columns_per_block;
  j["adjoint_storage"] = c.adjoint_storage;
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

}  // namespace qoc
