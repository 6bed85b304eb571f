#include "qoc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace qoc {

void SystemSpec::validate() const {
  if (num_qubits < 1) throw std::invalid_argument("num_qubits must be >= 1");
  if (static_cast<int>(freq_ghz.size()) != num_qubits)
    throw std::invalid_argument("freq_ghz must have num_qubits entries");
  if (static_cast<int>(coupling_mhz.size()) != num_qubits - 1)
    throw std::invalid_argument("coupling_mhz must have num_qubits-1 entries");
  if (static_cast<int>(carrier_mhz.size()) != num_qubits)
    throw std::invalid_argument("carrier_mhz must have num_qubits entries");
}

double SystemSpec::default_rot_freq(const std::vector<double>& freq_ghz) {
  double sum = 0.0;
  for (double f : freq_ghz) sum += f;
  return sum / static_cast<double>(freq_ghz.size());
}

std::vector<ComplexMatrix> build_lowering_ops(const SystemSpec& spec) {
  spec.validate();
  const int n = spec.dim();
  std::vector<ComplexMatrix> ops;
  ops.reserve(spec.num_qubits);
  for (int j = 0; j < spec.num_qubits; ++j) {
    const int stride = 1 << (spec.num_qubits - 1 - j);
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    for (int x = 0; x < n; ++x) {
      if (((x / stride) & 1) == 0) a(x, x + stride) = 1.0;
    }
    ops.push_back(std::move(a));
  }
  return ops;
}

ComplexMatrix build_system_hamiltonian(const SystemSpec& spec) {
  spec.validate();
  const int n = spec.dim();
  const auto ops = build_lowering_ops(spec);
  const double w_rot = ghz_to_radns(spec.rot_freq_ghz);

  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < spec.num_qubits; ++j) {
    const double detuning = ghz_to_radns(spec.freq_ghz[j]) - w_rot;
    h += detuning * (ops[j].adjoint() * ops[j]);
  }
  // General two-body sum; configs only populate the nearest-neighbor chain.
  for (int j = 0; j < spec.num_qubits; ++j) {
    for (int k = j + 1; k < spec.num_qubits; ++k) {
      const double coupling = (k == j + 1) ? mhz_to_radns(spec.coupling_mhz[j]) : 0.0;
      if (coupling == 0.0) continue;
      h += coupling * (ops[k].adjoint() * ops[j] + ops[k] * ops[j].adjoint());
    }
  }
  return h;
}

ComplexMatrix assemble_hamiltonian(const ComplexMatrix& h_sys,
                                   const std::vector<ComplexMatrix>& lowering,
                                   const std::vector<Complex>& drive) {
  ComplexMatrix h = h_sys;
  for (std::size_t j = 0; j < lowering.size(); ++j) {
    h += drive[j] * lowering[j] + std::conj(drive[j]) * lowering[j].adjoint();
  }
  return h;
}

ComplexMatrix qft_target(int n) {
  if (n < 2) throw std::invalid_argument("qft_target requires n >= 2");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  ComplexMatrix v(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      v(j, k) = std::polar(scale, kTwoPi * static_cast<double>((j * k) % n) / n);
    }
  }
  return v;
}

Model Model::build(const SystemSpec& spec) {
  Model m;
  m.num_qubits = spec.num_qubits;
  m.dim = spec.dim();
  m.h_sys = build_system_hamiltonian(spec);
  m.lowering = build_lowering_ops(spec);
  m.pairs.resize(spec.num_qubits);
  for (int j = 0; j < spec.num_qubits; ++j) {
    const int stride = 1 << (spec.num_qubits - 1 - j);
    for (int x = 0; x < m.dim; ++x) {
      if (((x / stride) & 1) == 0) m.pairs[j].emplace_back(x, x + stride);
    }
  }
  return m;
}

void Model::assemble_into(ComplexMatrix& h, const std::vector<Complex>& drive) const {
  h = h_sys;
  for (int j = 0; j < num_qubits; ++j) {
    const Complex d = drive[j];
    const Complex dc = std::conj(d);
    for (const auto& [lo, hi] : pairs[j]) {
      h(lo, hi) += d;
      h(hi, lo) += dc;
    }
  }
}

}  // namespace qoc
