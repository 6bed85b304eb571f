#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qoc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Config files carry linear frequencies (value/2pi) in GHz/MHz; internally
// everything is angular, in rad/ns.
inline double ghz_to_radns(double f_ghz) { return kTwoPi * f_ghz; }
inline double mhz_to_radns(double f_mhz) { return kTwoPi * 1e-3 * f_mhz; }
inline double radns_to_mhz(double w) { return w / kTwoPi * 1e3; }

/// Physical model of a linear chain of qubits: transition frequencies,
/// nearest-neighbor dipole couplings, rotating frame and carrier frequencies.
struct SystemSpec {
  int num_qubits = 0;
  std::vector<double> freq_ghz;                  // omega_j / 2pi
  std::vector<double> coupling_mhz;              // J_{j,j+1} / 2pi
  double rot_freq_ghz = 0.0;                     // omega_rot / 2pi
  std::vector<std::vector<double>> carrier_mhz;  // Omega_j^f / 2pi, per qubit

  int dim() const { return 1 << num_qubits; }

  /// Throws std::invalid_argument if the shape constraints are violated.
  void validate() const;

  static double default_rot_freq(const std::vector<double>& freq_ghz);
};

/// Lowering operators A_j = I (x) a (x) I with a = [[0,1],[0,0]] at slot j.
std::vector<ComplexMatrix> build_lowering_ops(const SystemSpec& spec);

/// Time-independent system Hamiltonian in the rotating frame (rad/ns):
/// H_s = sum_j (w_j - w_rot) A_j^t A_j + sum_{k>j} J_jk (A_k^t A_j + A_k A_j^t).
ComplexMatrix build_system_hamiltonian(const SystemSpec& spec);

/// H(t) = H_s + sum_j d_j A_j + conj(d_j) A_j^t for given per-qubit drives.
ComplexMatrix assemble_hamiltonian(const ComplexMatrix& h_sys,
                                   const std::vector<ComplexMatrix>& lowering,
                                   const std::vector<Complex>& drive);

/// Discrete Fourier transform gate, V_jk = kappa^{jk} / sqrt(n), kappa = e^{i 2pi/n}.
ComplexMatrix qft_target(int n);

/// Operator data compiled once per run for fast Hamiltonian assembly.
/// The lowering operator of qubit j has a single 1 in row x, column x+stride
/// for every basis index x whose j-th bit is clear; only those (lo, hi)
/// index pairs are kept next to the dense matrices.
struct Model {
  int num_qubits = 0;
  int dim = 0;
  ComplexMatrix h_sys;
  std::vector<ComplexMatrix> lowering;
  std::vector<std::vector<std::pair<int, int>>> pairs;

  static Model build(const SystemSpec& spec);

  /// In-place H = h_sys + sum_j drive[j] A_j + conj(drive[j]) A_j^t.
  void assemble_into(ComplexMatrix& h, const std::vector<Complex>& drive) const;
};

}  // namespace qoc
