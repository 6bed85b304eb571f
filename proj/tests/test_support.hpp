#pragma once

#include <random>

#include "qoc/problem.hpp"
#include "qoc/shooting.hpp"

namespace qoc::test {

/// exp(-i H t) for Hermitian H via eigendecomposition; the independent
/// propagation oracle.
inline ComplexMatrix expm_schrodinger(const ComplexMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  const Eigen::VectorXd& w = eig.eigenvalues();
  ComplexMatrix d = ComplexMatrix::Zero(h.rows(), h.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) d(i, i) = std::polar(1.0, -w[i] * t);
  return eig.eigenvectors() * d * eig.eigenvectors().adjoint();
}

inline double uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_pm(std::mt19937_64& rng) { return 2.0 * uniform(rng) - 1.0; }

inline ComplexMatrix random_complex_matrix(int n, std::mt19937_64& rng, double scale = 1.0) {
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * Complex(uniform_pm(rng), uniform_pm(rng));
  return m;
}

inline ComplexMatrix random_unitary(int n, std::mt19937_64& rng) {
  const ComplexMatrix m = random_complex_matrix(n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(m);
  ComplexMatrix q = qr.householderQ();
  // Fix the phase convention so Q is haar-ish rather than QR-biased; any
  // unitary works for these tests.
  return q;
}

inline ComplexMatrix random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  const ComplexMatrix m = random_complex_matrix(n, rng, scale);
  return 0.5 * (m + m.adjoint());
}

inline RealVector random_alpha(int dim, std::mt19937_64& rng, double amplitude) {
  RealVector a(dim);
  for (int i = 0; i < dim; ++i) a[i] = amplitude * uniform_pm(rng);
  return a;
}

/// Two-qubit chain with the published QFT-4 system parameters.
inline SystemSpec qft4_spec() {
  SystemSpec s;
  s.num_qubits = 2;
  s.freq_ghz = {5.18, 5.12};
  s.coupling_mhz = {5.0};
  s.rot_freq_ghz = SystemSpec::default_rot_freq(s.freq_ghz);
  s.carrier_mhz = {{-30.41, 30.41}, {-30.41, 30.41}};
  return s;
}

/// Small problem for fast tests: the QFT-4 system on a short, coarse grid.
inline Problem small_problem(int windows, long long steps = 240, double duration = 24.0) {
  const SystemSpec spec = qft4_spec();
  Problem p;
  p.model = Model::build(spec);
  p.param = ControlParameterization::create(duration, 3.0, spec.carrier_mhz);
  p.grid = WindowGrid::create(duration, steps, windows);
  p.target = qft_target(p.model.dim);
  p.mu = 2.0 / p.model.dim;
  p.reg.gamma_tikhonov = 1e-3 / p.param.total_params();
  p.reg.gamma_energy = 1e-3;
  return p;
}

/// Random infeasible shooting point: random controls, roll-out W plus noise.
inline ShootingVariables random_point(const Problem& p, unsigned long long seed,
                                      double noise = 0.05, double sigma = 0.1) {
  std::mt19937_64 rng(seed);
  const RealVector alpha = random_alpha(p.param.total_params(), rng, mhz_to_radns(10.0));
  ShootingVariables vars = init_by_rollout(p, alpha, sigma);
  for (ComplexMatrix& w : vars.windows)
    for (int i = 0; i < p.dim(); ++i)
      for (int j = 0; j < p.dim(); ++j) w(i, j) += noise * Complex(uniform_pm(rng), uniform_pm(rng));
  return vars;
}

}  // namespace qoc::test
