#pragma once

#include <vector>

#include "qoc/controls.hpp"
#include "qoc/model.hpp"

namespace qoc {

/// Uniform decomposition of [0, T] into M windows over a shared stepping
/// grid of total_steps steps; M must divide total_steps. Step times are
/// derived from the global step index (t_k = k * dt), so every window
/// decomposition of the same grid sees bitwise-identical times.
struct WindowGrid {
  int num_windows = 1;
  long long total_steps = 0;
  double duration_ns = 0.0;

  static WindowGrid create(double duration_ns, long long total_steps, int num_windows);

  long long steps_per_window() const { return total_steps / num_windows; }
  double dt() const { return duration_ns / static_cast<double>(total_steps); }
  double boundary(int m) const {
    return static_cast<double>(m) * (duration_ns / static_cast<double>(num_windows));
  }
  double step_time(long long global_step) const { return static_cast<double>(global_step) * dt(); }
  double mid_time(long long global_step) const {
    return (static_cast<double>(global_step) + 0.5) * dt();
  }
};

/// Forward-state handling for the adjoint sweep: keep the whole per-window
/// trajectory, or reconstruct it on the fly by inverting the (unitary)
/// steps backwards from the window's end state.
enum class AdjointStorage { Store, Recompute };

/// One implicit-midpoint step: with H = H(t + dt/2), solves
/// (I + i dt/2 H) U_next = (I - i dt/2 H) U. The Cayley factor is unitary
/// for Hermitian H, so the step is norm-preserving and time-reversible.
/// Fails hard if the relative solve residual exceeds 1e-10.
ComplexMatrix step_forward(const ComplexMatrix& state, double t, double dt, const Model& model,
                           const ControlParameterization& param, const RealVector& alpha);

/// Window-level propagation engine. Holds per-instance scratch space, so use
/// one instance per thread of control; all inputs are read-only.
class Propagator {
 public:
  Propagator(const Model& model, const ControlParameterization& param, const WindowGrid& grid);

  /// Steps the columns in w_init across window m (0-based). When trajectory
  /// is non-null it receives all steps_per_window()+1 per-step states.
  ComplexMatrix propagate_window(const ComplexMatrix& w_init, int window, const RealVector& alpha,
                                 std::vector<ComplexMatrix>* trajectory = nullptr);

  struct AdjointResult {
    ComplexMatrix lambda_start;  // adjoint state at the window's left boundary
    RealVector grad_alpha;       // this window's contribution to dP/dalpha
  };

  /// Backward adjoint sweep from the terminal condition at t_m. The adjoint
  /// equation matches the state equation, and the discrete scheme is
  /// self-adjoint: each backward step solves with the conjugate Cayley
  /// factor of the forward step. The alpha-gradient is accumulated with the
  /// midpoint quadrature consistent with the stepper,
  ///   dP/da_l += 2 dt Re< Lambda_mid, i dH/da_l U_mid >_F,
  /// where both midpoint states fall out of the backward solves, making the
  /// gradient of the discrete objective exact to round-off.
  ///
  /// Supply the stored forward trajectory, or (recompute mode) the window's
  /// end state from which the forward states are reconstructed backwards.
  AdjointResult propagate_adjoint_window(const ComplexMatrix& terminal, int window,
                                         const RealVector& alpha,
                                         const std::vector<ComplexMatrix>* trajectory,
                                         const ComplexMatrix* u_end);

  /// Sequential propagation of the identity over all M windows; the
  /// non-parallelizable validation path. Optionally records the states at
  /// the interior window boundaries t_1..t_{M-1}.
  ComplexMatrix rollout(const RealVector& alpha,
                        std::vector<ComplexMatrix>* boundary_states = nullptr);

 private:
  void build_mid_hamiltonian(double t_mid, const RealVector& alpha);
  void accumulate_control_gradient(double t_mid, double dt, const ComplexMatrix& lambda_mid,
                                   const ComplexMatrix& u_mid, RealVector& grad) const;

  const Model& model_;
  const ControlParameterization& param_;
  WindowGrid grid_;
  std::vector<Complex> drive_;
  ComplexMatrix h_, cayley_, rhs_;
  Eigen::PartialPivLU<ComplexMatrix> lu_;
};

}  // namespace qoc
