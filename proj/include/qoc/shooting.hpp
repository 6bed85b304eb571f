#pragma once

#include <vector>

#include "qoc/problem.hpp"

namespace qoc {

/// Multiple-shooting optimization variables: the control vector plus the
/// intermediate initial states W^1..W^{M-1} in physical (unscaled) form.
/// The packed optimizer vector carries sigma * W instead, which balances the
/// control and state blocks in the quasi-Newton metric.
struct ShootingVariables {
  RealVector alpha;
  std::vector<ComplexMatrix> windows;
  double sigma = 0.1;
};

/// Packed length d + 2 n^2 (M-1).
long long packed_size(int num_params, int dim, int num_windows);

/// Layout: [alpha | Re W^1 row-major | Im W^1 | ... | Re W^{M-1} | Im W^{M-1}],
/// with the W coordinates multiplied by sigma on pack and divided on unpack.
RealVector pack(const ShootingVariables& vars);
ShootingVariables unpack(const RealVector& x, int num_params, int dim, int num_windows,
                         double sigma);

/// Packs (dP/dalpha, dP/dW^m as complex matrices with Re/Im treated as
/// independent reals) into packed coordinates; the W blocks pick up the
/// inverse scaling 1/sigma.
RealVector pack_gradient(const RealVector& grad_alpha, const std::vector<ComplexMatrix>& grad_w,
                         double sigma);

/// Adjoint terminal condition at t_m (window 0-based):
///   m < M-1 : (mu/2) (W^m - U^m(t_m))
///   m = M-1 : (<V,U>_F V - n U) / n^2.
ComplexMatrix terminal_condition(int window, int num_windows, const ComplexMatrix& u_end,
                                 const ComplexMatrix* w, const ComplexMatrix& target, double mu);

/// W^m initialized from a sequential roll-out of alpha0; the resulting point
/// is feasible (all constraint violations vanish identically).
ShootingVariables init_by_rollout(const Problem& problem, const RealVector& alpha0, double sigma);

struct GradientResult {
  ObjectiveReport report;
  RealVector gradient;  // packed coordinates
};

/// Objective and exact discrete gradient by one forward and one adjoint
/// sweep per window, combined in fixed ascending window order. The gradient
/// with respect to W^m combines the local penalty term with the neighbor
/// window's back-propagated adjoint,
///   dP/dW^m_x = mu (W^m_x - U^m_x) - 2 Lambda^{m+1}_x(t_m),
/// whose -2 factor is pinned by a finite-difference regression test.
GradientResult assemble_gradient(const Problem& problem, const ShootingVariables& vars);

}  // namespace qoc
