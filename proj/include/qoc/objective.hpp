#pragma once

#include <vector>

#include "qoc/model.hpp"

namespace qoc {

/// Standard gate trace infidelity 1 - |<V,U>_F|^2 / n^2; meaningful for
/// unitary U, unbounded below for general complex U.
double trace_infidelity(const ComplexMatrix& u, const ComplexMatrix& target);

/// Generalized infidelity ||U||_F^2 / n - |<V,U>_F|^2 / n^2: nonnegative and
/// convex on all of C^{nxn}, equal to the trace infidelity for unitary U,
/// and zero exactly on the ray U = beta V.
double generalized_infidelity(const ComplexMatrix& u, const ComplexMatrix& target);

/// Q_v = I - vec(V) vec(V)^t / n; the generalized infidelity equals
/// (1/n) <vec(U), Q_v vec(U)>. Materialized (n^2 x n^2), intended for
/// cross-validation at n <= 8.
ComplexMatrix qv_matrix(const ComplexMatrix& target);
double qv_quadratic_form(const ComplexMatrix& u, const ComplexMatrix& target);

struct ConstraintViolation {
  ComplexMatrix c;  // C^m = U^m(t_m) - W^m
  double norm = 0.0;
};
ConstraintViolation constraint_violation(const ComplexMatrix& u_end, const ComplexMatrix& w_next);

/// Upper bound on the roll-out infidelity from per-window data:
/// J + (2/sqrt(n)) sqrt(J) sum||C^m|| + (sum||C^m||)^2 / n.
double rollout_estimate(double j_final, const std::vector<double>& constraint_norms, int dim);

struct Regularization {
  double gamma_tikhonov = 0.0;  // gamma ||alpha||^2 (no 1/2 factor)
  double gamma_energy = 0.0;    // gamma E(alpha)
};

struct ObjectiveReport {
  double generalized_infidelity = 0.0;
  double penalty_value = 0.0;            // (mu/2) sum ||C^m||^2
  std::vector<double> constraint_norms;  // ||C^m||_F, m = 1..M-1
  double rollout_estimate = 0.0;
  double tikhonov = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

}  // namespace qoc
