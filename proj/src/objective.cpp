#include "qoc/objective.hpp"

#include <cmath>
#include <stdexcept>

#include "qoc/problem.hpp"

namespace qoc {

namespace {
Complex frobenius_overlap(const ComplexMatrix& v, const ComplexMatrix& u) {
  return (v.conjugate().cwiseProduct(u)).sum();  // tr(V^t U)
}
}  // namespace

double trace_infidelity(const ComplexMatrix& u, const ComplexMatrix& target) {
  const double n = static_cast<double>(u.rows());
  return 1.0 - std::norm(frobenius_overlap(target, u)) / (n * n);
}

double generalized_infidelity(const ComplexMatrix& u, const ComplexMatrix& target) {
  const double n = static_cast<double>(u.rows());
  return u.squaredNorm() / n - std::norm(frobenius_overlap(target, u)) / (n * n);
}

ComplexMatrix qv_matrix(const ComplexMatrix& target) {
  const Eigen::Index n = target.rows();
  const Eigen::Map<const Eigen::VectorXcd> vec_v(target.data(), n * n);
  ComplexMatrix qv = ComplexMatrix::Identity(n * n, n * n);
  qv.noalias() -= (vec_v * vec_v.adjoint()) / static_cast<double>(n);
  return qv;
}

double qv_quadratic_form(const ComplexMatrix& u, const ComplexMatrix& target) {
  const Eigen::Index n = u.rows();
  const Eigen::Map<const Eigen::VectorXcd> vec_u(u.data(), n * n);
  const ComplexMatrix qv = qv_matrix(target);
  return (vec_u.adjoint() * (qv * vec_u)).value().real() / static_cast<double>(n);
}

ConstraintViolation constraint_violation(const ComplexMatrix& u_end,
                                         const ComplexMatrix& w_next) {
  if (u_end.rows() != w_next.rows() || u_end.cols() != w_next.cols())
    throw std::invalid_argument("constraint_violation: dimension mismatch");
  ConstraintViolation cv;
  cv.c = u_end - w_next;
  cv.norm = cv.c.norm();
  return cv;
}

double rollout_estimate(double j_final, const std::vector<double>& constraint_norms, int dim) {
  double sum = 0.0;
  for (double c : constraint_norms) sum += c;
  const double n = static_cast<double>(dim);
  // j_final >= 0 up to round-off; clamp for the square root only.
  const double j_clamped = j_final > 0.0 ? j_final : 0.0;
  return j_final + (2.0 / std::sqrt(n)) * std::sqrt(j_clamped) * sum + sum * sum / n;
}

ObjectiveReport finalize_report(const Problem& problem, const RealVector& alpha, double j_final,
                                std::vector<double> constraint_norms) {
  ObjectiveReport r;
  r.generalized_infidelity = j_final;
  r.constraint_norms = std::move(constraint_norms);
  double penalty_sq = 0.0;
  for (double c : r.constraint_norms) penalty_sq += c * c;
  r.penalty_value = 0.5 * problem.mu * penalty_sq;
  r.rollout_estimate = rollout_estimate(j_final, r.constraint_norms, problem.dim());
  r.tikhonov = problem.reg.gamma_tikhonov * alpha.squaredNorm();
  r.energy = problem.reg.gamma_energy *
             energy_penalty(alpha, problem.param, problem.grid.dt(), problem.grid.total_steps).value;
  r.total = r.generalized_infidelity + r.penalty_value + r.tikhonov + r.energy;
  return r;
}

ObjectiveReport penalty_objective(const Problem& problem, const RealVector& alpha,
                                  const std::vector<ComplexMatrix>& windows) {
  const int m_count = problem.grid.num_windows;
  if (static_cast<int>(windows.size()) != m_count - 1)
    throw std::invalid_argument("penalty_objective: expected M-1 intermediate states");

  Propagator prop(problem.model, problem.param, problem.grid);
  const ComplexMatrix identity = ComplexMatrix::Identity(problem.dim(), problem.dim());
  std::vector<double> norms;
  norms.reserve(m_count - 1);
  double j_final = 0.0;
  for (int m = 0; m < m_count; ++m) {
    const ComplexMatrix& w_init = (m == 0) ? identity : windows[m - 1];
    const ComplexMatrix u_end = prop.propagate_window(w_init, m, alpha);
    if (m < m_count - 1) {
      norms.push_back((u_end - windows[m]).norm());
    } else {
      j_final = generalized_infidelity(u_end, problem.target);
    }
  }
  return finalize_report(problem, alpha, j_final, std::move(norms));
}

}  // namespace qoc
