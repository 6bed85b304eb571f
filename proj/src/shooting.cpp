#include "qoc/shooting.hpp"

#include <stdexcept>
#include <string>

namespace qoc {

long long packed_size(int num_params, int dim, int num_windows) {
  return static_cast<long long>(num_params) +
         2LL * dim * dim * (static_cast<long long>(num_windows) - 1);
}

RealVector pack(const ShootingVariables& vars) {
  if (vars.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const int d = static_cast<int>(vars.alpha.size());
  const int n = vars.windows.empty() ? 0 : static_cast<int>(vars.windows.front().rows());
  RealVector x(packed_size(d, n, static_cast<int>(vars.windows.size()) + 1));
  x.head(d) = vars.alpha;
  long long offset = d;
  for (const ComplexMatrix& w : vars.windows) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x[offset + i * n + j] = vars.sigma * w(i, j).real();
    offset += n * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x[offset + i * n + j] = vars.sigma * w(i, j).imag();
    offset += n * n;
  }
  return x;
}

ShootingVariables unpack(const RealVector& x, int num_params, int dim, int num_windows,
                         double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (x.size() != packed_size(num_params, dim, num_windows))
    throw std::invalid_argument("packed vector has length " + std::to_string(x.size()) +
                                ", expected " +
                                std::to_string(packed_size(num_params, dim, num_windows)));
  ShootingVariables vars;
  vars.sigma = sigma;
  vars.alpha = x.head(num_params);
  const double inv_sigma = 1.0 / sigma;
  long long offset = num_params;
  vars.windows.reserve(num_windows - 1);
  for (int m = 0; m + 1 < num_windows; ++m) {
    ComplexMatrix w(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        w(i, j) = Complex(inv_sigma * x[offset + i * dim + j],
                          inv_sigma * x[offset + dim * dim + i * dim + j]);
    offset += 2LL * dim * dim;
    vars.windows.push_back(std::move(w));
  }
  return vars;
}

RealVector pack_gradient(const RealVector& grad_alpha, const std::vector<ComplexMatrix>& grad_w,
                         double sigma) {
  const int d = static_cast<int>(grad_alpha.size());
  const int n = grad_w.empty() ? 0 : static_cast<int>(grad_w.front().rows());
  RealVector g(packed_size(d, n, static_cast<int>(grad_w.size()) + 1));
  g.head(d) = grad_alpha;
  const double inv_sigma = 1.0 / sigma;
  long long offset = d;
  for (const ComplexMatrix& gw : grad_w) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[offset + i * n + j] = inv_sigma * gw(i, j).real();
    offset += n * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[offset + i * n + j] = inv_sigma * gw(i, j).imag();
    offset += n * n;
  }
  return g;
}

ComplexMatrix terminal_condition(int window, int num_windows, const ComplexMatrix& u_end,
                                 const ComplexMatrix* w, const ComplexMatrix& target, double mu) {
  if (window == num_windows - 1) {
    const double n = static_cast<double>(u_end.rows());
    const Complex overlap = (target.conjugate().cwiseProduct(u_end)).sum();
    return (overlap * target - n * u_end) / (n * n);
  }
  if (w == nullptr) throw std::invalid_argument("interior terminal condition needs W^m");
  return 0.5 * mu * (*w - u_end);
}

ShootingVariables init_by_rollout(const Problem& problem, const RealVector& alpha0, double sigma) {
  Propagator prop(problem.model, problem.param, problem.grid);
  ShootingVariables vars;
  vars.alpha = alpha0;
  vars.sigma = sigma;
  prop.rollout(alpha0, &vars.windows);
  return vars;
}

GradientResult assemble_gradient(const Problem& problem, const ShootingVariables& vars) {
  const int m_count = problem.grid.num_windows;
  const int n = problem.dim();
  if (static_cast<int>(vars.windows.size()) != m_count - 1)
    throw std::invalid_argument("assemble_gradient: expected M-1 intermediate states");

  Propagator prop(problem.model, problem.param, problem.grid);
  const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
  const bool store = problem.storage == AdjointStorage::Store;

  std::vector<ComplexMatrix> u_end(m_count), lambda_start(m_count);
  std::vector<RealVector> grad_partials(m_count);
  std::vector<double> norms;
  norms.reserve(m_count - 1);
  double j_final = 0.0;

  std::vector<ComplexMatrix> trajectory;
  for (int m = 0; m < m_count; ++m) {
    const ComplexMatrix& w_init = (m == 0) ? identity : vars.windows[m - 1];
    u_end[m] = prop.propagate_window(w_init, m, vars.alpha, store ? &trajectory : nullptr);
    if (m < m_count - 1) {
      norms.push_back((u_end[m] - vars.windows[m]).norm());
    } else {
      j_final = generalized_infidelity(u_end[m], problem.target);
    }
    const ComplexMatrix xi =
        terminal_condition(m, m_count, u_end[m], m < m_count - 1 ? &vars.windows[m] : nullptr,
                           problem.target, problem.mu);
    auto adj = prop.propagate_adjoint_window(xi, m, vars.alpha, store ? &trajectory : nullptr,
                                             store ? nullptr : &u_end[m]);
    lambda_start[m] = std::move(adj.lambda_start);
    grad_partials[m] = std::move(adj.grad_alpha);
  }

  RealVector grad_alpha = RealVector::Zero(problem.param.total_params());
  for (int m = 0; m < m_count; ++m) grad_alpha += grad_partials[m];
  grad_alpha += 2.0 * problem.reg.gamma_tikhonov * vars.alpha;
  grad_alpha +=
      problem.reg.gamma_energy *
      energy_penalty(vars.alpha, problem.param, problem.grid.dt(), problem.grid.total_steps).grad;

  std::vector<ComplexMatrix> grad_w;
  grad_w.reserve(m_count - 1);
  for (int m = 0; m + 1 < m_count; ++m) {
    grad_w.push_back(problem.mu * (vars.windows[m] - u_end[m]) - 2.0 * lambda_start[m + 1]);
  }

  GradientResult out;
  out.report = finalize_report(problem, vars.alpha, j_final, std::move(norms));
  out.gradient = pack_gradient(grad_alpha, grad_w, vars.sigma);
  return out;
}

}  // namespace qoc
