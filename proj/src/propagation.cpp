#include "qoc/propagation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qoc {

WindowGrid WindowGrid::create(double duration_ns, long long total_steps, int num_windows) {
  if (duration_ns <= 0.0) throw std::invalid_argument("duration_ns must be positive");
  if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (num_windows < 1) throw std::invalid_argument("num_windows must be >= 1");
  if (total_steps % num_windows != 0)
    throw std::invalid_argument("num_windows must divide total_steps (got " +
                                std::to_string(total_steps) + " steps, " +
                                std::to_string(num_windows) + " windows)");
  WindowGrid g;
  g.duration_ns = duration_ns;
  g.total_steps = total_steps;
  g.num_windows = num_windows;
  return g;
}

ComplexMatrix step_forward(const ComplexMatrix& state, double t, double dt, const Model& model,
                           const ControlParameterization& param, const RealVector& alpha) {
  std::vector<Complex> drive(model.num_qubits);
  const double t_mid = t + 0.5 * dt;
  for (int j = 0; j < model.num_qubits; ++j) drive[j] = eval_control(j, t_mid, alpha, param);

  ComplexMatrix h(model.dim, model.dim);
  model.assemble_into(h, drive);

  const Complex half(0.0, 0.5 * dt);
  ComplexMatrix lhs = half * h;
  lhs.diagonal().array() += 1.0;
  ComplexMatrix rhs = state - half * (h * state);

  ComplexMatrix next = lhs.partialPivLu().solve(rhs);
  const double residual = (lhs * next - rhs).norm();
  if (!(residual <= 1e-10 * std::max(1.0, rhs.norm())))
    throw std::runtime_error("implicit midpoint solve residual " + std::to_string(residual));
  return next;
}

Propagator::Propagator(const Model& model, const ControlParameterization& param,
                       const WindowGrid& grid)
    : model_(model),
      param_(param),
      grid_(grid),
      drive_(model.num_qubits),
      h_(model.dim, model.dim),
      cayley_(model.dim, model.dim),
      lu_(model.dim) {}

void Propagator::build_mid_hamiltonian(double t_mid, const RealVector& alpha) {
  for (int j = 0; j < model_.num_qubits; ++j) drive_[j] = eval_control(j, t_mid, alpha, param_);
  model_.assemble_into(h_, drive_);
}

ComplexMatrix Propagator::propagate_window(const ComplexMatrix& w_init, int window,
                                           const RealVector& alpha,
                                           std::vector<ComplexMatrix>* trajectory) {
  if (window < 0 || window >= grid_.num_windows) throw std::invalid_argument("window out of range");
  const long long steps = grid_.steps_per_window();
  const long long first = steps * window;
  const double dt = grid_.dt();
  const Complex half(0.0, 0.5 * dt);
  const Eigen::Index cols = w_init.cols();

  ComplexMatrix u = w_init;
  rhs_.resize(model_.dim, cols);
  if (trajectory) {
    trajectory->clear();
    trajectory->reserve(steps + 1);
    trajectory->push_back(u);
  }
  for (long long k = 0; k < steps; ++k) {
    build_mid_hamiltonian(grid_.mid_time(first + k), alpha);
    // Per-column products keep the columns bitwise-decoupled.
    for (Eigen::Index c = 0; c < cols; ++c) rhs_.col(c).noalias() = h_ * u.col(c);
    rhs_ = u - half * rhs_;
    cayley_ = half * h_;
    cayley_.diagonal().array() += 1.0;
    lu_.compute(cayley_);
    u = lu_.solve(rhs_);
    if (!u.allFinite())
      throw std::runtime_error("non-finite state in window " + std::to_string(window) +
                               " at step " + std::to_string(k));
    if (trajectory) trajectory->push_back(u);
  }
  return u;
}

Propagator::AdjointResult Propagator::propagate_adjoint_window(
    const ComplexMatrix& terminal, int window, const RealVector& alpha,
    const std::vector<ComplexMatrix>* trajectory, const ComplexMatrix* u_end) {
  if (window < 0 || window >= grid_.num_windows) throw std::invalid_argument("window out of range");
  const long long steps = grid_.steps_per_window();
  if (trajectory == nullptr && u_end == nullptr)
    throw std::invalid_argument("adjoint sweep needs stored forward states or the end state");
  if (trajectory && static_cast<long long>(trajectory->size()) != steps + 1)
    throw std::invalid_argument("stored trajectory has wrong length");

  const long long first = steps * window;
  const double dt = grid_.dt();
  const Complex half(0.0, 0.5 * dt);
  const Eigen::Index cols = terminal.cols();

  ComplexMatrix lam = terminal;
  ComplexMatrix u;
  if (!trajectory) u = *u_end;
  ComplexMatrix lam_mid(model_.dim, cols), u_mid(model_.dim, cols);
  RealVector grad = RealVector::Zero(param_.total_params());

  for (long long k = steps - 1; k >= 0; --k) {
    const double t_mid = grid_.mid_time(first + k);
    build_mid_hamiltonian(t_mid, alpha);
    cayley_ = -half * h_;  // I - i dt/2 H, the adjoint of the forward factor
    cayley_.diagonal().array() += 1.0;
    lu_.compute(cayley_);
    lam_mid = lu_.solve(lam);
    if (trajectory) {
      u_mid = 0.5 * ((*trajectory)[k] + (*trajectory)[k + 1]);
    } else {
      u_mid = lu_.solve(u);
      u = 2.0 * u_mid - u;  // exact inverse of the forward step
    }
    accumulate_control_gradient(t_mid, dt, lam_mid, u_mid, grad);
    lam = 2.0 * lam_mid - lam;
    if (!lam.allFinite())
      throw std::runtime_error("non-finite adjoint state in window " + std::to_string(window) +
                               " at step " + std::to_string(k));
  }
  return AdjointResult{std::move(lam), std::move(grad)};
}

void Propagator::accumulate_control_gradient(double t_mid, double dt,
                                             const ComplexMatrix& lambda_mid,
                                             const ComplexMatrix& u_mid, RealVector& grad) const {
  const Eigen::Index cols = u_mid.cols();
  for (int j = 0; j < model_.num_qubits; ++j) {
    // tr_low = <Lambda, A_j U>_F, tr_raise = <Lambda, A_j^t U>_F; the only
    // per-column work, everything else is scalar.
    Complex tr_low(0.0, 0.0), tr_raise(0.0, 0.0);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (const auto& [lo, hi] : model_.pairs[j]) {
        tr_low += std::conj(lambda_mid(lo, c)) * u_mid(hi, c);
        tr_raise += std::conj(lambda_mid(hi, c)) * u_mid(lo, c);
      }
    }
    for (int f = 0; f < param_.num_carriers(j); ++f) {
      const Complex phase = std::polar(1.0, t_mid * param_.carrier_radns[j][f]);
      for_each_active_spline(t_mid, param_, [&](int s, double b) {
        const Complex g = b * phase;
        const Complex a = g * tr_low;
        const Complex r = std::conj(g) * tr_raise;
        // 2 dt Re< Lam, i dH/da U > for the real- and imaginary-part
        // coefficients; dH/da_im = i dH_re/da pulls in the extra factor i.
        grad[param_.param_index(j, f, s, 0)] += 2.0 * dt * (-a.imag() - r.imag());
        grad[param_.param_index(j, f, s, 1)] += 2.0 * dt * (-a.real() + r.real());
      });
    }
  }
}

ComplexMatrix Propagator::rollout(const RealVector& alpha,
                                  std::vector<ComplexMatrix>* boundary_states) {
  if (boundary_states) boundary_states->clear();
  ComplexMatrix u = ComplexMatrix::Identity(model_.dim, model_.dim);
  for (int m = 0; m < grid_.num_windows; ++m) {
    u = propagate_window(u, m, alpha);
    if (boundary_states && m < grid_.num_windows - 1) boundary_states->push_back(u);
  }
  return u;
}

}  // namespace qoc
