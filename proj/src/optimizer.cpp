#include "qoc/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <random>

namespace qoc {

std::string to_string(OptimStatus status) {
  switch (status) {
    case OptimStatus::EstimateConverged: return "estimate_converged";
    case OptimStatus::GradConverged: return "grad_converged";
    case OptimStatus::InfidelityReached: return "infidelity_reached";
    case OptimStatus::MaxIters: return "max_iters";
    case OptimStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

namespace {

struct CurvaturePair {
  RealVector s, y;
  double rho = 0.0;
};

RealVector project(RealVector x, const RealVector& lower, const RealVector& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

double projected_grad_norm(const RealVector& x, const RealVector& grad, const RealVector& lower,
                           const RealVector& upper) {
  return (x - project(x - grad, lower, upper)).lpNorm<Eigen::Infinity>();
}

RealVector two_loop_direction(const RealVector& grad, const std::deque<CurvaturePair>& pairs) {
  RealVector q = grad;
  std::vector<double> a(pairs.size());
  for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
    a[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= a[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const auto& newest = pairs.back();
    q *= newest.s.dot(newest.y) / newest.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double b = pairs[i].rho * pairs[i].y.dot(q);
    q += (a[i] - b) * pairs[i].s;
  }
  return -q;
}

struct LineSearchResult {
  RealVector x;
  OracleEval eval;
  double step = 0.0;
};

std::optional<LineSearchResult> armijo_search(const ValueGradFn& oracle, const RealVector& x,
                                              const OracleEval& current, const RealVector& dir,
                                              const RealVector& lower, const RealVector& upper,
                                              const OptimizerConfig& cfg) {
  double step = 1.0;
  for (int trial = 0; trial < cfg.max_line_search; ++trial) {
    RealVector xt = project(x + step * dir, lower, upper);
    const RealVector dx = xt - x;
    const double gdx = current.grad.dot(dx);
    if (dx.isZero(0.0)) return std::nullopt;
    OracleEval ev = oracle(xt);
    if (gdx < 0.0 && ev.value <= current.value + cfg.armijo_c1 * gdx)
      return LineSearchResult{std::move(xt), std::move(ev), step};
    step *= cfg.backtrack_factor;
  }
  return std::nullopt;
}

}  // namespace

MinimizeResult minimize(const ValueGradFn& oracle, RealVector x0, const RealVector& lower,
                        const RealVector& upper, const OptimizerConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  MinimizeResult result;
  RealVector x = project(std::move(x0), lower, upper);
  OracleEval current = oracle(x);
  std::deque<CurvaturePair> pairs;
  double last_step = 0.0;
  int rejected_pairs = 0;

  for (int iter = 0;; ++iter) {
    const double pg_norm = projected_grad_norm(x, current.grad, lower, upper);
    result.history.push_back(IterationRecord{iter, current.value,
                                             current.report.generalized_infidelity,
                                             current.report.penalty_value,
                                             current.report.rollout_estimate, pg_norm, last_step,
                                             elapsed()});
    result.iterations = iter;

    if (std::isfinite(current.report.rollout_estimate) &&
        current.report.rollout_estimate <= config.tol_estimate) {
      result.status = OptimStatus::EstimateConverged;
      break;
    }
    if (config.stop_below_infidelity &&
        current.report.generalized_infidelity <= *config.stop_below_infidelity) {
      result.status = OptimStatus::InfidelityReached;
      break;
    }
    if (pg_norm <= config.tol_gradnorm) {
      result.status = OptimStatus::GradConverged;
      break;
    }
    if (iter >= config.max_iters) {
      result.status = OptimStatus::MaxIters;
      break;
    }

    RealVector dir = two_loop_direction(current.grad, pairs);
    if (current.grad.dot(dir) > -1e-12 * current.grad.norm() * dir.norm()) {
      pairs.clear();
      dir = -current.grad;
    }

    auto ls = armijo_search(oracle, x, current, dir, lower, upper, config);
    if (!ls) {
      // One steepest-descent fallback; if that fails too, give up.
      pairs.clear();
      dir = -current.grad;
      ls = armijo_search(oracle, x, current, dir, lower, upper, config);
      if (!ls) {
        result.status = OptimStatus::LineSearchFailed;
        break;
      }
    }

    CurvaturePair pair;
    pair.s = ls->x - x;
    pair.y = ls->eval.grad - current.grad;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      pairs.push_back(std::move(pair));
      if (static_cast<int>(pairs.size()) > config.history_size) pairs.pop_front();
      rejected_pairs = 0;
    } else if (++rejected_pairs >= 2) {
      // Armijo steps do not enforce the curvature condition; a run of
      // rejected pairs means the stored model has gone stale.
      pairs.clear();
      rejected_pairs = 0;
    }

    x = std::move(ls->x);
    current = std::move(ls->eval);
    last_step = ls->step;
  }

  result.x = std::move(x);
  return result;
}

RealVector random_init_alpha(const ControlParameterization& param, unsigned long long seed,
                             double amplitude_mhz) {
  const double amplitude = mhz_to_radns(amplitude_mhz);
  std::mt19937_64 rng(seed);
  RealVector alpha(param.total_params());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    alpha[i] = amplitude * (2.0 * u - 1.0);
  }
  return alpha;
}

}  // namespace qoc
