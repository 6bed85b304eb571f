#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace qoc;

namespace {

/// One-qubit system with zero detuning: H_s = 0, single zero carrier.
SystemSpec free_qubit_spec() {
  SystemSpec s;
  s.num_qubits = 1;
  s.freq_ghz = {5.0};
  s.coupling_mhz = {};
  s.rot_freq_ghz = 5.0;
  s.carrier_mhz = {{0.0}};
  return s;
}

}  // namespace

TEST_CASE("window grid validation") {
  CHECK_THROWS_AS(WindowGrid::create(10.0, 100, 3), std::invalid_argument);
  CHECK_THROWS_AS(WindowGrid::create(10.0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(WindowGrid::create(-1.0, 10, 1), std::invalid_argument);

  const WindowGrid g = WindowGrid::create(190.0, 2252, 4);
  CHECK(g.steps_per_window() == 563);
  CHECK(std::abs(g.dt() * static_cast<double>(g.total_steps) - 190.0) <= 1e-12);
  CHECK(g.boundary(0) == 0.0);
  CHECK(g.boundary(4) == Catch::Approx(190.0));
  CHECK(g.boundary(2) == Catch::Approx(95.0));
}

TEST_CASE("step_forward on a trivial Hamiltonian is the identity map") {
  const SystemSpec spec = free_qubit_spec();
  const Model model = Model::build(spec);
  const auto param = ControlParameterization::create(10.0, 3.0, spec.carrier_mhz);
  const RealVector alpha = RealVector::Zero(param.total_params());
  std::mt19937_64 rng(5);
  const ComplexMatrix u = test::random_complex_matrix(2, rng);
  const ComplexMatrix next = step_forward(u, 0.0, 0.1, model, param, alpha);
  CHECK((next - u).norm() <= 1e-14);
}

TEST_CASE("one Cayley step matches the exponential to third order") {
  const SystemSpec spec = test::qft4_spec();
  const Model model = Model::build(spec);
  const auto param = ControlParameterization::create(10.0, 3.0, spec.carrier_mhz);
  const RealVector alpha = RealVector::Zero(param.total_params());  // constant H = H_s
  const ComplexMatrix u0 = ComplexMatrix::Identity(4, 4);
  for (double dt : {0.5, 0.25, 0.125}) {
    const ComplexMatrix stepped = step_forward(u0, 0.0, dt, model, param, alpha);
    const ComplexMatrix exact = test::expm_schrodinger(model.h_sys, dt);
    // local error ~ dt^3 ||H||^3 / 12
    const double h3 = std::pow(model.h_sys.operatorNorm(), 3);
    CHECK((stepped - exact).norm() <= 0.5 * dt * dt * dt * h3);
  }
}

TEST_CASE("Cayley steps preserve column norms even for non-unitary states") {
  const SystemSpec spec = test::qft4_spec();
  const Model model = Model::build(spec);
  const auto param = ControlParameterization::create(10.0, 3.0, spec.carrier_mhz);
  std::mt19937_64 rng(9);
  const RealVector alpha = test::random_alpha(param.total_params(), rng, 0.1);
  const ComplexMatrix u = test::random_complex_matrix(4, rng);
  const ComplexMatrix next = step_forward(u, 1.7, 0.05, model, param, alpha);
  CHECK((next.adjoint() * next - u.adjoint() * u).norm() <= 1e-13);
}

TEST_CASE("window propagation against the matrix exponential oracle") {
  // Constant Hamiltonian (zero controls): global error is O(dt^2).
  const Problem p = test::small_problem(1, 240, 24.0);
  Propagator prop(p.model, p.param, p.grid);
  const RealVector alpha = RealVector::Zero(p.param.total_params());
  const ComplexMatrix u = prop.propagate_window(ComplexMatrix::Identity(4, 4), 0, alpha);
  const ComplexMatrix exact = test::expm_schrodinger(p.model.h_sys, 24.0);
  // Global error ~ T dt^2 ||H||^3 / 12 ~ 2e-4 on this grid.
  CHECK((u - exact).norm() <= 5e-4);
  CHECK((u - exact).norm() >= 1e-9);  // not exact, the oracle is independent
}

TEST_CASE("halving dt gives second-order convergence") {
  const SystemSpec spec = test::qft4_spec();
  const Model model = Model::build(spec);
  const auto param = ControlParameterization::create(24.0, 3.0, spec.carrier_mhz);
  const RealVector alpha = RealVector::Zero(param.total_params());
  const ComplexMatrix exact = test::expm_schrodinger(model.h_sys, 24.0);

  auto error_at = [&](long long steps) {
    const WindowGrid grid = WindowGrid::create(24.0, steps, 1);
    Propagator prop(model, param, grid);
    return (prop.propagate_window(ComplexMatrix::Identity(4, 4), 0, alpha) - exact).norm();
  };
  const double ratio = error_at(120) / error_at(240);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("unitarity is preserved over the full QFT-4 grid") {
  const SystemSpec spec = test::qft4_spec();
  const Model model = Model::build(spec);
  const auto param = ControlParameterization::create(190.0, 3.0, spec.carrier_mhz);
  const WindowGrid grid = WindowGrid::create(190.0, 2252, 1);
  std::mt19937_64 rng(21);
  const RealVector alpha = test::random_alpha(param.total_params(), rng, mhz_to_radns(10.0));
  Propagator prop(model, param, grid);
  const ComplexMatrix u = prop.propagate_window(ComplexMatrix::Identity(4, 4), 0, alpha);
  CHECK((u.adjoint() * u - ComplexMatrix::Identity(4, 4)).norm() <= 1e-10);
}

TEST_CASE("columns propagate independently") {
  const Problem p = test::small_problem(2);
  Propagator prop(p.model, p.param, p.grid);
  std::mt19937_64 rng(23);
  const RealVector alpha = test::random_alpha(p.param.total_params(), rng, 0.05);
  const ComplexMatrix w = test::random_complex_matrix(4, rng);
  const ComplexMatrix full = prop.propagate_window(w, 1, alpha);
  for (int c = 0; c < 4; ++c) {
    const ComplexMatrix single = prop.propagate_window(w.col(c), 1, alpha);
    CHECK((full.col(c) - single.col(0)).norm() == 0.0);
  }
}

TEST_CASE("store-trajectory mode records every step") {
  const Problem p = test::small_problem(4);
  Propagator prop(p.model, p.param, p.grid);
  const RealVector alpha = RealVector::Zero(p.param.total_params());
  std::vector<ComplexMatrix> traj;
  const ComplexMatrix u = prop.propagate_window(ComplexMatrix::Identity(4, 4), 2, alpha, &traj);
  REQUIRE(static_cast<long long>(traj.size()) == p.grid.steps_per_window() + 1);
  CHECK((traj.back() - u).norm() == 0.0);
  CHECK((traj.front() - ComplexMatrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("non-finite states are reported with the step index") {
  const Problem p = test::small_problem(2);
  Propagator prop(p.model, p.param, p.grid);
  const RealVector alpha = RealVector::Zero(p.param.total_params());
  ComplexMatrix w = ComplexMatrix::Identity(4, 4);
  w(0, 0) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_WITH(prop.propagate_window(w, 0, alpha),
                    Catch::Matchers::ContainsSubstring("step 0"));
}

TEST_CASE("adjoint back-propagation reverses the forward step") {
  const Problem p = test::small_problem(1, 60, 6.0);
  Propagator prop(p.model, p.param, p.grid);
  std::mt19937_64 rng(29);
  const RealVector alpha = test::random_alpha(p.param.total_params(), rng, 0.1);

  std::vector<ComplexMatrix> traj;
  const ComplexMatrix terminal = test::random_complex_matrix(4, rng);
  prop.propagate_window(ComplexMatrix::Identity(4, 4), 0, alpha, &traj);
  const auto adj = prop.propagate_adjoint_window(terminal, 0, alpha, &traj, nullptr);

  // The adjoint equation matches the state equation, so stepping the
  // recovered lambda forward must recover the terminal condition.
  ComplexMatrix lam = adj.lambda_start;
  for (long long k = 0; k < p.grid.steps_per_window(); ++k)
    lam = step_forward(lam, p.grid.step_time(k), p.grid.dt(), p.model, p.param, alpha);
  CHECK((lam - terminal).norm() <= 1e-12 * terminal.norm());
}

TEST_CASE("parameters without support in a window contribute nothing") {
  // Window 3 of 8 covers t in [9, 12); splines centered beyond t = 16.5
  // cannot touch it.
  const Problem p = test::small_problem(8, 240, 24.0);
  Propagator prop(p.model, p.param, p.grid);
  std::mt19937_64 rng(31);
  const RealVector alpha = test::random_alpha(p.param.total_params(), rng, 0.1);
  std::vector<ComplexMatrix> traj;
  prop.propagate_window(ComplexMatrix::Identity(4, 4), 3, alpha, &traj);
  const auto adj =
      prop.propagate_adjoint_window(test::random_complex_matrix(4, rng), 3, alpha, &traj, nullptr);
  for (int s = 0; s < p.param.num_splines; ++s) {
    if (p.param.spline_center(s) <= 16.5) continue;
    for (int j = 0; j < 2; ++j)
      for (int f = 0; f < 2; ++f)
        for (int part = 0; part < 2; ++part)
          CHECK(adj.grad_alpha[p.param.param_index(j, f, s, part)] == 0.0);
  }
}

TEST_CASE("window adjoint gradient matches finite differences of the window objective") {
  // P_m(alpha) = (mu/2) || S^m(alpha) W - W' ||_F^2 for one interior window;
  // the adjoint sweep from the matching terminal condition must produce its
  // exact alpha-derivative.
  const Problem p = test::small_problem(2);
  std::mt19937_64 rng(43);
  const RealVector alpha = test::random_alpha(p.param.total_params(), rng, 0.1);
  const ComplexMatrix w0 = test::random_unitary(4, rng);
  const ComplexMatrix w1 = test::random_complex_matrix(4, rng);
  const double mu = p.mu;
  Propagator prop(p.model, p.param, p.grid);

  auto window_objective = [&](const RealVector& a) {
    const ComplexMatrix u_end = prop.propagate_window(w0, 0, a);
    return 0.5 * mu * (u_end - w1).squaredNorm();
  };

  std::vector<ComplexMatrix> traj;
  const ComplexMatrix u_end = prop.propagate_window(w0, 0, alpha, &traj);
  const ComplexMatrix xi = terminal_condition(0, 2, u_end, &w1, p.target, mu);
  const auto adj = prop.propagate_adjoint_window(xi, 0, alpha, &traj, nullptr);

  const double h = 1e-5;
  for (int trial = 0; trial < 25; ++trial) {
    const int ell = static_cast<int>(p.param.total_params() * test::uniform(rng));
    RealVector ap = alpha, am = alpha;
    ap[ell] += h;
    am[ell] -= h;
    const double fd = (window_objective(ap) - window_objective(am)) / (2.0 * h);
    const double ad = adj.grad_alpha[ell];
    if (std::abs(ad) < 1e-10 * adj.grad_alpha.norm()) continue;
    CHECK(std::abs(ad - fd) / std::max(std::abs(ad), std::abs(fd)) <= 1e-7);
  }
}

TEST_CASE("store and recompute adjoint modes agree") {
  const Problem p = test::small_problem(2);
  Propagator prop(p.model, p.param, p.grid);
  std::mt19937_64 rng(37);
  const RealVector alpha = test::random_alpha(p.param.total_params(), rng, 0.1);
  const ComplexMatrix terminal = test::random_complex_matrix(4, rng, 0.3);

  std::vector<ComplexMatrix> traj;
  const ComplexMatrix u_end = prop.propagate_window(ComplexMatrix::Identity(4, 4), 1, alpha, &traj);
  const auto stored = prop.propagate_adjoint_window(terminal, 1, alpha, &traj, nullptr);
  const auto recomputed = prop.propagate_adjoint_window(terminal, 1, alpha, nullptr, &u_end);

  CHECK((stored.lambda_start - recomputed.lambda_start).norm() <= 1e-12);
  CHECK((stored.grad_alpha - recomputed.grad_alpha).norm() <=
        1e-12 * std::max(1.0, stored.grad_alpha.norm()));
}

TEST_CASE("adjoint sweep requires forward states") {
  const Problem p = test::small_problem(2);
  Propagator prop(p.model, p.param, p.grid);
  const RealVector alpha = RealVector::Zero(p.param.total_params());
  CHECK_THROWS_AS(
      prop.propagate_adjoint_window(ComplexMatrix::Identity(4, 4), 0, alpha, nullptr, nullptr),
      std::invalid_argument);
}

TEST_CASE("rollout") {
  const Problem p1 = test::small_problem(1);
  const Problem p4 = test::small_problem(4);
  std::mt19937_64 rng(41);
  const RealVector alpha = test::random_alpha(p1.param.total_params(), rng, 0.05);

  SECTION("M = 1 rollout is plain window propagation") {
    Propagator prop(p1.model, p1.param, p1.grid);
    const ComplexMatrix direct = prop.propagate_window(ComplexMatrix::Identity(4, 4), 0, alpha);
    CHECK((prop.rollout(alpha) - direct).norm() == 0.0);
  }
  SECTION("identity dynamics give the identity") {
    const SystemSpec spec = free_qubit_spec();
    const Model model = Model::build(spec);
    const auto param = ControlParameterization::create(6.0, 3.0, spec.carrier_mhz);
    const WindowGrid grid = WindowGrid::create(6.0, 60, 3);
    Propagator prop(model, param, grid);
    CHECK((prop.rollout(RealVector::Zero(param.total_params())) - ComplexMatrix::Identity(2, 2))
              .norm() == 0.0);
  }
  SECTION("rollout equals chained per-window propagation bitwise") {
    Propagator prop(p4.model, p4.param, p4.grid);
    std::vector<ComplexMatrix> boundaries;
    const ComplexMatrix u_ro = prop.rollout(alpha, &boundaries);
    REQUIRE(boundaries.size() == 3);
    ComplexMatrix u = ComplexMatrix::Identity(4, 4);
    for (int m = 0; m < 4; ++m) {
      u = prop.propagate_window(u, m, alpha);
      if (m < 3) CHECK((u - boundaries[m]).norm() == 0.0);
    }
    CHECK((u - u_ro).norm() == 0.0);
  }
  SECTION("window decompositions of one grid share step times bitwise") {
    // Same total grid, M = 1 vs M = 4: identical final states.
    Propagator prop1(p1.model, p1.param, p1.grid);
    Propagator prop4(p4.model, p4.param, p4.grid);
    CHECK((prop1.rollout(alpha) - prop4.rollout(alpha)).norm() == 0.0);
  }
}
