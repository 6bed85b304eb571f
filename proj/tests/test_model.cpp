#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace qoc;

TEST_CASE("lowering operator for a single qubit") {
  SystemSpec s;
  s.num_qubits = 1;
  s.freq_ghz = {5.0};
  s.coupling_mhz = {};
  s.rot_freq_ghz = 5.0;
  s.carrier_mhz = {{0.0}};
  const auto ops = build_lowering_ops(s);
  REQUIRE(ops.size() == 1);
  ComplexMatrix expected(2, 2);
  expected << 0, 1, 0, 0;
  CHECK((ops[0] - expected).norm() == 0.0);
}

TEST_CASE("lowering operators are Kronecker placements") {
  const SystemSpec s = test::qft4_spec();
  const auto ops = build_lowering_ops(s);
  REQUIRE(ops.size() == 2);
  // A_1 = a (x) I: ones at (0,2), (1,3).
  ComplexMatrix a1 = ComplexMatrix::Zero(4, 4);
  a1(0, 2) = 1.0;
  a1(1, 3) = 1.0;
  CHECK((ops[0] - a1).norm() == 0.0);
  // A_2 = I (x) a: ones at (0,1), (2,3).
  ComplexMatrix a2 = ComplexMatrix::Zero(4, 4);
  a2(0, 1) = 1.0;
  a2(2, 3) = 1.0;
  CHECK((ops[1] - a2).norm() == 0.0);
}

TEST_CASE("lowering operators are nilpotent for qubit subsystems") {
  for (int q : {1, 2, 3}) {
    SystemSpec s;
    s.num_qubits = q;
    s.freq_ghz.assign(q, 5.0);
    s.coupling_mhz.assign(q - 1, 5.0);
    s.rot_freq_ghz = 5.0;
    s.carrier_mhz.assign(q, {0.0});
    for (const auto& a : build_lowering_ops(s)) CHECK((a * a).norm() == 0.0);
  }
}

TEST_CASE("system Hamiltonian vanishes at zero detuning") {
  SystemSpec s;
  s.num_qubits = 1;
  s.freq_ghz = {5.0};
  s.coupling_mhz = {};
  s.rot_freq_ghz = 5.0;
  s.carrier_mhz = {{0.0}};
  CHECK(build_system_hamiltonian(s).norm() == 0.0);
}

TEST_CASE("QFT-4 system Hamiltonian matches the hand-computed matrix") {
  const SystemSpec s = test::qft4_spec();
  CHECK(s.rot_freq_ghz == Catch::Approx(5.15).epsilon(1e-15));
  const ComplexMatrix h = build_system_hamiltonian(s);

  const double delta = kTwoPi * 0.03;   // (5.18 - 5.15) GHz in rad/ns
  const double j = kTwoPi * 5.0e-3;     // 5 MHz in rad/ns
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(1, 1) = -delta;
  expected(2, 2) = delta;
  expected(1, 2) = j;
  expected(2, 1) = j;
  CHECK((h - expected).norm() < 1e-14);
  CHECK((h - h.adjoint()).norm() < 1e-12);
}

TEST_CASE("zero coupling gives a diagonal system Hamiltonian") {
  SystemSpec s = test::qft4_spec();
  s.coupling_mhz = {0.0};
  const ComplexMatrix h = build_system_hamiltonian(s);
  ComplexMatrix off = h;
  off.diagonal().setZero();
  CHECK(off.norm() == 0.0);
}

TEST_CASE("control Hamiltonian assembly") {
  SystemSpec s;
  s.num_qubits = 1;
  s.freq_ghz = {5.0};
  s.coupling_mhz = {};
  s.rot_freq_ghz = 5.0;
  s.carrier_mhz = {{0.0}};
  const auto ops = build_lowering_ops(s);
  const ComplexMatrix h0 = ComplexMatrix::Zero(2, 2);

  SECTION("zero drive leaves the system term") {
    const ComplexMatrix h = assemble_hamiltonian(h0, ops, {Complex(0, 0)});
    CHECK(h.norm() == 0.0);
  }
  SECTION("real drive gives sigma_x") {
    const ComplexMatrix h = assemble_hamiltonian(h0, ops, {Complex(1, 0)});
    ComplexMatrix expected(2, 2);
    expected << 0, 1, 1, 0;
    CHECK((h - expected).norm() == 0.0);
  }
  SECTION("imaginary drive") {
    const ComplexMatrix h = assemble_hamiltonian(h0, ops, {Complex(0, 1)});
    ComplexMatrix expected(2, 2);
    expected << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
    CHECK((h - expected).norm() == 0.0);
  }
}

TEST_CASE("assembled Hamiltonian is Hermitian for random drives") {
  const SystemSpec s = test::qft4_spec();
  const Model model = Model::build(s);
  std::mt19937_64 rng(7);
  ComplexMatrix h(4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Complex> drive = {Complex(test::uniform_pm(rng), test::uniform_pm(rng)),
                                  Complex(test::uniform_pm(rng), test::uniform_pm(rng))};
    model.assemble_into(h, drive);
    CHECK((h - h.adjoint()).norm() <= 1e-12);
    CHECK((h - assemble_hamiltonian(model.h_sys, model.lowering, drive)).norm() == 0.0);
  }
}

TEST_CASE("QFT target matrices") {
  SECTION("n = 2 is the Hadamard-like DFT") {
    const ComplexMatrix v = qft_target(2);
    const double r = 1.0 / std::sqrt(2.0);
    ComplexMatrix expected(2, 2);
    expected << r, r, r, -r;
    CHECK((v - expected).norm() < 1e-15);
  }
  SECTION("n = 4 first row/column and the (1,1) entry") {
    const ComplexMatrix v = qft_target(4);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(v(0, k) - Complex(0.5, 0.0)) < 1e-15);
      CHECK(std::abs(v(k, 0) - Complex(0.5, 0.0)) < 1e-15);
    }
    CHECK(std::abs(v(1, 1) - Complex(0.0, 0.5)) < 1e-15);
  }
  SECTION("unitarity up to n = 16") {
    for (int n : {2, 4, 8, 16}) {
      const ComplexMatrix v = qft_target(n);
      CHECK((v.adjoint() * v - ComplexMatrix::Identity(n, n)).norm() <= 1e-12);
    }
  }
}
