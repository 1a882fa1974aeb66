#include <doctest.h>

#include "qbattery/error.hpp"
#include "qbattery/operators.hpp"
#include "support.hpp"

using namespace qbat;

namespace {

char to_char(PauliKind k) {
  switch (k) {
    case PauliKind::X:
      return 'x';
    case PauliKind::Y:
      return 'y';
    case PauliKind::Z:
      return 'z';
    case PauliKind::Plus:
      return '+';
    case PauliKind::Minus:
      return '-';
  }
  return 'i';
}

}  // namespace

TEST_CASE("space descriptor layout") {
  const auto s = SpaceDescriptor::qubits(3, 4);
  CHECK(s.battery_dim() == 8);
  CHECK(s.total_dim() == 32);
  CHECK(s.index(5, 2) == 22);
  CHECK(s.excitations(5) == 2);
  const auto c = SpaceDescriptor::collective(10, 41);
  CHECK(c.total_dim() == 451);
  CHECK(c.excitations(7) == 7);
  CHECK_THROWS_AS(SpaceDescriptor::qubits(0, 4), ConfigError);
  CHECK_THROWS_AS(SpaceDescriptor::qubits(2, 1), ConfigError);
}

TEST_CASE("sigma_z sign convention on one qubit") {
  const auto s = SpaceDescriptor::qubits(1, 2);
  const DenseMat z = local_pauli(s, 1, PauliKind::Z).dense();
  // |down> = index 0 carries -1.
  CHECK(z.diagonal().real().isApprox(Eigen::Vector4d(-1, -1, 1, 1)));
}

TEST_CASE("local Pauli operators match Kronecker references") {
  for (int n = 1; n <= 3; ++n) {
    const auto s = SpaceDescriptor::qubits(n, 3);
    for (int site = 1; site <= n; ++site) {
      for (auto k : {PauliKind::X, PauliKind::Y, PauliKind::Z, PauliKind::Plus, PauliKind::Minus}) {
        const double err = ref::max_abs(local_pauli(s, site, k).dense() - ref::site_op(n, site, to_char(k), 3));
        CHECK(err == 0.0);
      }
    }
  }
  const auto s = SpaceDescriptor::qubits(2, 2);
  CHECK_THROWS_AS(local_pauli(s, 3, PauliKind::X), ConfigError);
  CHECK_THROWS_AS(local_pauli(SpaceDescriptor::collective(2, 2), 1, PauliKind::X), ConfigError);
}

TEST_CASE("Pauli algebra on every site") {
  const auto s = SpaceDescriptor::qubits(3, 2);
  for (int site = 1; site <= 3; ++site) {
    const DenseMat x = local_pauli(s, site, PauliKind::X).dense();
    const DenseMat y = local_pauli(s, site, PauliKind::Y).dense();
    const DenseMat z = local_pauli(s, site, PauliKind::Z).dense();
    CHECK(ref::max_abs(x * y - Complex{0, 1} * z) < 1e-15);
    CHECK(ref::max_abs(x * x - DenseMat::Identity(16, 16)) < 1e-15);
  }
  const DenseMat x1 = local_pauli(s, 1, PauliKind::X).dense();
  const DenseMat z2 = local_pauli(s, 2, PauliKind::Z).dense();
  CHECK(ref::max_abs(x1 * z2 - z2 * x1) == 0.0);
}

TEST_CASE("collective spin on both bases") {
  for (int n = 1; n <= 4; ++n) {
    for (auto space : {SpaceDescriptor::qubits(n, 2), SpaceDescriptor::collective(n, 2)}) {
      const DenseMat jx = collective_spin(space, PauliKind::X).dense();
      const DenseMat jy = collective_spin(space, PauliKind::Y).dense();
      const DenseMat jz = collective_spin(space, PauliKind::Z).dense();
      const DenseMat jp = collective_spin(space, PauliKind::Plus).dense();
      CHECK(ref::max_abs(jx * jy - jy * jx - Complex{0, 1} * jz) < 1e-12);
      CHECK(ref::max_abs(jp - (jx + Complex{0, 1} * jy)) < 1e-12);
      const double j = 0.5 * n;
      if (space.basis() == BatteryBasis::Collective) {
        const DenseMat j2 = jx * jx + jy * jy + jz * jz;
        CHECK(ref::max_abs(j2 - j * (j + 1) * DenseMat::Identity(j2.rows(), j2.cols())) < 1e-12);
        for (int k = 0; k < n; ++k) {
          CHECK(std::abs(jp(space.index(k + 1, 0), space.index(k, 0)) - std::sqrt((k + 1.0) * (n - k))) < 1e-14);
        }
      } else {
        CHECK(ref::max_abs(jz - ref::collective(n, 'z', 2)) < 1e-15);
        CHECK(ref::max_abs(jp - ref::collective(n, '+', 2)) < 1e-15);
      }
    }
  }
}

TEST_CASE("boson operators") {
  const auto s = SpaceDescriptor::qubits(1, 5);
  const BosonOps b = boson_ops(s);
  CHECK(ref::max_abs(b.a.dense() - ref::cavity_op(1, ref::annihilation(5))) < 1e-15);
  CHECK(ref::max_abs(b.adag.dense() - b.a.dense().adjoint()) == 0.0);
  CHECK(ref::max_abs(b.n.dense() - b.adag.dense() * b.a.dense()) < 1e-14);
  const DenseMat comm = (b.a * b.adag - b.adag * b.a).dense();
  // [a, a^dag] = 1 except on the truncated top level.
  for (Eigen::Index q = 0; q < 2; ++q) {
    for (int n = 0; n < 4; ++n) CHECK(std::abs(comm(s.index(q, n), s.index(q, n)) - 1.0) < 1e-14);
    CHECK(std::abs(comm(s.index(q, 4), s.index(q, 4)) + 4.0) < 1e-14);
  }
}

TEST_CASE("coherent state moments and truncation") {
  CHECK(default_cavity_dim(1) == 13);
  CHECK(default_cavity_dim(2) == 16);
  CHECK(default_cavity_dim(4) == 21);
  CHECK(default_cavity_dim(6) == 25);
  CHECK(default_cavity_dim(32) == 129);
  const auto s = SpaceDescriptor::qubits(1, default_cavity_dim(4));
  const StateVec psi = coherent_state(s, 2.0);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-14);
  const DensityState st = DensityState::pure(s, psi);
  CHECK(std::abs(st.expectation(boson_ops(s).n).real() - 4.0) < 1e-6);
  CHECK(std::abs(st.expectation(boson_ops(s).a) - Complex{2.0}) < 1e-6);

  // cavity_dim 17: Poisson weight lost beyond the cut is 1.13e-6 and the
  // renormalized mean is 3.99998496 (independent Poisson oracle).
  const auto s17 = SpaceDescriptor::qubits(1, 17);
  const DensityState st17 = DensityState::pure(s17, coherent_state(s17, 2.0));
  CHECK(std::abs(st17.expectation(boson_ops(s17).n).real() - 3.9999849608662) < 1e-9);
  CHECK_THROWS_AS(coherent_state(SpaceDescriptor::qubits(1, 8), 2.0), ConfigError);
}

TEST_CASE("states, partial trace and distances") {
  const auto s = SpaceDescriptor::qubits(2, 3);
  const StateVec f = fock_state(s, 2);
  CHECK(std::abs(f(s.index(0, 2)) - Complex{1.0}) == 0.0);
  CHECK(all_down(s)(0) == Complex{1.0});

  std::mt19937_64 rng(3);
  const ref::M rb = ref::random_density(4, rng);
  const ref::M rc = ref::random_density(3, rng);
  const DenseMat rho = ref::kron(rb, rc);
  CHECK(ref::max_abs(partial_trace_cavity(s, rho) - rb) < 1e-14);

  DenseMat p0 = DenseMat::Zero(2, 2), p1 = DenseMat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  CHECK(trace_distance(p0, p1) == doctest::Approx(1.0));
  CHECK(trace_distance(p0, p0) == doctest::Approx(0.0));
  CHECK(trace_norm_hermitian(p0 - p1) == doctest::Approx(2.0));
}

TEST_CASE("operator matrix arithmetic") {
  const auto s = SpaceDescriptor::qubits(1, 3);
  const auto x = local_pauli(s, 1, PauliKind::X);
  const auto z = local_pauli(s, 1, PauliKind::Z);
  CHECK(ref::max_abs(commutator(x, z).dense() - (x * z - z * x).dense()) == 0.0);
  CHECK(x.hermitian_defect() == 0.0);
  CHECK(local_pauli(s, 1, PauliKind::Plus).hermitian_defect() > 0.5);
  CHECK(OperatorMatrix::identity(s).max_abs() == 1.0);
  SparseMat bad(6, 6);
  bad.insert(0, 1) = 1.0;
  CHECK_THROWS_AS(OperatorMatrix(s, bad, true), NumericalError);
}
