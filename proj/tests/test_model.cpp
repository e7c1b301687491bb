#include <catch2/catch_amalgamated.hpp>

#include "pse/model.hpp"
#include "test_helpers.hpp"

using namespace pse;

namespace {

// per-term assembly oracle used to cross-check build_H0 site by site
Matrix oracle_h0(const SpinBathModel& m) {
  const int n = m.n_qubits + m.n_bath;
  auto op = [&](int alpha, int site) { return detail::spin_component(alpha, site, n); };
  Matrix h = Matrix::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
  for (int k = 0; k < m.n_qubits; ++k)
    for (int mm = 0; mm < m.n_bath; ++mm)
      for (int a = 0; a < 3; ++a)
        h += m.j[mm][k] * op(a, k) * op(a, m.n_qubits + mm);
  for (int mm = 0; mm < m.n_bath; ++mm)
    for (int mp = 0; mp < mm; ++mp)
      h += m.beta[mm][mp] *
           (op(0, m.n_qubits + mm) * op(0, m.n_qubits + mp) +
            op(1, m.n_qubits + mm) * op(1, m.n_qubits + mp) -
            2.0 * op(2, m.n_qubits + mm) * op(2, m.n_qubits + mp));
  if (m.n_qubits == 2)
    for (int a = 0; a < 3; ++a) h += m.k_exchange * op(a, 0) * op(a, 1);
  return h;
}

}  // namespace

TEST_CASE("sample_couplings", "[model]") {
  CouplingEnsembleSpec spec;
  spec.n_qubits = 2;
  spec.n_bath = 4;
  spec.j_cap = 1.3;
  spec.beta_cap = 0.4;
  spec.seed = 42;

  SECTION("determinism: identical seeds give identical arrays") {
    const auto m1 = sample_couplings(spec);
    const auto m2 = sample_couplings(spec);
    REQUIRE(m1.j == m2.j);
    REQUIRE(m1.beta == m2.beta);
  }
  SECTION("caps respected, beta_cap = 0 means non-dynamical bath") {
    const auto m = sample_couplings(spec);
    for (const auto& row : m.j)
      for (double v : row) REQUIRE(std::abs(v) <= spec.j_cap);
    spec.beta_cap = 0.0;
    const auto m0 = sample_couplings(spec);
    for (const auto& row : m0.beta)
      for (double v : row) REQUIRE(v == 0.0);
  }
  SECTION("oversized bath rejected") {
    spec.n_bath = 1000;
    REQUIRE_THROWS_AS(sample_couplings(spec), DimensionTooLarge);
  }
  SECTION("different seeds differ") {
    const auto m1 = sample_couplings(spec);
    spec.seed = 43;
    const auto m2 = sample_couplings(spec);
    REQUIRE(m1.j != m2.j);
  }
}

TEST_CASE("build_H0", "[model]") {
  SECTION("one qubit, one bath spin, unit Heisenberg coupling") {
    SpinBathModel m;
    m.n_qubits = 1;
    m.n_bath = 1;
    m.j = {{1.0}};
    m.beta = {{0.0}};
    const auto h = build_H0(m);
    Matrix expected = 0.25 * (tensor(pauli_x(), pauli_x()) +
                              tensor(pauli_y(), pauli_y()) +
                              tensor(pauli_z(), pauli_z()));
    REQUIRE(max_abs(h.matrix() - expected) < 1e-15);
    const auto sd = spectral(h);
    REQUIRE(sd.eigenvalues(0) == Catch::Approx(-0.75));
    REQUIRE(sd.eigenvalues(3) == Catch::Approx(0.25));
  }
  SECTION("all couplings zero gives the zero operator") {
    SpinBathModel m;
    m.n_qubits = 1;
    m.n_bath = 2;
    m.j = {{0.0}, {0.0}};
    m.beta = {{0.0, 0.0}, {0.0, 0.0}};
    REQUIRE(max_abs(build_H0(m).matrix()) == 0.0);
  }
  SECTION("matches the per-term assembly oracle") {
    CouplingEnsembleSpec spec;
    spec.n_qubits = 1;
    spec.n_bath = 2;
    spec.j_cap = 1.0;
    spec.beta_cap = 0.7;
    spec.seed = 5;
    const auto m = sample_couplings(spec);
    REQUIRE(max_abs(build_H0(m).matrix() - oracle_h0(m)) < 1e-14);

    spec.n_qubits = 2;
    spec.n_bath = 3;
    spec.k_exchange = 0.8;
    const auto m2 = sample_couplings(spec);
    REQUIRE(max_abs(build_H0(m2).matrix() - oracle_h0(m2)) < 1e-14);
  }
  SECTION("traceless for K = 0") {
    CouplingEnsembleSpec spec;
    spec.n_qubits = 1;
    spec.n_bath = 3;
    spec.beta_cap = 0.9;
    spec.seed = 6;
    const auto h = build_H0(sample_couplings(spec));
    REQUIRE(std::abs(h.matrix().trace()) < 1e-12);
  }
  SECTION("isotropy: global spin rotation preserves the spectrum") {
    CouplingEnsembleSpec spec;
    spec.n_qubits = 1;
    spec.n_bath = 2;
    spec.seed = 7;
    const auto m = sample_couplings(spec);
    const auto h = build_H0(m);
    // global rotation about y by a generic angle on every site
    const double th = 0.77;
    Matrix r1 = std::cos(th / 2) * Matrix::Identity(2, 2) -
                Complex(0, 1) * std::sin(th / 2) * pauli_y();
    Matrix r = r1;
    for (int s = 1; s < 3; ++s) r = tensor(r, r1);
    const Matrix conj = r * h.matrix() * r.adjoint();
    const auto s1 = spectral(h);
    const auto s2 = spectral(HermitianOperator::trusted(0.5 * (conj + conj.adjoint())));
    REQUIRE((s1.eigenvalues - s2.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("coupling_strength_A", "[model]") {
  SpinBathModel m;
  m.n_qubits = 1;
  m.n_bath = 2;
  m.j = {{3.0}, {4.0}};
  m.beta = {{0, 0}, {0, 0}};
  REQUIRE(coupling_strength_A(m, 0) == Catch::Approx(std::sqrt(12.5)));

  SECTION("all equal couplings give A = J") {
    m.j = {{0.7}, {0.7}};
    REQUIRE(coupling_strength_A(m, 0) == Catch::Approx(0.7));
  }
  SECTION("invariant under sign flips") {
    m.j = {{0.7}, {-0.7}};
    REQUIRE(coupling_strength_A(m, 0) == Catch::Approx(0.7));
  }
  SECTION("matches direct summation on a random model") {
    CouplingEnsembleSpec spec;
    spec.n_qubits = 2;
    spec.n_bath = 5;
    spec.seed = 11;
    const auto mm = sample_couplings(spec);
    for (int k = 0; k < 2; ++k) {
      double acc = 0;
      for (int b = 0; b < 5; ++b) acc += mm.j[b][k] * mm.j[b][k];
      REQUIRE(coupling_strength_A(mm, k) == Catch::Approx(std::sqrt(acc / 5)));
    }
  }
}

TEST_CASE("initial_state", "[model]") {
  SpinBathModel m;
  m.n_qubits = 1;
  m.n_bath = 1;
  m.j = {{1.0}};
  m.beta = {{0.0}};

  SECTION("|0> with one bath spin") {
    Vector zero(2);
    zero << 1, 0;
    const auto rho = initial_state(zero, m);
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(1, 1) = 0.5;
    REQUIRE(max_abs(rho.matrix() - expected) < 1e-15);
  }
  SECTION("trace one and pure reduced system for any input") {
    const Vector psi = test::random_state(2, 9);
    const auto rho = initial_state(psi, m);
    REQUIRE(rho.matrix().trace().real() == Catch::Approx(1.0));
    const auto red = partial_trace_bath(rho, 2, 2);
    REQUIRE(purity(red.matrix()) == Catch::Approx(1.0));
  }
  SECTION("unnormalized input rejected") {
    Vector bad(2);
    bad << 1.0, 1.0;
    REQUIRE_THROWS_AS(initial_state(bad, m), NotNormalized);
  }
}
