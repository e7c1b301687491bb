#include <catch2/catch_amalgamated.hpp>

#include "pse/effective.hpp"
#include "pse/model.hpp"
#include "pse/propagate.hpp"
#include "test_helpers.hpp"

using namespace pse;

namespace {

Matrix random_qubit_bath_h(Eigen::Index db, std::uint64_t seed, bool with_hb) {
  const Matrix bx = test::random_hermitian(db, seed, 0.5);
  const Matrix by = test::random_hermitian(db, seed + 1, 0.5);
  const Matrix bz = test::random_hermitian(db, seed + 2, 0.5);
  Matrix h = tensor(pauli_x(), bx) + tensor(pauli_y(), by) + tensor(pauli_z(), bz);
  if (with_hb)
    h += tensor(Matrix::Identity(2, 2), test::random_hermitian(db, seed + 3, 0.5));
  return h;
}

}  // namespace

TEST_CASE("magnus_first_order", "[effective]") {
  const Eigen::Index db = 4;
  const Matrix bx = test::random_hermitian(db, 1, 0.5);
  const Matrix by = test::random_hermitian(db, 2, 0.5);
  const Matrix bz = test::random_hermitian(db, 3, 0.5);
  const Matrix h_sb =
      tensor(pauli_x(), bx) + tensor(pauli_y(), by) + tensor(pauli_z(), bz);

  SECTION("ZZ keeps only the sigma_z (x) B_z part") {
    const auto m = magnus_first_order(named_qubit_cycle("ZZ", 0.1),
                                      HermitianOperator::trusted(h_sb));
    REQUIRE(max_abs(m.matrix() - tensor(pauli_z(), bz)) < 1e-13);
  }
  SECTION("XYXY removes the whole system-bath part") {
    const auto m = magnus_first_order(named_qubit_cycle("XYXY", 0.1),
                                      HermitianOperator::trusted(h_sb));
    REQUIRE(max_abs(m.matrix()) < 1e-13);
    // a pure-bath term passes through unchanged
    const Matrix hb = test::random_hermitian(db, 9, 0.5);
    const auto m2 = magnus_first_order(
        named_qubit_cycle("XYXY", 0.1),
        HermitianOperator::trusted(Matrix(h_sb + tensor(Matrix::Identity(2, 2), hb))));
    REQUIRE(max_abs(m2.matrix() - tensor(Matrix::Identity(2, 2), hb)) < 1e-13);
  }
  SECTION("E3 leaves the exchange Hamiltonian invariant") {
    // direct sum oracle: average of conjugations equals the input when the
    // input commutes with the pulse
    Matrix ss = 0.25 * (tensor(pauli_x(), pauli_x()) + tensor(pauli_y(), pauli_y()) +
                        tensor(pauli_z(), pauli_z()));
    const double k = 0.9;
    const Matrix hs = tensor(Matrix(k * ss), Matrix::Identity(2, 2));
    const auto m = magnus_first_order(epr_cycle("E3", 0.1),
                                      HermitianOperator::trusted(hs));
    REQUIRE(max_abs(m.matrix() - hs) < 1e-12);
  }
}

TEST_CASE("exact_cycle_hamiltonian", "[effective]") {
  const Matrix h0 = random_qubit_bath_h(4, 21, true);
  const HermitianOperator h(h0);
  SECTION("identity cycle maps to zero") {
    const auto hc = exact_cycle_hamiltonian(UnitaryOperator(Matrix::Identity(6, 6)), 1.0);
    REQUIRE(max_abs(hc.matrix()) < 1e-12);
  }
  SECTION("approaches the first-order Hamiltonian as tau -> 0") {
    const auto seq = named_qubit_cycle("ZZ", 1e-4);
    const auto u = cycle_propagator(seq, h);
    const auto hc = exact_cycle_hamiltonian(u, seq.t_cycle());
    const auto m1 = magnus_first_order(seq, h);
    REQUIRE(max_abs(hc.matrix() - m1.matrix()) < 1e-3);
  }
  SECTION("residual halves when tau halves") {
    auto residual = [&](double tau) {
      const auto seq = named_qubit_cycle("ZZ", tau);
      const auto u = cycle_propagator(seq, h);
      const auto hc = exact_cycle_hamiltonian(u, seq.t_cycle());
      const auto m1 = magnus_first_order(seq, h);
      return operator_norm(Matrix(hc.matrix() - m1.matrix()));
    };
    const double r1 = residual(0.02), r2 = residual(0.01);
    const double slope = std::log2(r1 / r2);
    REQUIRE(slope > 0.8);
    REQUIRE(slope < 1.2);
  }
}

TEST_CASE("ps_decompose", "[effective]") {
  const Eigen::Index db = 4;
  std::vector<Vector> comp = {Vector::Unit(2, 0), Vector::Unit(2, 1)};

  SECTION("already in PS form: no perturbation") {
    const Matrix bz = test::random_hermitian(db, 31, 0.5);
    const auto dec = ps_decompose(HermitianOperator::trusted(tensor(pauli_z(), bz)),
                                  comp, 2, 2, db);
    REQUIRE(dec.eps_norm < 1e-13);
    REQUIRE(max_abs(dec.bath_blocks[0] - bz) < 1e-13);
    REQUIRE(max_abs(dec.bath_blocks[1] + bz) < 1e-13);
    // reconstruction
    REQUIRE(max_abs(Matrix(dec.h_dom + dec.h_bath + dec.h_per - dec.h_c)) < 1e-10);
  }
  SECTION("fully off-diagonal: everything is perturbation") {
    const Matrix b = test::random_hermitian(db, 32, 0.5);
    const Matrix h = tensor(pauli_x(), b);
    const auto dec = ps_decompose(HermitianOperator::trusted(h), comp, 2, 2, db);
    REQUIRE(max_abs(dec.h_dom) < 1e-13);
    REQUIRE(dec.eps_norm ==
            Catch::Approx(spectral(HermitianOperator::trusted(h)).operator_norm));
  }
  SECTION("designated diagonal of H_per vanishes (shifted convention)") {
    const Matrix h = test::random_hermitian(2 * db, 33);
    const auto dec = ps_decompose(HermitianOperator::trusted(h), comp, 2, 2, db);
    for (int j = 0; j < 2; ++j) {
      const Matrix blk = dec.h_per.block(j * db, j * db, db, db);
      REQUIRE(max_abs(blk) < 1e-13);
    }
    REQUIRE(max_abs(Matrix(dec.h_dom + dec.h_bath + dec.h_per - dec.h_c)) < 1e-10);
  }
  SECTION("ZZ exact cycle: eps_norm = O(tau)") {
    const Matrix h0 = random_qubit_bath_h(db, 35, true);
    auto eps_of = [&](double tau) {
      const auto seq = named_qubit_cycle("ZZ", tau);
      const auto u = cycle_propagator(seq, HermitianOperator::trusted(h0));
      const auto hc = exact_cycle_hamiltonian(u, seq.t_cycle());
      return ps_decompose(hc, comp, 2, 2, db).eps_norm;
    };
    const double ratio = eps_of(0.04) / eps_of(0.02);
    REQUIRE(ratio > 1.6);
    REQUIRE(ratio < 2.4);
  }
}

TEST_CASE("met_time_average", "[effective]") {
  SECTION("operators commuting with U_D are fixed points") {
    const Matrix d = test::random_hermitian(5, 41);
    const auto sd = spectral(HermitianOperator::trusted(d));
    Vector ph(5);
    for (int k = 0; k < 5; ++k) ph(k) = std::exp(Complex(0, -sd.eigenvalues(k)));
    const Matrix u = sd.eigenvectors * ph.asDiagonal() * sd.eigenvectors.adjoint();
    for (long n : {1L, 10L, 1234L}) {
      const Matrix avg = met_time_average(d, UnitaryOperator::trusted(u), n);
      REQUIRE(max_abs(avg - d) < 1e-10);
    }
  }
  SECTION("matches the brute-force loop at N = 10") {
    const Matrix e = test::random_matrix(6, 42);
    const Matrix u = test::random_unitary(6, 43);
    const long n = 10;
    Matrix brute = Matrix::Zero(6, 6);
    Matrix un = Matrix::Identity(6, 6);
    for (long k = 0; k < n; ++k) {
      brute += un.adjoint() * e * un;
      un = u * un;
    }
    brute /= double(n);
    const Matrix fast = met_time_average(e, UnitaryOperator::trusted(u), n);
    REQUIRE(max_abs(fast - brute) < 1e-10);
  }
  SECTION("off-diagonal elements obey the geometric-sum bound") {
    const Matrix u = test::random_unitary(6, 44);
    auto [phases, basis] = detail::unitary_eigensystem(u);
    Matrix e = test::random_hermitian(6, 45);
    const long n = 77;
    const Matrix avg = basis.adjoint() *
                       met_time_average(e, UnitaryOperator::trusted(u), n) * basis;
    const Matrix et = basis.adjoint() * e * basis;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        if (i == j) continue;
        const double gap = std::abs(1.0 - std::exp(Complex(0, phases(i) - phases(j))));
        if (gap < 1e-6) continue;
        REQUIRE(std::abs(avg(i, j)) <=
                2.0 / (double(n) * gap) * std::abs(et(i, j)) + 1e-12);
      }
  }
}

TEST_CASE("ps_fidelity_bounds", "[effective]") {
  const Eigen::Index db = 3;
  std::vector<Vector> comp = {Vector::Unit(2, 0), Vector::Unit(2, 1)};

  SECTION("no perturbation: both bounds are one, all flags pass") {
    Matrix bz = Matrix::Zero(db, db);
    bz.diagonal() << 0.4, 0.9, 1.7;
    const auto dec = ps_decompose(HermitianOperator::trusted(tensor(pauli_z(), bz)),
                                  comp, 2, 2, db);
    const auto rep = ps_fidelity_bounds(dec, 0.1, 10.0);
    REQUIRE(rep.quantum_bound == Catch::Approx(1.0));
    REQUIRE(rep.cond_b1);
    REQUIRE(rep.cond_b3);
    REQUIRE(rep.met_valid);
  }
  SECTION("degenerate sectors raise ZeroGap") {
    // spectrum of +B and -B coincide for a symmetric spectrum
    Matrix bz = Matrix::Zero(db, db);
    bz.diagonal() << -1.0, 0.0, 1.0;
    const auto dec = ps_decompose(HermitianOperator::trusted(tensor(pauli_z(), bz)),
                                  comp, 2, 2, db);
    REQUIRE_THROWS_AS(ps_fidelity_bounds(dec, 0.1, 10.0), ZeroGap);
  }
  SECTION("two-level semiclassical bound matches the hand formula") {
    const double bz = 0.8, hx = 0.3, hy = -0.2, eps = 0.05;
    Matrix h = bz * pauli_z() + eps * (hx * pauli_x() + hy * pauli_y());
    const auto dec = ps_decompose(HermitianOperator::trusted(h), comp, 2, 2, 1);
    const auto rep = ps_fidelity_bounds(dec, 0.05, 1.0);
    REQUIRE(rep.semiclassical_bound.has_value());
    const double loss = 4.0 * eps * eps * 2.0 * (hx * hx + hy * hy) / (4.0 * bz * bz);
    REQUIRE(*rep.semiclassical_bound == Catch::Approx(1.0 - loss).epsilon(1e-12));
    // cross-check against the exact oscillation envelope of the 2x2 problem:
    // max_N (1 - f_N) = eps^2 (hx^2 + hy^2) / bz^2 <= bound loss
    const double exact_env = eps * eps * (hx * hx + hy * hy) / (bz * bz);
    REQUIRE(exact_env <= loss * (1 + 1e-12));
  }
}

TEST_CASE("initial_decay_bound", "[effective]") {
  REQUIRE(initial_decay_bound(0.0, 5) == 0.0);
  REQUIRE(initial_decay_bound(0.01, 10) == Catch::Approx((M_E - 1.0) * 0.1));
  REQUIRE_THROWS_AS(initial_decay_bound(0.2, 10), RegimeViolation);

  SECTION("bound holds for exact propagation on random small instances") {
    for (int trial = 0; trial < 20; ++trial) {
      CouplingEnsembleSpec spec;
      spec.n_qubits = 1;
      spec.n_bath = 2;
      spec.j_cap = 1.0;
      spec.beta_cap = 0.5;
      spec.seed = 900 + trial;
      const auto model = sample_couplings(spec);
      const auto h0 = build_H0(model);
      const auto seq = named_qubit_cycle("ZZ", 0.05);
      const auto u = cycle_propagator(seq, h0);
      const auto hc = exact_cycle_hamiltonian(u, seq.t_cycle());
      const auto dec = ps_decompose(hc, {Vector::Unit(2, 0), Vector::Unit(2, 1)}, 2,
                                    2, model.dim_bath());
      const double delta = seq.t_cycle() * dec.eps_norm;
      const auto rho0 = initial_state(named_state("+Z", 1), model);
      std::vector<long> ns;
      for (long n = 1; double(n) * delta <= 1.0 && n <= 200; n *= 2) ns.push_back(n);
      const auto traj = run_stroboscopic(u, rho0, ns, 2, model.dim_bath());
      for (std::size_t i = 0; i < ns.size(); ++i)
        REQUIRE(1.0 - traj.fidelity[i] <= initial_decay_bound(delta, ns[i]));
    }
  }
}

TEST_CASE("XYXY structural claim with a non-dynamical bath", "[effective]") {
  // the sigma_x and sigma_y components of the exact H_c scale one power of
  // tau higher than the sigma_z component
  const Eigen::Index db = 4;
  const Matrix h0 = random_qubit_bath_h(db, 51, /*with_hb=*/false);
  auto components = [&](double tau) {
    const auto seq = named_qubit_cycle("XYXY", tau);
    const auto u = cycle_propagator(seq, HermitianOperator::trusted(h0));
    const Matrix hc = exact_cycle_hamiltonian(u, seq.t_cycle()).matrix();
    std::array<double, 3> out{};
    const std::array<Matrix, 3> paulis = {pauli_x(), pauli_y(), pauli_z()};
    for (int a = 0; a < 3; ++a) {
      Matrix comp = Matrix::Zero(db, db);
      for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
          comp += std::conj(paulis[a](i, j)) * hc.block(i * db, j * db, db, db);
      out[a] = operator_norm(Matrix(comp / 2.0));
    }
    return out;
  };
  const auto c1 = components(0.02);
  const auto c2 = components(0.01);
  const double slope_z = std::log2(c1[2] / c2[2]);
  const double slope_x = std::log2(c1[0] / c2[0]);
  const double slope_y = std::log2(c1[1] / c2[1]);
  REQUIRE(slope_z == Catch::Approx(1.0).margin(0.3));
  REQUIRE(slope_x > slope_z + 0.5);
  REQUIRE(slope_y > slope_z + 0.5);
}

TEST_CASE("single-pulse-type error absorption", "[effective]") {
  // with H0 = 0 and a systematic pulse error, the per-cycle error action
  // T_c H_per stays bounded as tau shrinks: the twirled error joins the
  // dominant part instead of accumulating
  std::vector<Vector> comp = {Vector::Unit(2, 0), Vector::Unit(2, 1)};
  const Matrix h0 = Matrix::Zero(4, 4);
  PulseErrorModel errs = axis_angle_error(0.08, 0.4, -0.7, 0.5, {"Z"});
  auto action_eps = [&](double tau) {
    const auto seq = apply_pulse_errors(named_qubit_cycle("ZZ", tau), errs);
    const auto u = cycle_propagator(seq, HermitianOperator::trusted(h0));
    const auto hc = exact_cycle_hamiltonian(u, seq.t_cycle());
    const auto dec = ps_decompose(hc, comp, 2, 2, 2);
    return seq.t_cycle() * dec.eps_norm;
  };
  const double e1 = action_eps(0.1);
  const double e2 = action_eps(0.05);
  REQUIRE(e2 <= e1 + 1e-6);
}
