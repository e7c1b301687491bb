#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pse/linalg.hpp"
#include "pse/rng.hpp"
#include "pse/types.hpp"

namespace pse {

// Largest composite Hilbert space handled by the dense backend: 2^11.
inline constexpr int kMaxQubitsTotal = 11;

struct CouplingEnsembleSpec {
  double j_cap = 1.0;     // system-bath coupling cap J
  double beta_cap = 0.0;  // intra-bath dipolar cap
  double k_exchange = 0.0;
  int n_qubits = 1;       // 1 or 2
  int n_bath = 1;
  std::uint64_t seed = 0;
};

// One realization of the central-spin model: n_qubits system spins coupled to
// n_bath bath spins by Heisenberg terms, dipolar intra-bath couplings, and an
// optional exchange term between the two system spins.
struct SpinBathModel {
  int n_qubits = 1;
  int n_bath = 1;
  std::vector<std::vector<double>> j;     // j[m][k], m bath, k system
  std::vector<std::vector<double>> beta;  // beta[m][mp], mp < m
  double k_exchange = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index dim_system() const { return Eigen::Index(1) << n_qubits; }
  Eigen::Index dim_bath() const { return Eigen::Index(1) << n_bath; }
  Eigen::Index dim_total() const { return dim_system() * dim_bath(); }
};

inline void validate_dims(int n_qubits, int n_bath) {
  if (n_qubits != 1 && n_qubits != 2)
    throw DimensionMismatch("model: n_qubits must be 1 or 2");
  if (n_bath < 1) throw DimensionMismatch("model: n_bath must be >= 1");
  if (n_qubits + n_bath > kMaxQubitsTotal)
    throw DimensionTooLarge("model: 2^(n_qubits+n_bath) exceeds 2^11");
}

// Couplings uniform on [-J, J] and [-beta, beta] from the counter stream, so
// a fixed seed reproduces the same arrays bit for bit.
inline SpinBathModel sample_couplings(const CouplingEnsembleSpec& spec) {
  validate_dims(spec.n_qubits, spec.n_bath);
  if (spec.j_cap < 0 || spec.beta_cap < 0)
    throw Error("sample_couplings: caps must be nonnegative");
  SpinBathModel m;
  m.n_qubits = spec.n_qubits;
  m.n_bath = spec.n_bath;
  m.k_exchange = spec.k_exchange;
  m.seed = spec.seed;
  m.j.assign(spec.n_bath, std::vector<double>(spec.n_qubits, 0.0));
  rng::Stream js(spec.seed, "couplings-j", 0);
  for (int mm = 0; mm < spec.n_bath; ++mm)
    for (int k = 0; k < spec.n_qubits; ++k)
      m.j[mm][k] = js.uniform_sym(std::uint64_t(mm) * spec.n_qubits + k, spec.j_cap);
  m.beta.assign(spec.n_bath, std::vector<double>(spec.n_bath, 0.0));
  rng::Stream bs(spec.seed, "couplings-beta", 0);
  for (int mm = 0; mm < spec.n_bath; ++mm)
    for (int mp = 0; mp < mm; ++mp)
      m.beta[mm][mp] = bs.uniform_sym(std::uint64_t(mm) * spec.n_bath + mp, spec.beta_cap);
  return m;
}

namespace detail {

// 1/2-Pauli spin component alpha in {0,1,2} on `site` of an n-site register.
inline Matrix spin_component(int alpha, int site, int n_sites) {
  const Matrix half = 0.5 * (alpha == 0 ? pauli_x() : alpha == 1 ? pauli_y() : pauli_z());
  Matrix out = Matrix::Identity(1, 1);
  for (int s = 0; s < n_sites; ++s)
    out = tensor(out, s == site ? half : Matrix::Identity(2, 2));
  return out;
}

}  // namespace detail

// H0 = sum_{k,m} j[m][k] S^(k).I^(m)
//    + sum_{m' < m} beta[m][m'] (IxIx + IyIy - 2 IzIz)
//    + K S^(1).S^(2)
// with 1/2-Pauli spin operators and the system factor leftmost.
inline HermitianOperator build_H0(const SpinBathModel& model) {
  validate_dims(model.n_qubits, model.n_bath);
  const int n = model.n_qubits + model.n_bath;
  const Eigen::Index d = Eigen::Index(1) << n;
  Matrix h = Matrix::Zero(d, d);
  for (int k = 0; k < model.n_qubits; ++k)
    for (int mm = 0; mm < model.n_bath; ++mm) {
      const double jkm = model.j[mm][k];
      if (jkm == 0.0) continue;
      for (int a = 0; a < 3; ++a)
        h += jkm * (detail::spin_component(a, k, n) *
                    detail::spin_component(a, model.n_qubits + mm, n));
    }
  for (int mm = 0; mm < model.n_bath; ++mm)
    for (int mp = 0; mp < mm; ++mp) {
      const double b = model.beta[mm][mp];
      if (b == 0.0) continue;
      const int s1 = model.n_qubits + mm, s2 = model.n_qubits + mp;
      h += b * (detail::spin_component(0, s1, n) * detail::spin_component(0, s2, n) +
                detail::spin_component(1, s1, n) * detail::spin_component(1, s2, n) -
                2.0 * detail::spin_component(2, s1, n) * detail::spin_component(2, s2, n));
    }
  if (model.n_qubits == 2 && model.k_exchange != 0.0)
    for (int a = 0; a < 3; ++a)
      h += model.k_exchange *
           (detail::spin_component(a, 0, n) * detail::spin_component(a, 1, n));
  return HermitianOperator::trusted(std::move(h));
}

// A = sqrt(sum_m j[m][k]^2 / n_B), the rms coupling felt by one qubit.
inline double coupling_strength_A(const SpinBathModel& model, int qubit_index) {
  if (qubit_index < 0 || qubit_index >= model.n_qubits)
    throw DimensionMismatch("coupling_strength_A: bad qubit index");
  double acc = 0.0;
  for (int mm = 0; mm < model.n_bath; ++mm)
    acc += model.j[mm][qubit_index] * model.j[mm][qubit_index];
  return std::sqrt(acc / model.n_bath);
}

// rho(0) = |psi><psi| (x) I_B / 2^{n_B} (bath fully mixed).
inline DensityMatrix initial_state(const Vector& system_state,
                                   const SpinBathModel& model) {
  if (system_state.size() != model.dim_system())
    throw DimensionMismatch("initial_state: system vector has wrong dimension");
  if (std::abs(system_state.norm() - 1.0) > tol::normalization)
    throw NotNormalized();
  const Eigen::Index db = model.dim_bath();
  Matrix rho_s = system_state * system_state.adjoint();
  Matrix rho = tensor(rho_s, Matrix::Identity(db, db) / double(db));
  return DensityMatrix::trusted(std::move(rho));
}

// Named single-qubit and two-qubit states used throughout the experiments.
inline Vector named_state(const std::string& name, int n_qubits) {
  const double s = 1.0 / std::sqrt(2.0);
  if (n_qubits == 1) {
    Vector v(2);
    if (name == "+Z" || name == "0") v << 1, 0;
    else if (name == "-Z" || name == "1") v << 0, 1;
    else if (name == "+X") v << s, s;
    else if (name == "-X") v << s, -s;
    else if (name == "+Y") v << s, Complex(0, 1) * s;
    else if (name == "-Y") v << s, Complex(0, -1) * s;
    else throw UnknownName("named_state: " + name);
    return v;
  }
  if (n_qubits == 2) {
    Vector v = Vector::Zero(4);
    if (name == "00") v(0) = 1;
    else if (name == "01") v(1) = 1;
    else if (name == "10") v(2) = 1;
    else if (name == "11") v(3) = 1;
    else if (name == "EPR0") { v(1) = s; v(2) = s; }
    else if (name == "EPR1") { v(1) = s; v(2) = -s; }
    else if (name == "EPR2") { v(0) = s; v(3) = s; }
    else if (name == "EPR3") { v(0) = s; v(3) = -s; }
    else throw UnknownName("named_state: " + name);
    return v;
  }
  throw UnknownName("named_state: unsupported qubit count");
}

}  // namespace pse
