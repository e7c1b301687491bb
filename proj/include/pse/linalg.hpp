#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "pse/types.hpp"

namespace pse {

// Kronecker product, left factor slow (system index leftmost throughout).
inline Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector tensor(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Full real eigendecomposition of a Hermitian operator. Eigenvalues ascending;
// each column's largest-magnitude component is rotated real-positive so the
// output is reproducible up to degenerate-cluster mixing.
inline SpectralData spectral(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  if (es.info() != Eigen::Success) throw Error("spectral: eigensolver failed");
  SpectralData out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
    Eigen::Index imax = 0;
    out.eigenvectors.col(k).cwiseAbs().maxCoeff(&imax);
    const Complex z = out.eigenvectors(imax, k);
    if (std::abs(z) > 0) out.eigenvectors.col(k) *= std::conj(z) / std::abs(z);
  }
  out.operator_norm =
      out.eigenvalues.size() == 0
          ? 0.0
          : std::max(std::abs(out.eigenvalues(0)),
                     std::abs(out.eigenvalues(out.eigenvalues.size() - 1)));
  return out;
}

inline double operator_norm(const HermitianOperator& a) {
  return spectral(a).operator_norm;
}

inline double operator_norm(const Matrix& a) {
  if (max_abs(a) == 0.0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

// U = exp(-i H t) through the spectral decomposition of H.
inline UnitaryOperator evolve_propagator(const HermitianOperator& h, double t) {
  const SpectralData sd = spectral(h);
  const Eigen::Index n = h.dim();
  Vector phases(n);
  for (Eigen::Index k = 0; k < n; ++k)
    phases(k) = std::exp(Complex(0.0, -sd.eigenvalues(k) * t));
  Matrix u = sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
  return UnitaryOperator::trusted(std::move(u));
}

namespace detail {

// Eigenphases and a unitary eigenbasis of a unitary matrix via complex Schur
// (T is diagonal up to rounding for normal input).
inline std::pair<RealVector, Matrix> unitary_eigensystem(const Matrix& u) {
  Eigen::ComplexSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success) throw Error("unitary_eigensystem: Schur failed");
  const Eigen::Index n = u.rows();
  RealVector phases(n);
  for (Eigen::Index k = 0; k < n; ++k) phases(k) = std::arg(schur.matrixT()(k, k));
  return {phases, schur.matrixU()};
}

}  // namespace detail

// Principal-branch Hermitian generator: exp(-i T_c H) = U with the eigenvalues
// of H inside (-pi/T_c, pi/T_c). The caller keeps T_c ||H_c|| < pi.
inline HermitianOperator principal_log_hamiltonian(const UnitaryOperator& u,
                                                   double t_cycle) {
  if (!(t_cycle > 0)) throw Error("principal_log_hamiltonian: T_c must be > 0");
  auto [phases, basis] = detail::unitary_eigensystem(u.matrix());
  const Eigen::Index n = u.dim();
  Vector diag(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(phases(k)) > M_PI - tol::branch_margin)
      throw BranchAmbiguity("principal_log_hamiltonian: eigenphase within 1e-6 of +-pi");
    diag(k) = Complex(-phases(k) / t_cycle, 0.0);
  }
  Matrix h = basis * diag.asDiagonal() * basis.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  return HermitianOperator::trusted(std::move(h));
}

// Reduced system state; composite basis |j> (x) |b> with the system leftmost.
inline DensityMatrix partial_trace_bath(const DensityMatrix& rho,
                                        Eigen::Index dim_s, Eigen::Index dim_b) {
  if (rho.dim() != dim_s * dim_b)
    throw DimensionMismatch("partial_trace_bath: dim != dim_s * dim_b");
  Matrix out = Matrix::Zero(dim_s, dim_s);
  const Matrix& m = rho.matrix();
  for (Eigen::Index i = 0; i < dim_s; ++i)
    for (Eigen::Index j = 0; j < dim_s; ++j) {
      Complex acc(0, 0);
      for (Eigen::Index b = 0; b < dim_b; ++b) acc += m(i * dim_b + b, j * dim_b + b);
      out(i, j) = acc;
    }
  return DensityMatrix::trusted(std::move(out));
}

inline double purity(const Matrix& rho) {
  return (rho * rho).trace().real();
}

// Survival probability Tr[rho_S(0) rho_S(now)] and purity Tr[rho^2].
// rho_initial must be pure.
inline std::pair<double, double> state_metrics(const DensityMatrix& rho_initial,
                                               const DensityMatrix& rho_now) {
  if (rho_initial.dim() != rho_now.dim())
    throw DimensionMismatch("state_metrics: dimension mismatch");
  if (purity(rho_initial.matrix()) < 1.0 - tol::pure_state)
    throw NotPureInitial();
  double f = (rho_initial.matrix() * rho_now.matrix()).trace().real();
  double p = purity(rho_now.matrix());
  f = std::clamp(f, 0.0, 1.0);
  p = std::clamp(p, 0.0, 1.0);
  return {f, p};
}

// Uhlmann fidelity sqrt(F) for a pair of qubit states, via the closed form
// F = Tr(rho sigma) + 2 sqrt(det rho det sigma).
inline double uhlmann_fidelity_qubit(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != 2 || sigma.rows() != 2)
    throw DimensionMismatch("uhlmann_fidelity_qubit: 2x2 only");
  const double t = (rho * sigma).trace().real();
  const double dd = std::max(0.0, rho.determinant().real()) *
                    std::max(0.0, sigma.determinant().real());
  const double f2 = std::clamp(t + 2.0 * std::sqrt(std::max(0.0, dd)), 0.0, 1.0);
  return std::sqrt(f2);
}

inline Matrix pauli_x() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
inline Matrix pauli_y() {
  return (Matrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished();
}
inline Matrix pauli_z() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }

}  // namespace pse
