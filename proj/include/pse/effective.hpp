#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "pse/linalg.hpp"
#include "pse/pulses.hpp"
#include "pse/types.hpp"

namespace pse {

// First-order (time-averaged) cycle Hamiltonian:
// H_c^(1) = (1/T_c) sum_j tau_j Q_j^dag H0 Q_j with Q_j = P_{j-1} ... P_1.
inline HermitianOperator magnus_first_order(const PulseSequence& seq,
                                            const HermitianOperator& h0) {
  const Eigen::Index d = h0.dim();
  const Eigen::Index ds = seq.dim_system();
  if (d % ds != 0) throw DimensionMismatch("magnus_first_order: dimensions");
  const Eigen::Index db = d / ds;
  const Matrix idb = Matrix::Identity(db, db);
  Matrix q = Matrix::Identity(d, d);
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& s : seq.segments()) {
    acc += s.tau * (q.adjoint() * h0.matrix() * q);
    q = tensor(s.pulse, idb) * q;
  }
  acc /= seq.t_cycle();
  acc = 0.5 * (acc + acc.adjoint()).eval();
  return HermitianOperator::trusted(std::move(acc));
}

// Exact effective cycle Hamiltonian from the principal matrix logarithm.
inline HermitianOperator exact_cycle_hamiltonian(const UnitaryOperator& u_c,
                                                 double t_cycle) {
  return principal_log_hamiltonian(u_c, t_cycle);
}

// H_c split against a designated pointer set:
//   H_bath = I_S (x) Tr_S[H_c] / D_S
//   H_dom  = sum_j |j><j| (x) B_j  +  H' (the complement-block interior)
//   H_per  = everything coupling distinct sectors (zero PS-diagonal by
//            construction, the shifted-diagonal convention)
// The reconstruction H_dom + H_bath + H_per = H_c is exact.
struct EffectiveDecomposition {
  Matrix h_c;
  Matrix h_dom;
  Matrix h_bath;
  Matrix h_per;
  std::vector<Matrix> bath_blocks;  // B_j, one per designated state
  double eps_norm = 0.0;            // ||H_per|| (the paper's eps folded in)
  double gap_delta = 0.0;           // min cross-sector gap of H_dom + H_bath
  double gap_delta_0 = 0.0;         // same, restricted to the monitored sector
  Eigen::Index dim_s = 0, dim_b = 0;
  int p = 0;
  int unassigned_eigenvectors = 0;  // sector overlap below 1/2, excluded
};

inline EffectiveDecomposition ps_decompose(const HermitianOperator& h_c,
                                           const std::vector<Vector>& ps_basis,
                                           int p, Eigen::Index dim_s,
                                           Eigen::Index dim_b) {
  if (h_c.dim() != dim_s * dim_b) throw DimensionMismatch("ps_decompose: dims");
  if (p < 1 || Eigen::Index(p) > dim_s || Eigen::Index(ps_basis.size()) < Eigen::Index(p))
    throw BadP("ps_decompose: need 1 <= p <= D_S designated states");
  for (int a = 0; a < p; ++a) {
    if (ps_basis[a].size() != dim_s)
      throw DimensionMismatch("ps_decompose: basis vector dimension");
    for (int b = 0; b <= a; ++b) {
      const Complex ip = ps_basis[b].adjoint() * ps_basis[a];
      if (std::abs(ip - (a == b ? 1.0 : 0.0)) > tol::orthonormal)
        throw BasisNotOrthonormal("ps_decompose: designated states not orthonormal");
    }
  }

  EffectiveDecomposition dec;
  dec.h_c = h_c.matrix();
  dec.dim_s = dim_s;
  dec.dim_b = dim_b;
  dec.p = p;

  // bath part: I_S (x) Tr_S[H_c] / D_S
  Matrix tr_s = Matrix::Zero(dim_b, dim_b);
  for (Eigen::Index i = 0; i < dim_s; ++i)
    tr_s += dec.h_c.block(i * dim_b, i * dim_b, dim_b, dim_b);
  tr_s /= double(dim_s);
  dec.h_bath = tensor(Matrix::Identity(dim_s, dim_s), tr_s);

  const Matrix m = dec.h_c - dec.h_bath;

  // sector projectors: designated states, plus the complement as one sector
  const Matrix idb = Matrix::Identity(dim_b, dim_b);
  std::vector<Matrix> proj;
  Matrix psum = Matrix::Zero(dim_s, dim_s);
  for (int j = 0; j < p; ++j) {
    proj.push_back(tensor(Matrix(ps_basis[j] * ps_basis[j].adjoint()), idb));
    psum += ps_basis[j] * ps_basis[j].adjoint();
  }
  const bool has_rest = p < dim_s;
  if (has_rest)
    proj.push_back(tensor(Matrix(Matrix::Identity(dim_s, dim_s) - psum), idb));

  dec.h_dom = Matrix::Zero(m.rows(), m.cols());
  for (const auto& pr : proj) dec.h_dom += pr * m * pr;
  dec.h_per = m - dec.h_dom;

  for (int j = 0; j < p; ++j) {
    const Vector& v = ps_basis[j];
    Matrix bj = Matrix::Zero(dim_b, dim_b);
    for (Eigen::Index a = 0; a < dim_s; ++a)
      for (Eigen::Index b = 0; b < dim_s; ++b)
        bj += std::conj(v(a)) * v(b) * m.block(a * dim_b, b * dim_b, dim_b, dim_b);
    dec.bath_blocks.push_back(std::move(bj));
  }

  dec.eps_norm = spectral(HermitianOperator::trusted(
                     Matrix(0.5 * (dec.h_per + dec.h_per.adjoint()))))
                     .operator_norm;

  // sector-resolved spectrum of H_dom + H_bath
  const SpectralData sd =
      spectral(HermitianOperator::trusted(Matrix(dec.h_dom + dec.h_bath)));
  const int n_sectors = int(proj.size());
  std::vector<int> label(sd.eigenvalues.size(), -1);
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    for (int s = 0; s < n_sectors; ++s) {
      const double w = (sd.eigenvectors.col(k).adjoint() * proj[s] *
                        sd.eigenvectors.col(k))(0, 0).real();
      if (w > 0.5) {
        label[k] = s;
        break;
      }
    }
    if (label[k] < 0) ++dec.unassigned_eigenvectors;
  }
  double gap_all = std::numeric_limits<double>::infinity();
  double gap_zero = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < sd.eigenvalues.size(); ++a)
    for (Eigen::Index b = a + 1; b < sd.eigenvalues.size(); ++b) {
      if (label[a] < 0 || label[b] < 0 || label[a] == label[b]) continue;
      const double g = std::abs(sd.eigenvalues(a) - sd.eigenvalues(b));
      gap_all = std::min(gap_all, g);
      if (label[a] == 0 || label[b] == 0) gap_zero = std::min(gap_zero, g);
    }
  dec.gap_delta = std::isfinite(gap_all) ? gap_all : 0.0;
  dec.gap_delta_0 = std::isfinite(gap_zero) ? gap_zero : 0.0;
  return dec;
}

// (1/N) sum_{n=0}^{N-1} U_D^{-n} E U_D^n in the eigenbasis of U_D, each matrix
// element rescaled by the closed-form geometric factor
// (1 - e^{i N dphi}) / (N (1 - e^{i dphi})); degenerate phase pairs pass
// through unchanged.
inline Matrix met_time_average(const Matrix& e, const UnitaryOperator& u_d, long n) {
  if (e.rows() != u_d.dim() || e.cols() != u_d.dim())
    throw DimensionMismatch("met_time_average: dimensions");
  if (n < 1) throw Error("met_time_average: N >= 1");
  auto [phases, basis] = detail::unitary_eigensystem(u_d.matrix());
  Matrix et = basis.adjoint() * e * basis;
  const Eigen::Index d = e.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double dphi = phases(i) - phases(j);
      if (std::abs(std::sin(dphi / 2.0)) * 2.0 <= tol::phase_degeneracy) continue;
      const Complex num = 1.0 - std::exp(Complex(0.0, double(n) * dphi));
      const Complex den = 1.0 - std::exp(Complex(0.0, dphi));
      et(i, j) *= num / (double(n) * den);
    }
  return basis * et * basis.adjoint();
}

// Projection of E onto (commutant, complement) of U_D: the N -> infinity
// limit of the time average and the remainder.
inline std::pair<Matrix, Matrix> met_split(const Matrix& e, const UnitaryOperator& u_d) {
  auto [phases, basis] = detail::unitary_eigensystem(u_d.matrix());
  Matrix et = basis.adjoint() * e * basis;
  Matrix para = et;
  const Eigen::Index d = e.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double dphi = phases(i) - phases(j);
      if (std::abs(std::sin(dphi / 2.0)) * 2.0 > tol::phase_degeneracy) para(i, j) = 0.0;
    }
  const Matrix perp = et - para;
  return {basis * para * basis.adjoint(), basis * perp * basis.adjoint()};
}

struct BoundOptions {
  double b1_threshold = 0.1;  // eps T << 1 realized as eps T < 0.1
  double gap_factor = 10.0;   // Delta >> eps realized as Delta > 10 eps
  double met_factor = 10.0;   // T Delta >> 1 realized as T Delta > 10
};

struct BoundReport {
  double quantum_bound = 1.0;  // f_N >= 1 - eps T_c / sin(T_c Delta_0 / 2)
  std::optional<double> semiclassical_bound;  // dim_B = 1 only
  bool cond_b1 = false;
  bool cond_b3 = false;
  bool met_valid = false;
  double t_met = 0.0;  // 1 / Delta
  double eps_norm = 0.0;
  double gap_delta = 0.0;
  double gap_delta_0 = 0.0;
};

inline BoundReport ps_fidelity_bounds(const EffectiveDecomposition& dec, double t_cycle,
                                      double t_total, const BoundOptions& opt = {}) {
  const double scale = std::max(max_abs(dec.h_c), 1e-300);
  if (dec.gap_delta_0 < 1e-9 * scale)
    throw ZeroGap("ps_fidelity_bounds: monitored sector is degenerate");
  const double phase = t_cycle * dec.gap_delta_0;
  const double resid = std::abs(phase / (2.0 * M_PI) - std::round(phase / (2.0 * M_PI)));
  if (resid * 2.0 * M_PI < 1e-9)
    throw ZeroGap("ps_fidelity_bounds: T_c Delta_0 at a multiple of 2 pi");

  BoundReport rep;
  rep.eps_norm = dec.eps_norm;
  rep.gap_delta = dec.gap_delta;
  rep.gap_delta_0 = dec.gap_delta_0;
  rep.quantum_bound = std::clamp(
      1.0 - dec.eps_norm * t_cycle / std::abs(std::sin(phase / 2.0)), 0.0, 1.0);
  rep.cond_b1 = dec.eps_norm * t_total < opt.b1_threshold;
  rep.cond_b3 = dec.gap_delta > opt.gap_factor * dec.eps_norm;
  rep.t_met = dec.gap_delta > 0 ? 1.0 / dec.gap_delta : std::numeric_limits<double>::infinity();
  rep.met_valid = t_total * dec.gap_delta > opt.met_factor;

  if (dec.dim_b == 1) {
    // per-level matrix elements and unperturbed frequencies, monitored state 0
    const Matrix hd = dec.h_dom + dec.h_bath;
    double worst = 0.0;
    bool ok = true;
    for (int j = 1; j < dec.p; ++j) {
      const double wj = (hd(j, j) - hd(0, 0)).real();
      if (std::abs(wj) < 1e-15) {
        ok = false;
        break;
      }
      const double me = std::norm(dec.h_per(0, j));
      worst = std::max(worst, me / (wj * wj));
    }
    if (ok)
      rep.semiclassical_bound =
          std::clamp(1.0 - 4.0 * double(dec.dim_s) * worst, 0.0, 1.0);
  }
  return rep;
}

// Short-time fidelity loss bound 1 - f_N <= (e - 1) N delta, valid in the
// N delta <= 1 regime (delta = T_c eps ||H_per||).
inline double initial_decay_bound(double delta, long n) {
  if (delta < 0 || n < 0) throw Error("initial_decay_bound: nonnegative inputs");
  if (double(n) * delta > 1.0)
    throw RegimeViolation("initial_decay_bound: N delta > 1");
  return (M_E - 1.0) * double(n) * delta;
}

}  // namespace pse
