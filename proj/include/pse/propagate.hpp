#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pse/linalg.hpp"
#include "pse/pulses.hpp"
#include "pse/types.hpp"

namespace pse {

// U_c = P_n exp(-i tau_n H0) ... P_1 exp(-i tau_1 H0), pulses lifted to the
// composite space as P (x) I_B. Free propagators are built once from the
// spectral decomposition of H0 and cached per distinct interval.
inline UnitaryOperator cycle_propagator(const PulseSequence& seq,
                                        const HermitianOperator& h0) {
  const Eigen::Index d = h0.dim();
  const Eigen::Index ds = seq.dim_system();
  if (d % ds != 0)
    throw DimensionMismatch("cycle_propagator: system dim does not divide H0 dim");
  const Eigen::Index db = d / ds;
  const SpectralData sd = spectral(h0);
  std::map<double, Matrix> free_cache;
  auto free_prop = [&](double tau) -> const Matrix& {
    auto it = free_cache.find(tau);
    if (it == free_cache.end()) {
      Vector ph(d);
      for (Eigen::Index k = 0; k < d; ++k)
        ph(k) = std::exp(Complex(0.0, -sd.eigenvalues(k) * tau));
      it = free_cache
               .emplace(tau, Matrix(sd.eigenvectors * ph.asDiagonal() *
                                    sd.eigenvectors.adjoint()))
               .first;
    }
    return it->second;
  };
  Matrix u = Matrix::Identity(d, d);
  const Matrix idb = Matrix::Identity(db, db);
  for (const auto& s : seq.segments()) {
    u = free_prop(s.tau) * u;
    u = tensor(s.pulse, idb) * u;
  }
  return UnitaryOperator::trusted(std::move(u));
}

struct TrajectoryMetadata {
  std::uint64_t model_seed = 0;
  std::string sequence_label;
  double tau = 0.0;
  long n_total = 0;
};

// Stroboscopic record of one evolution: fidelity and purity of the reduced
// system state at the scheduled cycle counts.
struct Trajectory {
  std::vector<long> cycle_indices;
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<double> purity;
  std::string state_label;
  TrajectoryMetadata metadata;
};

struct TrajectoryStats {
  double saturation_mean = 0.0;
  double saturation_spread = 0.0;
  double relative_survival = 0.0;
  double secular_slope = 0.0;
};

inline std::vector<long> log_schedule(long n_max, int count) {
  std::vector<long> out;
  out.push_back(0);
  if (n_max <= 0) return out;
  const double lmax = std::log10(double(n_max));
  long prev = 0;
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? lmax : lmax * double(i) / double(count - 1);
    long n = std::lround(std::pow(10.0, x));
    n = std::min(n, n_max);
    if (n > prev) {
      out.push_back(n);
      prev = n;
    }
  }
  if (out.back() != n_max) out.push_back(n_max);
  return out;
}

namespace detail {

// Polar correction: project a near-unitary drifted power back onto the
// unitary manifold with a couple of Newton steps.
inline void reunitarize(Matrix& w) {
  for (int it = 0; it < 2; ++it)
    w = 0.5 * (w + w.adjoint().inverse().eval());
}

}  // namespace detail

// Evolve rho(0) stroboscopically: W = U_c^N is accumulated one cycle at a
// time (re-unitarized every 256 cycles) and the reduced state is examined at
// the scheduled indices.
inline Trajectory run_stroboscopic(const UnitaryOperator& u_c, const DensityMatrix& rho0,
                                   const std::vector<long>& schedule,
                                   Eigen::Index dim_s, Eigen::Index dim_b) {
  if (rho0.dim() != dim_s * dim_b || u_c.dim() != rho0.dim())
    throw DimensionMismatch("run_stroboscopic: dimensions");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1] || schedule.front() < 0)
      throw Error("run_stroboscopic: schedule must be increasing and >= 0");

  const DensityMatrix rho_s0 = partial_trace_bath(rho0, dim_s, dim_b);
  Trajectory traj;
  traj.metadata.n_total = schedule.empty() ? 0 : schedule.back();

  Matrix w = Matrix::Identity(u_c.dim(), u_c.dim());
  long n = 0;
  for (long target : schedule) {
    while (n < target) {
      w = u_c.matrix() * w;
      ++n;
      if (n % 256 == 0) detail::reunitarize(w);
    }
    const Matrix rho_n = w * rho0.matrix() * w.adjoint();
    const DensityMatrix rho_s =
        partial_trace_bath(DensityMatrix::trusted(rho_n), dim_s, dim_b);
    const auto [f, p] = state_metrics(rho_s0, rho_s);
    traj.cycle_indices.push_back(n);
    traj.times.push_back(0.0);  // caller scales by T_c via finalize_times
    traj.fidelity.push_back(f);
    traj.purity.push_back(p);
  }
  return traj;
}

inline void finalize_times(Trajectory& traj, double t_cycle) {
  traj.times.resize(traj.cycle_indices.size());
  for (std::size_t i = 0; i < traj.cycle_indices.size(); ++i)
    traj.times[i] = double(traj.cycle_indices[i]) * t_cycle;
  traj.metadata.tau = t_cycle;
}

// Convenience wrapper: build the cycle propagator and run one state.
inline Trajectory run_sequence(const PulseSequence& seq, const HermitianOperator& h0,
                               const DensityMatrix& rho0, const std::vector<long>& schedule,
                               Eigen::Index dim_s, Eigen::Index dim_b) {
  const UnitaryOperator u_c = cycle_propagator(seq, h0);
  Trajectory traj = run_stroboscopic(u_c, rho0, schedule, dim_s, dim_b);
  finalize_times(traj, seq.t_cycle());
  traj.metadata.sequence_label = seq.label();
  return traj;
}

// Saturation statistics over the trailing window_fraction of the samples.
// relative_survival = (1 - f_min) / (1 - f_infinity) with the loss floored at
// 1e-15, so a lossless trajectory reports the +inf sentinel value of the guard.
inline TrajectoryStats trajectory_stats(const Trajectory& traj, double window_fraction,
                                        double f_min) {
  if (traj.fidelity.empty()) throw EmptyTrajectory();
  if (!(window_fraction > 0.0) || window_fraction > 1.0)
    throw Error("trajectory_stats: window_fraction in (0, 1]");
  const std::size_t n = traj.fidelity.size();
  const std::size_t take = std::max<std::size_t>(1, std::size_t(std::ceil(window_fraction * n)));
  const std::size_t begin = n - take;
  double mean = 0.0, lo = 1.0, hi = 0.0;
  for (std::size_t i = begin; i < n; ++i) {
    mean += traj.fidelity[i];
    lo = std::min(lo, traj.fidelity[i]);
    hi = std::max(hi, traj.fidelity[i]);
  }
  mean /= double(take);
  TrajectoryStats st;
  st.saturation_mean = mean;
  st.saturation_spread = hi - lo;
  st.relative_survival = (1.0 - f_min) / std::max(1.0 - mean, 1e-15);
  // least-squares slope of fidelity vs time over the window
  double tbar = 0.0, fbar = 0.0;
  for (std::size_t i = begin; i < n; ++i) {
    tbar += traj.times[i];
    fbar += traj.fidelity[i];
  }
  tbar /= double(take);
  fbar /= double(take);
  double num = 0.0, den = 0.0;
  for (std::size_t i = begin; i < n; ++i) {
    num += (traj.times[i] - tbar) * (traj.fidelity[i] - fbar);
    den += (traj.times[i] - tbar) * (traj.times[i] - tbar);
  }
  st.secular_slope = den > 0 ? num / den : 0.0;
  return st;
}

// Leading-order asymptotic fidelity loss for a slightly misprepared initial
// state evolving under a perfectly dephasing pointer channel:
// rho_0 = [[1 - dA, d(B + iC)], [d(B - iC), dA]] -> diag(rho_0),
// 1 - f_infinity = d^2 (B^2 + C^2) / 2 + O(d^3).
inline double misprepared_asymptotics(double delta, double a, double b, double c) {
  const double pop = delta * a;
  const double det = pop * (1.0 - pop) - delta * delta * (b * b + c * c);
  if (pop < 0.0 || pop > 1.0 || det < -1e-12)
    throw InvalidDensity("misprepared_asymptotics: rho_0 is not a density matrix");
  return 0.5 * delta * delta * (b * b + c * c);
}

// Exact loss for the same channel, 1 - sqrt(F_Uhlmann)(rho_0, diag(rho_0)).
inline double misprepared_exact_loss(double delta, double a, double b, double c) {
  Matrix rho0(2, 2);
  rho0 << 1.0 - delta * a, delta * Complex(b, c), delta * Complex(b, -c), delta * a;
  Matrix rho_inf = rho0;
  rho_inf(0, 1) = rho_inf(1, 0) = 0.0;
  DensityMatrix d0(rho0);  // validates positivity and trace
  return 1.0 - uhlmann_fidelity_qubit(d0.matrix(), rho_inf);
}

}  // namespace pse
