#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pse/effective.hpp"
#include "pse/linalg.hpp"
#include "pse/pulses.hpp"
#include "pse/rng.hpp"
#include "pse/types.hpp"

namespace pse {

// Static random field acting on a single qubit. The isotropic Gaussian draws
// a magnitude from N(0, B^2) and an independent uniform direction, so the
// mean square field is <|b|^2> = B^2. The component-wise reading (each
// Cartesian component N(0, B^2)) is available behind the flag below; it
// rescales the asymptotic laws by O(1) factors and carries no acceptance
// claims.
struct RandomFieldSpec {
  enum class Kind { IsotropicGaussian, FixedVector };
  Kind kind = Kind::IsotropicGaussian;
  double b_std = 1.0;
  std::array<double, 3> fixed{0.0, 0.0, 0.0};
  bool componentwise = false;
  long n_samples = 1;
  std::uint64_t seed = 0;
};

inline std::array<double, 3> sample_field(const RandomFieldSpec& spec, long index) {
  if (spec.kind == RandomFieldSpec::Kind::FixedVector) return spec.fixed;
  rng::Stream st(spec.seed, "field", std::uint64_t(index));
  if (spec.componentwise)
    return {spec.b_std * st.normal(0), spec.b_std * st.normal(1),
            spec.b_std * st.normal(2)};
  const double g = spec.b_std * st.normal(0);
  double x, y, z, r2;
  std::uint64_t k = 1;
  do {
    x = st.normal(k);
    y = st.normal(k + 1);
    z = st.normal(k + 2);
    r2 = x * x + y * y + z * z;
    k += 3;
  } while (r2 < 1e-12);
  const double r = std::sqrt(r2);
  return {g * x / r, g * y / r, g * z / r};
}

// f_N for one static-field realization of an engineered qubit cycle:
// f_N = 1 - eps^2 (h_x^2 + h_y^2) sin^2(N T_c h_z) / (4 h_z^2), clamped.
inline double realization_fidelity(double h_x, double h_y, double h_z, double eps,
                                   long n, double t_cycle) {
  if (std::abs(h_z) <= 1e-12) throw ZeroSplitting();
  const double s = std::sin(double(n) * t_cycle * h_z);
  const double loss =
      eps * eps * (h_x * h_x + h_y * h_y) * s * s / (4.0 * h_z * h_z);
  return std::clamp(1.0 - loss, 0.0, 1.0);
}

struct EnsembleTrajectory {
  std::vector<long> cycle_indices;
  std::vector<double> times;
  std::vector<double> mean_fidelity;
  std::vector<double> stderr_fidelity;
  long n_samples = 0;
};

enum class EnsembleMode {
  // Average of the perturbative single-realization law (the paper's route to
  // the closed-form short-time and plateau constants). ZZ cycles only, where
  // the error-field functionals are h_z = b_z, eps h_x = -tau b_y b_z,
  // eps h_y = tau b_x b_z.
  Analytic,
  // Exact 2x2 propagation through the pulsed cycle. Applies to any qubit
  // sequence; saturates at 4x the analytic plateau (the perturbative law
  // undercounts the oscillation amplitude by that factor).
  Exact
};

namespace detail {

struct KahanAccumulator {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

inline bool is_zz_cycle(const PulseSequence& seq) {
  if (seq.dim_system() != 2 || seq.segments().size() != 2) return false;
  const Matrix z = pauli_z();
  for (const auto& s : seq.segments())
    if (max_abs(s.pulse - z) > 1e-12 ||
        std::abs(s.tau - seq.segments().front().tau) > 1e-15)
      return false;
  return true;
}

}  // namespace detail

// Monte Carlo ensemble average of the |0> fidelity over the random field,
// sampled at the scheduled cycle counts. Chunked compensated summation keeps
// the aggregate independent of evaluation order.
inline EnsembleTrajectory ensemble_average(const RandomFieldSpec& spec,
                                           const PulseSequence& seq,
                                           const std::vector<long>& schedule,
                                           EnsembleMode mode = EnsembleMode::Analytic) {
  if (seq.dim_system() != 2)
    throw DimensionMismatch("ensemble_average: qubit sequences only");
  if (mode == EnsembleMode::Analytic && !detail::is_zz_cycle(seq))
    throw UnknownName("ensemble_average: analytic mode requires the ZZ cycle");
  const double t_c = seq.t_cycle();
  const double tau = seq.segments().front().tau;
  const std::size_t nn = schedule.size();
  std::vector<detail::KahanAccumulator> acc(nn), acc2(nn);

  const Matrix sx = pauli_x(), sy = pauli_y(), sz = pauli_z();
  for (long i = 0; i < spec.n_samples; ++i) {
    const auto b = sample_field(spec, i);
    if (mode == EnsembleMode::Analytic) {
      const double bperp2 = b[0] * b[0] + b[1] * b[1];
      for (std::size_t k = 0; k < nn; ++k) {
        const double s = std::sin(double(schedule[k]) * t_c * b[2]);
        const double f =
            std::clamp(1.0 - 0.25 * tau * tau * bperp2 * s * s, 0.0, 1.0);
        acc[k].add(f);
        acc2[k].add(f * f);
      }
    } else {
      const Matrix h = b[0] * sx + b[1] * sy + b[2] * sz;
      const UnitaryOperator step =
          evolve_propagator(HermitianOperator::trusted(h), tau);
      Matrix u = Matrix::Identity(2, 2);
      for (const auto& s : seq.segments()) u = s.pulse * (step.matrix() * u);
      auto [phases, basis] = detail::unitary_eigensystem(u);
      const Complex a0 = std::conj(basis(0, 0));
      const Complex a1 = std::conj(basis(0, 1));
      const double w0 = std::norm(a0), w1 = std::norm(a1);
      for (std::size_t k = 0; k < nn; ++k) {
        const double ph = (phases(0) - phases(1)) * double(schedule[k]);
        const double f =
            std::clamp(w0 * w0 + w1 * w1 + 2.0 * w0 * w1 * std::cos(ph), 0.0, 1.0);
        acc[k].add(f);
        acc2[k].add(f * f);
      }
    }
  }

  EnsembleTrajectory out;
  out.cycle_indices = schedule;
  out.n_samples = spec.n_samples;
  out.times.resize(nn);
  out.mean_fidelity.resize(nn);
  out.stderr_fidelity.resize(nn);
  for (std::size_t k = 0; k < nn; ++k) {
    out.times[k] = double(schedule[k]) * t_c;
    const double mean = acc[k].sum / double(spec.n_samples);
    out.mean_fidelity[k] = mean;
    const double var =
        std::max(0.0, acc2[k].sum / double(spec.n_samples) - mean * mean);
    out.stderr_fidelity[k] =
        spec.n_samples > 1 ? std::sqrt(var / double(spec.n_samples - 1)) : 0.0;
  }
  return out;
}

struct AsymptoticForms {
  double short_time_loss = 0.0;  // (2/5) B^4 N^2 tau^4
  double plateau_loss = 0.0;     // B^2 tau^2 / 12
  double b_sq_from_bath = 0.0;   // B^2 = (3/4) A^2 n_B
};

inline AsymptoticForms asymptotic_forms(double b_std, double tau, long n, double a,
                                        int n_bath) {
  if (b_std < 0 || tau < 0 || n < 0 || a < 0 || n_bath < 0)
    throw Error("asymptotic_forms: nonnegative inputs");
  AsymptoticForms f;
  f.short_time_loss = 0.4 * std::pow(b_std, 4) * double(n) * double(n) * std::pow(tau, 4);
  f.plateau_loss = b_std * b_std * tau * tau / 12.0;
  f.b_sq_from_bath = 0.75 * a * a * double(n_bath);
  return f;
}

// Systematic ESR pulse imperfections: rotation-angle error eps and axis
// offsets, each drawn from P(x) = (1/2 x0) [3 (1 - x/x0)]^{-1/2} on
// [-2 x0, x0] by the closed-form inverse CDF x = x0 (1 - 3 (1 - u)^2).
struct ESRPulseErrorSpec {
  double eps0 = 0.0;
  double n0 = 0.0;
  std::uint64_t seed = 0;
};

struct ESRErrorDraw {
  double eps = 0.0;
  double n_y = 0.0, n_z = 0.0;  // X-pulse axis offsets
  double m_x = 0.0, m_z = 0.0;  // Y-pulse axis offsets
};

inline double esr_inverse_cdf(double scale, double u) {
  const double onemu = 1.0 - u;
  return scale * (1.0 - 3.0 * onemu * onemu);
}

inline ESRErrorDraw esr_sample_errors(const ESRPulseErrorSpec& spec, long index = 0) {
  if (spec.eps0 < 0 || spec.n0 < 0)
    throw Error("esr_sample_errors: scales must be nonnegative");
  ESRErrorDraw d;
  d.eps = esr_inverse_cdf(spec.eps0, rng::Stream(spec.seed, "esr-eps", index).uniform01(0));
  d.n_y = esr_inverse_cdf(spec.n0, rng::Stream(spec.seed, "esr-ny", index).uniform01(0));
  d.n_z = esr_inverse_cdf(spec.n0, rng::Stream(spec.seed, "esr-nz", index).uniform01(0));
  d.m_x = esr_inverse_cdf(spec.n0, rng::Stream(spec.seed, "esr-mx", index).uniform01(0));
  d.m_z = esr_inverse_cdf(spec.n0, rng::Stream(spec.seed, "esr-mz", index).uniform01(0));
  return d;
}

struct ESRCycleHamiltonians {
  Matrix closed_form;  // 2x2 Hermitian, H_c level (T_c divided out)
  Matrix numeric;
  bool large_error_warning = false;
};

namespace detail {

inline Matrix esr_rotation(double angle, double ax, double ay, double az) {
  const Matrix gen = 0.5 * angle * (ax * pauli_x() + ay * pauli_y() + az * pauli_z());
  return evolve_propagator(HermitianOperator::trusted(gen), 1.0).matrix();
}

}  // namespace detail

// Effective cycle Hamiltonian of the imperfect XYXY / XZXZ sequences on a
// static longitudinal field b_z (free segment exp(-i b_z tau sigma_z / 2)).
// closed_form is the second-order expansion in the pulse errors; numeric is
// the principal log of the composed imperfect cycle with the ideal global
// phase divided out. They agree to third order in the error scales.
inline ESRCycleHamiltonians esr_effective_cycle(const std::string& name,
                                                const ESRErrorDraw& d, double b_z,
                                                double tau) {
  const double e = d.eps, ny = d.n_y, nz = d.n_z, mx = d.m_x, mz = d.m_z;
  ESRCycleHamiltonians out;
  out.large_error_warning =
      std::max({std::abs(e), std::abs(ny), std::abs(nz), std::abs(mx), std::abs(mz)}) > 0.2;

  const double bt = b_z * tau;
  const double c = std::cos(bt), s = std::sin(bt);
  const double t_c = 4.0 * tau;
  double xc, yc, zc;
  if (name == "XYXY") {
    zc = -2.0 * (mx + ny) + 0.5 * e * e * c + e * (nz + mz) * s - 2.0 * nz * mz * c;
    xc = -(mx + ny) * (e * (1.0 + s) - 2.0 * nz * c);
    yc = (mx + ny) * (2.0 * mz - e * c - 2.0 * nz * s);
  } else if (name == "XZXZ") {
    const double g = e * (1.0 - s) - 2.0 * nz * (1.0 - c);
    yc = g + (ny + mx) * (e * (1.0 + c) + 2.0 * nz * s);
    xc = g * mx;
    zc = -g * (0.5 * e * (1.0 + c) - mz + nz * s);
  } else {
    throw UnknownName("esr_effective_cycle: " + name);
  }
  out.closed_form = (xc * pauli_x() + yc * pauli_y() + zc * pauli_z()) / t_c;

  const double nx = std::sqrt(std::max(0.0, 1.0 - ny * ny - nz * nz));
  const double my = std::sqrt(std::max(0.0, 1.0 - mx * mx - mz * mz));
  const Matrix ux = detail::esr_rotation(M_PI + e, nx, ny, nz);
  const Matrix uy = detail::esr_rotation(M_PI + e, mx, my, mz);
  const Matrix f = detail::esr_rotation(bt, 0.0, 0.0, 1.0);
  Matrix u;
  if (name == "XYXY") {
    u = uy * f * ux * f * uy * f * ux * f;
  } else {
    const Matrix uz = uy * ux;  // X pulse immediately followed by Y
    u = uz * f * ux * f * uz * f * ux * f;
  }
  const Complex lam = u.trace();
  if (std::abs(lam) < 1e-6)
    throw BranchAmbiguity("esr_effective_cycle: cycle too far from a global phase");
  u *= std::conj(lam) / std::abs(lam);
  Matrix h = principal_log_hamiltonian(UnitaryOperator::trusted(u), t_c).matrix();
  h -= (h.trace() / 2.0) * Matrix::Identity(2, 2);
  out.numeric = std::move(h);
  return out;
}

}  // namespace pse
