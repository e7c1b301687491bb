#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pse/linalg.hpp"
#include "pse/types.hpp"

namespace pse {

// One instantaneous control operation. Composite pulses (e.g. Z realized as
// closely spaced X and Y) keep their primitives in chronological order so
// systematic errors attach to the physical pulses actually played.
struct PulsePrimitive {
  std::string label;
  Matrix u;
};

struct Segment {
  double tau = 0.0;                        // free evolution before the pulse
  Matrix pulse;                            // net unitary, chronological product
  std::vector<PulsePrimitive> primitives;  // chronological
};

inline Matrix chronological_product(const std::vector<PulsePrimitive>& prims) {
  Matrix u = Matrix::Identity(prims.front().u.rows(), prims.front().u.cols());
  for (const auto& p : prims) u = p.u * u;
  return u;
}

// One control cycle: free intervals punctuated by instantaneous pulses,
// f P_1 f P_2 ... f P_n read left to right in time.
class PulseSequence {
 public:
  PulseSequence(std::vector<Segment> segments, std::string label, bool ideal = true)
      : segments_(std::move(segments)), label_(std::move(label)), ideal_(ideal) {
    if (segments_.empty()) throw Error("PulseSequence: empty");
    t_cycle_ = 0.0;
    const Eigen::Index d = segments_.front().pulse.rows();
    for (const auto& s : segments_) {
      if (!(s.tau > 0)) throw Error("PulseSequence: intervals must be > 0");
      if (s.pulse.rows() != d || s.pulse.cols() != d)
        throw DimensionMismatch("PulseSequence: mixed pulse dimensions");
      t_cycle_ += s.tau;
    }
    if (ideal_) {
      Matrix prod = Matrix::Identity(d, d);
      for (const auto& s : segments_) prod = s.pulse * prod;
      const double closure = std::abs(prod.trace()) / double(d);
      if (std::abs(closure - 1.0) > tol::cycle_closure)
        throw CycleNotClosed(label_ + ": |Tr(P_n...P_1)|/D != 1");
    }
  }

  const std::vector<Segment>& segments() const { return segments_; }
  double t_cycle() const { return t_cycle_; }
  const std::string& label() const { return label_; }
  bool ideal() const { return ideal_; }
  Eigen::Index dim_system() const { return segments_.front().pulse.rows(); }

 private:
  std::vector<Segment> segments_;
  double t_cycle_ = 0.0;
  std::string label_;
  bool ideal_ = true;
};

// Q = 2|psi><psi| - I: the reflection that fixes the target and flips its
// orthogonal complement.
inline UnitaryOperator reflection_Q(const Vector& target) {
  if (std::abs(target.norm() - 1.0) > tol::normalization) throw NotNormalized();
  const Eigen::Index d = target.size();
  Matrix q = 2.0 * (target * target.adjoint()) - Matrix::Identity(d, d);
  return UnitaryOperator::trusted(std::move(q));
}

// sigma^p pulse: phase omega^{j+1} (omega = e^{2 pi i/(p+1)}) on the first p
// basis states, identity on the rest, expressed in the computational basis.
// (sigma^p)^{p+1} = I exactly; p = D_S - 1 reproduces the complete-basis pulse.
inline UnitaryOperator sigma_pulse(Eigen::Index dim_s, int p,
                                   const std::vector<Vector>& basis) {
  if (p < 1 || p > dim_s - 1) throw BadP("sigma_pulse: need 1 <= p <= D_S - 1");
  if (Eigen::Index(basis.size()) < Eigen::Index(p))
    throw BasisNotOrthonormal("sigma_pulse: basis shorter than p");
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if (basis[a].size() != dim_s)
      throw DimensionMismatch("sigma_pulse: basis vector dimension");
    for (std::size_t b = 0; b <= a; ++b) {
      const Complex ip = basis[b].adjoint() * basis[a];
      const double expect = (a == b) ? 1.0 : 0.0;
      if (std::abs(ip - expect) > tol::orthonormal)
        throw BasisNotOrthonormal("sigma_pulse: basis not orthonormal");
    }
  }
  Matrix u = Matrix::Identity(dim_s, dim_s);
  const double step = 2.0 * M_PI / double(p + 1);
  for (int j = 0; j < p; ++j) {
    const Complex omega_pow = std::exp(Complex(0.0, step * (j + 1)));
    u += (omega_pow - 1.0) * (basis[j] * basis[j].adjoint());
  }
  return UnitaryOperator::trusted(std::move(u));
}

// n_pulses equal free intervals, the same pulse after each one. The pulse must
// close the cycle: P^n = I up to a global phase.
inline PulseSequence uniform_cycle(const UnitaryOperator& pulse, int n_pulses,
                                   double tau, std::string label = "uniform",
                                   std::string pulse_label = "P") {
  if (n_pulses < 1) throw Error("uniform_cycle: n_pulses >= 1");
  if (!(tau > 0)) throw Error("uniform_cycle: tau > 0");
  const Eigen::Index d = pulse.dim();
  Matrix power = Matrix::Identity(d, d);
  for (int k = 0; k < n_pulses; ++k) power = pulse.matrix() * power;
  if (std::abs(std::abs(power.trace()) / double(d) - 1.0) > tol::cycle_closure)
    throw CycleNotClosed(label + ": P^n != I up to phase");
  std::vector<Segment> segs(n_pulses);
  for (auto& s : segs) {
    s.tau = tau;
    s.pulse = pulse.matrix();
    s.primitives = {{pulse_label, pulse.matrix()}};
  }
  return PulseSequence(std::move(segs), std::move(label));
}

// Qubit work horses. ZZ = f Z f Z, XYXY = f X f Y f X f Y, and XZXZ with Z
// composed from an X pulse immediately followed by a Y pulse so that pulse
// errors attach to the X and Y primitives.
inline PulseSequence named_qubit_cycle(const std::string& name, double tau) {
  if (!(tau > 0)) throw Error("named_qubit_cycle: tau > 0");
  const Matrix X = pauli_x(), Y = pauli_y(), Z = pauli_z();
  std::vector<Segment> segs;
  auto simple = [&](const Matrix& u, const std::string& lab) {
    Segment s;
    s.tau = tau;
    s.pulse = u;
    s.primitives = {{lab, u}};
    return s;
  };
  if (name == "ZZ") {
    segs = {simple(Z, "Z"), simple(Z, "Z")};
  } else if (name == "XYXY") {
    segs = {simple(X, "X"), simple(Y, "Y"), simple(X, "X"), simple(Y, "Y")};
  } else if (name == "XZXZ") {
    Segment zc;
    zc.tau = tau;
    zc.primitives = {{"X", X}, {"Y", Y}};  // X first, then Y
    zc.pulse = chronological_product(zc.primitives);
    segs = {simple(X, "X"), zc, simple(X, "X"), zc};
  } else {
    throw UnknownName("named_qubit_cycle: " + name);
  }
  return PulseSequence(std::move(segs), name);
}

inline Matrix swap_gate() {
  Matrix u = Matrix::Zero(4, 4);
  u(0, 0) = 1;
  u(1, 2) = 1;
  u(2, 1) = 1;
  u(3, 3) = 1;
  return u;
}

// EPR_0..EPR_3 = (|01> +- |10>)/sqrt2, (|00> +- |11>)/sqrt2
inline std::vector<Vector> bell_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Vector> out(4, Vector::Zero(4));
  out[0](1) = s;
  out[0](2) = s;
  out[1](1) = s;
  out[1](2) = -s;
  out[2](0) = s;
  out[2](3) = s;
  out[3](0) = s;
  out[3](3) = -s;
  return out;
}

// Bell-state engineering cycles. E1 = two SWAP applications (preserves EPR1),
// E2 = three applications of the p = 2 pulse on {EPR2, EPR1}, E3 = four
// applications of the complete Bell-basis pulse.
inline PulseSequence epr_cycle(const std::string& which, double tau) {
  if (!(tau > 0)) throw Error("epr_cycle: tau > 0");
  const auto bell = bell_basis();
  if (which == "E1") {
    return uniform_cycle(UnitaryOperator::trusted(swap_gate()), 2, tau, "E1", "SWAP");
  }
  if (which == "E2") {
    // diag(w, w^2, 1, 1) on (EPR2, EPR1, EPR0, EPR3), w = e^{2 pi i / 3}
    const UnitaryOperator u =
        sigma_pulse(4, 2, {bell[2], bell[1], bell[0], bell[3]});
    return uniform_cycle(u, 3, tau, "E2", "U_E2");
  }
  if (which == "E3") {
    // diag(i, -1, -i, 1) on (EPR3, EPR2, EPR1, EPR0): the complete-basis pulse
    const UnitaryOperator u =
        sigma_pulse(4, 3, {bell[3], bell[2], bell[1], bell[0]});
    return uniform_cycle(u, 4, tau, "E3", "U_E3");
  }
  throw UnknownName("epr_cycle: " + which);
}

// Interleave an involution R with a uniform cycle: [fRfR]P ... [fRfR]P.
// The 2n pulses alternate R and RP at half the original interval, preserving
// T_c. The R conjugation mixes the problem state with its partner and lifts
// unwanted degeneracies of the cycle Hamiltonian.
inline PulseSequence desymmetrize(const PulseSequence& base, const UnitaryOperator& r,
                                  const std::string& r_label = "R") {
  const Eigen::Index d = base.dim_system();
  if (r.dim() != d) throw DimensionMismatch("desymmetrize: R dimension");
  const Matrix r2 = r.matrix() * r.matrix();
  if (std::abs(std::abs(r2.trace()) / double(d) - 1.0) > tol::cycle_closure)
    throw RNotInvolution();
  const auto& segs = base.segments();
  const double tau0 = segs.front().tau;
  for (const auto& s : segs) {
    if (std::abs(s.tau - tau0) > 1e-15 ||
        max_abs(s.pulse - segs.front().pulse) > 1e-14)
      throw Error("desymmetrize: base must be a uniform single-pulse cycle");
  }
  std::vector<Segment> out;
  out.reserve(2 * segs.size());
  for (const auto& s : segs) {
    Segment a;
    a.tau = tau0 / 2.0;
    a.pulse = r.matrix();
    a.primitives = {{r_label, r.matrix()}};
    Segment b;
    b.tau = tau0 / 2.0;
    b.primitives = s.primitives;
    b.primitives.insert(b.primitives.begin(), {r_label, r.matrix()});  // R first, then P
    b.pulse = chronological_product(b.primitives);
    out.push_back(std::move(a));
    out.push_back(std::move(b));
  }
  return PulseSequence(std::move(out), base.label() + "+desym");
}

// Uhrig pulse times t_j = T_c sin^2(j pi / (2n + 2)), j = 1..n, as n + 1
// consecutive intervals (the last one runs out to T_c). No pulse sits at t = 0.
inline std::vector<double> uhrig_intervals(int n_pulses, double t_cycle) {
  if (n_pulses < 1) throw Error("uhrig_intervals: n_pulses >= 1");
  if (!(t_cycle > 0)) throw Error("uhrig_intervals: T_c > 0");
  std::vector<double> times(n_pulses);
  for (int j = 1; j <= n_pulses; ++j) {
    const double s = std::sin(j * M_PI / (2.0 * n_pulses + 2.0));
    times[j - 1] = t_cycle * s * s;
  }
  std::vector<double> intervals;
  intervals.reserve(n_pulses + 1);
  double prev = 0.0;
  for (double t : times) {
    intervals.push_back(t - prev);
    prev = t;
  }
  intervals.push_back(t_cycle - prev);
  return intervals;
}

// Uhrig-timed cycle for an involution pulse: n interior pulses plus the
// closing pulse at T_c that restores cycle closure ((P^n)^dag, so P for odd n
// and the identity for even n).
inline PulseSequence uhrig_cycle(const UnitaryOperator& pulse, int n_pulses,
                                 double t_cycle, std::string label = "uhrig",
                                 std::string pulse_label = "P") {
  const auto intervals = uhrig_intervals(n_pulses, t_cycle);
  const Eigen::Index d = pulse.dim();
  Matrix power = Matrix::Identity(d, d);
  for (int k = 0; k < n_pulses; ++k) power = pulse.matrix() * power;
  std::vector<Segment> segs;
  segs.reserve(n_pulses + 1);
  for (int j = 0; j < n_pulses; ++j) {
    Segment s;
    s.tau = intervals[j];
    s.pulse = pulse.matrix();
    s.primitives = {{pulse_label, pulse.matrix()}};
    segs.push_back(std::move(s));
  }
  Segment close;
  close.tau = intervals.back();
  close.pulse = power.adjoint();
  close.primitives = {{pulse_label + "^-" + std::to_string(n_pulses), close.pulse}};
  segs.push_back(std::move(close));
  return PulseSequence(std::move(segs), std::move(label));
}

// Systematic pulse errors: every occurrence of a labeled primitive P gets the
// same imperfect implementation P exp(-i E_P).
struct PulseErrorModel {
  std::map<std::string, Matrix> error_action;  // label -> Hermitian E_P

  double error_magnitude() const {
    double eps = 0.0;
    for (const auto& [label, e] : error_action)
      eps = std::max(eps, operator_norm(HermitianOperator(e)));
    return eps;
  }
};

inline PulseErrorModel axis_angle_error(double eta, double ex, double ey, double ez,
                                        const std::vector<std::string>& labels) {
  PulseErrorModel m;
  const Matrix e = eta * (ex * pauli_x() + ey * pauli_y() + ez * pauli_z());
  for (const auto& l : labels) m.error_action[l] = e;
  return m;
}

// Replace each primitive by its imperfect version. Closure is not required on
// the output; the sequence is flagged non-ideal.
inline PulseSequence apply_pulse_errors(const PulseSequence& seq,
                                        const PulseErrorModel& errs) {
  std::vector<Segment> out;
  out.reserve(seq.segments().size());
  for (const auto& s : seq.segments()) {
    Segment t;
    t.tau = s.tau;
    t.primitives.reserve(s.primitives.size());
    for (const auto& p : s.primitives) {
      auto it = errs.error_action.find(p.label);
      if (it == errs.error_action.end())
        throw MissingErrorEntry("apply_pulse_errors: no entry for " + p.label);
      const Matrix& e = it->second;
      if (e.rows() != p.u.rows())
        throw DimensionMismatch("apply_pulse_errors: error action dimension");
      Matrix imperfect =
          p.u * evolve_propagator(HermitianOperator(e), 1.0).matrix();
      t.primitives.push_back({p.label, std::move(imperfect)});
    }
    t.pulse = chronological_product(t.primitives);
    out.push_back(std::move(t));
  }
  return PulseSequence(std::move(out), seq.label() + "+err", /*ideal=*/false);
}

// Single free-evolution segment (no control), usable wherever a cycle is.
inline PulseSequence free_evolution_cycle(Eigen::Index dim_s, double tau) {
  Segment s;
  s.tau = tau;
  s.pulse = Matrix::Identity(dim_s, dim_s);
  s.primitives = {{"I", s.pulse}};
  return PulseSequence({std::move(s)}, "free");
}

}  // namespace pse
