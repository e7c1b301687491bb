#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace pse {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Tolerances used by the type invariants. All operator data is dimensionless
// (hbar = 1); energies are in units of the coupling cap J, times in 1/J.
namespace tol {
inline constexpr double hermiticity = 1e-12;      // relative, elementwise
inline constexpr double unitarity = 1e-10;        // max-abs entry of U^dag U - I
inline constexpr double trace_one = 1e-10;
inline constexpr double eigenvalue_floor = -1e-10;
inline constexpr double normalization = 1e-10;
inline constexpr double branch_margin = 1e-6;     // distance of eigenphases from +-pi
inline constexpr double cycle_closure = 1e-9;
inline constexpr double orthonormal = 1e-10;
inline constexpr double phase_degeneracy = 1e-12; // met averaging
inline constexpr double pure_state = 1e-9;
}  // namespace tol

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define PSE_DEFINE_ERROR(name)                                  \
  struct name : Error {                                         \
    explicit name(const std::string& what = #name) : Error(what) {} \
  }

PSE_DEFINE_ERROR(NonHermitianInput);
PSE_DEFINE_ERROR(NotUnitary);
PSE_DEFINE_ERROR(BranchAmbiguity);
PSE_DEFINE_ERROR(DimensionMismatch);
PSE_DEFINE_ERROR(NotPureInitial);
PSE_DEFINE_ERROR(NotNormalized);
PSE_DEFINE_ERROR(DimensionTooLarge);
PSE_DEFINE_ERROR(BasisNotOrthonormal);
PSE_DEFINE_ERROR(BadP);
PSE_DEFINE_ERROR(CycleNotClosed);
PSE_DEFINE_ERROR(UnknownName);
PSE_DEFINE_ERROR(RNotInvolution);
PSE_DEFINE_ERROR(MissingErrorEntry);
PSE_DEFINE_ERROR(EmptyTrajectory);
PSE_DEFINE_ERROR(InvalidDensity);
PSE_DEFINE_ERROR(ZeroGap);
PSE_DEFINE_ERROR(ZeroSplitting);
PSE_DEFINE_ERROR(RegimeViolation);
PSE_DEFINE_ERROR(InsufficientPoints);
PSE_DEFINE_ERROR(ConfigInvalid);

#undef PSE_DEFINE_ERROR

inline double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

inline bool is_square(const Matrix& a) { return a.rows() == a.cols(); }

// Hermitian operator: ||A - A^dag|| <= 1e-12 ||A|| elementwise.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix a) : m_(std::move(a)) {
    if (!is_square(m_)) throw DimensionMismatch("HermitianOperator: not square");
    const double scale = max_abs(m_);
    if (scale > 0 && max_abs(m_ - m_.adjoint()) > tol::hermiticity * scale)
      throw NonHermitianInput();
  }
  // Bypass validation for values produced by construction (e.g. A + A^dag).
  static HermitianOperator trusted(Matrix a) {
    HermitianOperator h;
    h.m_ = std::move(a);
    return h;
  }
  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  HermitianOperator() = default;
  Matrix m_;
};

// Unitary operator: ||U^dag U - I|| <= 1e-10 (max-abs entry).
class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix u) : m_(std::move(u)) {
    if (!is_square(m_)) throw DimensionMismatch("UnitaryOperator: not square");
    const Matrix g = m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols());
    if (max_abs(g) > tol::unitarity) throw NotUnitary();
  }
  static UnitaryOperator trusted(Matrix u) {
    UnitaryOperator v;
    v.m_ = std::move(u);
    return v;
  }
  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  UnitaryOperator() = default;
  Matrix m_;
};

// Density matrix: Hermitian, trace one within 1e-10, eigenvalues >= -1e-10.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho) : m_(std::move(rho)) {
    if (!is_square(m_)) throw DimensionMismatch("DensityMatrix: not square");
    const double scale = std::max(1.0, max_abs(m_));
    if (max_abs(m_ - m_.adjoint()) > tol::hermiticity * scale * 10)
      throw InvalidDensity("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > tol::trace_one ||
        std::abs(m_.trace().imag()) > tol::trace_one)
      throw InvalidDensity("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m_ + m_.adjoint()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < tol::eigenvalue_floor)
      throw InvalidDensity("DensityMatrix: negative eigenvalue");
  }
  static DensityMatrix trusted(Matrix rho) {
    DensityMatrix d;
    d.m_ = std::move(rho);
    return d;
  }
  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  DensityMatrix() = default;
  Matrix m_;
};

struct SpectralData {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // unitary, columns
  double operator_norm = 0.0;
};

}  // namespace pse
