// pdmskit -- dense complex matrix layer.
//
// Thin vocabulary over Eigen: a ComplexMatrix alias for general rectangular
// data and a HermitianMatrix wrapper that enforces conjugate symmetry
// *exactly as stored* (symmetrization at construction, real diagonal).
#ifndef PDMSKIT_MATRIX_HPP
#define PDMSKIT_MATRIX_HPP

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "pdmskit/errors.hpp"

namespace pdmskit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Throws InputError if any entry of M is NaN or infinite.
inline void require_finite(const ComplexMatrix& M, const std::string& who) {
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const Complex& v = M(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InputError(who + ": non-finite entry at (" +
                         std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

// Frobenius norm shorthand (Eigen's .norm() on matrices).
inline double fro_norm(const ComplexMatrix& M) { return M.norm(); }

// Largest absolute entry.
inline double max_abs(const ComplexMatrix& M) {
  return M.rows() == 0 || M.cols() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

// Hermitian (conjugate-symmetric) square matrix.  The stored entries satisfy
// entries(i,j) == conj(entries(j,i)) exactly: construction copies the lower
// triangle onto the upper one and drops imaginary parts on the diagonal.
class HermitianMatrix {
 public:
  // Empty placeholder (n() == 0); useful for report structs filled later.
  HermitianMatrix() = default;

  // Symmetrizes M = (M + M*)/2 entry by entry so the invariant holds bitwise.
  explicit HermitianMatrix(const ComplexMatrix& M) {
    if (M.rows() != M.cols() || M.rows() == 0) {
      throw InputError("HermitianMatrix: matrix must be square and nonempty");
    }
    require_finite(M, "HermitianMatrix");
    const Eigen::Index n = M.rows();
    mat_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mat_(i, i) = Complex(M(i, i).real(), 0.0);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Complex avg = 0.5 * (M(i, j) + std::conj(M(j, i)));
        mat_(i, j) = avg;
        mat_(j, i) = std::conj(avg);
      }
    }
  }

  // Trusts the caller that M is already exactly Hermitian; verifies cheaply.
  struct AlreadyHermitian {};
  HermitianMatrix(const ComplexMatrix& M, AlreadyHermitian) : mat_(M) {
    if (M.rows() != M.cols() || M.rows() == 0) {
      throw InputError("HermitianMatrix: matrix must be square and nonempty");
    }
  }

  Eigen::Index n() const { return mat_.rows(); }
  const ComplexMatrix& mat() const { return mat_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return mat_(i, j); }

  // Maximum deviation of M from its stored Hermitian part; useful when
  // wrapping data that should already be symmetric.
  static double asymmetry(const ComplexMatrix& M) {
    return max_abs(M - M.adjoint().eval());
  }

 private:
  ComplexMatrix mat_;
};

// Exact symmetrization helper for general matrices: (M + M*)/2.
inline HermitianMatrix hermitian_part(const ComplexMatrix& M) {
  return HermitianMatrix(0.5 * (M + M.adjoint().eval()));
}

}  // namespace pdmskit

#endif  // PDMSKIT_MATRIX_HPP
