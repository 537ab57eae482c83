// pdmskit -- dense spectral linear algebra.
//
// Everything here is a pure function of its inputs.  The eigendecomposition
// itself is delegated to Eigen's SelfAdjointEigenSolver / JacobiSVD; the
// operations layered on top (psd tests, principal square roots, minimal-norm
// solves, Krylov bases, range intersections, polar decompositions) carry the
// numerical contracts this library is tested against.
#ifndef PDMSKIT_LINALG_HPP
#define PDMSKIT_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdmskit/errors.hpp"
#include "pdmskit/matrix.hpp"

namespace pdmskit {

// Default tolerances.  All are relative to max(1, scale of the operand)
// unless stated otherwise; every operation accepts an override.
inline constexpr double kEigTol = 1e-10;    // psd margins, eigen residuals
inline constexpr double kSqrtTol = 1e-10;   // square-root reconstruction
inline constexpr double kOrthoTol = 1e-12;  // orthonormality of bases
inline constexpr double kZeroTol = 1e-12;   // absolute zero threshold
inline constexpr double kRankTol = 1e-12;   // singular-value rank cut
inline constexpr double kAngleTol = 1e-8;   // principal-angle degeneracy (rad)

// ---------------------------------------------------------------------------
// Eigendecomposition
// ---------------------------------------------------------------------------

// Spectral data of a Hermitian matrix: eigenvalues ascending, eigenvector
// columns unitary (within eig_tol; verified by the test suite, not per call).
struct EigenDecomposition {
  RealVector values;       // ascending
  ComplexMatrix vectors;   // columns, unitary
};

inline EigenDecomposition eig(const HermitianMatrix& M) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(M.mat());
  if (solver.info() != Eigen::Success) {
    throw Error("eig: eigendecomposition did not converge");
  }
  return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

// Eigenvalues only (ascending); cheaper when vectors are not needed.
inline RealVector eigenvalues(const HermitianMatrix& M) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
      M.mat(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error("eigenvalues: eigendecomposition did not converge");
  }
  return solver.eigenvalues();
}

// ---------------------------------------------------------------------------
// Positive semidefiniteness
// ---------------------------------------------------------------------------

// Margin report for a psd test.  scale = max(1, spectral norm).
struct PsdReport {
  bool psd = false;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double scale = 1.0;
};

// True iff lambda_min(M) >= -tol * max(1, ||M||); the report carries the
// extreme eigenvalues so callers can show margins.
inline PsdReport is_psd(const HermitianMatrix& M, double tol = kEigTol) {
  if (tol < 0) throw InputError("is_psd: tolerance must be nonnegative");
  const RealVector vals = eigenvalues(M);
  PsdReport report;
  report.lambda_min = vals(0);
  report.lambda_max = vals(vals.size() - 1);
  report.scale = std::max(1.0, std::max(std::abs(report.lambda_min),
                                        std::abs(report.lambda_max)));
  report.psd = report.lambda_min >= -tol * report.scale;
  return report;
}

// ---------------------------------------------------------------------------
// Principal square root
// ---------------------------------------------------------------------------

// Unique Hermitian psd square root.  Eigenvalues in [-tol*scale, 0) are
// clamped to 0 (floating-point Gram matrices of genuinely positive kernels
// routinely dip a hair below zero); anything lower throws NotPsdError.
// kernel_cut > 0 zeroes eigenvalues below kernel_cut * |lambda|_max before
// the square root.  Callers that know M is a product with a numerical kernel
// use it to stop noise eigenvalues eps from surfacing as sqrt(eps) in the
// root; the default keeps every positive eigenvalue.
inline HermitianMatrix principal_sqrt(const HermitianMatrix& M,
                                      double tol = kSqrtTol,
                                      double kernel_cut = 0.0) {
  const EigenDecomposition ed = eig(M);
  const Eigen::Index n = M.n();
  const double top = std::max(std::abs(ed.values(0)),
                              std::abs(ed.values(n - 1)));
  const double scale = std::max(1.0, top);
  if (ed.values(0) < -tol * scale) {
    throw NotPsdError("principal_sqrt: matrix is not psd (lambda_min = " +
                          std::to_string(ed.values(0)) + ")",
                      ed.values(0));
  }
  RealVector roots(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    roots(i) =
        ed.values(i) > kernel_cut * top ? std::sqrt(ed.values(i)) : 0.0;
  }
  const ComplexMatrix R =
      ed.vectors * roots.asDiagonal() * ed.vectors.adjoint();
  return HermitianMatrix(R);  // symmetrize away round-off asymmetry
}

// ---------------------------------------------------------------------------
// Pseudoinverse application and minimal-norm solves
// ---------------------------------------------------------------------------

// Applies the Moore-Penrose inverse of Hermitian psd A to B, cutting the
// spectrum at rank_tol * |lambda|_max.
inline ComplexMatrix pinv_apply(const HermitianMatrix& A,
                                const ComplexMatrix& B,
                                double rank_tol = kRankTol) {
  if (A.n() != B.rows()) {
    throw InputError("pinv_apply: dimension mismatch");
  }
  const EigenDecomposition ed = eig(A);
  const double top = std::max(std::abs(ed.values(0)),
                              std::abs(ed.values(ed.values.size() - 1)));
  const double cut = rank_tol * std::max(top, 1e-300);
  RealVector inv(ed.values.size());
  for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
    inv(i) = std::abs(ed.values(i)) > cut ? 1.0 / ed.values(i) : 0.0;
  }
  return ed.vectors * inv.asDiagonal() * (ed.vectors.adjoint() * B);
}

// Minimal-norm solution V of A V = D for Hermitian psd A: V = pinv(A) D.
// Throws RangeViolationError when some column of D leaves range(A) by more
// than tol * max(1, ||D||_F).
inline ComplexMatrix douglas_solve(const HermitianMatrix& A,
                                   const ComplexMatrix& D,
                                   double tol = kEigTol,
                                   double rank_tol = kRankTol) {
  require_finite(D, "douglas_solve");
  const ComplexMatrix V = pinv_apply(A, D, rank_tol);
  const double residual = fro_norm(A.mat() * V - D);
  const double budget = tol * std::max(1.0, fro_norm(D));
  if (residual > budget) {
    throw RangeViolationError(
        "douglas_solve: right-hand side leaves range(A); residual = " +
            std::to_string(residual),
        residual);
  }
  return V;
}

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

// Orthonormal spanning set; zero columns encode the trivial subspace.
struct SubspaceBasis {
  Eigen::Index ambient_dim = 0;
  ComplexMatrix vectors;  // ambient_dim x dim, orthonormal columns

  Eigen::Index dim() const { return vectors.cols(); }

  static SubspaceBasis zero(Eigen::Index ambient) {
    SubspaceBasis b;
    b.ambient_dim = ambient;
    b.vectors = ComplexMatrix::Zero(ambient, 0);
    return b;
  }

  static SubspaceBasis full(Eigen::Index ambient) {
    SubspaceBasis b;
    b.ambient_dim = ambient;
    b.vectors = ComplexMatrix::Identity(ambient, ambient);
    return b;
  }

  // Max deviation of vectors* vectors from the identity.
  double orthonormality_defect() const {
    if (dim() == 0) return 0.0;
    const ComplexMatrix g = vectors.adjoint() * vectors;
    return max_abs(g - ComplexMatrix::Identity(dim(), dim()));
  }

  void require_orthonormal(double ortho_tol = kOrthoTol) const {
    if (vectors.rows() != ambient_dim) {
      throw InputError("SubspaceBasis: ambient dimension mismatch");
    }
    if (orthonormality_defect() > ortho_tol) {
      throw InputError("SubspaceBasis: columns are not orthonormal");
    }
  }

  // Orthogonal projector onto the subspace.
  ComplexMatrix projector() const {
    if (dim() == 0) return ComplexMatrix::Zero(ambient_dim, ambient_dim);
    return vectors * vectors.adjoint();
  }
};

// Orthonormal basis of the column space of M, rank-cut at
// rank_tol * sigma_max via SVD.  Deterministic for fixed input.
// sigma_floor is an optional absolute cut for callers that know the natural
// scale of M (e.g. M is a product that may be numerically zero, where a
// purely relative cut would keep noise directions).
inline SubspaceBasis orthonormal_range(const ComplexMatrix& M,
                                       double rank_tol = kRankTol,
                                       double sigma_floor = 0.0) {
  SubspaceBasis basis;
  basis.ambient_dim = M.rows();
  if (M.cols() == 0) {
    basis.vectors = ComplexMatrix::Zero(M.rows(), 0);
    return basis;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double cut =
      std::max(sigma.size() > 0 ? rank_tol * sigma(0) : 0.0, sigma_floor);
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cut && sigma(rank) > 0) ++rank;
  basis.vectors = svd.matrixU().leftCols(rank);
  return basis;
}

// Orthonormal basis of the null space of M (right singular directions with
// sigma <= rank_tol * sigma_max).
inline SubspaceBasis nullspace(const ComplexMatrix& M,
                               double rank_tol = kRankTol) {
  SubspaceBasis basis;
  basis.ambient_dim = M.cols();
  if (M.cols() == 0) {
    basis.vectors = ComplexMatrix::Zero(0, 0);
    return basis;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(M, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double cut = sigma.size() > 0 ? rank_tol * sigma(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cut && sigma(rank) > 0) ++rank;
  basis.vectors = svd.matrixV().rightCols(M.cols() - rank);
  return basis;
}

// Principal angles (radians, ascending) between two subspaces, defined for
// min(dim U, dim W) pairs via the singular values of U* W.
inline std::vector<double> principal_angles(const SubspaceBasis& U,
                                            const SubspaceBasis& W) {
  if (U.ambient_dim != W.ambient_dim) {
    throw InputError("principal_angles: ambient dimension mismatch");
  }
  const Eigen::Index m = std::min(U.dim(), W.dim());
  std::vector<double> angles;
  if (m == 0) return angles;
  Eigen::JacobiSVD<ComplexMatrix> svd(U.vectors.adjoint() * W.vectors);
  const auto& sigma = svd.singularValues();
  angles.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double c = std::clamp(sigma(i), 0.0, 1.0);
    angles.push_back(std::acos(c));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

// Smallest principal angle; pi/2 when either subspace is trivial (they can
// only meet in {0}).  Small angles come from the projected residual (sine
// form): acos of a singular value loses half the working digits near zero,
// so a cosine-only formula cannot resolve angles below ~1e-8.
inline double smallest_principal_angle(const SubspaceBasis& U,
                                       const SubspaceBasis& W) {
  if (U.ambient_dim != W.ambient_dim) {
    throw InputError("smallest_principal_angle: ambient dimension mismatch");
  }
  if (U.dim() == 0 || W.dim() == 0) return std::asin(1.0);
  const ComplexMatrix resid =
      U.vectors - W.vectors * (W.vectors.adjoint() * U.vectors);
  Eigen::JacobiSVD<ComplexMatrix> sin_svd(resid);
  const auto& sv = sin_svd.singularValues();
  const double s = std::clamp(sv(sv.size() - 1), 0.0, 1.0);
  if (s * s <= 0.5) return std::asin(s);
  Eigen::JacobiSVD<ComplexMatrix> cos_svd(U.vectors.adjoint() * W.vectors);
  const double c = std::clamp(cos_svd.singularValues()(0), 0.0, 1.0);
  return std::acos(c);
}

// Spectral-norm distance between the orthogonal projectors of two subspaces;
// a dimension-robust measure of subspace agreement (0 iff equal).
inline double projector_distance(const SubspaceBasis& U,
                                 const SubspaceBasis& W) {
  if (U.ambient_dim != W.ambient_dim) {
    throw InputError("projector_distance: ambient dimension mismatch");
  }
  const HermitianMatrix diff(U.projector() - W.projector());
  const RealVector vals = eigenvalues(diff);
  return std::max(std::abs(vals(0)), std::abs(vals(vals.size() - 1)));
}

// ---------------------------------------------------------------------------
// Krylov bases
// ---------------------------------------------------------------------------

// Orthonormal basis of span{A^k f : f in F, k >= 0}, grown breadth-first by
// modified Gram-Schmidt.  Deterministic: candidates are processed in input
// order (first the columns of F, then A applied to each accepted basis
// vector in acceptance order); a candidate is rejected when its residual
// after projection drops below tol times its own pre-projection norm.
// Stabilizes in at most ambient-dimension acceptances.
inline SubspaceBasis krylov_basis(const HermitianMatrix& A,
                                  const SubspaceBasis& F,
                                  double tol = kEigTol,
                                  std::size_t max_iter = 0) {
  if (F.ambient_dim != A.n()) {
    throw InputError("krylov_basis: ambient dimension mismatch");
  }
  const Eigen::Index n = A.n();
  if (max_iter == 0) max_iter = static_cast<std::size_t>(4 * n) + 16;

  std::vector<ComplexVector> accepted;
  std::vector<ComplexVector> queue;
  queue.reserve(static_cast<std::size_t>(F.dim()));
  for (Eigen::Index j = 0; j < F.dim(); ++j) queue.push_back(F.vectors.col(j));

  std::size_t head = 0;
  std::size_t iterations = 0;
  while (head < queue.size() && accepted.size() < static_cast<std::size_t>(n) &&
         iterations < max_iter) {
    ++iterations;
    ComplexVector v = queue[head++];
    const double original = v.norm();
    if (original <= 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {  // two MGS passes for stability
      for (const ComplexVector& b : accepted) {
        v -= b * (b.dot(v));
      }
    }
    const double residual = v.norm();
    if (residual < tol * original) continue;  // numerically inside the span
    v /= residual;
    accepted.push_back(v);
    queue.push_back(A.mat() * v);  // breadth-first expansion
  }

  SubspaceBasis basis;
  basis.ambient_dim = n;
  basis.vectors.resize(n, static_cast<Eigen::Index>(accepted.size()));
  for (std::size_t j = 0; j < accepted.size(); ++j) {
    basis.vectors.col(static_cast<Eigen::Index>(j)) = accepted[j];
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Stabilized range intersection
// ---------------------------------------------------------------------------

// The ranges R(V^k) are nested (R(V^{k+1}) subset of R(V^k)), so their
// dimensions are nonincreasing and the chain stabilizes once the dimension
// stops dropping; the stabilized subspace equals the intersection of all
// R(V^k) computed so far.
struct RangeIntersection {
  SubspaceBasis basis;
  std::vector<Eigen::Index> dims;  // dim R(V^k) for k = 1, 2, ...
};

inline RangeIntersection stable_range_intersection(const ComplexMatrix& V,
                                                   double tol = kRankTol) {
  if (V.rows() != V.cols()) {
    throw InputError("stable_range_intersection: matrix must be square");
  }
  require_finite(V, "stable_range_intersection");
  RangeIntersection result;
  const Eigen::Index n = V.rows();
  SubspaceBasis current = orthonormal_range(V, tol);
  result.dims.push_back(current.dim());
  // At most n strict decreases are possible.
  for (Eigen::Index step = 0; step < n + 1; ++step) {
    if (current.dim() == 0) break;
    SubspaceBasis next = orthonormal_range(V * current.vectors, tol);
    if (next.dim() == current.dim()) break;  // stabilized
    current = next;
    result.dims.push_back(current.dim());
  }
  result.basis = current;
  return result;
}

// ---------------------------------------------------------------------------
// Polar decomposition
// ---------------------------------------------------------------------------

// T = Q P with P = principal_sqrt(T* T) psd and Q a partial isometry whose
// kernel equals the kernel of T (rank cut at rank_tol * sigma_max).
struct PolarDecomposition {
  ComplexMatrix Q;     // partial isometry
  HermitianMatrix P;   // psd factor
};

inline PolarDecomposition polar_decompose(const ComplexMatrix& T,
                                          double rank_tol = kRankTol) {
  if (T.rows() != T.cols()) {
    throw InputError("polar_decompose: matrix must be square");
  }
  require_finite(T, "polar_decompose");
  Eigen::JacobiSVD<ComplexMatrix> svd(
      T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const Eigen::Index n = T.rows();
  const double cut = sigma.size() > 0 ? rank_tol * sigma(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < n && sigma(rank) > cut && sigma(rank) > 0) ++rank;

  RealVector sig_kept = sigma;
  const ComplexMatrix P_raw = svd.matrixV() * sig_kept.asDiagonal() *
                              svd.matrixV().adjoint();
  const ComplexMatrix Q = svd.matrixU().leftCols(rank) *
                          svd.matrixV().leftCols(rank).adjoint();
  return PolarDecomposition{Q, HermitianMatrix(P_raw)};
}

}  // namespace pdmskit

#endif  // PDMSKIT_LINALG_HPP
