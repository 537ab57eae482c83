// pdmskit -- deterministic random generators for experiments and tests.
//
// Thin wrappers over std::mt19937_64 that avoid std::*_distribution (whose
// outputs vary across standard-library implementations): uniform doubles
// come from the canonical 53-bit construction, normals from Box-Muller.
// Every generator here is a pure function of the seed.
#ifndef PDMSKIT_RNG_HPP
#define PDMSKIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pdmskit/errors.hpp"
#include "pdmskit/linalg.hpp"
#include "pdmskit/matrix.hpp"

namespace pdmskit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1): (x >> 11) * 2^-53, identical on every platform.
  double uniform() {
    const std::uint64_t x = engine_();
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in (lo, hi]: flips the half-open side so the result never hits
  // lo (used for strictly positive draws).
  double uniform_right_closed(double lo, double hi) {
    return lo + (hi - lo) * (1.0 - uniform());
  }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // in (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im) / std::sqrt(2.0);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Random matrices and subspaces
// ---------------------------------------------------------------------------

inline ComplexMatrix random_gaussian_matrix(Rng& rng, Eigen::Index rows,
                                            Eigen::Index cols) {
  ComplexMatrix G(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) G(i, j) = rng.complex_normal();
  }
  return G;
}

// Haar-like random unitary: QR of a complex Gaussian matrix with the phase
// convention that R has positive diagonal.
inline ComplexMatrix random_unitary(Rng& rng, Eigen::Index n) {
  if (n < 1) throw InputError("random_unitary: n must be >= 1");
  const ComplexMatrix G = random_gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<ComplexMatrix> qr(G);
  ComplexMatrix Q = qr.householderQ();
  const ComplexMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex d = R(j, j);
    const double a = std::abs(d);
    Q.col(j) *= a > 0 ? d / a : Complex(1.0, 0.0);
  }
  return Q;
}

// Random orthonormal basis of a dim-dimensional subspace.
inline SubspaceBasis random_subspace(Rng& rng, Eigen::Index ambient,
                                     Eigen::Index dim) {
  if (dim < 0 || dim > ambient) {
    throw InputError("random_subspace: dim out of range");
  }
  SubspaceBasis basis;
  basis.ambient_dim = ambient;
  if (dim == 0) {
    basis.vectors = ComplexMatrix::Zero(ambient, 0);
    return basis;
  }
  basis.vectors = random_unitary(rng, ambient).leftCols(dim);
  return basis;
}

// Hermitian psd matrix with a prescribed spectrum, conjugated by a random
// unitary.
inline HermitianMatrix random_psd_with_spectrum(
    Rng& rng, const std::vector<double>& spectrum) {
  const Eigen::Index n = static_cast<Eigen::Index>(spectrum.size());
  if (n < 1) throw InputError("random_psd_with_spectrum: empty spectrum");
  RealVector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(spectrum[static_cast<std::size_t>(i)] >= 0.0)) {
      throw InputError("random_psd_with_spectrum: spectrum must be >= 0");
    }
    lambda(i) = spectrum[static_cast<std::size_t>(i)];
  }
  const ComplexMatrix U = random_unitary(rng, n);
  return HermitianMatrix(U * lambda.asDiagonal() * U.adjoint());
}

// Hermitian psd matrix with the given rank: `rank` eigenvalues uniform in
// [lambda_lo, lambda_hi], the rest exactly zero.
inline HermitianMatrix random_psd(Rng& rng, Eigen::Index n, Eigen::Index rank,
                                  double lambda_lo = 0.5,
                                  double lambda_hi = 2.0) {
  if (rank < 0 || rank > n) throw InputError("random_psd: rank out of range");
  if (!(lambda_lo >= 0.0) || lambda_hi < lambda_lo) {
    throw InputError("random_psd: bad eigenvalue range");
  }
  std::vector<double> spectrum(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < rank; ++i) {
    spectrum[static_cast<std::size_t>(i)] =
        rng.uniform_right_closed(lambda_lo, lambda_hi);
  }
  return random_psd_with_spectrum(rng, spectrum);
}

// Subspace transversal to range(A): a graph {x + tilt * M x} over a random
// subspace of null(A), tilted into the ambient space.  The projection onto
// null(A) stays injective, so the result meets range(A) only at {0}.
inline SubspaceBasis random_transversal_subspace(Rng& rng,
                                                 const HermitianMatrix& A,
                                                 Eigen::Index dim,
                                                 double tilt = 0.25,
                                                 double rank_tol = kRankTol) {
  const SubspaceBasis null_A = nullspace(A.mat(), rank_tol);
  if (dim > null_A.dim()) {
    throw InputError(
        "random_transversal_subspace: dim exceeds the null space of A (no "
        "transversal subspace exists)");
  }
  SubspaceBasis basis;
  basis.ambient_dim = A.n();
  if (dim == 0) {
    basis.vectors = ComplexMatrix::Zero(A.n(), 0);
    return basis;
  }
  // Random dim-dimensional frame inside null(A).
  const ComplexMatrix mix = random_unitary(rng, null_A.dim()).leftCols(dim);
  const ComplexMatrix base = null_A.vectors * mix;
  // Tilt into range(A) and re-orthonormalize.
  const SubspaceBasis range_A = orthonormal_range(A.mat(), rank_tol);
  const ComplexMatrix noise =
      range_A.dim() > 0
          ? ComplexMatrix(range_A.projector() *
                          random_gaussian_matrix(rng, A.n(), dim))
          : ComplexMatrix::Zero(A.n(), dim);
  const SubspaceBasis tilted = orthonormal_range(base + tilt * noise, rank_tol);
  if (tilted.dim() != dim) {
    throw Error("random_transversal_subspace: tilt collapsed the subspace");
  }
  return tilted;
}

// ---------------------------------------------------------------------------
// Random weights
// ---------------------------------------------------------------------------

// Flat-Dirichlet weights: normalized standard exponentials.
inline std::vector<double> dirichlet_weights(Rng& rng, std::size_t k) {
  if (k == 0) throw InputError("dirichlet_weights: k must be >= 1");
  std::vector<double> w(k);
  double total = 0.0;
  for (double& v : w) {
    v = -std::log(1.0 - rng.uniform());  // Exp(1), strictly positive
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace pdmskit

#endif  // PDMSKIT_RNG_HPP
