// pdmskit -- positive-operator isometry constructions and moment
// experiments.
//
// build_WZ: given a psd matrix A and a subspace Z transversal to range(A),
// produce the partial isometry V with A V = sqrt(A (I - P_Z) A) =: D, check
// the defining identities, and report residuals.  V is the polar factor of
// (I - P_Z) A, which solves the factorization exactly: R(V) is orthogonal
// to Z, so A V = A (I - P_Z) V = D.
//
// Also here: Wold-type range analysis of partial isometries, minimal
// generator counts for Hermitian matrices, and Hankel double-positivity
// experiments for finite atomic measures.
#ifndef PDMSKIT_OPFACTORY_HPP
#define PDMSKIT_OPFACTORY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdmskit/errors.hpp"
#include "pdmskit/kernel.hpp"
#include "pdmskit/linalg.hpp"
#include "pdmskit/matrix.hpp"
#include "pdmskit/rng.hpp"

namespace pdmskit {

// ---------------------------------------------------------------------------
// W_Z construction
// ---------------------------------------------------------------------------

struct PositiveOperatorSpec {
  HermitianMatrix A;
  SubspaceBasis Z;
};

struct WZOptions {
  double tol = kSqrtTol;         // psd margins and identity resid.. budgets
  double rank_tol = kRankTol;    // range/kernel rank cuts
  double angle_tol = kAngleTol;  // transversality threshold (radians)
};

// Residuals are all scale-normalized; a correct construction drives every
// one of them to rounding level.
struct IsometryReport {
  ComplexMatrix V;    // partial isometry with A V = D
  HermitianMatrix D;  // principal sqrt of A (I - P_Z) A

  double av_psd = 0.0;             // (a) A V is psd
  double d_squared_identity = 0.0; // (b) D^2 = A (I - P_Z) A
  double range_identity = 0.0;     // (c) range(D) = A(Z-perp)
  double partial_isometry_defect = 0.0;  // (d) V V* V = V
  double complement_fixed = 0.0;   // (e) V fixes A((A-generated span of Z)-perp)
  double solve_residual = 0.0;     // ||A V - D|| (the factorization itself)
  double max_residual = 0.0;

  double transversality_angle = 0.0;  // smallest angle(Z, range(A)); pi/2 if Z = {0}
  Eigen::Index dim_Z = 0;
  Eigen::Index rank_A = 0;
  Eigen::Index dim_generated = 0;  // dim of the A-generated span of Z
  Eigen::Index dim_fixed = 0;      // dim of the subspace V must fix
};

inline double max_column_norm_diff(const ComplexMatrix& M,
                                   const ComplexMatrix& N) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    worst = std::max(worst, (M.col(j) - N.col(j)).norm());
  }
  return worst;
}

inline IsometryReport build_WZ(const HermitianMatrix& A,
                               const SubspaceBasis& Z,
                               const WZOptions& opts = {}) {
  const Eigen::Index n = A.n();
  if (Z.ambient_dim != n) {
    throw InputError("build_WZ: subspace ambient dimension mismatch");
  }
  Z.require_orthonormal();
  const PsdReport a_psd = is_psd(A, opts.tol);
  if (!a_psd.psd) {
    throw NotPsdError("build_WZ: A is not psd (lambda_min = " +
                          std::to_string(a_psd.lambda_min) + ")",
                      a_psd.lambda_min);
  }

  IsometryReport report;
  report.dim_Z = Z.dim();
  const SubspaceBasis range_A = orthonormal_range(A.mat(), opts.rank_tol);
  report.rank_A = range_A.dim();

  // Transversality: Z may touch range(A) only at {0}.  In particular a
  // nontrivial Z with invertible A is degenerate.
  report.transversality_angle = std::asin(1.0);
  if (Z.dim() > 0) {
    report.transversality_angle = smallest_principal_angle(Z, range_A);
    if (report.transversality_angle < opts.angle_tol) {
      throw DegeneracyError(
          "build_WZ: Z is not transversal to range(A) (principal angle = " +
              std::to_string(report.transversality_angle) + " rad)",
          report.transversality_angle);
    }
  }

  // Core construction: T = (I - P_Z) A, D = sqrt(T* T), V = polar factor.
  const ComplexMatrix P_Z = Z.projector();
  const ComplexMatrix T =
      (ComplexMatrix::Identity(n, n) - P_Z) * A.mat();
  const HermitianMatrix M = hermitian_part(A.mat() * T);  // A (I - P_Z) A
  // M is a triple product: cut its numerical kernel before the square root
  // so noise eigenvalues (~eps) cannot surface in D at sqrt(eps) scale.
  report.D = principal_sqrt(M, opts.tol, opts.rank_tol);
  const PolarDecomposition polar = polar_decompose(T, opts.rank_tol);
  report.V = polar.Q;

  // (a) A V is psd.
  const ComplexMatrix AV = A.mat() * report.V;
  const double av_scale = std::max(1.0, fro_norm(AV));
  const HermitianMatrix AV_h = hermitian_part(AV);
  const RealVector av_vals = eigenvalues(AV_h);
  report.av_psd =
      (HermitianMatrix::asymmetry(AV) + std::max(0.0, -av_vals(0))) /
      av_scale;

  // (b) D^2 reproduces A (I - P_Z) A.
  report.d_squared_identity =
      fro_norm(report.D.mat() * report.D.mat() - M.mat()) /
      std::max(1.0, fro_norm(M.mat()));

  // The factorization A V = D itself.
  report.solve_residual = fro_norm(AV - report.D.mat()) /
                          std::max(1.0, fro_norm(report.D.mat()));

  // (c) range(D) = A(Z-perp).  range(D) = range(D^2) = range(M), and M's
  // spectrum keeps the clean relative gap that D loses to the square root
  // (noise eigenvalues eps become sqrt(eps) in D).  The A(Z-perp) side uses
  // an absolute floor at the scale of A so a numerically-zero product cannot
  // contribute noise directions.
  const double a_scale = fro_norm(A.mat());
  const SubspaceBasis Z_perp =
      Z.dim() == 0 ? SubspaceBasis::full(n)
                   : nullspace(Z.vectors.adjoint(), opts.rank_tol);
  const SubspaceBasis range_D = orthonormal_range(M.mat(), opts.rank_tol);
  const SubspaceBasis a_zperp = orthonormal_range(
      A.mat() * Z_perp.vectors, opts.rank_tol, opts.rank_tol * a_scale);
  report.range_identity = projector_distance(range_D, a_zperp);

  // (d) V V* V = V.
  report.partial_isometry_defect =
      fro_norm(report.V * report.V.adjoint() * report.V - report.V) /
      std::max(1.0, fro_norm(report.V));

  // (e) V acts as the identity on A(E-perp), E = the A-generated span of Z.
  // E is A-invariant, so A compresses to a Hermitian operator on E-perp;
  // its eigendirections with honestly nonzero eigenvalue (cut at the scale
  // of A, not of the compression, which may be numerically zero) span
  // A(E-perp) and are exactly the directions V must fix.
  const SubspaceBasis E = krylov_basis(A, Z);
  report.dim_generated = E.dim();
  const SubspaceBasis E_perp =
      E.dim() == 0 ? SubspaceBasis::full(n)
                   : nullspace(E.vectors.adjoint(), opts.rank_tol);
  report.dim_fixed = 0;
  if (E_perp.dim() > 0) {
    const HermitianMatrix compressed = hermitian_part(
        E_perp.vectors.adjoint() * A.mat() * E_perp.vectors);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(compressed.mat());
    if (es.info() != Eigen::Success) {
      throw Error("build_WZ: eigendecomposition of the compression failed");
    }
    const double cut = opts.rank_tol * std::max(1.0, a_scale);
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()(i) > cut) ++kept;
    }
    if (kept > 0) {
      // Eigenvalues ascend, so the kept directions are the last columns.
      const ComplexMatrix fixed =
          E_perp.vectors * es.eigenvectors().rightCols(kept);
      report.dim_fixed = kept;
      report.complement_fixed =
          max_column_norm_diff(report.V * fixed, fixed);
    }
  }

  report.max_residual = std::max(
      {report.av_psd, report.d_squared_identity, report.range_identity,
       report.partial_isometry_defect, report.complement_fixed,
       report.solve_residual});
  return report;
}

inline IsometryReport build_WZ(const PositiveOperatorSpec& spec,
                               const WZOptions& opts = {}) {
  return build_WZ(spec.A, spec.Z, opts);
}

// ---------------------------------------------------------------------------
// Wold-type range analysis
// ---------------------------------------------------------------------------

// Range chain R(V) >= R(V^2) >= ... of a contraction: the chain stabilizes
// on the subspace where V acts unitarily (for a partial isometry, the
// unitary part of its decomposition); the rest is the pure part.  The
// fixed space N(V - I) always sits inside the unitary part; for the
// isometries produced by build_WZ the two coincide.
//   shift:   unitary part {0}, fixed space {0}, deficiency 1
//   unitary: unitary part = fixed chain = everything, deficiency 0
struct WoldReport {
  double norm = 0.0;                     // spectral norm of V
  double partial_isometry_defect = 0.0;  // input sanity residual
  std::vector<Eigen::Index> range_dims;  // dim R(V^k), k = 1, 2, ...
  SubspaceBasis unitary_part;            // stabilized range chain
  SubspaceBasis fixed_space;             // N(V - I)
  Eigen::Index pure_part_dim = 0;        // ambient minus unitary part
  Eigen::Index deficiency_dim = 0;       // dim R(V)-perp
  double unitary_defect = 0.0;  // how far V restricted there is from unitary
  double fixed_in_unitary_defect = 0.0;  // fixed space outside unitary part
};

inline WoldReport wold_analyze(const ComplexMatrix& V, double tol = kEigTol,
                               double rank_tol = kRankTol) {
  if (V.rows() != V.cols()) {
    throw InputError("wold_analyze: matrix must be square");
  }
  require_finite(V, "wold_analyze");
  WoldReport report;
  const Eigen::JacobiSVD<ComplexMatrix> svd(V);
  report.norm = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  if (report.norm > 1.0 + tol) {
    throw PreconditionError("wold_analyze: operator norm " +
                            std::to_string(report.norm) +
                            " exceeds 1; not a contraction");
  }
  report.partial_isometry_defect =
      fro_norm(V * V.adjoint() * V - V) / std::max(1.0, fro_norm(V));

  const RangeIntersection chain = stable_range_intersection(V, rank_tol);
  report.range_dims = chain.dims;
  report.unitary_part = chain.basis;
  report.pure_part_dim = V.rows() - chain.basis.dim();
  if (chain.basis.dim() > 0) {
    const ComplexMatrix VB = V * chain.basis.vectors;
    const ComplexMatrix G = VB.adjoint() * VB;
    const double iso_defect = max_abs(
        G - ComplexMatrix::Identity(G.rows(), G.cols()));
    const double stay_defect =
        projector_distance(orthonormal_range(VB, rank_tol), chain.basis);
    report.unitary_defect = std::max(iso_defect, stay_defect);
  }

  report.fixed_space = nullspace(
      V - ComplexMatrix::Identity(V.rows(), V.cols()), rank_tol);
  if (report.fixed_space.dim() > 0) {
    const ComplexMatrix outside =
        report.fixed_space.vectors -
        report.unitary_part.projector() * report.fixed_space.vectors;
    report.fixed_in_unitary_defect = outside.colwise().norm().maxCoeff();
  }

  const SubspaceBasis final_space = orthonormal_range(V, rank_tol);
  report.deficiency_dim = V.rows() - final_space.dim();
  return report;
}

// ---------------------------------------------------------------------------
// Minimal generator counts
// ---------------------------------------------------------------------------

// For a Hermitian A the minimal number of vectors whose A-generated span is
// the whole space equals the largest eigenvalue multiplicity (eigenvalues
// grouped within group_tol * max(1, spectral radius)).  The returned
// generator set is canonical: each eigengroup contributes an orthonormal
// basis built greedily from projected standard basis vectors, and the j-th
// generator sums the j-th basis vector of every group deep enough to have
// one.
struct GeneratorReport {
  Eigen::Index count = 0;
  std::vector<std::pair<double, Eigen::Index>> groups;  // (eigenvalue, size)
  ComplexMatrix generators;                             // n x count
};

inline GeneratorReport krylov_generators(const HermitianMatrix& A,
                                         double group_tol = 1e-8) {
  const EigenDecomposition ed = eig(A);
  const Eigen::Index n = A.n();
  GeneratorReport report;
  if (n == 0) return report;
  const double scale =
      std::max(1.0, std::max(std::abs(ed.values(0)),
                             std::abs(ed.values(n - 1))));

  // Group adjacent eigenvalues (ascending order makes this a linear scan).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;  // [begin, end)
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || ed.values(i) - ed.values(i - 1) > group_tol * scale) {
      spans.emplace_back(begin, i);
      begin = i;
    }
  }
  for (const auto& [b, e] : spans) {
    double mean = 0.0;
    for (Eigen::Index i = b; i < e; ++i) mean += ed.values(i);
    mean /= static_cast<double>(e - b);
    report.groups.emplace_back(mean, e - b);
    report.count = std::max(report.count, e - b);
  }

  // Canonical in-group bases from standard-basis probes.
  std::vector<ComplexMatrix> bases;
  bases.reserve(spans.size());
  for (const auto& [b, e] : spans) {
    const Eigen::Index m = e - b;
    const ComplexMatrix U = ed.vectors.middleCols(b, m);
    ComplexMatrix basis(n, m);
    Eigen::Index got = 0;
    for (Eigen::Index probe = 0; probe < n && got < m; ++probe) {
      ComplexVector v = U * U.adjoint().col(probe);  // project e_probe
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < got; ++j) {
          v -= basis.col(j) * basis.col(j).dot(v);
        }
      }
      const double norm = v.norm();
      if (norm > 1e-6) basis.col(got++) = v / norm;
    }
    // Fallback: complete from the eigenvector columns (cannot trigger for
    // sane spectra, but keeps the construction total).
    for (Eigen::Index c = 0; c < m && got < m; ++c) {
      ComplexVector v = U.col(c);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < got; ++j) {
          v -= basis.col(j) * basis.col(j).dot(v);
        }
      }
      const double norm = v.norm();
      if (norm > 1e-8) basis.col(got++) = v / norm;
    }
    bases.push_back(basis.leftCols(got));
  }

  report.generators = ComplexMatrix::Zero(n, report.count);
  for (Eigen::Index j = 0; j < report.count; ++j) {
    ComplexVector g = ComplexVector::Zero(n);
    for (const ComplexMatrix& basis : bases) {
      if (j < basis.cols()) g += basis.col(j);
    }
    report.generators.col(j) = g / g.norm();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Moments and Hankel sections
// ---------------------------------------------------------------------------

// Finite atomic measure sum_i weights[i] * point-mass(atoms[i]) on the real
// line; atoms must be distinct and weights strictly positive.
struct MeasureSpec {
  std::vector<double> atoms;
  std::vector<double> weights;
};

inline void validate_measure(const MeasureSpec& mu) {
  if (mu.atoms.size() != mu.weights.size()) {
    throw InputError("measure: atoms and weights must have equal length");
  }
  if (mu.atoms.empty()) throw InputError("measure: needs at least one atom");
  for (double a : mu.atoms) {
    if (!std::isfinite(a)) throw InputError("measure: non-finite atom");
  }
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < mu.atoms.size(); ++j) {
      if (mu.atoms[i] == mu.atoms[j]) {
        throw InputError("measure: atoms must be distinct");
      }
    }
  }
  for (double w : mu.weights) {
    if (!std::isfinite(w) || w <= 0.0) {
      throw InputError("measure: weights must be finite and positive");
    }
  }
}

// Atomic measure with k atoms uniform in (1e-3, 1] and Dirichlet weights;
// such measures are doubly positive at every Hankel size.
inline MeasureSpec random_measure(Rng& rng, std::size_t k) {
  MeasureSpec mu;
  mu.atoms.resize(k);
  for (double& a : mu.atoms) a = rng.uniform_right_closed(1e-3, 1.0);
  mu.weights = dirichlet_weights(rng, k);
  return mu;
}

// c_k = sum_i w_i t_i^k for k = 0, ..., count-1.
inline std::vector<double> moments_from_measure(const MeasureSpec& mu,
                                                std::size_t count) {
  validate_measure(mu);
  if (count == 0) throw InputError("moments_from_measure: count must be >= 1");
  std::vector<double> moments(count, 0.0);
  for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
    double power = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
      moments[k] += mu.weights[i] * power;
      power *= mu.atoms[i];
    }
  }
  return moments;
}

// N x N Hankel section [c_{i+j+shift}] (0-based i, j); shift 0 gives the
// moment matrix, shift 1 the section of the multiplication-by-t operator.
inline HermitianMatrix hankel_matrix(const std::vector<double>& moments,
                                     Index N, Index shift = 0) {
  if (N == 0) throw InputError("hankel_matrix: N must be >= 1");
  if (moments.size() < 2 * N - 1 + shift) {
    throw InputError("hankel_matrix: needs at least " +
                     std::to_string(2 * N - 1 + shift) + " moments, got " +
                     std::to_string(moments.size()));
  }
  ComplexMatrix H(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < N; ++j) {
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          Complex(moments[i + j + shift], 0.0);
    }
  }
  return HermitianMatrix(H, HermitianMatrix::AlreadyHermitian{});
}

// Double positivity at size N: both [c_{i+j}] and [c_{i+j+1}] psd.  Measures
// supported in [0, infinity) pass both; mass at negative points breaks the
// shifted section once N sees enough moments.
struct HankelReport {
  Index N = 0;
  PsdReport base;
  PsdReport shifted;
  bool doubly_positive = false;
};

inline HankelReport hankel_double_positivity(const std::vector<double>& moments,
                                             Index N, double tol = kEigTol) {
  HankelReport report;
  report.N = N;
  report.base = is_psd(hankel_matrix(moments, N, 0), tol);
  report.shifted = is_psd(hankel_matrix(moments, N, 1), tol);
  report.doubly_positive = report.base.psd && report.shifted.psd;
  return report;
}

// Rank saturation of moment Hankel sections: for a measure with k atoms the
// numerical rank of [c_{i+j}] saturates at k, matching the cyclic dimension
// of the associated multiplication operator.
struct HankelRankReport {
  std::vector<Index> windows;
  std::vector<Eigen::Index> ranks;
  Eigen::Index saturation_rank = 0;
  bool saturated = false;  // rank stalled before the largest window
  Eigen::Index atom_count = 0;
};

inline HankelRankReport hankel_rank_saturation(
    const MeasureSpec& mu, const std::vector<Index>& windows,
    double rank_tol = 1e-9) {
  validate_measure(mu);
  if (windows.empty()) {
    throw InputError("hankel_rank_saturation: needs windows");
  }
  HankelRankReport report;
  report.windows = windows;
  std::sort(report.windows.begin(), report.windows.end());
  report.atom_count = static_cast<Eigen::Index>(mu.atoms.size());
  const Index max_window = report.windows.back();
  const std::vector<double> moments =
      moments_from_measure(mu, 2 * max_window);
  for (Index N : report.windows) {
    const RealVector vals = eigenvalues(hankel_matrix(moments, N, 0));
    const double cut =
        rank_tol * std::max(1.0, std::abs(vals(vals.size() - 1)));
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      if (std::abs(vals(i)) > cut) ++rank;
    }
    report.ranks.push_back(rank);
  }
  report.saturation_rank = report.ranks.back();
  report.saturated =
      report.ranks.size() >= 2 &&
      report.ranks[report.ranks.size() - 2] == report.saturation_rank;
  return report;
}

// Generator count of a Hankel section compressed to its numerical range.
// The compression drops directions whose singular value falls below
// rank_tol * sigma_max; rank_tol must dominate the eigenvalue-grouping
// tolerance, otherwise the cluster of near-zero eigenvalues that every
// ill-conditioned moment matrix carries would masquerade as a large
// eigenspace.
struct HankelGeneratorReport {
  Eigen::Index rank = 0;       // dim of the numerical range
  GeneratorReport generators;  // of the compressed section
};

inline HankelGeneratorReport hankel_generator_count(
    const std::vector<double>& moments, Index N, double rank_tol = 1e-6,
    double group_tol = 1e-8) {
  const HermitianMatrix H = hankel_matrix(moments, N, 0);
  const SubspaceBasis range = orthonormal_range(H.mat(), rank_tol);
  HankelGeneratorReport report;
  report.rank = range.dim();
  if (range.dim() == 0) return report;
  const ComplexMatrix compressed =
      range.vectors.adjoint() * H.mat() * range.vectors;
  report.generators = krylov_generators(hermitian_part(compressed), group_tol);
  return report;
}

// Batch experiment: random atomic measures on (0, 1], their N x N moment
// Hankel sections compressed to the numerical range, and the observed
// generator counts.  Per-trial seeds derive deterministically from the
// master seed, so the report is reproducible and schedule-independent.
struct HankelTrialResult {
  std::size_t atom_count = 0;
  Eigen::Index rank = 0;
  Eigen::Index generator_count = 0;
};

struct MultiplicityExperimentReport {
  std::size_t trials = 0;
  Index N = 0;
  std::uint64_t seed = 0;
  std::size_t max_atoms = 0;
  std::vector<HankelTrialResult> per_trial;
  Eigen::Index max_generators = 0;
};

inline MultiplicityExperimentReport hankel_multiplicity_experiment(
    std::size_t trials, Index N, std::uint64_t seed,
    std::size_t max_atoms = 6, double rank_tol = 1e-6,
    double group_tol = 1e-8) {
  if (trials == 0) {
    throw InputError("hankel_multiplicity_experiment: trials must be >= 1");
  }
  if (N == 0 || N > 32) {
    throw InputError(
        "hankel_multiplicity_experiment: N must be between 1 and 32");
  }
  if (max_atoms == 0) {
    throw InputError("hankel_multiplicity_experiment: max_atoms must be >= 1");
  }
  MultiplicityExperimentReport report;
  report.trials = trials;
  report.N = N;
  report.seed = seed;
  report.max_atoms = max_atoms;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1));
    const std::size_t k = 1 + static_cast<std::size_t>(
                                  rng.raw() % static_cast<std::uint64_t>(max_atoms));
    const MeasureSpec mu = random_measure(rng, k);
    const std::vector<double> moments = moments_from_measure(mu, 2 * N);
    const HankelGeneratorReport hg =
        hankel_generator_count(moments, N, rank_tol, group_tol);
    report.per_trial.push_back(
        HankelTrialResult{k, hg.rank, hg.generators.count});
    report.max_generators =
        std::max(report.max_generators, hg.generators.count);
  }
  return report;
}

// Truncated unilateral shift: S e_i = e_{i+1}, S e_N = 0.
inline ComplexMatrix shift_matrix(Eigen::Index N) {
  if (N < 1) throw InputError("shift_matrix: N must be >= 1");
  ComplexMatrix S = ComplexMatrix::Zero(N, N);
  for (Eigen::Index i = 0; i + 1 < N; ++i) S(i + 1, i) = Complex(1.0, 0.0);
  return S;
}

}  // namespace pdmskit

#endif  // PDMSKIT_OPFACTORY_HPP
