// pdmskit -- kernel square roots and boundedness certificates.
//
// Finite-window machinery for the root equation (R * R)(x,z) =
// sum_y R(x,y) R(y,z) = K(x,z): principal roots of Gram sections, certified
// verification of root candidates, top-eigenvalue growth certificates for
// root uniqueness, block-diagonal factorizations, and the two classical
// domination checks (trace and bounded-entry scaling).
#ifndef PDMSKIT_PDMS_HPP
#define PDMSKIT_PDMS_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmskit/corpus.hpp"
#include "pdmskit/errors.hpp"
#include "pdmskit/kernel.hpp"
#include "pdmskit/linalg.hpp"
#include "pdmskit/matrix.hpp"

namespace pdmskit {

inline constexpr double kDefaultCap = 1e6;
inline constexpr double kDefaultStallTol = 1e-3;

// Window labels for derived dense kernels: reuse the operand's labels when
// it is dense, positional labels otherwise.
inline std::vector<std::string> window_labels(const Kernel& K, Index n) {
  if (const auto* dense = dynamic_cast<const DenseKernel*>(&K.node())) {
    return std::vector<std::string>(dense->labels().begin(),
                                    dense->labels().begin() +
                                        static_cast<std::ptrdiff_t>(n));
  }
  return default_labels(n);
}

// ---------------------------------------------------------------------------
// Finite principal roots
// ---------------------------------------------------------------------------

struct RootReport {
  Kernel root;     // dense Hermitian psd section root
  Window window;   // the section the root was computed on
  PsdReport gram_psd;  // positivity report of the input section
  double lambda_min_root = 0.0;
  double residual = 0.0;   // ||R^2 - G||_F / max(1, ||G||_F)
  bool self_adjoint = true;  // the principal root is Hermitian by construction
};

// Principal square root of the window section: the unique psd R with
// R^2 = gram(K, w).  Throws NotPsdError when the section is not psd.
inline RootReport root_finite(const Kernel& K, const Window& w,
                              double tol = kSqrtTol) {
  const HermitianMatrix G = gram(K, w);
  const HermitianMatrix R = principal_sqrt(G, tol);
  const EigenDecomposition ed = eig(R);
  const double residual =
      fro_norm(R.mat() * R.mat() - G.mat()) / std::max(1.0, fro_norm(G.mat()));
  RootReport report{
      Kernel(std::make_shared<DenseKernel>(window_labels(K, w.size), R.mat(),
                                           true)),
      w, is_psd(G, tol), ed.values.minCoeff(), residual, true};
  return report;
}

// ---------------------------------------------------------------------------
// Certified verification of root candidates
// ---------------------------------------------------------------------------

// Certificate that (R* * R) matches K on the window.  The tolerance is
// split half/half: the convolution's neglected series must stay within
// tol/2 (certified via declared row tails) and the evaluated discrepancy
// plus generator evaluation error must cover the other half.
struct RootVerification {
  bool ok = false;
  double discrepancy = 0.0;    // max |(R* * R)(x,z) - K(x,z)| over the window
  double max_eval_error = 0.0; // propagated generator enclosure widths
  double max_tail = 0.0;       // certified neglected-series bound
  double tail_budget = 0.0;
  double value_budget = 0.0;
  double certified_gap = 0.0;  // discrepancy + max_eval_error + max_tail
};

inline RootVerification verify_root(const Kernel& K, const Kernel& R,
                                    const Window& w, double tol = kSqrtTol) {
  RootVerification v;
  v.tail_budget = tol / 2.0;
  v.value_budget = tol / 2.0;
  const ConvolutionResult conv = convolve(adjoint(R), R, w, v.tail_budget);
  v.max_tail = conv.max_tail;
  double disc = 0.0;
  double err = conv.eval_error_bounds.maxCoeff();
  for (Index x = 1; x <= w.size; ++x) {
    for (Index z = 1; z <= w.size; ++z) {
      const Complex got = conv.kernel.node().eval(x, z);
      const Complex want = K.node().eval(x, z);
      disc = std::max(disc, std::abs(got - want));
      err = std::max(err, K.node().eval_error(x, z));
    }
  }
  v.discrepancy = disc;
  v.max_eval_error = err;
  v.certified_gap = v.discrepancy + v.max_eval_error + v.max_tail;
  v.ok = v.certified_gap <= tol;
  return v;
}

// ---------------------------------------------------------------------------
// Uniqueness certificates from top-eigenvalue growth
// ---------------------------------------------------------------------------

// Root uniqueness is equivalent to uniform boundedness of the window top
// eigenvalues.  The certificate samples lambda_max on a ladder of windows
// and reports one of three verdicts:
//   bounded-below-cap -- a finite kernel fully covered, or sampled growth
//                        stalled below the cap;
//   exceeded-cap      -- some window's top eigenvalue exceeds the cap;
//   inconclusive      -- neither observation certifies anything.
struct BoundednessCertificate {
  std::vector<Index> windows;
  std::vector<double> bounds;  // lambda_max per window, nondecreasing
  double cap = kDefaultCap;
  double stall_tol = kDefaultStallTol;
  std::string verdict;
  std::string reason;
};

inline BoundednessCertificate uniqueness_bound(
    const Kernel& K, std::vector<Index> windows, double cap = kDefaultCap,
    double stall_tol = kDefaultStallTol) {
  if (windows.empty()) {
    throw InputError("uniqueness_bound: needs at least one window");
  }
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  if (windows.front() == 0) {
    throw InputError("uniqueness_bound: windows are 1-based");
  }
  if (cap <= 0.0) throw InputError("uniqueness_bound: cap must be positive");

  BoundednessCertificate cert;
  cert.windows = windows;
  cert.cap = cap;
  cert.stall_tol = stall_tol;
  for (Index N : windows) {
    const RealVector evs = eigenvalues(gram(K, Window(N)));
    cert.bounds.push_back(evs.maxCoeff());
  }

  for (std::size_t i = 0; i < cert.bounds.size(); ++i) {
    if (cert.bounds[i] > cap) {
      cert.verdict = "exceeded-cap";
      cert.reason = "window " + std::to_string(cert.windows[i]) +
                    " has top eigenvalue above the cap";
      return cert;
    }
  }
  if (K.extent() && windows.back() >= *K.extent()) {
    cert.verdict = "bounded-below-cap";
    cert.reason = "the full finite section stays below the cap";
    return cert;
  }
  if (cert.bounds.size() >= 2) {
    const double prev = cert.bounds[cert.bounds.size() - 2];
    const double last = cert.bounds.back();
    if (last - prev <= stall_tol * std::max(1.0, std::abs(prev))) {
      cert.verdict = "bounded-below-cap";
      cert.reason = "top-eigenvalue growth stalled below the cap";
      return cert;
    }
    cert.verdict = "inconclusive";
    cert.reason = "top eigenvalues still growing at the largest window";
    return cert;
  }
  cert.verdict = "inconclusive";
  cert.reason = "a single window of a countable kernel certifies nothing";
  return cert;
}

// ---------------------------------------------------------------------------
// Blockwise roots
// ---------------------------------------------------------------------------

// Root of a window section computed per sparsity component: the section is
// permuted to block-diagonal form (up to entries below zero_tol), each block
// gets its principal root, and the blocks are scattered back.  Agrees with
// root_finite on exactly block-diagonal kernels.  Blocks are ordered by
// their smallest contained index, so the report is schedule-independent.
struct BlockRoot {
  std::vector<Index> indices;  // window indices of this component (1-based)
  RootReport report;           // principal root of the component's section
};

struct DecompositionReport {
  std::vector<BlockRoot> blocks;
  double off_block_max = 0.0;  // largest |G(i,j)| across distinct components
  Kernel root;                 // blocks scattered back into the full window
  double residual = 0.0;       // ||R^2 - G||_F / max(1, ||G||_F)
};

inline DecompositionReport blockwise_root(const Kernel& K, const Window& w,
                                          double zero_tol = kZeroTol,
                                          double tol = kSqrtTol) {
  const HermitianMatrix G = gram(K, w);
  const auto components = sparsity_components(K, w, zero_tol);
  const std::vector<std::string> labels = window_labels(K, w.size);
  std::vector<BlockRoot> blocks;
  ComplexMatrix R = ComplexMatrix::Zero(G.mat().rows(), G.mat().cols());
  for (const auto& comp : components) {
    const Eigen::Index m = static_cast<Eigen::Index>(comp.size());
    ComplexMatrix block(m, m);
    std::vector<std::string> block_labels;
    for (Eigen::Index i = 0; i < m; ++i) {
      block_labels.push_back(
          labels[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)] - 1)]);
      for (Eigen::Index j = 0; j < m; ++j) {
        block(i, j) =
            G.mat()(static_cast<Eigen::Index>(comp[static_cast<std::size_t>(i)] - 1),
                    static_cast<Eigen::Index>(comp[static_cast<std::size_t>(j)] - 1));
      }
    }
    const Kernel block_kernel(std::make_shared<DenseKernel>(
        block_labels, hermitian_part(block).mat(), true));
    RootReport block_report =
        root_finite(block_kernel, Window(static_cast<Index>(m)), tol);
    const auto* root_dense =
        dynamic_cast<const DenseKernel*>(&block_report.root.node());
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        R(static_cast<Eigen::Index>(comp[static_cast<std::size_t>(i)] - 1),
          static_cast<Eigen::Index>(comp[static_cast<std::size_t>(j)] - 1)) =
            root_dense->entries()(i, j);
      }
    }
    blocks.push_back(BlockRoot{comp, std::move(block_report)});
  }
  // Largest entry the block model discards: pairs in distinct components.
  std::vector<std::size_t> component_of(w.size + 1, 0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (Index i : components[c]) component_of[i] = c;
  }
  double off_block = 0.0;
  for (Index x = 1; x <= w.size; ++x) {
    for (Index y = x + 1; y <= w.size; ++y) {
      if (component_of[x] != component_of[y]) {
        off_block = std::max(
            off_block, std::abs(G.mat()(static_cast<Eigen::Index>(x - 1),
                                        static_cast<Eigen::Index>(y - 1))));
      }
    }
  }
  const double residual =
      fro_norm(R * R - G.mat()) / std::max(1.0, fro_norm(G.mat()));
  return DecompositionReport{
      std::move(blocks), off_block,
      Kernel(std::make_shared<DenseKernel>(labels, R, true)), residual};
}

// ---------------------------------------------------------------------------
// Domination checks
// ---------------------------------------------------------------------------

// Entry-bounded kernels are dominated by a scaled square-diagonal: if
// |K| <= c then K << c (pi^2/6) diag(n^2), because
// (sum |v_n|)^2 <= (pi^2/6) sum n^2 |v_n|^2.  Verifies the window section.
struct DominationReport {
  double sup_bound = 0.0;  // c with |K| <= c on the window
  double constant = 0.0;   // c * pi^2 / 6
  PsdReport psd;           // of constant * diag(n^2) - gram(K)
  bool holds = false;
};

inline DominationReport schur_domination_check(
    const Kernel& K, const Window& w,
    std::optional<double> sup_bound = std::nullopt, double tol = kEigTol) {
  DominationReport report;
  if (sup_bound) {
    report.sup_bound = *sup_bound;
  } else if (const auto s = K.node().sup_abs()) {
    report.sup_bound = *s;
  } else {
    throw InputError(
        "schur_domination_check: kernel declares no entry bound; pass one "
        "explicitly");
  }
  if (report.sup_bound < 0.0) {
    throw InputError("schur_domination_check: entry bound must be >= 0");
  }
  constexpr double kPiSqOver6 = 1.6449340668482264364724152;
  report.constant = report.sup_bound * kPiSqOver6;
  const HermitianMatrix G = gram(K, w);
  const double seen = max_abs(G.mat());
  if (seen > report.sup_bound * (1.0 + 1e-12) + 1e-15) {
    throw PreconditionError(
        "schur_domination_check: window entry of magnitude " +
        std::to_string(seen) + " exceeds the declared bound " +
        std::to_string(report.sup_bound));
  }
  ComplexMatrix M = -G.mat();
  for (Index n = 1; n <= w.size; ++n) {
    const Eigen::Index i = static_cast<Eigen::Index>(n - 1);
    M(i, i) += Complex(report.constant * static_cast<double>(n) *
                           static_cast<double>(n),
                       0.0);
  }
  report.psd = is_psd(HermitianMatrix(M, HermitianMatrix::AlreadyHermitian{}),
                      tol);
  report.holds = report.psd.psd;
  return report;
}

// Trace-dominated kernels sit below the identity: a psd section with
// trace <= 1 has lambda_max <= 1, i.e. K << delta on the window.
struct TraceDominationReport {
  double trace = 0.0;
  double lambda_max = 0.0;
  bool trace_at_most_one = false;
  PsdReport delta_psd;  // of identity - gram(K)
  bool holds = false;
};

inline TraceDominationReport trace_domination_check(const Kernel& K,
                                                    const Window& w,
                                                    double tol = kEigTol) {
  TraceDominationReport report;
  const HermitianMatrix G = gram(K, w);
  report.trace = G.mat().real().trace();
  report.trace_at_most_one = report.trace <= 1.0 + tol;
  if (!report.trace_at_most_one) {
    throw PreconditionError("trace_domination_check: window trace " +
                            std::to_string(report.trace) + " exceeds 1");
  }
  report.lambda_max = eigenvalues(G).maxCoeff();
  ComplexMatrix M = ComplexMatrix::Identity(G.mat().rows(), G.mat().cols()) -
                    G.mat();
  report.delta_psd =
      is_psd(HermitianMatrix(M, HermitianMatrix::AlreadyHermitian{}), tol);
  report.holds = report.trace_at_most_one && report.delta_psd.psd;
  return report;
}

// ---------------------------------------------------------------------------
// Root existence diagnostics
// ---------------------------------------------------------------------------

// Normalized late-row probe: how strongly indices beyond a prefix still
// couple back into the prefix.  For each prefix F the value is
//   max_{y in (F, N]} max_{z <= F} |K(y,z)| / sqrt(lambda_max(gram(K, N))),
// i.e. the largest inner product of a normalized late canonical probe row
// with the early part of the window.  Rows of kernels with square-summable
// roots must let this decay; a flat curve is advisory evidence against one.
struct ProbePoint {
  Index prefix = 0;
  double value = 0.0;
};

inline std::vector<ProbePoint> late_row_probe(const Kernel& K,
                                              const Window& w) {
  const HermitianMatrix G = gram(K, w);
  const double lambda_max = eigenvalues(G).maxCoeff();
  const double scale = lambda_max > 0.0 ? std::sqrt(lambda_max) : 1.0;
  std::vector<ProbePoint> curve;
  for (Index prefix = 1; prefix < w.size; prefix *= 2) {
    double worst = 0.0;
    for (Index y = prefix + 1; y <= w.size; ++y) {
      for (Index z = 1; z <= prefix; ++z) {
        worst = std::max(
            worst, std::abs(G.mat()(static_cast<Eigen::Index>(y - 1),
                                    static_cast<Eigen::Index>(z - 1))));
      }
    }
    curve.push_back(ProbePoint{prefix, worst / scale});
  }
  return curve;
}

// Advisory verdict on whether K admits a square-summable root kernel,
// combining finite-section facts, generator declarations, the boundedness
// certificate, and windowed row evidence (square-summability partial sums,
// the dyadic decay envelope of the first row, and the late-row probe).
struct ExistenceReport {
  std::string verdict;  // root-exists | no-root | inconclusive
  std::string basis;    // deterministic one-line justification
  bool finite = false;
  BoundednessCertificate certificate;
  Ell2RowsReport rows;
  std::vector<C0Bracket> c0_envelope;  // dyadic sup envelope of row 1
  std::vector<ProbePoint> probe_decay;
};

inline ExistenceReport root_existence_diagnostic(
    const Kernel& K, const std::vector<Index>& windows,
    double cap = kDefaultCap, double stall_tol = kDefaultStallTol) {
  ExistenceReport report;
  report.finite = K.extent().has_value();
  report.certificate = uniqueness_bound(K, windows, cap, stall_tol);
  const Window w(*std::max_element(windows.begin(), windows.end()));
  report.rows = is_ell2_rows(K, w);
  report.c0_envelope = c0_row_profile(K, 1, w);
  report.probe_decay = late_row_probe(K, w);
  if (report.finite) {
    report.verdict = "root-exists";
    report.basis = "finite kernel: the principal root of the full section";
    return report;
  }
  const RootMeta meta = K.node().root_meta();
  switch (meta.existence) {
    case RootMeta::Existence::Exists:
      report.verdict = "root-exists";
      report.basis = meta.note;
      return report;
    case RootMeta::Existence::NotExists:
      report.verdict = "no-root";
      report.basis = meta.note;
      return report;
    case RootMeta::Existence::Unknown:
      break;
  }
  // Flat first-row envelope on a bounded kernel: the necessary
  // vanishing-row condition visibly fails on this window.
  if (report.c0_envelope.size() >= 2) {
    const double first = report.c0_envelope.front().sup_abs;
    const double last = report.c0_envelope.back().sup_abs;
    if (first > 0.0 && last >= 0.9 * first) {
      report.verdict = "no-root";
      report.basis =
          "first row shows no decay across the window "
          "(vanishing-row necessary condition fails at this scale)";
      return report;
    }
  }
  report.verdict = "inconclusive";
  report.basis = "no structural declaration; window evidence only";
  return report;
}

}  // namespace pdmskit

#endif  // PDMSKIT_PDMS_HPP
