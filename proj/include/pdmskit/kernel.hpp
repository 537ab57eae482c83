// pdmskit -- kernel data model and kernel algebra.
//
// A Kernel is an immutable value describing a complex function K(x,y) on
// pairs from a countable index set, evaluated here on explicit finite
// windows.  Three families of nodes exist:
//
//   * dense     -- a finite labeled matrix (the only family with an extent);
//   * builtin   -- generator-backed countable kernels (see corpus.hpp);
//   * composite -- lazy algebra nodes (rescale, hadamard, sum, adjoint).
//
// Countable nodes may declare a row-tail bound beta(x, N) certifying
// sum_{y>N} |K(x,y)|^2 <= beta(x,N); convolution refuses operands without
// one rather than silently truncating.  Indices are 1-based throughout.
#ifndef PDMSKIT_KERNEL_HPP
#define PDMSKIT_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdmskit/errors.hpp"
#include "pdmskit/linalg.hpp"
#include "pdmskit/matrix.hpp"
#include "pdmskit/union_find.hpp"

namespace pdmskit {

using Index = std::size_t;  // 1-based kernel index

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

// A finite truncation window over the index set {1, ..., size}.  The tail
// policy records whether series truncated at the window edge must come with
// certified bounds (convolution always requires them for countable data).
struct Window {
  enum class TailPolicy { Ignore, BoundRequired };

  Index size = 1;
  TailPolicy policy = TailPolicy::Ignore;

  explicit Window(Index n, TailPolicy p = TailPolicy::Ignore)
      : size(n), policy(p) {
    if (n == 0) throw InputError("Window: size must be at least 1");
  }
};

// ---------------------------------------------------------------------------
// Kernel nodes
// ---------------------------------------------------------------------------

// Existence metadata a generator may carry about its (infinite-index) root
// theory; consumed by the advisory diagnostics only.
struct RootMeta {
  enum class Existence { Unknown, Exists, NotExists };
  Existence existence = Existence::Unknown;
  std::string note;  // short deterministic phrase for reports
};

class KernelNode {
 public:
  enum class Kind { Dense, Builtin, Composite };

  virtual ~KernelNode() = default;

  virtual Kind kind() const = 0;

  // Number of indices for finite (dense) kernels; nullopt for countable.
  virtual std::optional<Index> extent() const = 0;

  // Whether K(y,x) == conj(K(x,y)) holds exactly for all evaluated pairs.
  virtual bool hermitian() const = 0;

  // K(x,y); callers validate index ranges via pdmskit::evaluate.
  virtual Complex eval(Index x, Index y) const = 0;

  // Certified bound on |stored - true| for generators that truncate series;
  // 0 for exact evaluation.
  virtual double eval_error(Index /*x*/, Index /*y*/) const { return 0.0; }

  // Certified lower bound on the true (real) value of K(x,y); meaningful for
  // real-valued kernels.  Generators with one-sided tail information can
  // tighten the default value - eval_error.
  virtual double certified_lower(Index x, Index y) const {
    return eval(x, y).real() - eval_error(x, y);
  }

  // Declared bound on sum_{y>N} |K(x,y)|^2, or nullopt when none exists.
  virtual std::optional<double> row_tail_sq(Index x, Index N) const = 0;

  // sup_{x,y} |K(x,y)| when the generator knows it.
  virtual std::optional<double> sup_abs() const { return std::nullopt; }

  virtual RootMeta root_meta() const { return {}; }
};

// Helper base for Hermitian nodes: derived classes implement the upper
// triangle only and the mirror identity K(y,x) = conj(K(x,y)) holds exactly
// by construction.
class HermitianKernelNode : public KernelNode {
 public:
  bool hermitian() const final { return true; }

  Complex eval(Index x, Index y) const final {
    return x <= y ? eval_upper(x, y) : std::conj(eval_upper(y, x));
  }

  double eval_error(Index x, Index y) const final {
    return x <= y ? eval_error_upper(x, y) : eval_error_upper(y, x);
  }

  double certified_lower(Index x, Index y) const final {
    return x <= y ? certified_lower_upper(x, y) : certified_lower_upper(y, x);
  }

 protected:
  virtual Complex eval_upper(Index x, Index y) const = 0;  // requires x <= y
  virtual double eval_error_upper(Index /*x*/, Index /*y*/) const {
    return 0.0;
  }
  virtual double certified_lower_upper(Index x, Index y) const {
    return eval_upper(x, y).real() - eval_error_upper(x, y);
  }
};

// ---------------------------------------------------------------------------
// Kernel value handle
// ---------------------------------------------------------------------------

class Kernel {
 public:
  explicit Kernel(std::shared_ptr<const KernelNode> node)
      : node_(std::move(node)) {
    if (!node_) throw InputError("Kernel: null node");
  }

  const KernelNode& node() const { return *node_; }
  std::shared_ptr<const KernelNode> share() const { return node_; }

  KernelNode::Kind kind() const { return node_->kind(); }
  std::optional<Index> extent() const { return node_->extent(); }
  bool hermitian() const { return node_->hermitian(); }

 private:
  std::shared_ptr<const KernelNode> node_;
};

// ---------------------------------------------------------------------------
// Dense kernels
// ---------------------------------------------------------------------------

inline std::vector<std::string> default_labels(Index n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (Index i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return labels;
}

// Finite kernel over a labeled index set.  The Hermitian flavor symmetrizes
// at construction so the conjugate-symmetry identity holds bitwise; the
// general flavor exists for adjoint/convolution algebra and cannot be used
// where positive definiteness is involved.
class DenseKernel : public KernelNode {
 public:
  DenseKernel(std::vector<std::string> labels, const ComplexMatrix& entries,
              bool enforce_hermitian)
      : labels_(std::move(labels)) {
    if (entries.rows() != entries.cols()) {
      throw InputError("DenseKernel: entries must be square");
    }
    if (static_cast<Index>(entries.rows()) != labels_.size()) {
      throw InputError("DenseKernel: label count must match matrix size");
    }
    for (Index i = 0; i < labels_.size(); ++i) {
      for (Index j = i + 1; j < labels_.size(); ++j) {
        if (labels_[i] == labels_[j]) {
          throw InputError("DenseKernel: duplicate label '" + labels_[i] +
                           "'");
        }
      }
    }
    require_finite(entries, "DenseKernel");
    if (enforce_hermitian) {
      entries_ = HermitianMatrix(entries).mat();
      hermitian_ = true;
    } else {
      entries_ = entries;
      hermitian_ = HermitianMatrix::asymmetry(entries) == 0.0;
    }
    sup_abs_ = max_abs(entries_);
  }

  Kind kind() const override { return Kind::Dense; }
  std::optional<Index> extent() const override { return labels_.size(); }
  bool hermitian() const override { return hermitian_; }

  Complex eval(Index x, Index y) const override {
    return entries_(static_cast<Eigen::Index>(x - 1),
                    static_cast<Eigen::Index>(y - 1));
  }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    // Exact: only finitely many entries exist beyond the window.
    double sum = 0.0;
    for (Index y = N + 1; y <= labels_.size(); ++y) {
      sum += std::norm(eval(x, y));
    }
    return sum;
  }

  std::optional<double> sup_abs() const override { return sup_abs_; }

  const std::vector<std::string>& labels() const { return labels_; }
  const ComplexMatrix& entries() const { return entries_; }

 private:
  std::vector<std::string> labels_;
  ComplexMatrix entries_;
  bool hermitian_ = false;
  double sup_abs_ = 0.0;
};

// Hermitian dense kernel with auto-generated positional labels.
inline Kernel dense_kernel(const ComplexMatrix& entries) {
  return Kernel(std::make_shared<DenseKernel>(
      default_labels(static_cast<Index>(entries.rows())), entries, true));
}

inline Kernel dense_kernel(std::vector<std::string> labels,
                           const ComplexMatrix& entries) {
  return Kernel(
      std::make_shared<DenseKernel>(std::move(labels), entries, true));
}

// General (possibly non-Hermitian) dense kernel; for algebra experiments.
inline Kernel dense_kernel_general(const ComplexMatrix& entries) {
  return Kernel(std::make_shared<DenseKernel>(
      default_labels(static_cast<Index>(entries.rows())), entries, false));
}

// ---------------------------------------------------------------------------
// Evaluation and Gram sections
// ---------------------------------------------------------------------------

inline void require_in_range(const Kernel& K, Index x, const char* who) {
  if (x == 0) throw InputError(std::string(who) + ": indices are 1-based");
  if (K.extent() && x > *K.extent()) {
    throw InputError(std::string(who) + ": index " + std::to_string(x) +
                     " exceeds the kernel's index set of size " +
                     std::to_string(*K.extent()));
  }
}

// K(x,y) with range validation.  The conjugate-symmetry identity
// evaluate(K,y,x) == conj(evaluate(K,x,y)) holds exactly for every
// Hermitian-flavored node.
inline Complex evaluate(const Kernel& K, Index x, Index y) {
  require_in_range(K, x, "evaluate");
  require_in_range(K, y, "evaluate");
  return K.node().eval(x, y);
}

// Certified |stored - true| bound accompanying evaluate.
inline double evaluate_error_bound(const Kernel& K, Index x, Index y) {
  require_in_range(K, x, "evaluate_error_bound");
  require_in_range(K, y, "evaluate_error_bound");
  return K.node().eval_error(x, y);
}

// Certified lower bound on the true (real) value at (x,y).
inline double evaluate_certified_lower(const Kernel& K, Index x, Index y) {
  require_in_range(K, x, "evaluate_certified_lower");
  require_in_range(K, y, "evaluate_certified_lower");
  return K.node().certified_lower(x, y);
}

// Finite section over the first w.size indices; Hermitian by construction.
inline HermitianMatrix gram(const Kernel& K, const Window& w) {
  if (!K.hermitian()) {
    throw InputError("gram: kernel is not Hermitian");
  }
  if (K.extent() && w.size > *K.extent()) {
    throw InputError("gram: window " + std::to_string(w.size) +
                     " exceeds the kernel's index set of size " +
                     std::to_string(*K.extent()));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(w.size);
  ComplexMatrix G(n, n);
  for (Index x = 1; x <= w.size; ++x) {
    G(static_cast<Eigen::Index>(x - 1), static_cast<Eigen::Index>(x - 1)) =
        Complex(K.node().eval(x, x).real(), 0.0);
    for (Index y = x + 1; y <= w.size; ++y) {
      const Complex v = K.node().eval(x, y);
      G(static_cast<Eigen::Index>(x - 1), static_cast<Eigen::Index>(y - 1)) = v;
      G(static_cast<Eigen::Index>(y - 1), static_cast<Eigen::Index>(x - 1)) =
          std::conj(v);
    }
  }
  require_finite(G, "gram");
  return HermitianMatrix(G, HermitianMatrix::AlreadyHermitian{});
}

// Positive definiteness on a window: the psd test of the Gram section.  For
// finite kernels with the window covering the whole index set this is the
// full test; for countable kernels it is a necessary-condition check.
inline PsdReport is_pd(const Kernel& K, const Window& w, double tol = kEigTol) {
  return is_psd(gram(K, w), tol);
}

// K << L on the window: gram(L) - gram(K) psd within tol.  Dense operands
// must agree on their labels over the window; countable operands adapt to
// the positional window.
inline PsdReport loewner_leq(const Kernel& K, const Kernel& L, const Window& w,
                             double tol = kEigTol) {
  const auto* dk = dynamic_cast<const DenseKernel*>(&K.node());
  const auto* dl = dynamic_cast<const DenseKernel*>(&L.node());
  if (dk && dl) {
    for (Index i = 0; i < w.size; ++i) {
      if (dk->labels()[i] != dl->labels()[i]) {
        throw InputError("loewner_leq: label mismatch at window position " +
                         std::to_string(i + 1));
      }
    }
  }
  const HermitianMatrix GK = gram(K, w);
  const HermitianMatrix GL = gram(L, w);
  return is_psd(HermitianMatrix(GL.mat() - GK.mat(),
                                HermitianMatrix::AlreadyHermitian{}),
                tol);
}

// ---------------------------------------------------------------------------
// Scaling functions (for rescale / normalize_bd)
// ---------------------------------------------------------------------------

// u: X -> C given either explicitly (finite vector), as a power law
// u(n) = n^(-alpha), as a constant, or derived from the operand's diagonal:
//   BdNormalize : u(x) = 1 / sqrt(max(K(x,x), 1))
//   DiagFloor2  : u(x) = 1 / max(sqrt(K(x,x)), 2)
struct ScalingSpec {
  enum class Kind { Vector, Power, Constant, BdNormalize, DiagFloor2 };

  Kind kind = Kind::Constant;
  std::vector<Complex> values;  // Kind::Vector
  double alpha = 0.0;           // Kind::Power
  Complex constant = Complex(1.0, 0.0);

  static ScalingSpec vector(std::vector<Complex> v) {
    ScalingSpec s;
    s.kind = Kind::Vector;
    s.values = std::move(v);
    return s;
  }
  static ScalingSpec power(double alpha) {
    ScalingSpec s;
    s.kind = Kind::Power;
    s.alpha = alpha;
    return s;
  }
  static ScalingSpec constant_value(Complex c) {
    ScalingSpec s;
    s.kind = Kind::Constant;
    s.constant = c;
    return s;
  }
  static ScalingSpec bd_normalize() {
    ScalingSpec s;
    s.kind = Kind::BdNormalize;
    return s;
  }
  static ScalingSpec diag_floor2() {
    ScalingSpec s;
    s.kind = Kind::DiagFloor2;
    return s;
  }
};

// Lazy congruence node: conj(u(x)) u(y) K(x,y).
class RescaleKernel : public KernelNode {
 public:
  RescaleKernel(Kernel operand, ScalingSpec spec)
      : operand_(std::move(operand)), spec_(std::move(spec)) {
    if (spec_.kind == ScalingSpec::Kind::Vector) {
      for (const Complex& v : spec_.values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          throw InputError("rescale: non-finite scaling value");
        }
      }
    }
  }

  Kind kind() const override { return Kind::Composite; }

  std::optional<Index> extent() const override {
    // An explicit finite scaling vector restricts the index set.
    if (spec_.kind == ScalingSpec::Kind::Vector) {
      const Index len = spec_.values.size();
      const auto base = operand_.extent();
      return base ? std::min(*base, len) : len;
    }
    return operand_.extent();
  }

  bool hermitian() const override { return operand_.hermitian(); }

  Complex eval(Index x, Index y) const override {
    return std::conj(u(x)) * u(y) * operand_.node().eval(x, y);
  }

  double eval_error(Index x, Index y) const override {
    return std::abs(u(x)) * std::abs(u(y)) *
           operand_.node().eval_error(x, y);
  }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    const auto base = operand_.node().row_tail_sq(x, N);
    if (!base) return std::nullopt;
    const auto tail_sup = u_tail_sup(N);
    if (!tail_sup) return std::nullopt;
    const double ux = std::abs(u(x));
    return ux * ux * (*tail_sup) * (*tail_sup) * (*base);
  }

  std::optional<double> sup_abs() const override {
    const auto base = operand_.node().sup_abs();
    const auto usup = u_tail_sup(0);
    if (!base || !usup) return std::nullopt;
    return (*usup) * (*usup) * (*base);
  }

  const Kernel& operand() const { return operand_; }
  const ScalingSpec& spec() const { return spec_; }

  Complex u(Index x) const {
    switch (spec_.kind) {
      case ScalingSpec::Kind::Vector:
        if (x == 0 || x > spec_.values.size()) {
          throw InputError("rescale: scaling function undefined at index " +
                           std::to_string(x));
        }
        return spec_.values[x - 1];
      case ScalingSpec::Kind::Power:
        return Complex(std::pow(static_cast<double>(x), -spec_.alpha), 0.0);
      case ScalingSpec::Kind::Constant:
        return spec_.constant;
      case ScalingSpec::Kind::BdNormalize: {
        const double d = operand_.node().eval(x, x).real();
        return Complex(1.0 / std::sqrt(std::max(d, 1.0)), 0.0);
      }
      case ScalingSpec::Kind::DiagFloor2: {
        const double d = operand_.node().eval(x, x).real();
        return Complex(1.0 / std::max(std::sqrt(std::max(d, 0.0)), 2.0), 0.0);
      }
    }
    throw Error("rescale: unreachable scaling kind");
  }

 private:
  // sup_{y > N} |u(y)| when known; nullopt for unbounded scalings.
  std::optional<double> u_tail_sup(Index N) const {
    switch (spec_.kind) {
      case ScalingSpec::Kind::Vector: {
        double m = 0.0;
        for (Index y = N + 1; y <= spec_.values.size(); ++y) {
          m = std::max(m, std::abs(spec_.values[y - 1]));
        }
        return m;
      }
      case ScalingSpec::Kind::Power:
        if (spec_.alpha >= 0.0) {
          return std::pow(static_cast<double>(N + 1), -spec_.alpha);
        }
        return std::nullopt;  // growing scaling: no uniform tail bound
      case ScalingSpec::Kind::Constant:
        return std::abs(spec_.constant);
      case ScalingSpec::Kind::BdNormalize:
      case ScalingSpec::Kind::DiagFloor2:
        return 1.0;  // both derived scalings satisfy |u| <= 1
    }
    throw Error("rescale: unreachable scaling kind");
  }

  Kernel operand_;
  ScalingSpec spec_;
};

inline Kernel rescale(const Kernel& K, const ScalingSpec& u) {
  return Kernel(std::make_shared<RescaleKernel>(K, u));
}

// Diagonal normalization K(x,y) / sqrt(max(K(x,x),1) * max(K(y,y),1)); the
// resulting diagonal is <= 1 and kernels already below that bound are
// returned unchanged entry for entry.
inline Kernel normalize_bd(const Kernel& K) {
  return rescale(K, ScalingSpec::bd_normalize());
}

// ---------------------------------------------------------------------------
// Hadamard product, sum, adjoint
// ---------------------------------------------------------------------------

inline std::optional<Index> merged_extent(const Kernel& K, const Kernel& L) {
  const auto a = K.extent();
  const auto b = L.extent();
  if (a && b) return std::min(*a, *b);
  if (a) return a;
  return b;
}

// Entrywise product; positive definiteness is preserved on every window.
class HadamardKernel : public KernelNode {
 public:
  HadamardKernel(Kernel K, Kernel L) : K_(std::move(K)), L_(std::move(L)) {}

  Kind kind() const override { return Kind::Composite; }
  std::optional<Index> extent() const override {
    return merged_extent(K_, L_);
  }
  bool hermitian() const override {
    return K_.hermitian() && L_.hermitian();
  }

  Complex eval(Index x, Index y) const override {
    return K_.node().eval(x, y) * L_.node().eval(x, y);
  }

  double eval_error(Index x, Index y) const override {
    const double ek = K_.node().eval_error(x, y);
    const double el = L_.node().eval_error(x, y);
    if (ek == 0.0 && el == 0.0) return 0.0;
    const double ak = std::abs(K_.node().eval(x, y));
    const double al = std::abs(L_.node().eval(x, y));
    return ak * el + al * ek + ek * el;
  }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    // sum |K L|^2 <= sup|L|^2 * sum|K|^2 (and symmetrically); take the
    // sharper certified option.
    std::optional<double> best;
    if (const auto bk = K_.node().row_tail_sq(x, N)) {
      if (const auto sl = L_.node().sup_abs()) {
        best = (*sl) * (*sl) * (*bk);
      }
    }
    if (const auto bl = L_.node().row_tail_sq(x, N)) {
      if (const auto sk = K_.node().sup_abs()) {
        const double alt = (*sk) * (*sk) * (*bl);
        if (!best || alt < *best) best = alt;
      }
    }
    return best;
  }

  std::optional<double> sup_abs() const override {
    const auto a = K_.node().sup_abs();
    const auto b = L_.node().sup_abs();
    if (a && b) return (*a) * (*b);
    return std::nullopt;
  }

  const Kernel& lhs() const { return K_; }
  const Kernel& rhs() const { return L_; }

 private:
  Kernel K_;
  Kernel L_;
};

inline Kernel hadamard(const Kernel& K, const Kernel& L) {
  return Kernel(std::make_shared<HadamardKernel>(K, L));
}

// Pointwise sum.
class SumKernel : public KernelNode {
 public:
  SumKernel(Kernel K, Kernel L) : K_(std::move(K)), L_(std::move(L)) {}

  Kind kind() const override { return Kind::Composite; }
  std::optional<Index> extent() const override {
    return merged_extent(K_, L_);
  }
  bool hermitian() const override {
    return K_.hermitian() && L_.hermitian();
  }

  Complex eval(Index x, Index y) const override {
    return K_.node().eval(x, y) + L_.node().eval(x, y);
  }

  double eval_error(Index x, Index y) const override {
    return K_.node().eval_error(x, y) + L_.node().eval_error(x, y);
  }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    const auto a = K_.node().row_tail_sq(x, N);
    const auto b = L_.node().row_tail_sq(x, N);
    if (!a || !b) return std::nullopt;
    return 2.0 * (*a) + 2.0 * (*b);  // |a+b|^2 <= 2|a|^2 + 2|b|^2
  }

  std::optional<double> sup_abs() const override {
    const auto a = K_.node().sup_abs();
    const auto b = L_.node().sup_abs();
    if (a && b) return (*a) + (*b);
    return std::nullopt;
  }

  const Kernel& lhs() const { return K_; }
  const Kernel& rhs() const { return L_; }

 private:
  Kernel K_;
  Kernel L_;
};

inline Kernel kernel_sum(const Kernel& K, const Kernel& L) {
  return Kernel(std::make_shared<SumKernel>(K, L));
}

// Conjugate-transpose kernel K*(x,y) = conj(K(y,x)); equals K entrywise for
// Hermitian kernels.
class AdjointKernel : public KernelNode {
 public:
  explicit AdjointKernel(Kernel K) : K_(std::move(K)) {}

  Kind kind() const override { return Kind::Composite; }
  std::optional<Index> extent() const override { return K_.extent(); }
  bool hermitian() const override { return K_.hermitian(); }

  Complex eval(Index x, Index y) const override {
    return std::conj(K_.node().eval(y, x));
  }

  double eval_error(Index x, Index y) const override {
    return K_.node().eval_error(y, x);
  }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    // Row x of K* is the conjugate of column x of K.
    if (K_.hermitian()) return K_.node().row_tail_sq(x, N);
    if (const auto n = K_.extent()) {
      double sum = 0.0;
      for (Index y = N + 1; y <= *n; ++y) sum += std::norm(K_.node().eval(y, x));
      return sum;
    }
    return std::nullopt;
  }

  std::optional<double> sup_abs() const override {
    return K_.node().sup_abs();
  }

  const Kernel& operand() const { return K_; }

 private:
  Kernel K_;
};

inline Kernel adjoint(const Kernel& K) {
  return Kernel(std::make_shared<AdjointKernel>(K));
}

// ---------------------------------------------------------------------------
// Rank-one kernels from explicit sequences
// ---------------------------------------------------------------------------

// outer(u)(x,y) = conj(u(x)) u(y) with u zero beyond its explicit support;
// a countable rank-<=1 positive kernel with exact finite tails.
class OuterVecKernel : public HermitianKernelNode {
 public:
  explicit OuterVecKernel(std::vector<Complex> u) : u_(std::move(u)) {
    double sup = 0.0;
    for (const Complex& v : u_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InputError("outer: non-finite sequence value");
      }
      sup = std::max(sup, std::abs(v));
    }
    sup_sq_ = sup * sup;
  }

  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    const double ux = std::norm(at(x));
    if (ux == 0.0) return 0.0;
    double sum = 0.0;
    for (Index y = N + 1; y <= u_.size(); ++y) sum += std::norm(at(y));
    return ux * sum;
  }

  std::optional<double> sup_abs() const override { return sup_sq_; }

  RootMeta root_meta() const override {
    return RootMeta{RootMeta::Existence::Exists,
                    "rank-one kernel with square-summable generator"};
  }

  const std::vector<Complex>& values() const { return u_; }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    return std::conj(at(x)) * at(y);
  }

 private:
  Complex at(Index x) const {
    return x >= 1 && x <= u_.size() ? u_[x - 1] : Complex(0.0, 0.0);
  }

  std::vector<Complex> u_;
  double sup_sq_ = 0.0;
};

inline Kernel outer(std::vector<Complex> u) {
  return Kernel(std::make_shared<OuterVecKernel>(std::move(u)));
}

// ---------------------------------------------------------------------------
// Direct sums
// ---------------------------------------------------------------------------

// Block-diagonal combination of finite kernels.  Labels are auto-prefixed
// ("p0:", "p1:", ...) so the combined label set is disjoint by construction.
// Operands must have finite extent; finite composites are materialized by
// evaluation.
inline Kernel direct_sum(const std::vector<Kernel>& parts) {
  if (parts.empty()) throw InputError("direct_sum: needs at least one part");
  Index total = 0;
  for (const Kernel& part : parts) {
    if (!part.extent()) {
      throw InputError(
          "direct_sum: operands must be finite kernels (countable operands "
          "have no canonical interleaving)");
    }
    if (!part.hermitian()) {
      throw InputError("direct_sum: operands must be Hermitian");
    }
    total += *part.extent();
  }
  ComplexMatrix entries = ComplexMatrix::Zero(
      static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  std::vector<std::string> labels;
  labels.reserve(total);
  Index offset = 0;
  for (Index p = 0; p < parts.size(); ++p) {
    const Kernel& part = parts[p];
    const Index n = *part.extent();
    const auto* dense = dynamic_cast<const DenseKernel*>(&part.node());
    for (Index i = 1; i <= n; ++i) {
      const std::string base =
          dense ? dense->labels()[i - 1] : std::to_string(i);
      labels.push_back("p" + std::to_string(p) + ":" + base);
      for (Index j = 1; j <= n; ++j) {
        entries(static_cast<Eigen::Index>(offset + i - 1),
                static_cast<Eigen::Index>(offset + j - 1)) =
            part.node().eval(i, j);
      }
    }
    offset += n;
  }
  return Kernel(
      std::make_shared<DenseKernel>(std::move(labels), entries, true));
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

// (K * L)(x,z) = sum_y K(x,y) L(y,z) truncated at the window, with the
// neglected series certified entrywise via the operands' declared tails:
// |sum_{y>N} K(x,y) L(y,z)| <= sqrt(beta_K(x,N)) * sqrt(beta_{L*}(z,N)).
struct ConvolutionResult {
  Kernel kernel;                      // dense on the window
  Eigen::MatrixXd tail_bounds;        // certified neglected-series bounds
  Eigen::MatrixXd eval_error_bounds;  // propagated generator evaluation error
  double max_tail = 0.0;
};

// Column tail of L: sum_{y>N} |L(y,z)|^2, via symmetry or finite extent.
inline std::optional<double> column_tail_sq(const Kernel& L, Index z,
                                            Index N) {
  if (L.hermitian()) return L.node().row_tail_sq(z, N);
  if (const auto n = L.extent()) {
    double sum = 0.0;
    for (Index y = N + 1; y <= *n; ++y) sum += std::norm(L.node().eval(y, z));
    return sum;
  }
  return std::nullopt;
}

inline ConvolutionResult convolve(const Kernel& K, const Kernel& L,
                                  const Window& w, double tail_tol = kEigTol) {
  const Index N = w.size;
  if ((K.extent() && *K.extent() < N) || (L.extent() && *L.extent() < N)) {
    throw InputError("convolve: window exceeds an operand's index set");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(N);

  // Certify both operands' tails first (a missing bound rejects the call).
  std::vector<double> row_tails(N), col_tails(N);
  for (Index x = 1; x <= N; ++x) {
    const auto rk = K.node().row_tail_sq(x, N);
    if (!rk) {
      throw TailBoundError(
          "convolve: left operand declares no square-summability tail bound "
          "for row " +
          std::to_string(x));
    }
    const auto cl = column_tail_sq(L, x, N);
    if (!cl) {
      throw TailBoundError(
          "convolve: right operand declares no square-summability tail bound "
          "for column " +
          std::to_string(x));
    }
    row_tails[x - 1] = std::max(*rk, 0.0);
    col_tails[x - 1] = std::max(*cl, 0.0);
  }

  ComplexMatrix C(n, n);
  Eigen::MatrixXd tails(n, n), errors(n, n);
  double max_tail = 0.0;
  for (Index x = 1; x <= N; ++x) {
    for (Index z = 1; z <= N; ++z) {
      Complex sum(0.0, 0.0);
      double err = 0.0;
      for (Index y = 1; y <= N; ++y) {
        const Complex a = K.node().eval(x, y);
        const Complex b = L.node().eval(y, z);
        const double ea = K.node().eval_error(x, y);
        const double eb = L.node().eval_error(y, z);
        sum += a * b;
        err += std::abs(a) * eb + std::abs(b) * ea + ea * eb;
      }
      const double tail =
          std::sqrt(row_tails[x - 1]) * std::sqrt(col_tails[z - 1]);
      C(static_cast<Eigen::Index>(x - 1), static_cast<Eigen::Index>(z - 1)) =
          sum;
      tails(static_cast<Eigen::Index>(x - 1),
            static_cast<Eigen::Index>(z - 1)) = tail;
      errors(static_cast<Eigen::Index>(x - 1),
             static_cast<Eigen::Index>(z - 1)) = err;
      max_tail = std::max(max_tail, tail);
    }
  }
  if (max_tail > tail_tol) {
    throw TailBoundError(
        "convolve: certified tail bound " + std::to_string(max_tail) +
        " exceeds the budget " + std::to_string(tail_tol));
  }
  // The numerical matrix may be non-Hermitian for K != L; store generally.
  Kernel result(std::make_shared<DenseKernel>(default_labels(N), C, false));
  return ConvolutionResult{result, tails, errors, max_tail};
}

// ---------------------------------------------------------------------------
// Row diagnostics
// ---------------------------------------------------------------------------

// Square-summability report for the rows of a window.
struct Ell2RowsReport {
  bool certified = false;                    // all rows declare finite tails
  std::vector<double> partial_sums;          // sum_{y<=N} |K(x,y)|^2 per row
  std::vector<std::optional<double>> tails;  // declared beta(x, N) per row
};

inline Ell2RowsReport is_ell2_rows(const Kernel& K, const Window& w) {
  const Index N =
      K.extent() ? std::min<Index>(w.size, *K.extent()) : w.size;
  Ell2RowsReport report;
  report.certified = true;
  report.partial_sums.resize(N, 0.0);
  report.tails.resize(N);
  for (Index x = 1; x <= N; ++x) {
    double sum = 0.0;
    for (Index y = 1; y <= N; ++y) sum += std::norm(K.node().eval(x, y));
    report.partial_sums[x - 1] = sum;
    report.tails[x - 1] = K.node().row_tail_sq(x, N);
    if (!report.tails[x - 1]) report.certified = false;
  }
  return report;
}

// Decreasing-envelope diagnostic for the necessary vanishing-row condition:
// sup |K(x,y)| over dyadic blocks y in (N/2, N], N = 2, 4, 8, ... <= w.size.
struct C0Bracket {
  Index block_end = 0;  // the N of the block (N/2, N]
  double sup_abs = 0.0;
};

inline std::vector<C0Bracket> c0_row_profile(const Kernel& K, Index x,
                                             const Window& w) {
  require_in_range(K, x, "c0_row_profile");
  std::vector<C0Bracket> profile;
  for (Index hi = 2; hi <= w.size; hi *= 2) {
    C0Bracket bracket;
    bracket.block_end = hi;
    for (Index y = hi / 2 + 1; y <= hi; ++y) {
      if (K.extent() && y > *K.extent()) break;
      bracket.sup_abs = std::max(bracket.sup_abs, std::abs(K.node().eval(x, y)));
    }
    profile.push_back(bracket);
    if (hi > w.size / 2) break;
  }
  return profile;
}

// Connected components of the window under the relation |K(x,y)| > zero_tol,
// computed by union-find; the kernel splits into these blocks up to
// zero_tol-sized off-block entries.
inline std::vector<std::vector<Index>> sparsity_components(
    const Kernel& K, const Window& w, double zero_tol = kZeroTol) {
  if (K.extent() && w.size > *K.extent()) {
    throw InputError("sparsity_components: window exceeds the index set");
  }
  UnionFind uf(w.size);
  for (Index x = 1; x <= w.size; ++x) {
    for (Index y = x + 1; y <= w.size; ++y) {
      if (std::abs(K.node().eval(x, y)) > zero_tol) uf.merge(x - 1, y - 1);
    }
  }
  std::vector<std::vector<Index>> components;
  for (auto& comp : uf.components()) {
    std::vector<Index> indices;
    indices.reserve(comp.size());
    for (std::size_t i : comp) indices.push_back(static_cast<Index>(i) + 1);
    components.push_back(std::move(indices));
  }
  return components;
}

}  // namespace pdmskit

#endif  // PDMSKIT_KERNEL_HPP
