// pdmskit -- builtin countable kernels.
//
// Generator-backed kernels over the index set {1, 2, 3, ...}.  Each
// generator evaluates entries (exactly, or with a certified enclosure),
// declares row square-summability tails where they exist, and carries what
// it structurally knows about roots of the kernel.
#ifndef PDMSKIT_CORPUS_HPP
#define PDMSKIT_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmskit/errors.hpp"
#include "pdmskit/kernel.hpp"

namespace pdmskit {

// ---------------------------------------------------------------------------
// Harmonic-number helpers
// ---------------------------------------------------------------------------

// H_n = 1 + 1/2 + ... + 1/n (H_0 = 0), summed in increasing order.
inline double harmonic_number(Index n) {
  double h = 0.0;
  for (Index k = 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
  return h;
}

// Generator coefficient a_k = 1/sqrt((k+1) H_k H_{k+1}); satisfies
// a_k^2 = 1/H_k - 1/H_{k+1} so the squares telescope.
inline double harmonic_generator_coeff(Index k) {
  if (k == 0) throw InputError("harmonic_generator_coeff: k is 1-based");
  const double hk = harmonic_number(k);
  const double hk1 = hk + 1.0 / static_cast<double>(k + 1);
  return 1.0 / std::sqrt(static_cast<double>(k + 1) * hk * hk1);
}

// sum_{k<=N} a_k^2, accumulated with a running harmonic number; equals
// 1 - 1/H_{N+1} analytically.
inline double harmonic_partial_sum_squares(Index N) {
  double h = 0.0;
  double sum = 0.0;
  for (Index k = 1; k <= N; ++k) {
    h += 1.0 / static_cast<double>(k);
    const double hk1 = h + 1.0 / static_cast<double>(k + 1);
    sum += 1.0 / (static_cast<double>(k + 1) * h * hk1);
  }
  return sum;
}

// sum_{k>M} a_k^2 = 1/H_{M+1}, exactly by telescoping.
inline double harmonic_tail_sum_squares(Index M) {
  return 1.0 / harmonic_number(M + 1);
}

// ---------------------------------------------------------------------------
// delta: the identity kernel
// ---------------------------------------------------------------------------

class DeltaKernel : public HermitianKernelNode {
 public:
  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    return x > N ? 1.0 : 0.0;
  }

  std::optional<double> sup_abs() const override { return 1.0; }

  RootMeta root_meta() const override {
    return RootMeta{RootMeta::Existence::Exists, "identity kernel, its own root"};
  }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    return x == y ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
  }
};

inline Kernel delta_kernel() {
  return Kernel(std::make_shared<DeltaKernel>());
}

// ---------------------------------------------------------------------------
// diag_n2: the diagonal kernel K(n,n) = n^2
// ---------------------------------------------------------------------------

class DiagN2Kernel : public HermitianKernelNode {
 public:
  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    if (x <= N) return 0.0;
    const double d = static_cast<double>(x) * static_cast<double>(x);
    return d * d;
  }

  std::optional<double> sup_abs() const override {
    return std::nullopt;  // unbounded diagonal
  }

  RootMeta root_meta() const override {
    return RootMeta{RootMeta::Existence::Exists,
                    "diagonal kernel, rooted by the diagonal of square roots"};
  }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    if (x != y) return Complex(0.0, 0.0);
    const double d = static_cast<double>(x);
    return Complex(d * d, 0.0);
  }
};

inline Kernel diag_n2_kernel() {
  return Kernel(std::make_shared<DiagN2Kernel>());
}

// ---------------------------------------------------------------------------
// outer_power: rank-one kernel from u(n) = n^(-alpha)
// ---------------------------------------------------------------------------

// K(x,y) = (x y)^(-alpha).  The generator is square-summable exactly when
// 2 alpha > 1, which decides both the row tails and root existence.
class OuterPowerKernel : public HermitianKernelNode {
 public:
  explicit OuterPowerKernel(double alpha) : alpha_(alpha) {
    if (!std::isfinite(alpha)) {
      throw InputError("outer_power: alpha must be finite");
    }
  }

  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    if (2.0 * alpha_ <= 1.0) return std::nullopt;  // tail series diverges
    // sum_{y>N} y^(-2a) <= integral_N^inf t^(-2a) dt = N^(1-2a)/(2a-1).
    const double xs = std::pow(static_cast<double>(x), -2.0 * alpha_);
    const double tail = std::pow(static_cast<double>(N), 1.0 - 2.0 * alpha_) /
                        (2.0 * alpha_ - 1.0);
    return xs * tail;
  }

  std::optional<double> sup_abs() const override {
    if (alpha_ < 0.0) return std::nullopt;  // growing generator
    return 1.0;  // attained at (1,1)
  }

  RootMeta root_meta() const override {
    if (2.0 * alpha_ > 1.0) {
      return RootMeta{RootMeta::Existence::Exists,
                      "rank-one kernel with square-summable generator"};
    }
    return RootMeta{RootMeta::Existence::NotExists,
                    "rank-one kernel whose generator is not square-summable"};
  }

  double alpha() const { return alpha_; }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    return Complex(std::pow(static_cast<double>(x) * static_cast<double>(y),
                            -alpha_),
                   0.0);
  }

 private:
  double alpha_;
};

inline Kernel outer_power_kernel(double alpha) {
  return Kernel(std::make_shared<OuterPowerKernel>(alpha));
}

// ---------------------------------------------------------------------------
// uniform_family: flat block kernels
// ---------------------------------------------------------------------------

// K_n(p,q) = 1/n when both p < n and q < n, else 0.  The top window
// eigenvalue is (n-1)/n for every window covering the block, so the family
// is uniformly bounded by 1 while no member is dominated by the previous.
class UniformFamilyKernel : public HermitianKernelNode {
 public:
  explicit UniformFamilyKernel(Index n) : n_(n) {
    if (n < 2) throw InputError("uniform_family: n must be at least 2");
  }

  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    if (x >= n_ || N >= n_ - 1) return 0.0;
    const double count = static_cast<double>(n_ - 1 - N);
    return count / (static_cast<double>(n_) * static_cast<double>(n_));
  }

  std::optional<double> sup_abs() const override {
    return 1.0 / static_cast<double>(n_);
  }

  RootMeta root_meta() const override {
    return RootMeta{RootMeta::Existence::Exists,
                    "finitely supported kernel"};
  }

  Index n() const { return n_; }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    if (x < n_ && y < n_) return Complex(1.0 / static_cast<double>(n_), 0.0);
    return Complex(0.0, 0.0);
  }

 private:
  Index n_;
};

inline Kernel uniform_family_kernel(Index n) {
  return Kernel(std::make_shared<UniformFamilyKernel>(n));
}

// ---------------------------------------------------------------------------
// shift: Toeplitz kernels from a finitely supported generator
// ---------------------------------------------------------------------------

// K(n,m) = sum_k f(k + m - n) conj(f(k)) for m >= n: the Gram kernel of the
// shifted copies of f.  With finite f all sums are exact and every row has
// finitely many nonzero entries.
class ShiftKernel : public HermitianKernelNode {
 public:
  explicit ShiftKernel(std::vector<Complex> f) : f_(std::move(f)) {
    if (f_.empty()) throw InputError("shift: generator must be nonempty");
    for (const Complex& v : f_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InputError("shift: non-finite generator value");
      }
    }
    const std::size_t L = f_.size();
    g_.resize(L);
    for (std::size_t d = 0; d < L; ++d) {
      Complex sum(0.0, 0.0);
      for (std::size_t k = 0; k + d < L; ++k) sum += f_[k + d] * std::conj(f_[k]);
      g_[d] = sum;
    }
    sup_abs_ = 0.0;
    for (const Complex& v : g_) sup_abs_ = std::max(sup_abs_, std::abs(v));
  }

  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index x, Index N) const override {
    // Entries of row x vanish beyond distance L-1; sum the finitely many
    // remaining entries exactly.
    const Index L = f_.size();
    double sum = 0.0;
    const Index lo = std::max<Index>(N + 1, x > L - 1 ? x - (L - 1) : 1);
    const Index hi = x + L - 1;
    for (Index y = lo; y <= hi; ++y) {
      const Index d = y >= x ? y - x : x - y;
      if (d < L) sum += std::norm(g_[d]);
    }
    return sum;
  }

  std::optional<double> sup_abs() const override { return sup_abs_; }

  RootMeta root_meta() const override {
    return RootMeta{RootMeta::Existence::Exists,
                    "Gram kernel of a square-summable shift family"};
  }

  const std::vector<Complex>& generator() const { return f_; }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    const Index d = y - x;
    return d < g_.size() ? g_[d] : Complex(0.0, 0.0);
  }

 private:
  std::vector<Complex> f_;
  std::vector<Complex> g_;  // g[d] = sum_k f(k+d) conj(f(k))
  double sup_abs_ = 0.0;
};

inline Kernel shift_kernel(std::vector<Complex> f) {
  return Kernel(std::make_shared<ShiftKernel>(std::move(f)));
}

// ---------------------------------------------------------------------------
// harmonic: the slow-decay shift kernel
// ---------------------------------------------------------------------------

inline constexpr Index kHarmonicDefaultTruncation = Index(1) << 17;

// Shift-family kernel for the infinite generator a_k = harmonic coefficient.
// Evaluation truncates the generator at M terms, which keeps every window
// Gram section exactly positive semidefinite (it is the Gram matrix of
// truncated shifted copies).  All omitted series terms are positive, so the
// stored value is itself a lower bound and the enclosure is one-sided:
//
//   stored <= true <= stored + 1/H_{M-d+1},  d = |x - y|,
//   true   >= stored + 1/H_{M+1},
//   true   >= 1/H_{d+1}                       (structural bound).
//
// Rows are not square-summable, so no row-tail bound is declared.
class HarmonicKernel : public HermitianKernelNode {
 public:
  explicit HarmonicKernel(Index truncation = kHarmonicDefaultTruncation)
      : M_(truncation) {
    if (M_ < 2) throw InputError("harmonic: truncation must be at least 2");
    a_.resize(M_ + 1, 0.0);
    H_.resize(M_ + 2, 0.0);
    double h = 0.0;
    for (Index k = 1; k <= M_ + 1; ++k) {
      h += 1.0 / static_cast<double>(k);
      H_[k] = h;
    }
    for (Index k = 1; k <= M_; ++k) {
      a_[k] = 1.0 / std::sqrt(static_cast<double>(k + 1) * H_[k] * H_[k + 1]);
    }
    g_.resize(M_, -1.0);
  }

  Kind kind() const override { return Kind::Builtin; }
  std::optional<Index> extent() const override { return std::nullopt; }

  std::optional<double> row_tail_sq(Index /*x*/, Index /*N*/) const override {
    return std::nullopt;  // rows are not square-summable
  }

  std::optional<double> sup_abs() const override {
    return 1.0;  // 0 <= K(x,y) <= K(n,n) = 1
  }

  RootMeta root_meta() const override {
    return RootMeta{RootMeta::Existence::Exists,
                    "Gram kernel of a square-summable shift family"};
  }

  Index truncation() const { return M_; }

  // 1/H_{d+1} lower bound from comparing against the tail of the squares.
  double structural_lower(Index d) const {
    return 1.0 / harmonic_at(d + 1);
  }

 protected:
  Complex eval_upper(Index x, Index y) const override {
    return Complex(stored(y - x), 0.0);
  }

  double eval_error_upper(Index x, Index y) const override {
    const Index d = y - x;
    if (d >= M_) {
      // No stored terms; Cauchy-Schwarz against the squared tail.
      return std::sqrt(1.0 / harmonic_at(d + 1));
    }
    return 1.0 / H_[M_ - d + 1];
  }

  double certified_lower_upper(Index x, Index y) const override {
    const Index d = y - x;
    const double from_stored = stored(d) + 1.0 / H_[M_ + 1];
    return std::max(from_stored, structural_lower(d));
  }

 private:
  // g(d) = sum_{k <= M-d} a_k a_{k+d}, cached per distance.
  double stored(Index d) const {
    if (d >= M_) return 0.0;
    if (g_[d] < 0.0) {
      double sum = 0.0;
      for (Index k = 1; k + d <= M_; ++k) sum += a_[k] * a_[k + d];
      g_[d] = sum;
    }
    return g_[d];
  }

  double harmonic_at(Index n) const {
    if (n <= M_ + 1) return H_[n];
    // Beyond the cache: asymptotic expansion, accurate to well below 1e-15
    // for every n > M >= 2^17... but remain exact for small truncations too.
    if (n <= (Index(1) << 21)) return harmonic_number(n);
    const double x = static_cast<double>(n);
    const double euler = 0.57721566490153286060651209;
    return std::log(x) + euler + 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x);
  }

  Index M_;
  std::vector<double> a_;          // a_[k], k = 1..M
  std::vector<double> H_;          // H_[n], n = 0..M+1
  mutable std::vector<double> g_;  // per-distance cache, -1 = unset
};

inline Kernel harmonic_kernel(Index truncation = kHarmonicDefaultTruncation) {
  return Kernel(std::make_shared<HarmonicKernel>(truncation));
}

}  // namespace pdmskit

#endif  // PDMSKIT_CORPUS_HPP
