// Kernel data model and algebra: dense kernels, windows, Gram sections,
// positivity and ordering checks, rescalings, products, sums, adjoints,
// rank-one kernels, direct sums, certified convolution, and row diagnostics.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "pdmskit/corpus.hpp"
#include "pdmskit/kernel.hpp"
#include "pdmskit/linalg.hpp"
#include "pdmskit/rng.hpp"

using namespace pdmskit;
using Catch::Approx;

namespace {

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("windows must be nonempty") {
  REQUIRE_THROWS_AS(Window(0), InputError);
  REQUIRE(Window(3).size == 3);
}

TEST_CASE("dense kernels validate their input") {
  SECTION("non-square entries") {
    ComplexMatrix m(2, 3);
    m.setZero();
    REQUIRE_THROWS_AS(dense_kernel(m), InputError);
  }
  SECTION("label count mismatch") {
    REQUIRE_THROWS_AS(dense_kernel({"a"}, ComplexMatrix::Identity(2, 2)),
                      InputError);
  }
  SECTION("duplicate labels") {
    REQUIRE_THROWS_AS(
        dense_kernel({"a", "a"}, ComplexMatrix::Identity(2, 2)), InputError);
  }
  SECTION("non-finite entries") {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(0, 1) = Complex(std::nan(""), 0.0);
    REQUIRE_THROWS_AS(dense_kernel(m), InputError);
  }
}

TEST_CASE("dense kernels are symmetrized and conjugate-symmetric") {
  // Slightly asymmetric input is averaged into an exactly Hermitian kernel.
  const Kernel K =
      dense_kernel(mat2(Complex(1, 0), Complex(0, 1), Complex(0, -1.2),
                        Complex(2, 0)));
  const Complex upper = evaluate(K, 1, 2);
  const Complex lower = evaluate(K, 2, 1);
  REQUIRE(lower == std::conj(upper));  // bitwise mirror
  REQUIRE(upper.imag() == Approx(1.1).margin(1e-15));
  REQUIRE(evaluate(K, 1, 1).imag() == 0.0);
  REQUIRE(K.hermitian());
  REQUIRE(K.extent().value() == 2);
}

TEST_CASE("evaluate rejects out-of-range indices") {
  const Kernel K = dense_kernel(ComplexMatrix::Identity(2, 2));
  REQUIRE_THROWS_AS(evaluate(K, 0, 1), InputError);
  REQUIRE_THROWS_AS(evaluate(K, 1, 3), InputError);
  REQUIRE(evaluate(K, 2, 2) == Complex(1, 0));
}

TEST_CASE("gram reproduces sections and respects window bounds") {
  const Kernel d = delta_kernel();
  const HermitianMatrix G = gram(d, Window(3));
  REQUIRE(max_abs(G.mat() - ComplexMatrix::Identity(3, 3)) == 0.0);

  const Kernel K = dense_kernel(ComplexMatrix::Identity(2, 2));
  REQUIRE_THROWS_AS(gram(K, Window(3)), InputError);

  // Leading principal submatrix property.
  Rng rng(5);
  const HermitianMatrix M = random_psd(rng, 6, 6);
  const Kernel R = dense_kernel(M.mat());
  const HermitianMatrix G5 = gram(R, Window(5));
  const HermitianMatrix G6 = gram(R, Window(6));
  REQUIRE(max_abs(G6.mat().topLeftCorner(5, 5) - G5.mat()) == 0.0);
}

TEST_CASE("is_pd reports window positivity") {
  REQUIRE(is_pd(delta_kernel(), Window(5)).psd);
  const Kernel bad = dense_kernel(
      mat2(Complex(1, 0), Complex(2, 0), Complex(2, 0), Complex(1, 0)));
  const PsdReport r = is_pd(bad, Window(2));
  REQUIRE_FALSE(r.psd);
  REQUIRE(r.lambda_min == Approx(-1.0).margin(1e-12));
}

TEST_CASE("loewner_leq orders sections") {
  const Kernel two = dense_kernel({"1"}, ComplexMatrix::Identity(1, 1) * 2.0);
  const Kernel three = dense_kernel({"1"}, ComplexMatrix::Identity(1, 1) * 3.0);
  REQUIRE(loewner_leq(two, three, Window(1)).psd);
  REQUIRE_FALSE(loewner_leq(three, two, Window(1)).psd);
  REQUIRE(loewner_leq(two, two, Window(1)).psd);  // reflexive

  SECTION("dense label mismatch is rejected") {
    const Kernel other =
        dense_kernel({"x"}, ComplexMatrix::Identity(1, 1) * 3.0);
    REQUIRE_THROWS_AS(loewner_leq(two, other, Window(1)), InputError);
  }
  SECTION("dense against builtin compares positionally") {
    const Kernel half =
        dense_kernel({"p"}, ComplexMatrix::Identity(1, 1) * 0.5);
    REQUIRE(loewner_leq(half, delta_kernel(), Window(1)).psd);
  }
  SECTION("transitive within doubled tolerance") {
    Rng rng(17);
    const HermitianMatrix A = random_psd(rng, 4, 4, 0.1, 0.5);
    const HermitianMatrix B = random_psd(rng, 4, 4, 0.1, 0.5);
    const Kernel base = dense_kernel(ComplexMatrix::Identity(4, 4));
    const Kernel mid = dense_kernel(ComplexMatrix::Identity(4, 4) + A.mat());
    const Kernel top = dense_kernel(ComplexMatrix::Identity(4, 4) + A.mat() +
                                    B.mat());
    const double tol = 1e-10;
    REQUIRE(loewner_leq(base, mid, Window(4), tol).psd);
    REQUIRE(loewner_leq(mid, top, Window(4), tol).psd);
    REQUIRE(loewner_leq(base, top, Window(4), 2 * tol).psd);
  }
}

TEST_CASE("rescale by a vector, a power law, and a constant") {
  SECTION("vector rescaling of the diagonal kernel squares the weights") {
    const Kernel K = rescale(
        delta_kernel(),
        ScalingSpec::vector({Complex(2, 0), Complex(0, 3), Complex(-1, 0)}));
    REQUIRE(K.extent().value() == 3);
    REQUIRE(evaluate(K, 1, 1).real() == Approx(4.0));
    REQUIRE(evaluate(K, 2, 2).real() == Approx(9.0));  // |3i|^2
    REQUIRE(evaluate(K, 3, 3).real() == Approx(1.0));
    REQUIRE(std::abs(evaluate(K, 1, 2)) == 0.0);
  }
  SECTION("power rescaling flattens the square-diagonal kernel") {
    const Kernel K = rescale(diag_n2_kernel(), ScalingSpec::power(1.0));
    REQUIRE(evaluate(K, 1, 1).real() == Approx(1.0));
    REQUIRE(evaluate(K, 7, 7).real() == Approx(1.0));
  }
  SECTION("unit constant leaves evaluations unchanged") {
    const Kernel K = rescale(harmonic_kernel(1024),
                             ScalingSpec::constant_value(Complex(1, 0)));
    REQUIRE(evaluate(K, 2, 5) == evaluate(harmonic_kernel(1024), 2, 5));
  }
  SECTION("composition multiplies the scalings") {
    const ScalingSpec u =
        ScalingSpec::vector({Complex(2, 0), Complex(1, 1)});
    const ScalingSpec v =
        ScalingSpec::vector({Complex(0, 1), Complex(3, 0)});
    const Kernel lhs = rescale(rescale(delta_kernel(), u), v);
    std::vector<Complex> uv = {Complex(2, 0) * Complex(0, 1),
                               Complex(1, 1) * Complex(3, 0)};
    const Kernel rhs = rescale(delta_kernel(), ScalingSpec::vector(uv));
    for (Index x = 1; x <= 2; ++x) {
      for (Index y = 1; y <= 2; ++y) {
        REQUIRE(std::abs(evaluate(lhs, x, y) - evaluate(rhs, x, y)) <= 1e-15);
      }
    }
  }
  SECTION("rescaling preserves window positivity") {
    Rng rng(23);
    const HermitianMatrix M = random_psd(rng, 5, 3);
    const Kernel K = dense_kernel(M.mat());
    std::vector<Complex> u;
    for (int i = 0; i < 5; ++i) u.push_back(rng.complex_normal());
    const Kernel S = rescale(K, ScalingSpec::vector(u));
    double scale = 0.0;
    for (const Complex& c : u) scale = std::max(scale, std::norm(c));
    REQUIRE(is_pd(S, Window(5), 1e-10 * std::max(1.0, scale)).psd);
  }
}

TEST_CASE("normalize_bd caps the diagonal at one") {
  SECTION("already-bounded diagonal is untouched") {
    const Kernel K = normalize_bd(delta_kernel());
    REQUIRE(evaluate(K, 4, 4) == Complex(1, 0));
    REQUIRE(evaluate(K, 1, 2) == Complex(0, 0));
  }
  SECTION("a large diagonal entry is scaled to exactly one") {
    const Kernel K =
        normalize_bd(dense_kernel({"a"}, ComplexMatrix::Identity(1, 1) * 4.0));
    REQUIRE(evaluate(K, 1, 1).real() == Approx(1.0).margin(1e-15));
  }
  SECTION("the square-diagonal kernel flattens to ones") {
    const Kernel K = normalize_bd(diag_n2_kernel());
    for (Index n = 1; n <= 6; ++n) {
      REQUIRE(evaluate(K, n, n).real() == Approx(1.0).margin(1e-15));
    }
  }
  SECTION("idempotent on evaluations") {
    const Kernel once = normalize_bd(diag_n2_kernel());
    const Kernel twice = normalize_bd(once);
    for (Index n = 1; n <= 6; ++n) {
      REQUIRE(evaluate(twice, n, n) == evaluate(once, n, n));
    }
  }
}

TEST_CASE("hadamard multiplies entrywise and preserves positivity") {
  const Kernel J = dense_kernel(ComplexMatrix::Ones(3, 3));
  const Kernel D = delta_kernel();
  const Kernel H = hadamard(J, D);
  REQUIRE(evaluate(H, 1, 1) == Complex(1, 0));
  REQUIRE(evaluate(H, 1, 2) == Complex(0, 0));

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix A = random_psd(rng, 6, 6);
    const HermitianMatrix B = random_psd(rng, 6, 4);
    const Kernel P = hadamard(dense_kernel(A.mat()), dense_kernel(B.mat()));
    REQUIRE(is_pd(P, Window(6)).psd);
  }
}

TEST_CASE("kernel_sum adds evaluations") {
  const Kernel S = kernel_sum(delta_kernel(), delta_kernel());
  REQUIRE(evaluate(S, 2, 2) == Complex(2, 0));
  REQUIRE(evaluate(S, 1, 2) == Complex(0, 0));
  REQUIRE(is_pd(S, Window(4)).psd);
}

TEST_CASE("adjoint conjugate-transposes and is an involution") {
  const Kernel G = dense_kernel_general(
      mat2(Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0)));
  REQUIRE_FALSE(G.hermitian());
  const Kernel Gs = adjoint(G);
  REQUIRE(evaluate(Gs, 2, 1) == Complex(1, 0));
  REQUIRE(evaluate(Gs, 1, 2) == Complex(0, 0));
  const Kernel Gss = adjoint(Gs);
  REQUIRE(evaluate(Gss, 1, 2) == evaluate(G, 1, 2));

  // Adjoint of a Hermitian kernel evaluates identically.
  const Kernel H = dense_kernel(
      mat2(Complex(2, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0)));
  const Kernel Hs = adjoint(H);
  for (Index x = 1; x <= 2; ++x) {
    for (Index y = 1; y <= 2; ++y) {
      REQUIRE(evaluate(Hs, x, y) == evaluate(H, x, y));
    }
  }
}

TEST_CASE("outer builds rank-one kernels with exact tails") {
  const Kernel K = outer({Complex(1, 0) / std::sqrt(2.0),
                          Complex(1, 0) / std::sqrt(2.0)});
  const HermitianMatrix G = gram(K, Window(2));
  REQUIRE(G(0, 0).real() == Approx(0.5).margin(1e-15));
  REQUIRE(G(0, 1).real() == Approx(0.5).margin(1e-15));
  const RealVector evs = eigenvalues(gram(K, Window(4)));
  REQUIRE(evs.maxCoeff() == Approx(1.0).margin(1e-12));  // sum |u_n|^2
  REQUIRE(evaluate(K, 3, 5) == Complex(0, 0));            // past the support

  // Top eigenvalue equals the windowed mass of the generator.
  const Kernel L = outer({Complex(0.5, 0), Complex(0, 0.5), Complex(-0.5, 0)});
  REQUIRE(eigenvalues(gram(L, Window(2))).maxCoeff() ==
          Approx(0.5).margin(1e-12));
  REQUIRE(eigenvalues(gram(L, Window(3))).maxCoeff() ==
          Approx(0.75).margin(1e-12));
}

TEST_CASE("direct_sum assembles labeled blocks") {
  const Kernel a = dense_kernel({"x"}, ComplexMatrix::Identity(1, 1) * 2.0);
  const Kernel b = dense_kernel({"x"}, ComplexMatrix::Identity(1, 1) * 3.0);
  const Kernel sum = direct_sum({a, b});
  REQUIRE(sum.extent().value() == 2);
  REQUIRE(evaluate(sum, 1, 1).real() == Approx(2.0));
  REQUIRE(evaluate(sum, 2, 2).real() == Approx(3.0));
  REQUIRE(evaluate(sum, 1, 2) == Complex(0, 0));
  // Prefixed labels stay distinct even when the operands collide.
  const auto* dense = dynamic_cast<const DenseKernel*>(&sum.node());
  REQUIRE(dense != nullptr);
  REQUIRE(dense->labels()[0] == "p0:x");
  REQUIRE(dense->labels()[1] == "p1:x");

  SECTION("gram is block diagonal") {
    Rng rng(41);
    const HermitianMatrix A = random_psd(rng, 2, 2);
    const HermitianMatrix B = random_psd(rng, 3, 3);
    const Kernel S =
        direct_sum({dense_kernel(A.mat()), dense_kernel(B.mat())});
    const HermitianMatrix G = gram(S, Window(5));
    REQUIRE(max_abs(G.mat().topLeftCorner(2, 2) - A.mat()) <= 1e-15);
    REQUIRE(max_abs(G.mat().bottomRightCorner(3, 3) - B.mat()) <= 1e-15);
    REQUIRE(max_abs(G.mat().topRightCorner(2, 3)) == 0.0);
    REQUIRE(is_pd(S, Window(5)).psd);
  }
  SECTION("countable operands are rejected") {
    REQUIRE_THROWS_AS(direct_sum({a, delta_kernel()}), InputError);
  }
}

TEST_CASE("convolve certifies the neglected series") {
  SECTION("diagonal kernel is idempotent under convolution") {
    const ConvolutionResult r =
        convolve(delta_kernel(), delta_kernel(), Window(3));
    REQUIRE(max_abs(gram(r.kernel, Window(3)).mat() -
                    ComplexMatrix::Identity(3, 3)) == 0.0);
    REQUIRE(r.max_tail == 0.0);
  }
  SECTION("rank-one kernels convolve to a scalar multiple") {
    const std::vector<Complex> u = {Complex(0.6, 0), Complex(0.8, 0)};
    const Kernel K = outer(u);
    const ConvolutionResult r = convolve(K, K, Window(4));
    // (conj(u) x u) * (conj(u) x u) = ||u||^2 conj(u) x u with ||u|| = 1.
    for (Index x = 1; x <= 4; ++x) {
      for (Index z = 1; z <= 4; ++z) {
        const Complex want = evaluate(K, x, z);
        REQUIRE(std::abs(evaluate(r.kernel, x, z) - want) <= 1e-15);
      }
    }
    REQUIRE(r.max_tail <= 1e-15);
  }
  SECTION("kernel times adjoint is positive") {
    const Kernel G = dense_kernel_general(
        mat2(Complex(0.3, 0.1), Complex(1, 0), Complex(0, 0.5),
             Complex(-0.2, 0)));
    const ConvolutionResult r = convolve(G, adjoint(G), Window(2));
    REQUIRE(is_pd(r.kernel, Window(2)).psd);
  }
  SECTION("associative on finitely supported kernels") {
    const Kernel A = outer({Complex(1, 0), Complex(0.5, 0.25)});
    const Kernel B = outer({Complex(0.2, 0), Complex(0, -1), Complex(0.4, 0)});
    const Kernel C = outer({Complex(0.9, -0.1)});
    const Window w(4);
    const Kernel left =
        convolve(convolve(A, B, w).kernel, C, w).kernel;
    const Kernel right =
        convolve(A, convolve(B, C, w).kernel, w).kernel;
    for (Index x = 1; x <= 4; ++x) {
      for (Index z = 1; z <= 4; ++z) {
        REQUIRE(std::abs(evaluate(left, x, z) - evaluate(right, x, z)) <=
                1e-14);
      }
    }
  }
  SECTION("kernels without tail bounds are rejected") {
    REQUIRE_THROWS_AS(
        convolve(harmonic_kernel(1024), harmonic_kernel(1024), Window(4)),
        TailBoundError);
  }
}

TEST_CASE("is_ell2_rows certifies dense and declared-tail kernels") {
  const Ell2RowsReport dense_report =
      is_ell2_rows(dense_kernel(ComplexMatrix::Identity(3, 3)), Window(3));
  REQUIRE(dense_report.certified);
  REQUIRE(dense_report.partial_sums[0] == Approx(1.0));

  const Ell2RowsReport delta_report = is_ell2_rows(delta_kernel(), Window(4));
  REQUIRE(delta_report.certified);
  REQUIRE(delta_report.tails[0].has_value());

  const Ell2RowsReport harmonic_report =
      is_ell2_rows(harmonic_kernel(1024), Window(4));
  REQUIRE_FALSE(harmonic_report.certified);  // no declared row tails
  REQUIRE_FALSE(harmonic_report.tails[0].has_value());
}

TEST_CASE("c0_row_profile brackets the sup of dyadic blocks") {
  SECTION("diagonal kernel vanishes off the first entry") {
    const auto profile = c0_row_profile(delta_kernel(), 1, Window(16));
    REQUIRE(profile.size() == 4);  // blocks ending at 2, 4, 8, 16
    for (const C0Bracket& b : profile) REQUIRE(b.sup_abs == 0.0);
  }
  SECTION("power-law rows decay at the block rate") {
    const auto profile = c0_row_profile(outer_power_kernel(1.0), 1, Window(8));
    REQUIRE(profile[0].block_end == 2);
    REQUIRE(profile[0].sup_abs == Approx(0.5).margin(1e-15));   // 1/2
    REQUIRE(profile[1].sup_abs == Approx(1.0 / 3.0).margin(1e-15));
    REQUIRE(profile[2].sup_abs == Approx(0.2).margin(1e-15));   // 1/5
  }
  SECTION("flat rows stay flat") {
    const auto profile = c0_row_profile(outer_power_kernel(0.0), 1, Window(32));
    for (const C0Bracket& b : profile) {
      REQUIRE(b.sup_abs == Approx(1.0).margin(1e-15));
    }
  }
}

TEST_CASE("sparsity_components finds connected blocks") {
  SECTION("diagonal kernel splits into singletons") {
    const auto parts = sparsity_components(delta_kernel(), Window(5));
    REQUIRE(parts.size() == 5);
    REQUIRE(parts[0] == std::vector<Index>{1});
    REQUIRE(parts[4] == std::vector<Index>{5});
  }
  SECTION("coupled pairs merge") {
    ComplexMatrix m = ComplexMatrix::Identity(3, 3);
    m(0, 2) = Complex(0.5, 0);
    m(2, 0) = Complex(0.5, 0);
    const auto parts = sparsity_components(dense_kernel(m), Window(3));
    REQUIRE(parts.size() == 2);
    REQUIRE(parts[0] == std::vector<Index>{1, 3});
    REQUIRE(parts[1] == std::vector<Index>{2});
  }
  SECTION("an all-ones section is one component") {
    const auto parts =
        sparsity_components(dense_kernel(ComplexMatrix::Ones(4, 4)),
                            Window(4));
    REQUIRE(parts.size() == 1);
    REQUIRE(parts[0].size() == 4);
  }
}
