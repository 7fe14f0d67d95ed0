#include <gtest/gtest.h>

#include "radonlab/kernels.hpp"

using namespace radonlab;

TEST(Quadrature, GaussLegendreExactForPolynomials) {
  for (int order : {1, 2, 5, 12, 20}) {
    const auto& r = gauss_legendre(order);
    for (int p = 0; p < 2 * order; ++p) {
      double s = 0;
      for (int i = 0; i < order; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-14) << order << " " << p;
    }
  }
}

TEST(Quadrature, AdaptiveLog) {
  auto q = adaptive_gauss_legendre([](double x) { return 1.0 / x; }, 1.0, 1024.0, 1e-13);
  EXPECT_NEAR(q.value, std::log(1024.0), 1e-12);
  EXPECT_TRUE(q.converged);
}

TEST(Compensated, BeatsNaiveSum) {
  CompensatedSum<double> s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);
}

TEST(FracProduct, ExactPhases) {
  EXPECT_EQ(frac_product(0.25, 9), 0.25L);
  EXPECT_EQ(frac_product(0.25, -1), 0.75L);
  EXPECT_EQ(frac_product(3.0, 7), 0.0L);
  double xi = 0.1;  // not dyadic; compare against long double product
  long double ref = static_cast<long double>(xi) * 123456789;
  ref -= std::floor(ref);
  EXPECT_NEAR(static_cast<double>(frac_product(xi, 123456789)), static_cast<double>(ref), 1e-10);
  // huge multipliers stay exact where a double product would lose the phase
  long double f = frac_product(std::ldexp(1.0, -60) * 3, int64_t(1) << 59);
  EXPECT_EQ(f, 0.5L);
}

TEST(CZValidate, HilbertSumOfTermsIsTwo) {
  auto r = cz_validate(kernel_hilbert(), 1024, 200);
  EXPECT_NEAR(r.size_term_max, 1.0, 1e-15);
  EXPECT_NEAR(r.smoothness_term_max, 1.0, 1e-15);
  EXPECT_NEAR(r.size_smoothness_max, 2.0, 1e-14);
  EXPECT_LT(r.cancellation_max, 1e-12);
  EXPECT_FALSE(r.pass);
  auto half = cz_validate(kernel_hilbert(0.5), 65536, 200);
  EXPECT_TRUE(half.pass);
  EXPECT_NEAR(cz_validate(kernel_hilbert(2.0), 1024, 50).size_smoothness_max, 4.0, 1e-13);
}

TEST(CZValidate, OddSquare) {
  auto r = cz_validate(kernel_odd_square(1.0 / 3.0), 65536, 200);
  EXPECT_LE(r.size_smoothness_max, 1.0 + 1e-12);
  EXPECT_LT(r.cancellation_max, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(CZValidate, LogOscillatingHasNonzeroCancellationButBounded) {
  auto r = cz_validate(kernel_log_osc(), 65536, 400);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.cancellation_max, 0.1);
  EXPECT_LE(r.cancellation_max, 1.0);
}

TEST(CZValidate, Riesz2d) {
  auto r = cz_validate(kernel_riesz2d(0.25), 1024, 40);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.cancellation_max, 1e-8);
  EXPECT_LE(r.size_smoothness_max, 1.0);
}

TEST(Decomposition, SupportAndVanishing) {
  DyadicDecomposition D(kernel_hilbert(), 12);
  for (int n = 1; n <= 12; ++n) {
    auto p = D.piece(n);
    EXPECT_EQ(p(std::ldexp(1.0, n + 1)), 0.0);
    EXPECT_EQ(p(-std::ldexp(1.0, n + 1)), 0.0);
    EXPECT_EQ(p(std::nextafter(std::ldexp(1.0, n - 2), 0.0)), 0.0);
    EXPECT_EQ(p(std::nextafter(std::ldexp(1.0, n), 1e9)), 0.0);
    EXPECT_EQ(p.cn(), 0.0);  // odd kernel: the symmetric integrand vanishes pointwise
  }
}

TEST(Decomposition, MeanZeroEvenKernel) {
  DyadicDecomposition D(kernel_log_osc(), 14);
  for (int n = 1; n <= 14; ++n) {
    auto p = D.piece(n);
    EXPECT_NE(p.cn(), 0.0);
    EXPECT_LE(std::abs(piece_integral(p).value), 1e-8) << n;
    EXPECT_LE(std::abs(p.tn()), 2.0);
  }
}

TEST(Decomposition, ReconstructionBuiltIns) {
  for (auto K : {kernel_hilbert(), kernel_odd_square(), kernel_log_osc()}) {
    DyadicDecomposition D(K, 14);
    for (int N = 3; N <= 14; ++N) {
      double top = std::ldexp(1.0, N - 2);
      for (int i = 0; i <= 400; ++i) {
        double x = std::pow(top, i / 400.0);
        for (double s : {1.0, -1.0}) {
          double y = s * x;
          ASSERT_NEAR(D.partial_sum(&y, N), K(y), 1e-12) << K.name << " N=" << N << " x=" << y;
        }
      }
    }
  }
}

TEST(Decomposition, Riesz2dReconstructionAndMean) {
  auto K = kernel_riesz2d();
  DyadicDecomposition D(K, 8);
  for (int i = 0; i < 100; ++i) {
    double r = std::pow(64.0, i / 100.0), t = 0.37 * i;
    double x[2] = {r * std::cos(t), r * std::sin(t)};
    EXPECT_NEAR(D.partial_sum(x, 8), K(x), 1e-12);
  }
  for (int n = 1; n <= 6; ++n) EXPECT_LE(std::abs(piece_integral(D.piece(n)).value), 1e-8);
}

TEST(Decomposition, Linearity) {
  DyadicDecomposition A(kernel_log_osc(), 10), B(kernel_log_osc().scaled(-3.5), 10);
  for (int n = 1; n <= 10; ++n)
    for (int i = 0; i < 50; ++i) {
      double x = std::ldexp(1.0, n - 2) * (1 + 3.0 * i / 50);
      EXPECT_NEAR(B.piece(n)(x), -3.5 * A.piece(n)(x), 1e-14);
    }
}

TEST(UniformBound, StableAndLinear) {
  DyadicDecomposition D(kernel_hilbert(), 12);
  auto all = D.pieces();
  std::vector<DyadicPiece> first(all.begin(), all.begin() + 6);
  double c6 = piece_uniform_bound(first), c12 = piece_uniform_bound(all);
  EXPECT_TRUE(std::isfinite(c12));
  EXPECT_LE(std::abs(c12 - c6), 0.05 * c6);
  DyadicDecomposition D2(kernel_hilbert(2.0), 12);
  EXPECT_EQ(piece_uniform_bound(D2.pieces()), 2 * c12);
  DyadicDecomposition Z(kernel_zero(), 4);
  EXPECT_EQ(piece_uniform_bound(Z.pieces()), 0.0);
}
