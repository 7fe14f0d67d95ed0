#include <gtest/gtest.h>

#include <random>

#include "radonlab/expsums.hpp"
#include "radonlab/fit.hpp"

using namespace radonlab;

namespace {

const MultiIndexSet G12 = gamma_1d({1, 2});

const DyadicDecomposition& hilbert_decomp() {
  static const DyadicDecomposition D(kernel_hilbert(), 12);
  return D;
}

const DyadicDecomposition& logosc_decomp() {
  static const DyadicDecomposition D(kernel_log_osc(), 10);
  return D;
}

// plain double sum, an independent oracle for gauss_sum
cplx naive_gauss(const std::vector<int64_t>& a, int64_t q, const MultiIndexSet& G) {
  cplx s = 0;
  std::vector<int64_t> y(G.k(), 1);
  while (true) {
    auto Q = canonical_eval(G, y);
    long double t = 0;
    for (int i = 0; i < G.d(); ++i) t += static_cast<long double>(floor_mod(a[i] * floor_mod(Q[i], q), q)) / q;
    s += std::polar(1.0, static_cast<double>(2 * M_PIl * (t - std::floor(t))));
    int c = G.k() - 1;
    while (c >= 0 && y[c] == q) y[c--] = 1;
    if (c < 0) break;
    ++y[c];
  }
  return s / std::pow(static_cast<double>(q), G.k());
}

}  // namespace

TEST(GaussSum, Examples) {
  EXPECT_EQ(gauss_sum({0, 0}, 1, G12), cplx(1, 0));
  EXPECT_EQ(gauss_sum({5, -3}, 1, G12), cplx(1, 0));
  auto g = gauss_sum({1, 1}, 2, G12);
  EXPECT_EQ(g.real(), 1.0);
  EXPECT_EQ(g.imag(), 0.0);
  EXPECT_NEAR(std::abs(gauss_sum({0, 1}, 5, G12)), 0.4472135955, 1e-10);
}

TEST(GaussSum, MatchesNaiveAndBounded) {
  std::mt19937_64 rng(11);
  auto G2 = gamma_set(2, 2);
  for (int t = 0; t < 60; ++t) {
    const auto& G = t % 2 ? G12 : G2;
    int64_t q = 2 + static_cast<int64_t>(rng() % (t % 2 ? 60 : 12));
    std::vector<int64_t> a(G.d());
    for (auto& v : a) v = static_cast<int64_t>(rng() % 200) - 100;
    auto g = gauss_sum(a, q, G);
    EXPECT_LE(std::abs(g), 1 + 1e-12);
    EXPECT_LT(std::abs(g - naive_gauss(a, q, G)), 1e-12);
  }
}

TEST(GaussSum, Guard) {
  EXPECT_THROW(gauss_sum({1, 1}, 100000001, G12), GuardError);
  EXPECT_THROW(gauss_sum({1}, 5, G12), InvalidArgument);
}

TEST(GaussSum, QuadraticMaximaAtOddPrimes) {
  for (uint64_t q : primes_up_to(199)) {
    if (q == 2) continue;
    EXPECT_NEAR(gauss_max(q, G12).max_abs, 1 / std::sqrt(static_cast<double>(q)), 1e-10) << q;
  }
}

TEST(GaussSum, LinearSetHasZeroMaxima) {
  auto G1 = gamma_1d({1});
  for (uint64_t q = 2; q <= 40; ++q) EXPECT_LT(gauss_max(q, G1).max_abs, 1e-12) << q;
  EXPECT_EQ(gauss_max(1, G1).max_abs, 1.0);
}

TEST(GaussSum, FastMaxMatchesBruteForce) {
  auto G13 = gamma_1d({1, 3});
  for (const MultiIndexSet* G : std::initializer_list<const MultiIndexSet*>{&G12, &G13}) {
    for (uint64_t q = 2; q <= 30; ++q) {
      double best = 0;
      for (int64_t a1 = 1; a1 <= static_cast<int64_t>(q); ++a1)
        for (int64_t a2 = 1; a2 <= static_cast<int64_t>(q); ++a2)
          if (std::gcd(std::gcd(a1, a2), static_cast<int64_t>(q)) == 1)
            best = std::max(best, std::abs(naive_gauss({a1, a2}, q, *G)));
      EXPECT_NEAR(gauss_max(q, *G).max_abs, best, 1e-12) << q;
    }
  }
}

TEST(GaussSum, BruteForceMaxForTwoVariables) {
  auto G2 = MultiIndexSet::custom(2, {{0, 1}, {1, 0}});  // k = 2 takes the brute-force path
  for (uint64_t q = 2; q <= 6; ++q) EXPECT_LT(gauss_max(q, G2).max_abs, 1e-12) << q;
}

TEST(GaussSum, FittedDecayOverPrimes) {
  std::vector<double> x, y;
  for (auto& r : gauss_decay_scan(G12, 500, true)) {
    if (r.q == 2) continue;
    x.push_back(static_cast<double>(r.q));
    y.push_back(r.max_abs);
  }
  auto f = fit_power_law(x, y);
  EXPECT_GE(-f.slope, 0.45);
  EXPECT_NEAR(f.slope, -0.5, 1e-10);
}

TEST(WeylSum, Examples) {
  WeylSumSpec S;
  S.lo = {1};
  S.hi = {37};
  EXPECT_EQ(weyl_sum(S), cplx(37, 0));
  S.hi = {4};
  S.coeffs = {{{1}, 0.5}};
  EXPECT_LT(std::abs(weyl_sum(S)), 1e-15);
  S.coeffs = {{{2}, 0.25}};
  auto v = weyl_sum(S);
  EXPECT_NEAR(v.real(), 2.0, 1e-14);
  EXPECT_NEAR(v.imag(), 2.0, 1e-14);
}

TEST(WeylSum, BallAndWeight) {
  WeylSumSpec S;
  S.k = 2;
  S.lo = {-3, -3};
  S.hi = {3, 3};
  S.center = {0, 0};
  S.ball_radius = 2.0;
  EXPECT_EQ(weyl_sum(S), cplx(13, 0));
  S.weight = [](const std::vector<double>& n) { return n[0] == 0 ? 2.0 : 1.0; };
  EXPECT_EQ(weyl_sum(S), cplx(18, 0));
}

TEST(WeylSum, MatchesNaiveAndPeriodic) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int t = 0; t < 20; ++t) {
    double x1 = U(rng), x2 = U(rng);
    WeylSumSpec S;
    S.lo = {-50};
    S.hi = {200};
    S.coeffs = {{{1}, x1}, {{2}, x2}};
    cplx ref = 0;
    for (int n = -50; n <= 200; ++n) {
      long double ph = static_cast<long double>(x1) * n + static_cast<long double>(x2) * n * n;
      ph -= std::floor(ph);
      ref += std::polar(1.0, static_cast<double>(2 * M_PIl * ph));
    }
    EXPECT_LT(std::abs(weyl_sum(S) - ref), 1e-10);
  }
  WeylSumSpec A, B;
  A.lo = B.lo = {1};
  A.hi = B.hi = {300};
  A.coeffs = {{{2}, 0.375}};
  B.coeffs = {{{2}, 3.375}};
  EXPECT_EQ(weyl_sum(A), weyl_sum(B));
}

TEST(WeylSum, Guard) {
  WeylSumSpec S;
  S.k = 2;
  S.lo = {0, 0};
  S.hi = {20000, 20000};
  EXPECT_THROW(weyl_sum(S), GuardError);
}

TEST(WeylScan, WindowReporting) {
  auto rows = weyl_decay_scan(int64_t{0}, 1, 2, {64, 128, 256});
  for (auto& r : rows) {
    EXPECT_FALSE(r.in_window);
    EXPECT_NEAR(r.normalized, 1.0, 1e-15);
  }
  auto rational = weyl_decay_scan(int64_t{1}, 5, 2, {64, 4096});
  EXPECT_TRUE(rational[0].in_window);
  EXPECT_NEAR(rational[1].normalized, std::abs(gauss_sum({0, 1}, 5, G12)), 2e-3);
  EXPECT_THROW(weyl_decay_scan(int64_t{2}, 4, 2, {64}), InvalidArgument);
}

TEST(WeylScan, ConvergentOfGoldenRatio) {
  auto [p, q] = best_convergent((1 + std::sqrt(5.0)) / 2, 100);
  EXPECT_EQ(q, 89u);
  EXPECT_EQ(p, 55);
}

TEST(Multiplier, ZeroFrequencyAndPeriodicity) {
  auto p = hilbert_decomp().piece(6);
  MultiplierEvaluator M(p, G12);
  CompensatedSum<double> s;
  for (int y = -64; y <= 64; ++y) {
    double yd = y;
    s.add(p(&yd));
  }
  EXPECT_NEAR(M({0, 0}).real(), s.value(), 1e-15);
  EXPECT_EQ(M({0, 0}).imag(), 0.0);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    double a = static_cast<double>(rng() % 1024) / 1024, b = static_cast<double>(rng() % 1024) / 1024;
    EXPECT_EQ(M({a, b}), M({a + 1, b}));
    EXPECT_EQ(M({a, b}), M({a, b - 3}));
  }
}

TEST(Multiplier, OddSymmetry) {
  auto G13 = gamma_1d({1, 3});
  auto p = hilbert_decomp().piece(5);
  MultiplierEvaluator M(p, G13);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int t = 0; t < 20; ++t) {
    double a = U(rng), b = U(rng);
    EXPECT_LT(std::abs(M({-a, -b}) - std::conj(M({a, b}))), 1e-13);
  }
}

TEST(Multiplier, GridMatchesDirect) {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 8; ++n) {
    auto p = hilbert_decomp().piece(n);
    auto L = piece_lattice(p, G12);
    MultiplierEvaluator M(L);
    auto S = multiplier_mn_grid(L, {64, 64});
    for (int t = 0; t < 100; ++t) {
      size_t idx = rng() % S.size();
      auto j = S.multi_index(idx);
      EXPECT_LT(std::abs(S[idx] - M(S.point(idx))), 1e-10);
      EXPECT_LT(std::abs(S[idx] - M.at_grid(j, {64, 64})), 1e-10);
    }
    EXPECT_NEAR(S[0].real(), M.sum_K(), 1e-12);
  }
}

TEST(Multiplier, GridParseval) {
  for (int n = 1; n <= 4; ++n) {
    auto p = logosc_decomp().piece(n);
    MultiplierEvaluator M(p, G12);
    auto S = multiplier_mn_grid(M.lattice(), {64, 64});
    CompensatedSum<double> m2;
    for (auto& v : S.values) m2.add(std::norm(v));
    EXPECT_NEAR(m2.value() / static_cast<double>(S.size()), M.sum_K2(), 1e-10) << n;
  }
}

TEST(Multiplier, ZeroKernel) {
  DyadicDecomposition Z(kernel_zero(), 6);
  auto S = multiplier_mn_grid(Z.piece(5), G12, 32);
  for (auto& v : S.values) EXPECT_EQ(v, cplx(0, 0));
  EXPECT_EQ(multiplier_mn(Z.piece(5), G12, {0.3, 0.1}), cplx(0, 0));
}

TEST(Multiplier, RationalEvaluationAgreesOnDyadics) {
  auto p = hilbert_decomp().piece(7);
  MultiplierEvaluator M(p, G12);
  std::vector<double> theta = {std::ldexp(3.0, -12), std::ldexp(-5.0, -16)};
  auto a = M.at_rational({1, 3}, 8, theta);
  auto b = M({1.0 / 8 + theta[0], 3.0 / 8 + theta[1]});
  EXPECT_LT(std::abs(a - b), 1e-14);
}

TEST(Multiplier, Guard) {
  DyadicDecomposition D(kernel_riesz2d(), 2);
  auto G = gamma_set(2, 1);
  EXPECT_NO_THROW(piece_lattice(D.piece(2), G));
  EXPECT_THROW(piece_lattice(hilbert_decomp().piece(2), G), InvalidArgument);
}

TEST(Phi, MeanZeroAtOrigin) {
  for (int n = 1; n <= 12; ++n) {
    auto r = phi_n(hilbert_decomp().piece(n), G12, {0, 0});
    EXPECT_LT(std::abs(r.value), 1e-7);
    EXPECT_LE(r.error, 1e-7);
  }
  for (int n = 1; n <= 10; ++n) EXPECT_LT(std::abs(phi_n(logosc_decomp().piece(n), G12, {0, 0}).value), 1e-7) << n;
}

TEST(Phi, MatchesAdaptiveQuadrature) {
  auto p = logosc_decomp().piece(6);
  std::vector<std::vector<double>> xis = {{0.01, 0.0003}, {-0.05, 0.001}, {0.2, -0.002}};
  for (auto& xi : xis) {
    auto part = [&](bool imag) {
      auto f = [&](double y) {
        double ph = 2 * M_PI * (xi[0] * y + xi[1] * y * y);
        return p(&y) * (imag ? std::sin(ph) : std::cos(ph));
      };
      return adaptive_gauss_legendre(f, -64, -16, 1e-13, 1e-14).value + adaptive_gauss_legendre(f, 16, 64, 1e-13, 1e-14).value;
    };
    auto r = phi_n(p, G12, xi);
    EXPECT_NEAR(r.value.real(), part(false), 1e-9);
    EXPECT_NEAR(r.value.imag(), part(true), 1e-9);
  }
}

TEST(Phi, Preconditions) {
  EXPECT_THROW(phi_n(hilbert_decomp().piece(10), G12, {0, 1.0}), GuardError);
  DyadicDecomposition D(kernel_riesz2d(), 2);
  EXPECT_THROW(phi_n(D.piece(2), gamma_set(2, 1), {0, 0}), InvalidArgument);
}

TEST(Vdc, HilbertConstantsStable) {
  std::vector<DyadicPiece> ps;
  for (int n = 2; n <= 10; ++n) ps.push_back(hilbert_decomp().piece(n));
  auto rep = vdc_check(ps, G12, {1, 1}, 1.0 / 64, 32);
  EXPECT_TRUE(rep.pass);
  for (auto& r : rep.rows) {
    EXPECT_GT(r.C_small, 0);
    EXPECT_TRUE(std::isfinite(r.C_large));
  }
  // rescaling xi by 2^{-A} moves the curve one dyadic step: the constants do not change
  for (auto& r : rep.rows) {
    EXPECT_NEAR(r.C_small, rep.rows[0].C_small, 1e-6 * rep.rows[0].C_small);
    EXPECT_NEAR(r.C_large, rep.rows[0].C_large, 1e-6 * rep.rows[0].C_large);
  }
  DilationExponents A(G12);
  std::vector<double> xi = {0.01, 0.003};
  for (int n = 2; n < 10; ++n) {
    auto a = phi_n(hilbert_decomp().piece(n), G12, xi).value;
    auto b = phi_n(hilbert_decomp().piece(n + 1), G12, A.dilate(0.5, xi)).value;
    EXPECT_LT(std::abs(a - b), 1e-9) << n;
  }
}

TEST(Vdc, ZeroKernel) {
  DyadicDecomposition Z(kernel_zero(), 5);
  auto rep = vdc_check(Z.pieces(), G12, {1, 1}, 0.1, 10);
  for (auto& r : rep.rows) {
    EXPECT_EQ(r.C_small, 0);
    EXPECT_EQ(r.C_large, 0);
  }
  EXPECT_TRUE(rep.pass);
}

TEST(Prop0, OriginTermSmall) {
  for (int n = 8; n <= 12; ++n) {
    auto p = hilbert_decomp().piece(n);
    MultiplierEvaluator M(p, G12);
    auto r = prop0_error_at(M, p, G12, {0, 0}, 1, 1.0, 1.0, {{0, 0}});
    EXPECT_LT(r.max_ratio, 1.0);
  }
}

TEST(Prop0, DoublingL2DecreasesRatio) {
  auto p = logosc_decomp().piece(8);
  MultiplierEvaluator M(p, G12);
  auto th = prop0_samples(G12, 256, 2.0, 12, 4);
  auto a = prop0_error_at(M, p, G12, {1, 2}, 5, 2.0, 5.0, th);
  auto b = prop0_error_at(M, p, G12, {1, 2}, 5, 4.0, 5.0, th);
  EXPECT_LE(b.max_ratio, a.max_ratio);
  EXPECT_EQ(a.max_error, b.max_error);
}

TEST(Prop0, Preconditions) {
  auto p = hilbert_decomp().piece(8);
  MultiplierEvaluator M(p, G12);
  EXPECT_THROW(prop0_error(M, p, G12, {1, 1}, 5, 256, 1, 4, 4), InvalidArgument);     // q > L3
  EXPECT_THROW(prop0_error(M, p, G12, {1, 1}, 5, 256, 1, 17, 4), InvalidArgument);    // L3 > 2^{n/2}
  EXPECT_THROW(prop0_error(M, p, G12, {1, 1}, 5, 100, 1, 5, 4), InvalidArgument);     // L1 < 2^n
  EXPECT_THROW(prop0_error(M, p, G12, {1, 1}, 5, 256, 0.5, 5, 4), InvalidArgument);   // L2 < 1
  EXPECT_THROW(prop0_error(M, p, G12, {2, 4}, 4, 256, 1, 5, 4), InvalidArgument);     // not reduced
}

TEST(Prop0, RatiosBoundedAcrossScales) {
  for (uint64_t q : {1u, 2u, 5u}) {
    std::vector<int64_t> a = q == 1 ? std::vector<int64_t>{0, 0} : std::vector<int64_t>{1, 1};
    std::vector<double> ratios;
    for (int n = 8; n <= 12; ++n) {
      auto p = hilbert_decomp().piece(n);
      MultiplierEvaluator M(p, G12);
      ratios.push_back(prop0_error(M, p, G12, a, q, std::ldexp(1.0, n), 1.0, 5.0, 24).max_ratio);
    }
    for (double r : ratios) EXPECT_LE(r, 1.1 * ratios.front()) << q;
  }
}

TEST(Prop0, ScaledErrorOnLogBox) {
  // L1 = 2^n, L2 = 2^{n/10}, L3 = e^{n^{1/10}}: q^{1/2} |error| 2^{n/2} stays bounded
  std::vector<double> scaled;
  for (int n = 10; n <= 12; ++n) {
    auto p = hilbert_decomp().piece(n);
    MultiplierEvaluator M(p, G12);
    double L3 = std::exp(std::pow(n, 0.1));
    double worst = 0;
    for (uint64_t q : {1u, 2u, 3u}) {
      std::vector<int64_t> a = q == 1 ? std::vector<int64_t>{0, 0} : std::vector<int64_t>{1, 1};
      auto r = prop0_error(M, p, G12, a, q, std::ldexp(1.0, n), std::exp2(0.1 * n), L3, 12);
      worst = std::max(worst, std::sqrt(static_cast<double>(q)) * r.max_error * std::exp2(n / 2.0));
    }
    scaled.push_back(worst);
  }
  for (double s : scaled) EXPECT_LE(s, 1.1 * scaled.front() + 1e-12);
}
