#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "arithmetic.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "lattice.hpp"

namespace radonlab {

// ---- Gauss sums ----

// y^gamma mod q for y in [1, q]^k
inline uint64_t monomial_mod(const std::vector<uint64_t>& y, const MultiIndex& g, uint64_t q) {
  uint64_t v = 1 % q;
  for (size_t c = 0; c < y.size(); ++c) v = mulmod(v, powmod(y[c], static_cast<uint64_t>(g[c]), q), q);
  return v;
}

// G(a/q) = q^{-k} sum_{y in [1,q]^k} e(<a/q, Q(y)>). Residues are histogrammed
// exactly; only q complex terms are summed in floating point.
inline cplx gauss_sum(const std::vector<int64_t>& a, uint64_t q, const MultiIndexSet& G) {
  require(static_cast<int>(a.size()) == G.d(), "gauss_sum: a has wrong length");
  require(q >= 1, "gauss_sum: q must be >= 1");
  double qk = std::pow(static_cast<double>(q), G.k());
  guard(qk <= 1e8, "gauss_sum: q^k exceeds 10^8");
  if (q == 1) return {1.0, 0.0};
  std::vector<uint64_t> am(a.size());
  for (size_t i = 0; i < a.size(); ++i) am[i] = static_cast<uint64_t>(floor_mod(a[i], static_cast<int64_t>(q)));
  std::vector<uint64_t> hist(q, 0);
  std::vector<uint64_t> y(G.k(), 1);
  while (true) {
    uint64_t r = 0;
    for (int i = 0; i < G.d(); ++i)
      if (am[i]) r = (r + mulmod(am[i], monomial_mod(y, G[i], q), q)) % q;
    ++hist[r];
    int c = G.k() - 1;
    while (c >= 0 && y[c] == q) y[c--] = 1;
    if (c < 0) break;
    ++y[c];
  }
  CompensatedComplexSum s;
  for (uint64_t r = 0; r < q; ++r)
    if (hist[r]) s.add(static_cast<double>(hist[r]) * unit_phase(static_cast<long double>(r) / q));
  return s.value() / qk;
}

struct GaussScanRow {
  uint64_t q;
  double max_abs;
  std::vector<int64_t> argmax;
};

// max over a in A_q of |G(a/q)|.
inline GaussScanRow gauss_max(uint64_t q, const MultiIndexSet& G) {
  GaussScanRow row{q, 0.0, std::vector<int64_t>(G.d(), 1)};
  if (q == 1) {
    row.max_abs = 1.0;
    return row;
  }
  auto lin = G.k() == 1 ? G.index_of({1}) : std::nullopt;
  const int d = G.d();
  std::vector<int64_t> a(d, 1);
  if (lin) {
    // sum over y is a length-q DFT in the linear coefficient
    const size_t L = *lin;
    std::vector<uint64_t> ypow(d * q);
    for (uint64_t y = 0; y < q; ++y)
      for (int i = 0; i < d; ++i) ypow[i * q + y] = powmod(y, static_cast<uint64_t>(G[i][0]), q);
    guard(std::pow(static_cast<double>(q), d) <= 5e9, "gauss_max: q^d too large");
    std::vector<cplx> h(q);
    std::vector<int64_t> rest(d, 1);
    while (true) {
      uint64_t g0 = q;
      for (int i = 0; i < d; ++i)
        if (static_cast<size_t>(i) != L) g0 = std::gcd(g0, static_cast<uint64_t>(rest[i]));
      for (uint64_t y = 0; y < q; ++y) {
        uint64_t r = 0;
        for (int i = 0; i < d; ++i)
          if (static_cast<size_t>(i) != L) r = (r + mulmod(static_cast<uint64_t>(rest[i]) % q, ypow[i * q + y], q)) % q;
        h[y] = unit_phase(static_cast<long double>(r) / q);
      }
      dft_inplace(h, {static_cast<int>(q)}, PhaseSign::Plus);
      for (uint64_t a1 = 1; a1 <= q; ++a1) {
        if (std::gcd(g0, a1) != 1) continue;
        double v = std::abs(h[a1 % q]) / static_cast<double>(q);
        if (v > row.max_abs) {
          row.max_abs = v;
          row.argmax = rest;
          row.argmax[L] = static_cast<int64_t>(a1);
        }
      }
      int i = d - 1;
      while (i >= 0 && (static_cast<size_t>(i) == L || rest[i] == static_cast<int64_t>(q))) {
        if (static_cast<size_t>(i) != L) rest[i] = 1;
        --i;
      }
      if (i < 0) break;
      ++rest[i];
    }
    return row;
  }
  guard(std::pow(static_cast<double>(q), d + G.k()) <= 1e9, "gauss_max: brute-force search too large");
  while (true) {
    uint64_t g = q;
    for (auto v : a) g = std::gcd(g, static_cast<uint64_t>(v));
    if (g == 1) {
      double v = std::abs(gauss_sum(a, q, G));
      if (v > row.max_abs) {
        row.max_abs = v;
        row.argmax = a;
      }
    }
    int i = d - 1;
    while (i >= 0 && a[i] == static_cast<int64_t>(q)) a[i--] = 1;
    if (i < 0) break;
    ++a[i];
  }
  return row;
}

inline std::vector<GaussScanRow> gauss_decay_scan(const MultiIndexSet& G, uint64_t qmax, bool primes_only = false) {
  guard(qmax <= 100000, "gauss_decay_scan: qmax above guard");
  std::vector<GaussScanRow> out;
  for (uint64_t q = 1; q <= qmax; ++q) {
    if (primes_only && !is_prime(q)) continue;
    out.push_back(gauss_max(q, G));
  }
  return out;
}

// ---- Weyl sums ----

struct WeylSumSpec {
  int k = 1;
  std::vector<std::pair<MultiIndex, double>> coeffs;  // P(n) = sum xi_gamma n^gamma
  std::vector<int64_t> lo, hi;                         // box region, inclusive
  std::optional<double> ball_radius;                   // if set: ||n - center|| <= radius inside the box
  std::vector<double> center;
  std::function<double(const std::vector<double>&)> weight;  // default 1
  double weight_bound = 1.0;
};

inline cplx weyl_sum(const WeylSumSpec& S) {
  require(static_cast<int>(S.lo.size()) == S.k && static_cast<int>(S.hi.size()) == S.k, "weyl_sum: box has wrong dimension");
  double count = 1;
  for (int i = 0; i < S.k; ++i) count *= static_cast<double>(std::max<int64_t>(0, S.hi[i] - S.lo[i] + 1));
  guard(count <= 1e8, "weyl_sum: more than 10^8 lattice points");
  if (count == 0) return {0, 0};
  CompensatedComplexSum sum;
  std::vector<int64_t> n(S.lo);
  std::vector<double> nd(S.k);
  while (true) {
    bool inside = true;
    if (S.ball_radius) {
      double r2 = 0;
      for (int i = 0; i < S.k; ++i) r2 += (n[i] - S.center[i]) * (n[i] - S.center[i]);
      inside = r2 <= *S.ball_radius * *S.ball_radius;
    }
    if (inside) {
      long double t = 0;
      for (auto& [g, xi] : S.coeffs) {
        int64_t m = 1;
        for (int c = 0; c < S.k; ++c) m = checked_mul(m, checked_pow(n[c], g[c]));
        t += frac_product(xi, m);
      }
      double w = 1.0;
      if (S.weight) {
        for (int i = 0; i < S.k; ++i) nd[i] = static_cast<double>(n[i]);
        w = S.weight(nd);
      }
      sum.add(w * unit_phase(t));
    }
    int i = S.k - 1;
    while (i >= 0 && n[i] == S.hi[i]) n[i] = S.lo[i], --i;
    if (i < 0) break;
    ++n[i];
  }
  return sum.value();
}

struct WeylScanRow {
  int64_t N;
  double normalized;  // |S_N| / N^k
  uint64_t q;         // denominator of the rational approximation used for the window
  bool in_window;     // (log N)^beta <= q <= N^{|gamma0|} (log N)^{-beta}
};

// Continued-fraction convergents of x in [0,1): the last p/q with q <= qmax.
inline std::pair<int64_t, uint64_t> best_convergent(double x, double qmax) {
  x -= std::floor(x);
  int64_t p0 = 0, p1 = 1;
  uint64_t q0 = 1, q1 = 0;
  double r = x;
  int64_t bp = 0;
  uint64_t bq = 1;
  for (int it = 0; it < 64; ++it) {
    double a = std::floor(r);
    int64_t p2 = static_cast<int64_t>(a) * p1 + p0;
    uint64_t q2 = static_cast<uint64_t>(a) * q1 + q0;
    if (static_cast<double>(q2) > qmax) break;
    bp = p2;
    bq = q2;
    p0 = p1, p1 = p2, q0 = q1, q1 = q2;
    double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return {bp, bq};
}

// S_N for P(n) = xi n^{gamma0} on [1, N] (k = 1); q is the best convergent of xi
// with q <= N^{gamma0} (log N)^{-beta}.
inline std::vector<WeylScanRow> weyl_decay_scan(double xi, int gamma0, const std::vector<int64_t>& Nlist, double beta = 1.0,
                                                std::optional<uint64_t> fixed_q = std::nullopt) {
  std::vector<WeylScanRow> out;
  for (int64_t N : Nlist) {
    WeylSumSpec S;
    S.k = 1;
    S.coeffs = {{{gamma0}, xi}};
    S.lo = {1};
    S.hi = {N};
    double norm = std::abs(weyl_sum(S)) / static_cast<double>(N);
    double L = std::pow(std::log(static_cast<double>(N)), beta);
    double qmax = std::pow(static_cast<double>(N), gamma0) / L;
    uint64_t q = fixed_q ? *fixed_q : best_convergent(xi, qmax).second;
    bool win = static_cast<double>(q) >= L && static_cast<double>(q) <= qmax;
    out.push_back({N, norm, q, win});
  }
  return out;
}

inline std::vector<WeylScanRow> weyl_decay_scan(int64_t a, uint64_t q, int gamma0, const std::vector<int64_t>& Nlist, double beta = 1.0) {
  require(q >= 1 && std::gcd(static_cast<uint64_t>(floor_mod(a, static_cast<int64_t>(q))), q) == 1,
          "weyl_decay_scan: need gcd(a, q) = 1");
  return weyl_decay_scan(static_cast<double>(a) / static_cast<double>(q), gamma0, Nlist, beta, q);
}

// ---- the lattice multiplier m_n ----

// Nonzero lattice values of K_n with their images Q(y).
struct PieceLattice {
  int n = 0;
  int k = 1, d = 1;
  std::vector<int64_t> Q;  // row-major, d entries per point
  std::vector<double> K;

  size_t size() const { return K.size(); }
};

inline PieceLattice piece_lattice(const DyadicPiece& p, const MultiIndexSet& G) {
  require(p.k() == G.k(), "piece and Gamma have different k");
  guard(std::ldexp(1.0, p.n() * p.k()) <= 1e8, "multiplier: 2^{nk} exceeds 10^8");
  PieceLattice L;
  L.n = p.n();
  L.k = G.k();
  L.d = G.d();
  if (p.is_zero()) return L;
  const int64_t R = static_cast<int64_t>(p.support_hi());
  std::vector<int64_t> y(L.k, -R);
  std::vector<double> yd(L.k);
  while (true) {
    for (int i = 0; i < L.k; ++i) yd[i] = static_cast<double>(y[i]);
    double v = p(yd.data());
    if (v != 0.0) {
      auto q = canonical_eval(G, y);
      L.Q.insert(L.Q.end(), q.begin(), q.end());
      L.K.push_back(v);
    }
    int i = L.k - 1;
    while (i >= 0 && y[i] == R) y[i--] = -R;
    if (i < 0) break;
    ++y[i];
  }
  return L;
}

class MultiplierEvaluator {
 public:
  MultiplierEvaluator(const DyadicPiece& p, const MultiIndexSet& G) : L_(piece_lattice(p, G)) {}
  explicit MultiplierEvaluator(PieceLattice L) : L_(std::move(L)) {}

  const PieceLattice& lattice() const { return L_; }

  // direct summation at an arbitrary real xi, with exact phase reduction
  cplx operator()(const std::vector<double>& xi) const {
    require(static_cast<int>(xi.size()) == L_.d, "multiplier: xi has wrong length");
    CompensatedComplexSum s;
    for (size_t t = 0; t < L_.size(); ++t) {
      long double ph = 0;
      for (int i = 0; i < L_.d; ++i) ph += frac_product(xi[i], L_.Q[t * L_.d + i]);
      s.add(L_.K[t] * unit_phase(ph));
    }
    return s.value();
  }

  // m_n(a/q + theta): the rational part is reduced exactly so theta keeps full precision
  cplx at_rational(const std::vector<int64_t>& a, uint64_t q, const std::vector<double>& theta) const {
    require(static_cast<int>(a.size()) == L_.d && static_cast<int>(theta.size()) == L_.d, "multiplier: wrong length");
    const int64_t qq = static_cast<int64_t>(q);
    CompensatedComplexSum s;
    for (size_t t = 0; t < L_.size(); ++t) {
      int64_t r = 0;
      long double ph = 0;
      for (int i = 0; i < L_.d; ++i) {
        int64_t Qv = L_.Q[t * L_.d + i];
        r = floor_mod(static_cast<int64_t>((r + static_cast<__int128>(floor_mod(a[i], qq)) * floor_mod(Qv, qq)) % qq), qq);
        ph += frac_product(theta[i], Qv);
      }
      s.add(L_.K[t] * unit_phase(ph + static_cast<long double>(r) / qq));
    }
    return s.value();
  }

  // direct summation at xi = j/B using integer phases
  cplx at_grid(const std::vector<int64_t>& j, const std::vector<int>& B) const {
    CompensatedComplexSum s;
    for (size_t t = 0; t < L_.size(); ++t) {
      long double ph = 0;
      for (int i = 0; i < L_.d; ++i) {
        int64_t r = floor_mod(static_cast<int64_t>((static_cast<__int128>(j[i]) * L_.Q[t * L_.d + i]) % B[i]), B[i]);
        ph += static_cast<long double>(r) / B[i];
      }
      s.add(L_.K[t] * unit_phase(ph));
    }
    return s.value();
  }

  double sum_K() const {
    CompensatedSum<double> s;
    for (double v : L_.K) s.add(v);
    return s.value();
  }
  double sum_K2() const {
    CompensatedSum<double> s;
    for (double v : L_.K) s.add(v * v);
    return s.value();
  }

 private:
  PieceLattice L_;
};

inline cplx multiplier_mn(const DyadicPiece& p, const MultiIndexSet& G, const std::vector<double>& xi) {
  return MultiplierEvaluator(p, G)(xi);
}

// Scatter K_n(y) onto Q(y) mod B, then one d-dimensional DFT.
inline SampledMultiplier multiplier_mn_grid(const PieceLattice& L, const std::vector<int>& extents) {
  require(static_cast<int>(extents.size()) == L.d, "multiplier grid: extents have wrong length");
  SampledMultiplier S(extents);
  std::vector<int64_t> j(L.d);
  for (size_t t = 0; t < L.size(); ++t) {
    for (int i = 0; i < L.d; ++i) j[i] = L.Q[t * L.d + i];
    S.values[S.index(j)] += L.K[t];
  }
  dft_inplace(S.values, extents, PhaseSign::Plus);
  S.metadata = {{"family", "m_n"}, {"n", L.n}};
  return S;
}

inline SampledMultiplier multiplier_mn_grid(const DyadicPiece& p, const MultiIndexSet& G, int B) {
  return multiplier_mn_grid(piece_lattice(p, G), std::vector<int>(G.d(), B));
}

// ---- the continuous symbol Phi_n (k = 1) ----

struct PhiResult {
  cplx value;
  double error;
  long panels;
};

inline PhiResult phi_n(const DyadicPiece& p, const MultiIndexSet& G, const std::vector<double>& xi) {
  require(G.k() == 1, "phi_n: only k = 1 is supported");
  require(static_cast<int>(xi.size()) == G.d(), "phi_n: xi has wrong length");
  const int n = p.n();
  double budget = 0, omega = 0;
  for (int i = 0; i < G.d(); ++i) {
    int g = G[i][0];
    budget = std::max(budget, std::abs(xi[i]) * std::ldexp(1.0, n * g));
    omega += std::abs(xi[i]) * g * std::ldexp(1.0, n * (g - 1));  // max |d/dy phase|
  }
  guard(budget <= 1e6, "phi_n: oscillation budget max |xi_gamma| 2^{n|gamma|} exceeds 10^6");
  PhiResult res{{0, 0}, 0, 0};
  if (p.is_zero()) return res;
  const GaussRule& g12 = gauss_legendre(12);
  const GaussRule& g8 = gauss_legendre(8);
  auto f = [&](double y) {
    long double ph = 0;
    for (int i = 0; i < G.d(); ++i) ph += static_cast<long double>(xi[i]) * std::pow(static_cast<long double>(y), G[i][0]);
    return p(y) * unit_phase(ph);
  };
  const double a = p.support_lo(), m = std::ldexp(1.0, n - 1), b = p.support_hi();
  const double pieces[4][2] = {{-b, -m}, {-m, -a}, {a, m}, {m, b}};
  CompensatedComplexSum s12;
  double err = 0;
  for (auto& iv : pieces) {
    double len = iv[1] - iv[0];
    long cnt = std::max<long>(8, static_cast<long>(std::ceil(len * 4 * omega)));
    double h = len / cnt;
    for (long c = 0; c < cnt; ++c) {
      double lo = iv[0] + c * h, hi = c + 1 == cnt ? iv[1] : lo + h;
      cplx v12 = gl_panel(f, lo, hi, g12), v8 = gl_panel(f, lo, hi, g8);
      s12.add(v12);
      err += std::abs(v12 - v8);
    }
    res.panels += cnt;
  }
  res.value = s12.value();
  res.error = err;
  if (err > 1e-7) throw QuadratureError("phi_n: error estimate above 1e-7");
  return res;
}

// ---- van der Corput envelope constants ----

struct VdcRow {
  int n;
  double C_small;  // sup |Phi_n| / min(1, |x|_inf)
  double C_large;  // sup |Phi_n| / min(1, |x|_inf^{-1/d})
};

struct VdcReport {
  std::vector<VdcRow> rows;
  bool stable_small = false, stable_large = false;
  bool pass = false;
};

// Samples xi = 2^{-nA} x along the anisotropic ray x(s) = s^A v, s log-spaced in
// [s_min, s_max]; the constants are computed in the scaled variable x = 2^{nA} xi.
inline VdcReport vdc_check(const std::vector<DyadicPiece>& pieces, const MultiIndexSet& G, const std::vector<double>& v,
                           double s_min, double s_max, int per_octave = 4, double tol = 0.2) {
  VdcReport rep;
  DilationExponents A(G);
  int S = static_cast<int>(std::ceil(std::log2(s_max / s_min) * per_octave));
  for (auto& p : pieces) {
    VdcRow row{p.n(), 0, 0};
    for (int i = 0; i <= S; ++i) {
      double s = s_min * std::exp2(static_cast<double>(i) / per_octave);
      auto x = A.dilate(s, v);
      double xinf = 0;
      for (double t : x) xinf = std::max(xinf, std::abs(t));
      auto xi = A.dilate(std::ldexp(1.0, -p.n()), x);
      double phi = std::abs(phi_n(p, G, xi).value);
      row.C_small = std::max(row.C_small, phi / std::min(1.0, xinf));
      row.C_large = std::max(row.C_large, phi / std::min(1.0, std::pow(xinf, -1.0 / G.d())));
    }
    rep.rows.push_back(row);
  }
  auto stable = [&](auto get) {
    std::vector<double> vals;
    for (auto& r : rep.rows) vals.push_back(get(r));
    if (vals.empty()) return true;
    std::vector<double> sorted(vals);
    std::sort(sorted.begin(), sorted.end());
    double med = sorted[sorted.size() / 2];
    if (med == 0) return sorted.back() == 0;
    for (double x : vals)
      if (std::abs(x - med) > tol * med) return false;
    return true;
  };
  rep.stable_small = stable([](const VdcRow& r) { return r.C_small; });
  rep.stable_large = stable([](const VdcRow& r) { return r.C_large; });
  rep.pass = rep.stable_small && rep.stable_large;
  return rep;
}

// ---- major-arc approximation ----

struct Prop0Result {
  double max_ratio = 0;
  double max_error = 0;
  int samples = 0;
};

inline void prop0_preconditions(int n, const MultiIndexSet& G, const std::vector<int64_t>& a, uint64_t q, double L1,
                                double L2, double L3) {
  require(static_cast<int>(a.size()) == G.d(), "prop0_error: a has wrong length");
  require(q >= 1 && static_cast<double>(q) <= L3 && L3 <= std::exp2(n / 2.0) + 1e-12,
          "prop0_error: need 1 <= q <= L3 <= 2^{n/2}");
  require(L1 >= std::ldexp(1.0, n), "prop0_error: need L1 >= 2^n");
  require(L2 >= 1, "prop0_error: need L2 >= 1");
  uint64_t g = q;
  for (auto v : a) g = std::gcd(g, static_cast<uint64_t>(floor_mod(v, static_cast<int64_t>(q))));
  require(g == 1, "prop0_error: a/q is not reduced");
}

// max over the given theta of |m_n(a/q + theta) - G(a/q) Phi_n(theta)| / (L2 L3 2^{-n})
inline Prop0Result prop0_error_at(const MultiplierEvaluator& M, const DyadicPiece& p, const MultiIndexSet& G,
                                  const std::vector<int64_t>& a, uint64_t q, double L2, double L3,
                                  const std::vector<std::vector<double>>& thetas) {
  cplx Gq = gauss_sum(a, q, G);
  Prop0Result r;
  for (auto& theta : thetas) {
    cplx mn = M.at_rational(a, q, theta);
    cplx ph = phi_n(p, G, theta).value;
    double e = std::abs(mn - Gq * ph);
    r.max_error = std::max(r.max_error, e);
    r.max_ratio = std::max(r.max_ratio, e / (L2 * L3 * std::ldexp(1.0, -p.n())));
    ++r.samples;
  }
  return r;
}

// theta = 0, the corners of the box |theta_gamma| <= L1^{-|gamma|} L2, then uniform draws
inline std::vector<std::vector<double>> prop0_samples(const MultiIndexSet& G, double L1, double L2, int samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto deg = G.degrees();
  const int corners = G.d() <= 10 ? 1 << G.d() : 0;
  std::vector<std::vector<double>> out;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> theta(G.d(), 0.0);
    for (int i = 0; i < G.d(); ++i) {
      double w = std::pow(L1, -deg[i]) * L2;
      if (s >= 1 && s <= corners) theta[i] = ((s - 1) >> i & 1) ? w : -w;
      else if (s > corners) theta[i] = U(rng) * w;
    }
    out.push_back(std::move(theta));
  }
  return out;
}

inline Prop0Result prop0_error(const MultiplierEvaluator& M, const DyadicPiece& p, const MultiIndexSet& G,
                               const std::vector<int64_t>& a, uint64_t q, double L1, double L2, double L3, int samples,
                               uint64_t seed = 1) {
  prop0_preconditions(p.n(), G, a, q, L1, L2, L3);
  return prop0_error_at(M, p, G, a, q, L2, L3, prop0_samples(G, L1, L2, samples, seed));
}

}  // namespace radonlab
