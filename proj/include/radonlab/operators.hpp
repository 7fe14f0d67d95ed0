#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "expsums.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "lattice.hpp"

namespace radonlab {

using Point = std::vector<int64_t>;

// Dense array on the box origin + [0, extents), row-major, first axis slowest.
struct DenseBox {
  std::vector<int64_t> origin, extents;
  std::vector<cplx> values;

  DenseBox() = default;
  DenseBox(std::vector<int64_t> o, std::vector<int64_t> e) : origin(std::move(o)), extents(std::move(e)) {
    require(origin.size() == extents.size(), "DenseBox: origin/extents mismatch");
    double n = 1;
    for (auto x : extents) {
      require(x >= 0, "DenseBox: negative extent");
      n *= static_cast<double>(x);
    }
    guard(n <= 6e7, "DenseBox: box exceeds 6e7 points");
    values.assign(static_cast<size_t>(n), cplx(0, 0));
  }

  int d() const { return static_cast<int>(extents.size()); }
  size_t size() const { return values.size(); }
  bool contains(const Point& x) const {
    for (int i = 0; i < d(); ++i)
      if (x[i] < origin[i] || x[i] >= origin[i] + extents[i]) return false;
    return true;
  }
  size_t index(const Point& x) const {
    size_t idx = 0;
    for (int i = 0; i < d(); ++i) idx = idx * extents[i] + static_cast<size_t>(x[i] - origin[i]);
    return idx;
  }
  Point point(size_t idx) const {
    Point x(d());
    for (int i = d() - 1; i >= 0; --i) {
      x[i] = origin[i] + static_cast<int64_t>(idx % extents[i]);
      idx /= extents[i];
    }
    return x;
  }
  cplx at(const Point& x) const { return contains(x) ? values[index(x)] : cplx(0, 0); }
};

// Finitely supported f: Z^d -> C, stored sparsely.
class LatticeFunction {
 public:
  explicit LatticeFunction(int d = 1) : d_(d) { require(d >= 1, "LatticeFunction: d must be >= 1"); }

  int d() const { return d_; }
  size_t support_size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const std::map<Point, cplx>& entries() const { return pts_; }

  void set(const Point& x, cplx v) {
    require(static_cast<int>(x.size()) == d_, "LatticeFunction: point has wrong dimension");
    if (v == cplx(0, 0)) pts_.erase(x);
    else pts_[x] = v;
  }
  void add(const Point& x, cplx v) { set(x, get(x) + v); }
  cplx get(const Point& x) const {
    auto it = pts_.find(x);
    return it == pts_.end() ? cplx(0, 0) : it->second;
  }

  std::pair<Point, Point> bounding_box() const {  // inclusive lo, hi
    require(!pts_.empty(), "LatticeFunction: empty support has no bounding box");
    Point lo = pts_.begin()->first, hi = lo;
    for (auto& [x, v] : pts_)
      for (int i = 0; i < d_; ++i) lo[i] = std::min(lo[i], x[i]), hi[i] = std::max(hi[i], x[i]);
    return {lo, hi};
  }

  DenseBox to_dense() const {
    if (pts_.empty()) return DenseBox(Point(d_, 0), Point(d_, 1));
    auto [lo, hi] = bounding_box();
    Point ext(d_);
    for (int i = 0; i < d_; ++i) ext[i] = hi[i] - lo[i] + 1;
    DenseBox B(lo, ext);
    for (auto& [x, v] : pts_) B.values[B.index(x)] = v;
    return B;
  }

  static LatticeFunction from_dense(const DenseBox& B) {
    LatticeFunction f(B.d());
    for (size_t i = 0; i < B.size(); ++i)
      if (B.values[i] != cplx(0, 0)) f.pts_[B.point(i)] = B.values[i];
    return f;
  }

  nlohmann::json to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (auto& [x, v] : pts_) {
      nlohmann::json row = nlohmann::json::array();
      for (auto c : x) row.push_back(c);
      row.push_back(v.real());
      row.push_back(v.imag());
      pts.push_back(row);
    }
    return {{"d", d_}, {"points", pts}};
  }

  static LatticeFunction from_json(const nlohmann::json& j) {
    require(j.contains("d") && j.contains("points"), "LatticeFunction JSON needs d and points");
    LatticeFunction f(j.at("d").get<int>());
    for (auto& row : j.at("points")) {
      require(row.is_array() && static_cast<int>(row.size()) == f.d_ + 2, "LatticeFunction JSON: bad point row");
      Point x(f.d_);
      for (int i = 0; i < f.d_; ++i) x[i] = row[i].get<int64_t>();
      f.set(x, {row[f.d_].get<double>(), row[f.d_ + 1].get<double>()});
    }
    return f;
  }

  bool operator==(const LatticeFunction& o) const { return d_ == o.d_ && pts_ == o.pts_; }

 private:
  int d_;
  std::map<Point, cplx> pts_;
};

// Binary box format: "RLBOX1\0\0", int64 d, origin[d], extents[d], then re/im doubles row-major.
inline void write_box(const DenseBox& B, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "write_box: cannot open " + path);
  const char magic[8] = {'R', 'L', 'B', 'O', 'X', '1', 0, 0};
  out.write(magic, 8);
  int64_t d = B.d();
  out.write(reinterpret_cast<const char*>(&d), 8);
  out.write(reinterpret_cast<const char*>(B.origin.data()), 8 * d);
  out.write(reinterpret_cast<const char*>(B.extents.data()), 8 * d);
  out.write(reinterpret_cast<const char*>(B.values.data()), static_cast<std::streamsize>(16 * B.values.size()));
}

inline DenseBox read_box(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "read_box: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  require(in && std::string(magic, 6) == "RLBOX1", "read_box: bad magic in " + path);
  int64_t d = 0;
  in.read(reinterpret_cast<char*>(&d), 8);
  require(in && d >= 1 && d <= 64, "read_box: bad dimension");
  Point o(d), e(d);
  in.read(reinterpret_cast<char*>(o.data()), 8 * d);
  in.read(reinterpret_cast<char*>(e.data()), 8 * d);
  DenseBox B(o, e);
  in.read(reinterpret_cast<char*>(B.values.data()), static_cast<std::streamsize>(16 * B.values.size()));
  require(static_cast<bool>(in), "read_box: truncated payload");
  return B;
}

// ---- norms ----

inline void require_p(double p) { require(p > 0, "lp_norm: p must be positive"); }

// accumulates sum |v|^p (or max |v| for p = inf)
struct LpAccumulator {
  double p;
  CompensatedSum<double> sum;
  double mx = 0;
  explicit LpAccumulator(double p_) : p(p_) { require_p(p_); }
  void add(double a) {
    if (std::isinf(p)) mx = std::max(mx, a);
    else if (a != 0) sum.add(p == 2 ? a * a : std::pow(a, p));
  }
  double power_sum() const { return std::isinf(p) ? mx : sum.value(); }
  double norm() const { return std::isinf(p) ? mx : std::pow(sum.value(), 1.0 / p); }
};

inline double lp_norm(const std::vector<cplx>& v, double p) {
  LpAccumulator acc(p);
  for (auto& x : v) acc.add(std::abs(x));
  return acc.norm();
}
inline double lp_norm(const DenseBox& B, double p) { return lp_norm(B.values, p); }
inline double lp_norm(const LatticeFunction& f, double p) {
  LpAccumulator acc(p);
  for (auto& [x, v] : f.entries()) acc.add(std::abs(v));
  return acc.norm();
}

// ---- sums of weighted translates g = sum_t w_t f(. - s_t) ----

struct Translates {
  int d = 1;
  std::vector<int64_t> shifts;  // d per translate
  std::vector<double> weights;

  size_t size() const { return weights.size(); }
  void add(const int64_t* s, double w) {
    shifts.insert(shifts.end(), s, s + d);
    weights.push_back(w);
  }
  // merge equal shifts, drop zero weights; order is lexicographic in the shift
  void normalize() {
    std::vector<size_t> ord(size());
    std::iota(ord.begin(), ord.end(), 0);
    auto key = [&](size_t i) { return std::vector<int64_t>(shifts.begin() + i * d, shifts.begin() + (i + 1) * d); };
    std::stable_sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return key(a) < key(b); });
    Translates out;
    out.d = d;
    for (size_t r = 0; r < ord.size();) {
      auto k = key(ord[r]);
      CompensatedSum<double> w;
      size_t e = r;
      while (e < ord.size() && key(ord[e]) == k) w.add(weights[ord[e++]]);
      if (w.value() != 0) out.add(k.data(), w.value());
      r = e;
    }
    *this = std::move(out);
  }
};

// Weighted translates of the lattice points of a piece: shift Q(y), weight K_n(y).
inline Translates piece_translates(const PieceLattice& L) {
  Translates T;
  T.d = L.d;
  for (size_t t = 0; t < L.size(); ++t) T.add(&L.Q[t * L.d], L.K[t]);
  return T;
}

// Splits the output into clusters of overlapping translate boxes and calls
// visit(box) with the exact sum on each cluster's bounding box.
inline void visit_translate_clusters(const DenseBox& f, const Translates& T, const std::function<void(const DenseBox&)>& visit) {
  const int d = f.d();
  require(T.d == d, "translates: dimension mismatch");
  const size_t m = T.size();
  if (m == 0 || f.size() == 0) return;
  std::vector<size_t> ord(m);
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return T.shifts[a * d + d - 1] < T.shifts[b * d + d - 1]; });
  std::vector<size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (size_t r = 0; r < m; ++r) {
    const int64_t* s = &T.shifts[ord[r] * d];
    for (size_t u = r; u-- > 0;) {
      const int64_t* o = &T.shifts[ord[u] * d];
      if (s[d - 1] - o[d - 1] >= f.extents[d - 1]) break;
      bool overlap = true;
      for (int i = 0; i < d - 1 && overlap; ++i) overlap = std::abs(s[i] - o[i]) < f.extents[i];
      if (overlap) parent[find(ord[r])] = find(ord[u]);
    }
  }
  std::map<size_t, std::vector<size_t>> clusters;
  for (size_t t = 0; t < m; ++t) clusters[find(t)].push_back(t);
  for (auto& [root, members] : clusters) {
    Point lo(d, INT64_MAX), hi(d, INT64_MIN);
    for (size_t t : members)
      for (int i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], T.shifts[t * d + i] + f.origin[i]);
        hi[i] = std::max(hi[i], T.shifts[t * d + i] + f.origin[i] + f.extents[i]);
      }
    Point ext(d);
    for (int i = 0; i < d; ++i) ext[i] = hi[i] - lo[i];
    DenseBox C(lo, ext);
    std::vector<int64_t> off(d);
    for (size_t t : members) {
      const double w = T.weights[t];
      for (int i = 0; i < d; ++i) off[i] = T.shifts[t * d + i] + f.origin[i] - lo[i];
      // rows along the last axis are contiguous in both arrays
      const int64_t row = f.extents[d - 1];
      const size_t rows = f.size() / static_cast<size_t>(row);
      for (size_t r = 0; r < rows; ++r) {
        size_t rem = r, dst = 0;
        std::vector<int64_t> pos(d - 1);
        for (int i = d - 2; i >= 0; --i) {
          pos[i] = static_cast<int64_t>(rem % f.extents[i]);
          rem /= f.extents[i];
        }
        for (int i = 0; i < d - 1; ++i) dst = dst * ext[i] + static_cast<size_t>(pos[i] + off[i]);
        dst = dst * ext[d - 1] + static_cast<size_t>(off[d - 1]);
        const cplx* src = &f.values[r * row];
        cplx* out = &C.values[dst];
        for (int64_t c = 0; c < row; ++c) out[c] += w * src[c];
      }
    }
    visit(C);
  }
}

inline LatticeFunction apply_translates(const LatticeFunction& f, const Translates& T) {
  LatticeFunction g(f.d());
  if (f.empty()) return g;
  DenseBox F = f.to_dense();
  visit_translate_clusters(F, T, [&](const DenseBox& C) {
    for (size_t i = 0; i < C.size(); ++i)
      if (C.values[i] != cplx(0, 0)) g.set(C.point(i), C.values[i]);
  });
  return g;
}

inline double translates_lp_norm(const DenseBox& F, const Translates& T, double p) {
  LpAccumulator acc(p);
  visit_translate_clusters(F, T, [&](const DenseBox& C) {
    for (auto& v : C.values) acc.add(std::abs(v));
  });
  return acc.norm();
}

// ---- T_n ----

inline void check_Tn_budget(const PieceLattice& L, size_t supp) {
  guard(static_cast<double>(L.size()) * static_cast<double>(supp) <= 1e9, "T_n: 2^{nk} |supp f| exceeds 10^9");
}

inline LatticeFunction apply_Tn_direct(const LatticeFunction& f, const DyadicPiece& p, const MultiIndexSet& G) {
  require(f.d() == G.d(), "apply_Tn_direct: f has wrong dimension");
  auto L = piece_lattice(p, G);
  check_Tn_budget(L, f.support_size());
  LatticeFunction g(f.d());
  if (f.empty()) return g;
  // exact pairwise accumulation, independent of the cluster machinery
  std::map<Point, CompensatedComplexSum> acc;
  Point z(f.d());
  for (auto& [x, v] : f.entries())
    for (size_t t = 0; t < L.size(); ++t) {
      for (int i = 0; i < f.d(); ++i) z[i] = checked_add(x[i], L.Q[t * L.d + i]);
      acc[z].add(v * L.K[t]);
    }
  for (auto& [x, s] : acc) g.set(x, s.value());
  return g;
}

// Per-axis range [min Q, max Q] of the shifts; zero for an empty lattice.
inline std::vector<std::pair<int64_t, int64_t>> shift_ranges(const PieceLattice& L) {
  std::vector<std::pair<int64_t, int64_t>> r(L.d, {0, 0});
  for (size_t t = 0; t < L.size(); ++t)
    for (int i = 0; i < L.d; ++i) {
      int64_t q = L.Q[t * L.d + i];
      if (t == 0) r[i] = {q, q};
      r[i].first = std::min(r[i].first, q);
      r[i].second = std::max(r[i].second, q);
    }
  return r;
}

// Box length per axis that holds f and T_n f without wraparound: the extent of
// supp f plus the spread of the shifts Q(y) over supp K_n.
inline std::vector<int> fourier_box(const LatticeFunction& f, const PieceLattice& L) {
  auto [lo, hi] = f.bounding_box();
  auto r = shift_ranges(L);
  std::vector<int> B(f.d());
  for (int i = 0; i < f.d(); ++i) {
    int64_t need = (hi[i] - lo[i] + 1) + (r[i].second - r[i].first);
    guard(need <= (int64_t(1) << 25), "apply_Tn_fourier: box too large");
    B[i] = static_cast<int>(need);
  }
  return B;
}

inline DenseBox apply_Tn_fourier_box(const LatticeFunction& f, const PieceLattice& L, std::optional<std::vector<int>> extents = {}) {
  const int d = f.d();
  require(d == L.d, "apply_Tn_fourier: f has wrong dimension");
  if (f.empty()) return DenseBox(Point(d, 0), Point(d, 1));
  auto need = fourier_box(f, L);
  std::vector<int> B = extents ? *extents : need;
  if (!extents) {
    // pad to fast lengths unless that alone would break the grid memory guard
    std::vector<int> fast(d);
    double cells = 1;
    for (int i = 0; i < d; ++i) cells *= (fast[i] = fast_fft_size(need[i]));
    if (cells <= double(size_t(1) << 25)) B = fast;
  }
  require(static_cast<int>(B.size()) == d, "apply_Tn_fourier: extents have wrong length");
  for (int i = 0; i < d; ++i)
    if (B[i] < need[i])
      throw InvalidArgument("apply_Tn_fourier: box length " + std::to_string(B[i]) + " on axis " + std::to_string(i) +
                            " would wrap around (need " + std::to_string(need[i]) + ")");
  auto [lo, hi] = f.bounding_box();
  Point origin(d);
  auto r = shift_ranges(L);
  for (int i = 0; i < d; ++i) origin[i] = lo[i] + r[i].first;
  SampledMultiplier fh(B);
  for (auto& [x, v] : f.entries()) {
    Point j(d);
    for (int i = 0; i < d; ++i) j[i] = x[i] - origin[i];
    fh.values[fh.index(j)] = v;
  }
  dft_inplace(fh.values, B, PhaseSign::Plus);
  auto m = multiplier_mn_grid(L, B);
  for (size_t i = 0; i < fh.size(); ++i) fh.values[i] *= m.values[i];
  inverse_dft_inplace(fh.values, B);
  Point ext(B.begin(), B.end());
  DenseBox out(origin, ext);
  out.values = std::move(fh.values);
  return out;
}

inline LatticeFunction apply_Tn_fourier(const LatticeFunction& f, const DyadicPiece& p, const MultiIndexSet& G,
                                        std::optional<std::vector<int>> extents = {}, double drop_below = 0.0) {
  auto L = piece_lattice(p, G);
  DenseBox out = apply_Tn_fourier_box(f, L, extents);
  LatticeFunction g(f.d());
  for (size_t i = 0; i < out.size(); ++i)
    if (std::abs(out.values[i]) > drop_below) g.set(out.point(i), out.values[i]);
  return g;
}

// Translates of sum_{n=1}^{nmax} K_n.
inline Translates partial_sum_translates(const DyadicDecomposition& D, const MultiIndexSet& G, int nmax) {
  Translates T;
  T.d = G.d();
  for (int n = 1; n <= nmax; ++n) {
    auto L = piece_lattice(D.piece(n), G);
    for (size_t t = 0; t < L.size(); ++t) T.add(&L.Q[t * L.d], L.K[t]);
  }
  T.normalize();
  return T;
}

inline LatticeFunction apply_T_partial(const LatticeFunction& f, const DyadicDecomposition& D, const MultiIndexSet& G, int nmax,
                                       bool fourier = false) {
  require(nmax >= 0 && nmax <= D.nmax(), "apply_T_partial: nmax outside the decomposition");
  LatticeFunction g(f.d());
  if (nmax == 0 || f.empty()) return g;
  if (!fourier) return apply_translates(f, partial_sum_translates(D, G, nmax));
  for (int n = 1; n <= nmax; ++n) {
    auto h = apply_Tn_fourier(f, D.piece(n), G);
    for (auto& [x, v] : h.entries()) g.add(x, v);
  }
  return g;
}

// ---- averages ----

inline Translates average_translates(int64_t N, const MultiIndexSet& G, bool symmetric) {
  require(N >= 1, "M_N: N must be >= 1");
  const int k = G.k();
  const int64_t lo = symmetric ? -N : 1;
  const double count = std::pow(static_cast<double>(N - lo + 1), k);
  guard(count <= 1e8, "M_N: N^k above 10^8");
  Translates T;
  T.d = G.d();
  std::vector<int64_t> y(k, lo);
  while (true) {
    auto q = canonical_eval(G, y);
    T.add(q.data(), 1.0 / count);
    int i = k - 1;
    while (i >= 0 && y[i] == N) y[i--] = lo;
    if (i < 0) break;
    ++y[i];
  }
  T.normalize();
  return T;
}

// M_N f(x) = N^{-k} sum_{y in [1,N]^k} f(x - Q(y)); symmetric: (2N+1)^{-k} over [-N,N]^k
inline LatticeFunction apply_MN(const LatticeFunction& f, int64_t N, const MultiIndexSet& G, bool symmetric = false) {
  require(f.d() == G.d(), "apply_MN: f has wrong dimension");
  guard(std::pow(static_cast<double>(symmetric ? 2 * N + 1 : N), G.k()) * static_cast<double>(f.support_size()) <= 1e9,
        "apply_MN: N^k |supp f| exceeds 10^9");
  return apply_translates(f, average_translates(N, G, symmetric));
}

struct DominationResult {
  double C = 0;
  double max_ratio = 0;  // max |T_n f| / (C M|f|), must be <= 1
  bool pass = false;
};

// |T_n f| <= C * Msym_{2^n} |f| with C = max|K_n| (2^{n+1}+1)^k
inline DominationResult domination_check(const LatticeFunction& f, const DyadicPiece& p, const MultiIndexSet& G) {
  DominationResult r;
  auto L = piece_lattice(p, G);
  double kmax = 0;
  for (double v : L.K) kmax = std::max(kmax, std::abs(v));
  r.C = kmax * std::pow(std::ldexp(1.0, p.n() + 1) + 1, G.k());
  LatticeFunction af(f.d());
  for (auto& [x, v] : f.entries()) af.set(x, std::abs(v));
  auto T = apply_Tn_direct(f, p, G);
  auto M = apply_MN(af, int64_t(1) << p.n(), G, true);
  r.pass = true;
  for (auto& [x, v] : T.entries()) {
    double bound = r.C * M.get(x).real();
    double ratio = bound > 0 ? std::abs(v) / bound : INFINITY;
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (std::abs(v) > bound * (1 + 1e-12) + 1e-300) r.pass = false;
  }
  return r;
}

// ---- multipliers on a periodic box ----

inline SampledMultiplier embed(const LatticeFunction& f, const std::vector<int>& extents, Point& origin) {
  const int d = f.d();
  require(static_cast<int>(extents.size()) == d, "embed: extents have wrong length");
  SampledMultiplier a(extents);
  origin.assign(d, 0);
  if (f.empty()) return a;
  auto [lo, hi] = f.bounding_box();
  for (int i = 0; i < d; ++i)
    if (hi[i] - lo[i] + 1 > extents[i]) throw InvalidArgument("apply_multiplier: support of f does not fit the grid box");
  origin = lo;
  for (auto& [x, v] : f.entries()) {
    Point j(d);
    for (int i = 0; i < d; ++i) j[i] = x[i] - lo[i];
    a.values[a.index(j)] = v;
  }
  return a;
}

inline DenseBox apply_multiplier_box(const LatticeFunction& f, const SampledMultiplier& S) {
  Point origin;
  auto a = embed(f, S.extents, origin);
  dft_inplace(a.values, a.extents, PhaseSign::Plus);
  for (size_t i = 0; i < a.size(); ++i) a.values[i] *= S.values[i];
  inverse_dft_inplace(a.values, a.extents);
  DenseBox out(origin, Point(S.extents.begin(), S.extents.end()));
  out.values = std::move(a.values);
  return out;
}

inline LatticeFunction apply_multiplier(const LatticeFunction& f, const SampledMultiplier& S) {
  return LatticeFunction::from_dense(apply_multiplier_box(f, S));
}

// F^{-1}(S_n f^) for every member of a family sharing one grid
inline std::vector<std::vector<cplx>> family_outputs(const LatticeFunction& f, const std::vector<SampledMultiplier>& family) {
  require(!family.empty(), "square function: empty family");
  for (auto& S : family) require(S.same_grid(family[0]), "square function: mismatched grids");
  Point origin;
  auto fh = embed(f, family[0].extents, origin);
  dft_inplace(fh.values, fh.extents, PhaseSign::Plus);
  std::vector<std::vector<cplx>> out;
  for (auto& S : family) {
    std::vector<cplx> g(fh.values);
    for (size_t i = 0; i < g.size(); ++i) g[i] *= S.values[i];
    inverse_dft_inplace(g, fh.extents);
    out.push_back(std::move(g));
  }
  return out;
}

inline double square_function_norm(const LatticeFunction& f, const std::vector<SampledMultiplier>& family, double p) {
  require_p(p);
  auto g = family_outputs(f, family);
  LpAccumulator acc(p);
  for (size_t i = 0; i < g[0].size(); ++i) {
    CompensatedSum<double> s;
    for (auto& gn : g) s.add(std::norm(gn[i]));
    acc.add(std::sqrt(s.value()));
  }
  return acc.norm();
}

// p = 2 via Parseval: (sum_n sum_grid |S_n|^2 |f^|^2 / B^d)^{1/2}
inline double square_function_norm_parseval(const LatticeFunction& f, const std::vector<SampledMultiplier>& family) {
  Point origin;
  auto fh = embed(f, family[0].extents, origin);
  dft_inplace(fh.values, fh.extents, PhaseSign::Plus);
  CompensatedSum<double> s;
  for (auto& S : family)
    for (size_t i = 0; i < fh.size(); ++i) s.add(std::norm(S.values[i]) * std::norm(fh.values[i]));
  return std::sqrt(s.value() / static_cast<double>(fh.size()));
}

struct RademacherResult {
  double mean = 0;    // (E ||sum eps_n g_n||_p^p)^{1/p}
  double stderr_ = 0;
};

inline RademacherResult rademacher_norm(const LatticeFunction& f, const std::vector<SampledMultiplier>& family, double p,
                                        int trials, uint64_t seed) {
  require(trials >= 16, "rademacher_norm: need at least 16 trials");
  require(p > 0 && std::isfinite(p), "rademacher_norm: p must be finite and positive");
  auto g = family_outputs(f, family);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> vals;
  std::vector<double> eps(g.size());
  for (int t = 0; t < trials; ++t) {
    for (auto& e : eps) e = coin(rng) ? 1.0 : -1.0;
    LpAccumulator acc(p);
    for (size_t i = 0; i < g[0].size(); ++i) {
      cplx h = 0;
      for (size_t n = 0; n < g.size(); ++n) h += eps[n] * g[n][i];
      acc.add(std::abs(h));
    }
    vals.push_back(acc.power_sum());
  }
  CompensatedSum<double> s;
  for (double v : vals) s.add(v);
  double mean = s.value() / trials, var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (trials - 1);
  RademacherResult r;
  r.mean = std::pow(mean, 1.0 / p);
  r.stderr_ = mean > 0 ? std::pow(mean, 1.0 / p - 1) / p * std::sqrt(var / trials) : 0.0;
  return r;
}

// ---- the standard test set ----

struct TestFunction {
  std::string name;
  LatticeFunction f;
};

inline std::vector<TestFunction> standard_test_set(const MultiIndexSet& G, uint64_t seed) {
  const int d = G.d();
  std::vector<TestFunction> out;
  LatticeFunction delta(d);
  delta.set(Point(d, 0), 1.0);
  out.push_back({"delta", delta});

  auto box = [&](int64_t L, const std::function<double(const Point&)>& val) {
    LatticeFunction f(d);
    double n = std::pow(static_cast<double>(L), d);
    guard(n <= 1e7, "test set box too large");
    Point x(d, 0);
    while (true) {
      f.set(x, val(x));
      int i = d - 1;
      while (i >= 0 && x[i] == L - 1) x[i--] = 0;
      if (i < 0) break;
      ++x[i];
    }
    return f;
  };
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  out.push_back({"noise32", box(32, [&](const Point&) { return coin(rng) ? 1.0 : -1.0; })});
  out.push_back({"box16", box(16, [](const Point&) { return 1.0; })});

  LatticeFunction para(d);
  std::vector<int64_t> y(G.k(), 0);
  while (true) {
    para.set(canonical_eval(G, y), 1.0);
    int i = G.k() - 1;
    while (i >= 0 && y[i] == 15) y[i--] = 0;
    if (i < 0) break;
    ++y[i];
  }
  out.push_back({"paraboloid", para});
  return out;
}

}  // namespace radonlab
