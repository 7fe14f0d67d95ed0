#pragma once

#include <cfloat>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "arithmetic.hpp"
#include "grid.hpp"
#include "lattice.hpp"
#include "quadrature.hpp"

namespace radonlab {

// ---- smooth profiles ----

// C-infinity step: 0 for t <= 0, 1 for t >= 1
inline double smooth_step(double t) {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

inline double mollifier_profile(double s) {  // s = |z| / rbar
  if (s >= 1) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

inline double unit_sphere_area(int m) {  // area of S^m in R^{m+1}
  return 2 * std::pow(M_PI, (m + 1) / 2.0) / std::tgamma((m + 1) / 2.0);
}

// ---- the bump eta = phi * psi ----

class BumpFunction {
 public:
  BumpFunction(int d, int resolution) : d_(d), res_(resolution) {
    require(d >= 1, "build_eta: d must be >= 1");
    require(resolution >= 512, "build_eta: resolution must be >= 512 samples per radius");
    r_in_ = 1.0 / (16 * d);
    r_out_ = 1.0 / (8 * d);
    rbar_ = 1.0 / (64 * d);
    h_ = (r_out_ - r_in_) / res_;
    table_.resize(res_ + 1);
    for (int i = 0; i <= res_; ++i) table_[i] = convolve(r_in_ + i * h_, 4, 8);
    table_.front() = 1.0;
    table_.back() = 0.0;
  }

  int d() const { return d_; }
  int resolution() const { return res_; }
  double r_in() const { return r_in_; }
  double r_out() const { return r_out_; }
  double rbar() const { return rbar_; }

  // psi: 1 on r <= r_in + rbar, 0 beyond r_out - rbar
  double psi(double r) const { return 1.0 - smooth_step((r - r_in_ - rbar_) / (r_out_ - r_in_ - 2 * rbar_)); }
  double phi(double r) const { return mollifier_profile(r / rbar_); }

  // (phi * psi)(r e_1) / int phi by panel Gauss-Legendre in (s, theta)
  double convolve(double r, int s_panels, int t_panels) const {
    const GaussRule& g = gauss_legendre(20);
    CompensatedSum<double> num, den;
    for (int ps = 0; ps < s_panels; ++ps) {
      double s0 = rbar_ * ps / s_panels, s1 = rbar_ * (ps + 1) / s_panels;
      for (size_t is = 0; is < g.nodes.size(); ++is) {
        double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * g.nodes[is];
        double ws = 0.5 * (s1 - s0) * g.weights[is] * phi(s) * std::pow(s, d_ - 1);
        if (ws == 0) continue;
        if (d_ == 1) {
          num.add(ws * 0.5 * (psi(std::abs(r - s)) + psi(r + s)));
          den.add(ws);
          continue;
        }
        for (int pt = 0; pt < t_panels; ++pt) {
          double t0 = M_PI * pt / t_panels, t1 = M_PI * (pt + 1) / t_panels;
          for (size_t it = 0; it < g.nodes.size(); ++it) {
            double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g.nodes[it];
            double wt = ws * 0.5 * (t1 - t0) * g.weights[it] * std::pow(std::sin(t), d_ - 2);
            double dist2 = r * r + s * s - 2 * r * s * std::cos(t);
            num.add(wt * psi(std::sqrt(std::max(0.0, dist2))));
            den.add(wt);
          }
        }
      }
    }
    return num.value() / den.value();
  }

  double radial(double r) const {
    if (r <= r_in_) return 1.0;
    if (r >= r_out_) return 0.0;
    double u = (r - r_in_) / h_;
    int i = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, res_ - 3);
    double t = u - i;  // cubic Lagrange on nodes i..i+3, t in [0,3]
    double v = 0;
    for (int m = 0; m < 4; ++m) {
      double w = 1;
      for (int o = 0; o < 4; ++o)
        if (o != m) w *= (t - o) / (m - o);
      v += w * table_[i + m];
    }
    return std::clamp(v, 0.0, 1.0);
  }

  double operator()(const double* x) const {
    double r2 = 0;
    for (int i = 0; i < d_; ++i) {
      if (!std::isfinite(x[i])) return 0.0;
      r2 += x[i] * x[i];
    }
    return radial(std::sqrt(r2));
  }
  double operator()(const std::vector<double>& x) const {
    require(static_cast<int>(x.size()) == d_, "eta: wrong dimension");
    return (*this)(x.data());
  }

 private:
  int d_, res_;
  double r_in_, r_out_, rbar_, h_;
  std::vector<double> table_;
};

inline std::shared_ptr<const BumpFunction> build_eta(int d, int resolution = 4096) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const BumpFunction>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto& slot = cache[{d, resolution}];
  if (!slot) slot = std::make_shared<const BumpFunction>(d, resolution);
  return slot;
}

// ---- diagonal scalings E ----

struct ArcScaling {
  enum class Mode { Growth, Chi, Dyadic, Explicit };
  Mode mode = Mode::Explicit;
  std::vector<double> log_eps;
  bool log_mode = false;
  nlohmann::json tag = nlohmann::json::object();

  int d() const { return static_cast<int>(log_eps.size()); }

  std::vector<double> epsilons() const {
    std::vector<double> e;
    for (double l : log_eps) {
      double v = std::exp(l);
      if (!(v >= DBL_MIN)) throw OverflowError("ArcScaling: epsilon underflows double precision; use log mode");
      e.push_back(v);
    }
    return e;
  }

  // coordinate i of E^{-1} delta
  double scaled(int i, double delta) const {
    if (delta == 0) return 0.0;
    return std::copysign(std::exp(std::log(std::abs(delta)) - log_eps[i]), delta);
  }

  // half-width of the bump support along axis i (in delta units), capped at 1/2
  double halfwidth(int i, double r_out) const { return std::min(0.5, std::exp(log_eps[i]) * r_out); }

  nlohmann::json to_json() const {
    static const char* names[] = {"growth", "chi", "dyadic", "explicit"};
    return {{"mode", names[static_cast<int>(mode)]}, {"log_eps", log_eps}, {"log_mode", log_mode}, {"tag", tag}};
  }
};

inline void check_representable(const ArcScaling& E) {
  if (!E.log_mode)
    for (double l : E.log_eps)
      if (l < std::log(DBL_MIN)) throw OverflowError("ArcScaling: epsilon underflows double precision; use log mode");
}

// epsilon_gamma = exp(-N^{2 rho}) for every gamma
inline ArcScaling arc_scaling_growth(int N, double rho, const MultiIndexSet& G, bool log_mode = false) {
  require(N >= 1 && rho > 0, "arc_scaling_growth: need N >= 1, rho > 0");
  ArcScaling E;
  E.mode = ArcScaling::Mode::Growth;
  E.log_mode = log_mode;
  E.log_eps.assign(G.d(), -std::pow(static_cast<double>(N), 2 * rho));
  E.tag = {{"constraint", "eps <= exp(-N^{2rho})"}, {"N", N}, {"rho", rho}};
  check_representable(E);
  return E;
}

// epsilon_gamma = 2^{-n(|gamma| - chi)}: eta(2^{n(A - chi I)} xi)
inline ArcScaling arc_scaling_chi(int n, double chi, const MultiIndexSet& G, bool log_mode = false) {
  require(n >= 0, "arc_scaling_chi: need n >= 0");
  ArcScaling E;
  E.mode = ArcScaling::Mode::Chi;
  E.log_mode = log_mode;
  for (int deg : G.degrees()) E.log_eps.push_back(-n * (deg - chi) * M_LN2);
  E.tag = {{"constraint", "eps_gamma = 2^{-n(|gamma|-chi)}"}, {"n", n}, {"chi", chi}};
  check_representable(E);
  return E;
}

// epsilon_gamma = 2^{-(n|gamma| + j)}: eta(2^{nA + jI} xi)
inline ArcScaling arc_scaling_dyadic(int n, int j, const MultiIndexSet& G, bool log_mode = false) {
  ArcScaling E;
  E.mode = ArcScaling::Mode::Dyadic;
  E.log_mode = log_mode;
  for (int deg : G.degrees()) E.log_eps.push_back(-(static_cast<double>(n) * deg + j) * M_LN2);
  E.tag = {{"constraint", "eps_gamma = 2^{-(n|gamma|+j)}"}, {"n", n}, {"j", j}};
  check_representable(E);
  return E;
}

inline ArcScaling arc_scaling_explicit(const std::vector<double>& eps) {
  ArcScaling E;
  for (double e : eps) {
    require(e > 0, "ArcScaling: epsilons must be positive");
    E.log_eps.push_back(std::log(e));
  }
  return E;
}

// eta(E^{-1} delta)
inline double scaled_eta(const BumpFunction& eta, const ArcScaling& E, const double* delta) {
  double x[64];
  require(E.d() <= 64, "scaled_eta: d > 64");
  for (int i = 0; i < E.d(); ++i) x[i] = E.scaled(i, delta[i]);
  return eta(x);
}

// ---- exact torus differences ----

// a/q - b/p reduced to [-1/2, 1/2)
inline long double torus_diff(int64_t a, int64_t q, int64_t b, int64_t p) {
  __int128 den = static_cast<__int128>(q) * p;
  __int128 num = static_cast<__int128>(a) * p - static_cast<__int128>(b) * q;
  num %= den;
  if (num < 0) num += den;
  if (2 * num >= den) num -= den;
  return static_cast<long double>(num) / static_cast<long double>(den);
}

struct Arc {
  std::vector<int64_t> a;
  int64_t q = 1;
};

inline std::vector<Arc> arcs_of(const FractionSet& F) {
  std::vector<Arc> out;
  for (auto& p : F.points) {
    require(p.qv <= (uint64_t(1) << 40), "arc denominators above 2^40 are not supported");
    Arc A;
    A.q = static_cast<int64_t>(p.qv);
    for (auto v : p.a) A.a.push_back(static_cast<int64_t>(v % p.qv));
    out.push_back(std::move(A));
  }
  return out;
}

// Per-arc profile g(delta), supported in |delta_i| <= halfwidth[i].
struct ArcProfile {
  std::function<double(const double* delta)> value;
  std::vector<double> halfwidth;
};

using SymbolFn = std::function<cplx(const double* delta)>;

// values[j] = sum over arcs of theta(delta) g(delta), delta = j/B - a/q on the torus
inline SampledMultiplier assemble_profile(const std::vector<Arc>& arcs, const ArcProfile& P, const std::vector<int>& extents,
                                          const SymbolFn& theta = nullptr) {
  SampledMultiplier S(extents);
  const int d = static_cast<int>(extents.size());
  require(static_cast<int>(P.halfwidth.size()) == d, "assemble: profile dimension mismatch");
  std::vector<int64_t> lo(d), cnt(d), j(d);
  std::vector<double> delta(d);
  double work = 0;
  for (auto& A : arcs) {
    require(static_cast<int>(A.a.size()) == d, "assemble: arc dimension mismatch");
    double box = 1;
    for (int i = 0; i < d; ++i) {
      const int64_t B = extents[i];
      if (P.halfwidth[i] >= 0.5) {
        lo[i] = 0, cnt[i] = B;
      } else {
        long double c = static_cast<long double>(A.a[i]) / A.q;
        lo[i] = static_cast<int64_t>(std::ceil((c - P.halfwidth[i]) * B - 1e-9L));
        int64_t hi = static_cast<int64_t>(std::floor((c + P.halfwidth[i]) * B + 1e-9L));
        cnt[i] = std::min<int64_t>(B, std::max<int64_t>(0, hi - lo[i] + 1));
      }
      box *= static_cast<double>(cnt[i]);
    }
    work += box;
    guard(work <= 4e8, "assemble: arc boxes exceed 4e8 grid evaluations");
    if (box == 0) continue;
    std::vector<int64_t> off(d, 0);
    while (true) {
      for (int i = 0; i < d; ++i) {
        j[i] = floor_mod(lo[i] + off[i], extents[i]);
        delta[i] = static_cast<double>(torus_diff(j[i], extents[i], A.a[i], A.q));
      }
      double g = P.value(delta.data());
      if (g != 0.0) S.values[S.index(j)] += theta ? theta(delta.data()) * g : cplx(g, 0);
      int i = d - 1;
      while (i >= 0 && off[i] == cnt[i] - 1) off[i--] = 0;
      if (i < 0) break;
      ++off[i];
    }
  }
  return S;
}

inline ArcProfile eta_profile(const BumpFunction& eta, const ArcScaling& E) {
  ArcProfile P;
  for (int i = 0; i < E.d(); ++i) P.halfwidth.push_back(E.halfwidth(i, eta.r_out()));
  P.value = [&eta, E](const double* delta) { return scaled_eta(eta, E, delta); };
  return P;
}

inline SampledMultiplier assemble_arc_multiplier(const SymbolFn& theta, const FractionSet& F, const ArcScaling& E,
                                                 const BumpFunction& eta, const std::vector<int>& extents) {
  require(E.d() == F.d && eta.d() == F.d, "assemble_arc_multiplier: dimension mismatch");
  auto S = assemble_profile(arcs_of(F), eta_profile(eta, E), extents, theta);
  S.metadata = {{"family", "arc"}, {"scaling", E.to_json()}, {"fractions", F.provenance}, {"arcs", F.size()}};
  return S;
}

inline SampledMultiplier assemble_arc_multiplier(const SymbolFn& theta, const FractionSet& F, const ArcScaling& E,
                                                 const BumpFunction& eta, int B) {
  return assemble_arc_multiplier(theta, F, E, eta, std::vector<int>(F.d, B));
}

// True iff no two bump supports (Euclidean balls of radius r_out in E^{-1} coordinates) overlap.
inline bool support_disjointness_check(const FractionSet& F, const ArcScaling& E, const BumpFunction& eta) {
  auto arcs = arcs_of(F);
  const size_t m = arcs.size();
  if (m < 2) return true;
  const int d = F.d;
  std::vector<std::pair<long double, size_t>> order;
  for (size_t i = 0; i < m; ++i) {
    long double x = static_cast<long double>(arcs[i].a[0]) / arcs[i].q;
    order.push_back({x - std::floor(x), i});
  }
  std::sort(order.begin(), order.end());
  const long double w0 = 2 * E.halfwidth(0, eta.r_out());
  const long double lim2 = 4.0L * eta.r_out() * eta.r_out();
  for (size_t s = 0; s < m; ++s) {
    for (size_t t = 1; t < m; ++t) {
      size_t u = (s + t) % m;
      long double gap = order[u].first - order[s].first;
      if (gap < 0) gap += 1;
      if (gap >= w0 && w0 < 0.5L) break;
      const Arc& A = arcs[order[s].second];
      const Arc& Bc = arcs[order[u].second];
      long double r2 = 0;
      for (int i = 0; i < d; ++i) {
        double x = E.scaled(i, static_cast<double>(torus_diff(A.a[i], A.q, Bc.a[i], Bc.q)));
        r2 += static_cast<long double>(x) * x;
      }
      if (r2 < lim2) return false;
      if (t + 1 >= m) break;
    }
  }
  return true;
}

// ---- pointwise evaluation near an arc ----

// Sum over arcs of a profile at xi = c/q_c + delta, with the c/q_c part exact.
class ArcSum {
 public:
  ArcSum(std::vector<Arc> arcs, ArcProfile P) : arcs_(std::move(arcs)), P_(std::move(P)) {
    for (size_t i = 0; i < arcs_.size(); ++i) {
      long double x = static_cast<long double>(arcs_[i].a[0]) / arcs_[i].q;
      order_.push_back({x - std::floor(x), i});
    }
    std::sort(order_.begin(), order_.end());
  }

  const std::vector<Arc>& arcs() const { return arcs_; }

  double operator()(const Arc& c, const std::vector<double>& delta) const {
    const int d = static_cast<int>(delta.size());
    long double x0 = static_cast<long double>(c.a[0]) / c.q + delta[0];
    x0 -= std::floor(x0);
    const long double w = P_.halfwidth[0];
    std::vector<double> dd(d);
    CompensatedSum<double> s;
    auto visit = [&](size_t idx) {
      const Arc& A = arcs_[idx];
      for (int i = 0; i < d; ++i) {
        long double v = torus_diff(c.a[i], c.q, A.a[i], A.q) + static_cast<long double>(delta[i]);
        v -= std::floor(v + 0.5L);
        if (std::abs(v) > P_.halfwidth[i]) return;
        dd[i] = static_cast<double>(v);
      }
      s.add(P_.value(dd.data()));
    };
    if (w >= 0.5L) {
      for (size_t i = 0; i < arcs_.size(); ++i) visit(i);
      return s.value();
    }
    auto scan = [&](long double lo, long double hi) {
      auto it = std::lower_bound(order_.begin(), order_.end(), std::make_pair(lo, size_t(0)));
      for (; it != order_.end() && it->first <= hi; ++it) visit(it->second);
    };
    long double lo = x0 - w, hi = x0 + w;
    if (lo < 0) {
      scan(0, hi);
      scan(lo + 1, 1);
    } else if (hi >= 1) {
      scan(lo, 1);
      scan(0, hi - 1);
    } else {
      scan(lo, hi);
    }
    return s.value();
  }

 private:
  std::vector<Arc> arcs_;
  ArcProfile P_;
  std::vector<std::pair<long double, size_t>> order_;
};

// ---- the Xi and Delta families ----

struct ArcFamilyParams {
  double chi = 0.1;
  int l = 1;
  double rho = 0.1;
  bool override_relation = false;  // skip the 10 rho l = 1 check
  std::optional<uint64_t> qcap;
  int eta_resolution = 4096;
};

inline void check_relation(const ArcFamilyParams& P) {
  require(P.l >= 1, "arc family: l must be >= 1");
  require(P.chi > 0, "arc family: chi must be positive");
  if (!P.override_relation)
    require(std::abs(10 * P.rho * P.l - 1) <= 1e-12, "arc family: need 10 rho l = 1 (or the override flag)");
}

inline int64_t int_pow(int64_t b, int e) {
  int64_t r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, b);
  return r;
}

inline FractionSet arc_set(int64_t m, const ArcFamilyParams& P, const MultiIndexSet& G) {
  require(m <= 1000000, "arc set index too large");
  return build_UN(static_cast<int>(m), P.rho, G, P.qcap);
}

// U_{(s+1)^l} \ U_{s^l}
inline FractionSet arc_shell(int s, const ArcFamilyParams& P, const MultiIndexSet& G) {
  FractionSet outer = arc_set(int_pow(s + 1, P.l), P, G);
  FractionSet inner = arc_set(int_pow(s, P.l), P, G);
  FractionSet out = outer;
  out.points.clear();
  for (auto& p : outer.points)
    if (!inner.contains(p)) out.points.push_back(p);
  out.provenance = {{"kind", "shell"}, {"s", s}, {"l", P.l}, {"outer", outer.provenance}};
  return out;
}

// Xi_n = sum_{U_{n^l}} eta(2^{n(A - chi I)}(xi - a/q))
inline ArcProfile xi_profile(int n, const MultiIndexSet& G, const ArcFamilyParams& P) {
  auto eta = build_eta(G.d(), P.eta_resolution);
  ArcScaling E = arc_scaling_chi(n, P.chi, G, true);
  ArcProfile R = eta_profile(*eta, E);
  R.value = [eta, E](const double* d) { return scaled_eta(*eta, E, d); };
  return R;
}

// Xi_n^j = sum_{U_{n^l}} eta(2^{nA + jI}(xi - a/q))^2
inline ArcProfile xi_j_profile(int n, int j, const MultiIndexSet& G, const ArcFamilyParams& P) {
  auto eta = build_eta(G.d(), P.eta_resolution);
  ArcScaling E = arc_scaling_dyadic(n, j, G, true);
  ArcProfile R = eta_profile(*eta, E);
  R.value = [eta, E](const double* d) {
    double v = scaled_eta(*eta, E, d);
    return v * v;
  };
  return R;
}

// variant 0: Delta_{n,s}^j itself; 1 and 2: the two factors
inline ArcProfile delta_profile(int n, int s, int j, int variant, const MultiIndexSet& G, const ArcFamilyParams& P) {
  require(0 <= s && s < n, "delta_ns_j: need 0 <= s < n");
  require(variant >= 0 && variant <= 2, "delta_ns_j: variant must be 0, 1 or 2");
  auto eta = build_eta(G.d(), P.eta_resolution);
  ArcScaling Em = arc_scaling_dyadic(n, j - 1, G, true), E0 = arc_scaling_dyadic(n, j, G, true);
  ArcScaling E1 = arc_scaling_dyadic(n, j + 1, G, true), E2 = arc_scaling_dyadic(n, j + 2, G, true);
  ArcScaling Es = arc_scaling_chi(s, P.chi, G, true);
  ArcProfile R;
  const ArcScaling& widest = variant == 1 ? Em : E0;
  for (int i = 0; i < G.d(); ++i)
    R.halfwidth.push_back(std::min(widest.halfwidth(i, eta->r_out()), Es.halfwidth(i, eta->r_out())));
  R.value = [=](const double* d) {
    double es = scaled_eta(*eta, Es, d);
    if (es == 0) return 0.0;
    if (variant == 1) return (scaled_eta(*eta, Em, d) - scaled_eta(*eta, E2, d)) * es;
    double a = scaled_eta(*eta, E0, d), b = scaled_eta(*eta, E1, d);
    double ring = a * a - b * b;
    return variant == 2 ? ring * es : ring * es * es;
  };
  return R;
}

inline SampledMultiplier xi_projection(int n, const MultiIndexSet& G, const std::vector<int>& extents,
                                       const ArcFamilyParams& P = {}) {
  check_relation(P);
  FractionSet F = arc_set(int_pow(n, P.l), P, G);
  auto S = assemble_profile(arcs_of(F), xi_profile(n, G, P), extents);
  S.metadata = {{"family", "Xi"}, {"n", n}, {"chi", P.chi}, {"l", P.l}, {"rho", P.rho}, {"fractions", F.provenance}};
  return S;
}

inline SampledMultiplier xi_j_projection(int n, int j, const MultiIndexSet& G, const std::vector<int>& extents,
                                         const ArcFamilyParams& P = {}) {
  check_relation(P);
  FractionSet F = arc_set(int_pow(n, P.l), P, G);
  auto S = assemble_profile(arcs_of(F), xi_j_profile(n, j, G, P), extents);
  S.metadata = {{"family", "Xi_j"}, {"n", n}, {"j", j}, {"l", P.l}, {"rho", P.rho}, {"fractions", F.provenance}};
  return S;
}

inline SampledMultiplier delta_ns_j(int n, int s, int j, int variant, const MultiIndexSet& G, const std::vector<int>& extents,
                                    const ArcFamilyParams& P = {}) {
  check_relation(P);
  FractionSet F = arc_shell(s, P, G);
  auto S = assemble_profile(arcs_of(F), delta_profile(n, s, j, variant, G, P), extents);
  S.metadata = {{"family", "Delta"}, {"n", n}, {"s", s}, {"j", j}, {"variant", variant}, {"chi", P.chi}, {"l", P.l},
                {"rho", P.rho}, {"fractions", F.provenance}};
  return S;
}

// ---- Littlewood-Paley family Omega_N^{j,n} ----

// a Schwartz function with Phi(0) = 0: x_1 exp(-pi |x|^2)
inline double schwartz_phi(const std::vector<double>& x) {
  double r2 = 0;
  for (double v : x) r2 += v * v;
  return x[0] * std::exp(-M_PI * r2);
}

inline SymbolFn omega_symbol(int n, int j, const MultiIndexSet& G) {
  auto deg = G.degrees();
  return [deg, n, j](const double* delta) {
    std::vector<double> x(deg.size());
    for (size_t i = 0; i < deg.size(); ++i) x[i] = std::ldexp(delta[i], n * deg[i] + j);
    return cplx(schwartz_phi(x), 0.0);
  };
}

inline SampledMultiplier omega_multiplier(const FractionSet& F, const ArcScaling& E, int n, int j, const MultiIndexSet& G,
                                          const std::vector<int>& extents, int eta_resolution = 4096) {
  auto eta = build_eta(G.d(), eta_resolution);
  auto S = assemble_arc_multiplier(omega_symbol(n, j, G), F, E, *eta, extents);
  S.metadata["family"] = "Omega";
  S.metadata["n"] = n;
  S.metadata["j"] = j;
  return S;
}

}  // namespace radonlab
