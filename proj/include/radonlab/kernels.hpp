#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadrature.hpp"

namespace radonlab {

struct CZKernel {
  int k = 1;
  std::string name;
  double amplitude = 1.0;
  bool odd = false;
  std::function<double(const double*)> profile;          // unit-amplitude K
  std::function<void(const double*, double*)> gradient;  // optional, unit amplitude

  double operator()(const double* x) const { return amplitude * profile(x); }
  double operator()(double x) const { return amplitude * profile(&x); }

  // grad K, analytic when available, else central differences with h = 1e-5|x|.
  void grad(const double* x, double* g) const {
    if (gradient) {
      gradient(x, g);
      for (int i = 0; i < k; ++i) g[i] *= amplitude;
      return;
    }
    std::vector<double> y(x, x + k);
    double r = 0;
    for (int i = 0; i < k; ++i) r += x[i] * x[i];
    double h = 1e-5 * std::sqrt(r);
    for (int i = 0; i < k; ++i) {
      y[i] = x[i] + h;
      double fp = (*this)(y.data());
      y[i] = x[i] - h;
      double fm = (*this)(y.data());
      y[i] = x[i];
      g[i] = (fp - fm) / (2 * h);
    }
  }

  CZKernel scaled(double alpha) const {
    CZKernel c = *this;
    c.amplitude *= alpha;
    return c;
  }
};

inline CZKernel kernel_hilbert(double amplitude = 1.0) {
  CZKernel K;
  K.k = 1;
  K.name = "hilbert";
  K.amplitude = amplitude;
  K.odd = true;
  K.profile = [](const double* x) { return 1.0 / x[0]; };
  K.gradient = [](const double* x, double* g) { g[0] = -1.0 / (x[0] * x[0]); };
  return K;
}

// sign(y)/|y|: the same function as 1/y, kept as a named alias.
inline CZKernel kernel_sign_over_abs(double amplitude = 1.0) {
  CZKernel K = kernel_hilbert(amplitude);
  K.name = "sign_over_abs";
  return K;
}

inline CZKernel kernel_odd_square(double amplitude = 1.0) {
  CZKernel K;
  K.k = 1;
  K.name = "odd_square";
  K.amplitude = amplitude;
  K.odd = true;
  K.profile = [](const double* x) { return (x[0] > 0 ? 1.0 : -1.0) / (x[0] * x[0]); };
  K.gradient = [](const double* x, double* g) {
    double a = std::abs(x[0]);
    g[0] = -2.0 / (a * a * a);
  };
  return K;
}

// cos(c log|y|)/|y|: even, so the annular integrals c_n do not vanish.
inline CZKernel kernel_log_osc(double c = 2.0, double amplitude = -1.0) {
  if (amplitude < 0) amplitude = 1.0 / (1.0 + std::sqrt(1.0 + c * c));
  CZKernel K;
  K.k = 1;
  K.name = "log_osc";
  K.amplitude = amplitude;
  K.odd = false;
  K.profile = [c](const double* x) {
    double a = std::abs(x[0]);
    return std::cos(c * std::log(a)) / a;
  };
  K.gradient = [c](const double* x, double* g) {
    double a = std::abs(x[0]), L = std::log(a);
    double da = -(c * std::sin(c * L) + std::cos(c * L)) / (a * a);
    g[0] = x[0] > 0 ? da : -da;
  };
  return K;
}

// y_1/|y|^3 on R^2, i.e. Omega(theta) = cos(theta) over |y|^2.
inline CZKernel kernel_riesz2d(double amplitude = 1.0) {
  CZKernel K;
  K.k = 2;
  K.name = "riesz2d";
  K.amplitude = amplitude;
  K.odd = true;
  K.profile = [](const double* x) {
    double r2 = x[0] * x[0] + x[1] * x[1];
    return x[0] / (r2 * std::sqrt(r2));
  };
  K.gradient = [](const double* x, double* g) {
    double r2 = x[0] * x[0] + x[1] * x[1];
    double r3 = r2 * std::sqrt(r2), r5 = r3 * r2;
    g[0] = 1.0 / r3 - 3.0 * x[0] * x[0] / r5;
    g[1] = -3.0 * x[0] * x[1] / r5;
  };
  return K;
}

inline CZKernel kernel_zero(int k = 1) {
  CZKernel K;
  K.k = k;
  K.name = "zero";
  K.amplitude = 0.0;
  K.odd = true;
  K.profile = [](const double*) { return 0.0; };
  K.gradient = [k](const double*, double* g) {
    for (int i = 0; i < k; ++i) g[i] = 0;
  };
  return K;
}

inline CZKernel make_kernel(const std::string& name, std::optional<double> amplitude = {}, double c = 2.0) {
  double a = amplitude.value_or(1.0);
  if (name == "hilbert" || name == "1/y") return kernel_hilbert(a);
  if (name == "sign_over_abs") return kernel_sign_over_abs(a);
  if (name == "odd_square") return kernel_odd_square(a);
  if (name == "log_osc") return kernel_log_osc(c, amplitude.value_or(-1.0));
  if (name == "riesz2d") return kernel_riesz2d(a);
  if (name == "zero") return kernel_zero(1);
  throw InvalidArgument("unknown kernel '" + name +
                        "' (hilbert, sign_over_abs, odd_square, log_osc, riesz2d, zero)");
}

// ---- validation of the size/smoothness and cancellation conditions ----

struct ValidationReport {
  double size_smoothness_max = 0;  // sup |y|^k |K| + |y|^{k+1} |grad K|
  double size_term_max = 0;        // sup |y|^k |K|
  double smoothness_term_max = 0;  // sup |y|^{k+1} |grad K|
  double cancellation_max = 0;     // sup_lambda |int_{1<=|y|<=lambda} K|
  bool converged = true;
  double tolerance = 1e-8;
  bool pass = false;

  nlohmann::json to_json() const {
    return {{"size_smoothness_max", size_smoothness_max},
            {"size_term_max", size_term_max},
            {"smoothness_term_max", smoothness_term_max},
            {"cancellation_max", cancellation_max},
            {"converged", converged},
            {"tolerance", tolerance},
            {"pass", pass}};
  }
};

namespace detail {

// Angular integral of g(r cos t, r sin t) over [0, 2 pi) by the periodic
// trapezoid rule, doubled until two levels agree.
template <class F>
inline double angular_integral(F&& g, double r, bool& converged, double tol = 1e-12) {
  double scale = 0;
  auto trap = [&](int m) {
    CompensatedSum<double> s;
    for (int i = 0; i < m; ++i) {
      double t = 2 * std::numbers::pi * i / m;
      double x[2] = {r * std::cos(t), r * std::sin(t)};
      double v = g(x);
      scale = std::max(scale, std::abs(v));
      s.add(v);
    }
    return s.value() * 2 * std::numbers::pi / m;
  };
  int M = 64;
  double prev = trap(M);
  while (M < (1 << 16)) {
    M *= 2;
    double cur = trap(M);
    if (std::abs(cur - prev) <= tol * scale * 2 * std::numbers::pi) return cur;
    prev = cur;
  }
  converged = false;
  return prev;
}

// Integral of a function over {a <= |x| <= b} in R^k, k in {1,2}, with the
// given radial breakpoints.
template <class F>
inline QuadResult annulus_integral(int k, F&& f, std::vector<double> radii, double rel_tol) {
  const GaussRule& rule = gauss_legendre(20);
  if (k == 1) {
    auto sym = [&](double r) {
      double xp = r, xm = -r;
      return f(&xp) + f(&xm);
    };
    auto mag = [&](double r) {
      double xp = r, xm = -r;
      return std::abs(f(&xp)) + std::abs(f(&xm));
    };
    double m = 0;
    for (size_t i = 0; i + 1 < radii.size(); ++i) m += gl_panel(mag, radii[i], radii[i + 1], rule);
    return integrate_breakpoints(sym, radii, rel_tol, rel_tol * m);
  }
  require(k == 2, "annular quadrature implemented for k in {1,2}");
  bool conv = true;
  auto radial = [&](double r) { return r * angular_integral(f, r, conv); };
  auto absf = [&](const double* x) { return std::abs(f(x)); };
  bool mag_conv = true;  // only a tolerance scale; accuracy irrelevant
  auto mag = [&](double r) { return r * angular_integral(absf, r, mag_conv, 1e-3); };
  double m = 0;
  for (size_t i = 0; i + 1 < radii.size(); ++i) m += gl_panel(mag, radii[i], radii[i + 1], rule);
  QuadResult q = integrate_breakpoints(radial, radii, rel_tol, rel_tol * m);
  q.converged = q.converged && conv;
  return q;
}

}  // namespace detail

inline ValidationReport cz_validate(const CZKernel& K, double lambda_max, int samples) {
  require(lambda_max >= 1, "cz_validate: lambda_max must be >= 1");
  require(samples >= 2, "cz_validate: need at least 2 samples");
  ValidationReport rep;
  const int k = K.k;
  const int angles = k == 1 ? 2 : 64;
  std::vector<double> x(k), g(k);
  for (int i = 0; i < samples; ++i) {
    double r = std::pow(lambda_max, static_cast<double>(i) / (samples - 1));
    for (int a = 0; a < angles; ++a) {
      if (k == 1) {
        x[0] = a == 0 ? r : -r;
      } else {
        double t = 2 * std::numbers::pi * (a + 0.5) / angles;
        x[0] = r * std::cos(t);
        x[1] = r * std::sin(t);
      }
      K.grad(x.data(), g.data());
      double gn = 0;
      for (double v : g) gn += v * v;
      double t1 = std::pow(r, k) * std::abs(K(x.data()));
      double t2 = std::pow(r, k + 1) * std::sqrt(gn);
      rep.size_term_max = std::max(rep.size_term_max, t1);
      rep.smoothness_term_max = std::max(rep.smoothness_term_max, t2);
      rep.size_smoothness_max = std::max(rep.size_smoothness_max, t1 + t2);
    }
  }
  // cancellation: accumulate dyadic shells up to each sampled lambda
  const double rel = k == 1 ? 1e-10 : 1e-8;
  auto f = [&](const double* y) { return K(y); };
  std::vector<double> lambdas;
  for (int i = 0; i < samples; ++i) lambdas.push_back(std::pow(lambda_max, static_cast<double>(i) / (samples - 1)));
  double lo = 1.0, acc = 0.0;
  for (double lam : lambdas) {
    if (lam > lo) {
      std::vector<double> br{lo};
      for (double b = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(lo))) + 1); b < lam; b *= 2) br.push_back(b);
      br.push_back(lam);
      QuadResult q = detail::annulus_integral(k, f, br, rel);
      rep.converged = rep.converged && q.converged;
      acc += q.value;
      lo = lam;
    }
    rep.cancellation_max = std::max(rep.cancellation_max, std::abs(acc));
  }
  rep.tolerance = k == 1 ? 1e-10 : 1e-8;
  rep.pass = rep.converged && rep.size_smoothness_max <= 1 + rep.tolerance &&
             rep.cancellation_max <= 1 + rep.tolerance;
  return rep;
}

// ---- dyadic decomposition ----

// 35t^4 - 84t^5 + 70t^6 - 20t^7: 0 -> 1 with three vanishing derivatives at both ends.
inline double smoothstep7(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  double t4 = t * t * t * t;
  return t4 * (35 + t * (-84 + t * (70 - 20 * t)));
}

// Radial cutoff: 1 on r <= 1/2, 0 on r >= 1. Uses 1 - S(t) = S(1 - t) so the
// tail near r = 1 carries no cancellation noise.
inline double cutoff_chi(double r) { return smoothstep7(2 - 2 * r); }

// rho_n(r) = chi(2^-n r) - chi(2^{-n+1} r), supported in [2^{n-2}, 2^n].
// Evaluated piecewise: on each half one of the two cutoffs is exactly 0 or 1.
inline double partition_rho(int n, double r) {
  double s = std::ldexp(r, -n + 1);
  if (s <= 0.5) return 0.0;
  if (s <= 1.0) return smoothstep7(2 * s - 1);
  return cutoff_chi(0.5 * s);
}

inline double bump_profile(double s) {
  if (s <= 0.5 || s >= 1) return 0;
  double t = 2 * s - 1, u = 1 - t;
  return t * t * t * t * u * u * u * u;
}

// Integral of bump_profile(|x|) over R^k.
inline double bump_mass(int k) {
  const GaussRule& g = gauss_legendre(40);
  double s = gl_panel([&](double r) { return bump_profile(r) * std::pow(r, k - 1); }, 0.5, 1.0, g);
  double sphere = 2 * std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k);
  return sphere * s;
}

struct DecompositionTable {
  CZKernel K;
  int nmax = 0;
  std::vector<double> c;  // c[n] = int K rho_n, c[0] = 0
  std::vector<double> t;  // t[n] = sum_{m<=n} c[m], t[0] = 0
  std::vector<double> c_error;
  double bump_norm = 1;   // 1 / bump_mass(k)
};

class DyadicPiece {
 public:
  DyadicPiece() = default;
  DyadicPiece(std::shared_ptr<const DecompositionTable> tab, int n) : tab_(std::move(tab)), n_(n) {}

  int n() const { return n_; }
  int k() const { return tab_->K.k; }
  const CZKernel& kernel() const { return tab_->K; }
  double cn() const { return tab_->c[n_]; }
  double tn() const { return tab_->t[n_]; }
  double tn_minus() const { return tab_->t[n_ - 1]; }
  double support_lo() const { return std::ldexp(1.0, n_ - 2); }
  double support_hi() const { return std::ldexp(1.0, n_); }
  bool is_zero() const { return tab_->K.amplitude == 0.0; }

  // u_m(x) = 2^{-mk} u(2^-m x), unit mass, supported in [2^{m-1}, 2^m].
  double u(int m, double r) const {
    return std::ldexp(tab_->bump_norm * bump_profile(std::ldexp(r, -m)), -m * k());
  }

  double operator()(const double* x) const {
    double r2 = 0;
    for (int i = 0; i < k(); ++i) r2 += x[i] * x[i];
    double r = std::sqrt(r2);
    if (r < support_lo() || r > support_hi()) return 0.0;
    double v = 0;
    double rho = partition_rho(n_, r);
    if (rho != 0) v += tab_->K(x) * rho;
    v -= tn() * u(n_, r);
    if (n_ > 1) v += tn_minus() * u(n_ - 1, r);
    return v;
  }
  double operator()(double x) const { return (*this)(&x); }

  // Central differences with h = 1e-5 |x|.
  void grad(const double* x, double* g) const {
    std::vector<double> y(x, x + k());
    double r = 0;
    for (int i = 0; i < k(); ++i) r += x[i] * x[i];
    double h = 1e-5 * std::sqrt(r);
    for (int i = 0; i < k(); ++i) {
      y[i] = x[i] + h;
      double fp = (*this)(y.data());
      y[i] = x[i] - h;
      double fm = (*this)(y.data());
      y[i] = x[i];
      g[i] = (fp - fm) / (2 * h);
    }
  }

  const DecompositionTable& table() const { return *tab_; }

 private:
  std::shared_ptr<const DecompositionTable> tab_;
  int n_ = 1;
};

class DyadicDecomposition {
 public:
  DyadicDecomposition(const CZKernel& K, int nmax) {
    require(nmax >= 1, "dyadic decomposition: nmax must be >= 1");
    require(K.k == 1 || K.k == 2, "dyadic decomposition: k must be 1 or 2");
    guard(nmax <= 40, "dyadic decomposition: nmax > 40");
    auto tab = std::make_shared<DecompositionTable>();
    tab->K = K;
    tab->nmax = nmax;
    tab->c.assign(nmax + 1, 0.0);
    tab->t.assign(nmax + 1, 0.0);
    tab->c_error.assign(nmax + 1, 0.0);
    tab->bump_norm = 1.0 / bump_mass(K.k);
    const double rel = K.k == 1 ? 1e-10 : 1e-8;
    CompensatedSum<double> t;
    for (int n = 1; n <= nmax; ++n) {
      if (K.amplitude != 0.0) {
        auto f = [&](const double* x) {
          double r = 0;
          for (int i = 0; i < K.k; ++i) r += x[i] * x[i];
          return K(x) * partition_rho(n, std::sqrt(r));
        };
        QuadResult q = detail::annulus_integral(
            K.k, f, {std::ldexp(1.0, n - 2), std::ldexp(1.0, n - 1), std::ldexp(1.0, n)}, rel);
        if (!q.converged) throw QuadratureError("c_n quadrature did not converge at n=" + std::to_string(n));
        tab->c[n] = q.value;
        tab->c_error[n] = q.error;
      }
      t.add(tab->c[n]);
      tab->t[n] = t.value();
    }
    tab_ = tab;
  }

  int nmax() const { return tab_->nmax; }
  DyadicPiece piece(int n) const {
    require(n >= 1 && n <= tab_->nmax, "piece index out of range");
    return DyadicPiece(tab_, n);
  }
  std::vector<DyadicPiece> pieces() const {
    std::vector<DyadicPiece> out;
    for (int n = 1; n <= nmax(); ++n) out.push_back(piece(n));
    return out;
  }
  const DecompositionTable& table() const { return *tab_; }

  // sum_{n<=N} K_n(x)
  double partial_sum(const double* x, int N) const {
    double s = 0;
    for (int n = 1; n <= N; ++n) s += DyadicPiece(tab_, n)(x);
    return s;
  }

 private:
  std::shared_ptr<const DecompositionTable> tab_;
};

inline DyadicPiece dyadic_decompose(const CZKernel& K, int n) {
  return DyadicDecomposition(K, n).piece(n);
}

// int K_n, by quadrature of the piece itself (independent of the c_n tables).
inline QuadResult piece_integral(const DyadicPiece& p) {
  auto f = [&](const double* x) { return p(x); };
  std::vector<double> br{p.support_lo(), 0.5 * (p.support_lo() + std::ldexp(1.0, p.n() - 1)),
                         std::ldexp(1.0, p.n() - 1), 0.75 * p.support_hi(), p.support_hi()};
  return detail::annulus_integral(p.k(), f, br, p.k() == 1 ? 1e-12 : 1e-9);
}

// max over pieces and sampled x (|x| >= 1) of |x|^k|K_n| + |x|^{k+1}|grad K_n|.
inline double piece_uniform_bound(const std::vector<DyadicPiece>& pieces, int radial_samples = 2000,
                                  int angular_samples = 32) {
  require(!pieces.empty(), "piece_uniform_bound: no pieces");
  double best = 0;
  for (auto& p : pieces) {
    if (p.is_zero()) continue;
    int k = p.k();
    std::vector<double> x(k), g(k);
    int angles = k == 1 ? 2 : angular_samples;
    double lo = std::max(1.0, p.support_lo()), hi = p.support_hi();
    for (int i = 0; i <= radial_samples; ++i) {
      double r = lo + (hi - lo) * i / radial_samples;
      for (int a = 0; a < angles; ++a) {
        if (k == 1) {
          x[0] = a == 0 ? r : -r;
        } else {
          double t = 2 * std::numbers::pi * (a + 0.5) / angles;
          x[0] = r * std::cos(t);
          x[1] = r * std::sin(t);
        }
        p.grad(x.data(), g.data());
        double gn = 0;
        for (double v : g) gn += v * v;
        double val = std::pow(r, k) * std::abs(p(x.data())) + std::pow(r, k + 1) * std::sqrt(gn);
        best = std::max(best, val);
      }
    }
  }
  return best;
}

}  // namespace radonlab
