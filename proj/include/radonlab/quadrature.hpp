#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "numeric.hpp"

namespace radonlab {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

inline GaussRule compute_gauss_legendre(int order) {
  require(order >= 1, "Gauss-Legendre order must be positive");
  GaussRule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (order + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = x;
      for (int j = 2; j <= order; ++j) {
        long double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1, p1 = x;
      dp = order * (x * p1 - p0) / (x * x - 1);
      long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    {
      long double p0 = 1, p1 = x;
      for (int j = 2; j <= order; ++j) {
        long double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1);
    }
    long double w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[i] = static_cast<double>(-x);
    r.nodes[order - 1 - i] = static_cast<double>(x);
    r.weights[i] = r.weights[order - 1 - i] = static_cast<double>(w);
  }
  if (order % 2 == 1) r.nodes[order / 2] = 0.0;
  return r;
}

inline const GaussRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

template <class F>
auto gl_panel(F&& f, double a, double b, const GaussRule& rule) {
  using R = decltype(f(a));
  double h = 0.5 * (b - a), c = 0.5 * (a + b);
  R s{};
  for (size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
  return s * h;
}

struct QuadResult {
  double value = 0;
  double error = 0;
  bool converged = true;
  long evaluations = 0;
};

namespace detail {
template <class F>
void adaptive_gl_rec(F& f, double a, double b, double whole, double tol, int depth,
                     const GaussRule& rule, CompensatedSum<double>& acc, QuadResult& res) {
  double m = 0.5 * (a + b);
  double left = gl_panel(f, a, m, rule), right = gl_panel(f, m, b, rule);
  res.evaluations += 2 * static_cast<long>(rule.nodes.size());
  double split = left + right;
  double err = std::abs(split - whole);
  if (err <= tol || depth <= 0) {
    if (err > tol) res.converged = false;
    acc.add(split);
    res.error += err;
    return;
  }
  adaptive_gl_rec(f, a, m, left, 0.5 * tol, depth - 1, rule, acc, res);
  adaptive_gl_rec(f, m, b, right, 0.5 * tol, depth - 1, rule, acc, res);
}
}  // namespace detail

// Bisection-adaptive Gauss-Legendre; a panel is accepted when its one-level
// refinement changes by less than the local tolerance.
template <class F>
QuadResult adaptive_gauss_legendre(F&& f, double a, double b, double rel_tol,
                                   double abs_tol = 0.0, int order = 10, int max_depth = 30) {
  const GaussRule& rule = gauss_legendre(order);
  QuadResult res;
  if (a == b) return res;
  double whole = gl_panel(f, a, b, rule);
  res.evaluations = order;
  // Scale the relative tolerance by the integral of |f| so that
  // cancelling integrands do not demand unbounded refinement.
  double mag = gl_panel([&](double x) { return std::abs(f(x)); }, a, b, rule);
  double tol = std::max(abs_tol, rel_tol * std::max(std::abs(whole), mag));
  if (tol == 0) tol = rel_tol;
  CompensatedSum<double> acc;
  detail::adaptive_gl_rec(f, a, b, whole, tol, max_depth, rule, acc, res);
  res.value = acc.value();
  return res;
}

// Integrates over consecutive breakpoints, each interval adaptively.
template <class F>
QuadResult integrate_breakpoints(F&& f, const std::vector<double>& pts, double rel_tol,
                                 double abs_tol = 0.0) {
  QuadResult total;
  CompensatedSum<double> acc;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    QuadResult r = adaptive_gauss_legendre(f, pts[i], pts[i + 1], rel_tol, abs_tol);
    acc.add(r.value);
    total.error += r.error;
    total.converged = total.converged && r.converged;
    total.evaluations += r.evaluations;
  }
  total.value = acc.value();
  return total;
}

}  // namespace radonlab
