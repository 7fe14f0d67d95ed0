#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "numeric.hpp"

namespace radonlab {

using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& g) {
  int s = 0;
  for (int v : g) s += v;
  return s;
}

inline std::string to_string(const MultiIndex& g) {
  std::string s = "(";
  for (size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
  return s + ")";
}

// Gamma: nonzero multi-indices in {0..N0}^k, lexicographic, most significant first.
class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(int k, int N0, std::vector<MultiIndex> idx)
      : k_(k), N0_(N0), indices_(std::move(idx)) {}

  int k() const { return k_; }
  int N0() const { return N0_; }
  int d() const { return static_cast<int>(indices_.size()); }
  const MultiIndex& operator[](size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  std::optional<size_t> index_of(const MultiIndex& g) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), g);
    if (it == indices_.end() || *it != g) return std::nullopt;
    return static_cast<size_t>(it - indices_.begin());
  }

  std::vector<int> degrees() const {
    std::vector<int> out;
    for (auto& g : indices_) out.push_back(degree(g));
    return out;
  }
  int max_degree() const {
    int m = 0;
    for (auto& g : indices_) m = std::max(m, degree(g));
    return m;
  }

  nlohmann::json to_json() const {
    return {{"k", k_}, {"N0", N0_}, {"indices", indices_}};
  }
  static MultiIndexSet from_json(const nlohmann::json& j) {
    MultiIndexSet g(j.at("k").get<int>(), j.at("N0").get<int>(),
                    j.at("indices").get<std::vector<MultiIndex>>());
    for (auto& m : g.indices_) require(static_cast<int>(m.size()) == g.k_, "multi-index length != k");
    require(std::is_sorted(g.indices_.begin(), g.indices_.end()), "multi-indices not sorted");
    return g;
  }

  // A sub-family such as Gamma = {1,2} for k = 1, kept in lex order.
  static MultiIndexSet custom(int k, std::vector<MultiIndex> idx) {
    require(k >= 1, "k must be >= 1");
    std::sort(idx.begin(), idx.end());
    require(std::adjacent_find(idx.begin(), idx.end()) == idx.end(), "duplicate multi-index");
    int N0 = 0;
    for (auto& g : idx) {
      require(static_cast<int>(g.size()) == k, "multi-index length != k");
      require(degree(g) > 0, "zero multi-index not allowed");
      for (int v : g) {
        require(v >= 0, "negative exponent");
        N0 = std::max(N0, v);
      }
    }
    return MultiIndexSet(k, N0, std::move(idx));
  }

  bool operator==(const MultiIndexSet& o) const {
    return k_ == o.k_ && N0_ == o.N0_ && indices_ == o.indices_;
  }

 private:
  int k_ = 0;
  int N0_ = 0;
  std::vector<MultiIndex> indices_;
};

inline MultiIndexSet gamma_set(int k, int N0) {
  require(k >= 1, "gamma_set: k must be >= 1");
  require(N0 >= 1, "gamma_set: N0 must be >= 1");
  std::vector<MultiIndex> out;
  MultiIndex g(k, 0);
  while (true) {
    int i = k - 1;
    while (i >= 0 && g[i] == N0) g[i--] = 0;
    if (i < 0) break;
    ++g[i];
    out.push_back(g);
  }
  return MultiIndexSet(k, N0, std::move(out));
}

// Gamma = {1, 2, ..., m} for k = 1 (or any explicit list of degrees).
inline MultiIndexSet gamma_1d(std::vector<int> degrees) {
  std::vector<MultiIndex> idx;
  for (int p : degrees) idx.push_back({p});
  return MultiIndexSet::custom(1, std::move(idx));
}

struct DilationExponents {
  std::vector<int> degrees;

  explicit DilationExponents(const MultiIndexSet& G) : degrees(G.degrees()) {}

  std::vector<double> dilate(double t, const std::vector<double>& v) const {
    require(t > 0, "dilate: t must be positive");
    require(v.size() == degrees.size(), "dilate: dimension mismatch");
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = std::pow(t, degrees[i]) * v[i];
    return out;
  }
  // Exact integer dilation by an integer factor t (t may be negative here: t^|gamma|).
  std::vector<int64_t> dilate_int(int64_t t, const std::vector<int64_t>& v) const {
    require(v.size() == degrees.size(), "dilate: dimension mismatch");
    std::vector<int64_t> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = checked_mul(checked_pow(t, degrees[i]), v[i]);
    return out;
  }
  // 2^{n|gamma| + j} v, the scaling 2^{nA + jI}.
  std::vector<double> dyadic(int n, double j, const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = std::exp2(n * degrees[i] + j) * v[i];
    return out;
  }
};

inline std::vector<int64_t> canonical_eval(const MultiIndexSet& G, const std::vector<int64_t>& x) {
  require(static_cast<int>(x.size()) == G.k(), "canonical_eval: x has wrong length");
  std::vector<int64_t> out(G.d());
  for (int i = 0; i < G.d(); ++i) {
    int64_t v = 1;
    for (int c = 0; c < G.k(); ++c) v = checked_mul(v, checked_pow(x[c], G[i][c]));
    out[i] = v;
  }
  return out;
}

inline std::vector<BigInt> canonical_eval_big(const MultiIndexSet& G, const std::vector<int64_t>& x) {
  require(static_cast<int>(x.size()) == G.k(), "canonical_eval: x has wrong length");
  std::vector<BigInt> out(G.d());
  for (int i = 0; i < G.d(); ++i) {
    BigInt v = 1;
    for (int c = 0; c < G.k(); ++c) v *= boost::multiprecision::pow(BigInt(x[c]), G[i][c]);
    out[i] = v;
  }
  return out;
}

inline Rational parse_rational(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt(s));
    return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  }
  throw InvalidArgument("coefficient must be an integer or a \"p/q\" string");
}

inline nlohmann::json rational_to_json(const Rational& r) {
  if (denominator(r) == 1 && numerator(r) >= std::numeric_limits<int64_t>::min() &&
      numerator(r) <= std::numeric_limits<int64_t>::max())
    return static_cast<int64_t>(numerator(r));
  return r.str();
}

struct PolynomialTerm {
  int j;             // output component, 0-based
  MultiIndex gamma;
  Rational c;
};

class PolynomialMap {
 public:
  PolynomialMap(int k, int d0, std::vector<PolynomialTerm> terms) : k_(k), d0_(d0), terms_(std::move(terms)) {
    require(k >= 1 && d0 >= 1, "PolynomialMap: k and d0 must be >= 1");
    for (auto& t : terms_) {
      require(t.j >= 0 && t.j < d0_, "PolynomialMap: term component out of range");
      require(static_cast<int>(t.gamma.size()) == k_, "PolynomialMap: gamma length != k");
      require(degree(t.gamma) > 0, "PolynomialMap: constant terms are not allowed (P(0) = 0)");
      for (int v : t.gamma) require(v >= 0, "PolynomialMap: negative exponent");
    }
  }
  int k() const { return k_; }
  int d0() const { return d0_; }
  const std::vector<PolynomialTerm>& terms() const { return terms_; }
  int max_degree() const {
    int m = 0;
    for (auto& t : terms_)
      for (int v : t.gamma) m = std::max(m, v);
    return m;
  }
  bool integral() const {
    for (auto& t : terms_)
      if (denominator(t.c) != 1) return false;
    return true;
  }

  std::vector<Rational> eval(const std::vector<int64_t>& x) const {
    require(static_cast<int>(x.size()) == k_, "PolynomialMap::eval: wrong length");
    std::vector<Rational> out(d0_);
    for (auto& t : terms_) {
      BigInt m = 1;
      for (int c = 0; c < k_; ++c) m *= boost::multiprecision::pow(BigInt(x[c]), t.gamma[c]);
      out[t.j] += t.c * m;
    }
    return out;
  }
  // Checked int64 path; nullopt on overflow or non-integer coefficients.
  std::optional<std::vector<int64_t>> eval_int64(const std::vector<int64_t>& x) const {
    if (!integral()) return std::nullopt;
    try {
      std::vector<int64_t> out(d0_, 0);
      for (auto& t : terms_) {
        if (numerator(t.c) > INT64_MAX || numerator(t.c) < INT64_MIN) return std::nullopt;
        int64_t m = static_cast<int64_t>(numerator(t.c));
        for (int c = 0; c < k_; ++c) m = checked_mul(m, checked_pow(x[c], t.gamma[c]));
        out[t.j] = checked_add(out[t.j], m);
      }
      return out;
    } catch (const OverflowError&) {
      return std::nullopt;
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json terms = nlohmann::json::array();
    for (auto& t : terms_) terms.push_back({{"j", t.j}, {"gamma", t.gamma}, {"c", rational_to_json(t.c)}});
    return {{"k", k_}, {"d0", d0_}, {"terms", terms}};
  }
  static PolynomialMap from_json(const nlohmann::json& j) {
    std::vector<PolynomialTerm> terms;
    for (auto& t : j.at("terms"))
      terms.push_back({t.at("j").get<int>(), t.at("gamma").get<MultiIndex>(), parse_rational(t.at("c"))});
    return PolynomialMap(j.at("k").get<int>(), j.at("d0").get<int>(), std::move(terms));
  }

 private:
  int k_, d0_;
  std::vector<PolynomialTerm> terms_;
};

class LiftingMatrix {
 public:
  LiftingMatrix(int rows, int cols) : rows_(rows), cols_(cols), c_(static_cast<size_t>(rows) * cols) {}
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& at(int j, int g) { return c_[static_cast<size_t>(j) * cols_ + g]; }
  const Rational& at(int j, int g) const { return c_[static_cast<size_t>(j) * cols_ + g]; }

  std::vector<Rational> apply(const std::vector<BigInt>& v) const {
    require(static_cast<int>(v.size()) == cols_, "LiftingMatrix::apply: wrong length");
    std::vector<Rational> out(rows_);
    for (int j = 0; j < rows_; ++j)
      for (int g = 0; g < cols_; ++g)
        if (at(j, g) != 0) out[j] += at(j, g) * v[g];
    return out;
  }
  std::optional<std::vector<int64_t>> apply_int64(const std::vector<int64_t>& v) const {
    require(static_cast<int>(v.size()) == cols_, "LiftingMatrix::apply: wrong length");
    try {
      std::vector<int64_t> out(rows_, 0);
      for (int j = 0; j < rows_; ++j)
        for (int g = 0; g < cols_; ++g) {
          const Rational& c = at(j, g);
          if (c == 0) continue;
          if (denominator(c) != 1 || numerator(c) > INT64_MAX || numerator(c) < INT64_MIN) return std::nullopt;
          out[j] = checked_add(out[j], checked_mul(static_cast<int64_t>(numerator(c)), v[g]));
        }
      return out;
    } catch (const OverflowError&) {
      return std::nullopt;
    }
  }
  bool is_zero() const {
    for (auto& c : c_)
      if (c != 0) return false;
    return true;
  }

 private:
  int rows_, cols_;
  std::vector<Rational> c_;
};

inline LiftingMatrix build_lifting(const PolynomialMap& P, const MultiIndexSet& G) {
  require(P.k() == G.k(), "build_lifting: P and Gamma have different k");
  LiftingMatrix L(P.d0(), G.d());
  for (auto& t : P.terms()) {
    auto idx = G.index_of(t.gamma);
    if (!idx) throw InvalidArgument("build_lifting: monomial " + to_string(t.gamma) + " is not in Gamma");
    L.at(t.j, static_cast<int>(*idx)) += t.c;
  }
  return L;
}

}  // namespace radonlab
