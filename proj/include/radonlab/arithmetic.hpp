#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "lattice.hpp"
#include "numeric.hpp"

namespace radonlab {

// ---- primes and factorization ----

inline std::vector<uint64_t> primes_up_to(uint64_t n) {
  std::vector<uint64_t> out;
  if (n < 2) return out;
  std::vector<bool> comp(n + 1, false);
  for (uint64_t i = 2; i <= n; ++i) {
    if (comp[i]) continue;
    out.push_back(i);
    for (uint64_t j = i * i; j <= n; j += i) comp[j] = true;
  }
  return out;
}

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline uint64_t powmod(uint64_t a, uint64_t e, uint64_t m) {
  uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37})
    if (n % p == 0) return n == p;
  uint64_t d = n - 1;
  int s = 0;
  while (d % 2 == 0) d /= 2, ++s;
  for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool comp = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        comp = false;
        break;
      }
    }
    if (comp) return false;
  }
  return true;
}

class FactoredInt {
 public:
  using Factor = std::pair<uint64_t, int>;

  FactoredInt() = default;  // 1
  explicit FactoredInt(std::vector<Factor> f) : f_(std::move(f)) { normalize(); }

  static FactoredInt of(uint64_t n) {
    require(n >= 1, "FactoredInt: value must be >= 1");
    guard(n <= (uint64_t(1) << 50) || is_prime(n), "FactoredInt: trial division limited to 2^50");
    std::vector<Factor> f;
    for (uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
      if (n % p) continue;
      int e = 0;
      while (n % p == 0) n /= p, ++e;
      f.push_back({p, e});
    }
    if (n > 1) f.push_back({n, 1});
    return FactoredInt(std::move(f));
  }
  static FactoredInt prime_power(uint64_t p, int e) { return FactoredInt({{p, e}}); }

  const std::vector<Factor>& factors() const { return f_; }
  bool is_one() const { return f_.empty(); }
  int omega() const { return static_cast<int>(f_.size()); }
  int exponent_of(uint64_t p) const {
    for (auto& [q, e] : f_)
      if (q == p) return e;
    return 0;
  }

  BigInt value() const {
    BigInt v = 1;
    for (auto& [p, e] : f_) v *= boost::multiprecision::pow(BigInt(p), e);
    return v;
  }
  std::optional<uint64_t> value_u64() const {
    uint64_t v = 1;
    for (auto& [p, e] : f_)
      for (int i = 0; i < e; ++i)
        if (__builtin_mul_overflow(v, p, &v)) return std::nullopt;
    return v;
  }
  double log_value() const {
    double s = 0;
    for (auto& [p, e] : f_) s += e * std::log(static_cast<double>(p));
    return s;
  }

  FactoredInt operator*(const FactoredInt& o) const {
    std::vector<Factor> f(f_);
    f.insert(f.end(), o.f_.begin(), o.f_.end());
    return FactoredInt(std::move(f));
  }
  bool divides(const FactoredInt& o) const {
    for (auto& [p, e] : f_)
      if (o.exponent_of(p) < e) return false;
    return true;
  }
  bool coprime(const FactoredInt& o) const {
    for (auto& [p, e] : f_)
      if (o.exponent_of(p) > 0) return false;
    return true;
  }

  bool operator==(const FactoredInt& o) const { return f_ == o.f_; }
  bool operator<(const FactoredInt& o) const { return f_ < o.f_; }

  std::string str() const {
    if (f_.empty()) return "1";
    std::string s;
    for (auto& [p, e] : f_) {
      if (!s.empty()) s += "*";
      s += std::to_string(p);
      if (e > 1) s += "^" + std::to_string(e);
    }
    return s;
  }
  static FactoredInt parse(const std::string& s) {
    if (s == "1") return {};
    std::vector<Factor> f;
    size_t pos = 0;
    while (pos < s.size()) {
      size_t star = s.find('*', pos);
      std::string tok = s.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
      size_t hat = tok.find('^');
      uint64_t p = std::stoull(tok.substr(0, hat));
      int e = hat == std::string::npos ? 1 : std::stoi(tok.substr(hat + 1));
      require(is_prime(p), "FactoredInt::parse: " + std::to_string(p) + " is not prime");
      f.push_back({p, e});
      if (star == std::string::npos) break;
      pos = star + 1;
    }
    return FactoredInt(std::move(f));
  }

 private:
  void normalize() {
    std::sort(f_.begin(), f_.end());
    std::vector<Factor> out;
    for (auto& [p, e] : f_) {
      require(e >= 0, "FactoredInt: negative exponent");
      if (e == 0) continue;
      if (!out.empty() && out.back().first == p)
        out.back().second += e;
      else
        out.push_back({p, e});
    }
    f_ = std::move(out);
  }
  std::vector<Factor> f_;
};

inline bool value_less(const FactoredInt& a, const FactoredInt& b) {
  double la = a.log_value(), lb = b.log_value();
  if (std::abs(la - lb) > 1e-9 * std::max(1.0, std::max(la, lb))) return la < lb;
  if (a == b) return false;
  return a.value() < b.value();
}

// J_d(q) = q^d prod_{p | q} (1 - p^{-d})
inline BigInt jordan_totient(const FactoredInt& q, int d) {
  BigInt r = 1;
  for (auto& [p, e] : q.factors()) {
    BigInt pd = boost::multiprecision::pow(BigInt(p), d);
    r *= boost::multiprecision::pow(pd, e - 1) * (pd - 1);
  }
  return r;
}

inline uint64_t gcd_u64(uint64_t a, uint64_t b) { return std::gcd(a, b); }

// ---- rational points ----

struct RationalPoint {
  std::vector<uint64_t> a;  // entries in [1, q]
  FactoredInt q;
  uint64_t qv = 1;          // value of q (fraction sets are only materialized for 64-bit q)

  // a_gamma/q reduced to [-1/2, 1/2)
  std::vector<double> torus() const {
    std::vector<double> t(a.size());
    for (size_t i = 0; i < a.size(); ++i)
      t[i] = torus_reduce(static_cast<double>(a[i] % qv) / static_cast<double>(qv));
    return t;
  }
  bool operator<(const RationalPoint& o) const {
    if (qv != o.qv) return qv < o.qv;
    return a < o.a;
  }
  bool operator==(const RationalPoint& o) const { return qv == o.qv && a == o.a; }
};

struct FractionSet {
  enum class Kind { UN, Farey, Explicit };
  Kind kind = Kind::Explicit;
  nlohmann::json provenance = nlohmann::json::object();
  int d = 1;
  std::vector<RationalPoint> points;

  size_t size() const { return points.size(); }
  void sort_unique() {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
  }
  bool contains(const RationalPoint& p) const { return std::binary_search(points.begin(), points.end(), p); }
  uint64_t max_denominator() const {
    uint64_t m = 1;
    for (auto& p : points) m = std::max(m, p.qv);
    return m;
  }
};

inline constexpr uint64_t kFractionGuard = 1000000;

inline std::vector<std::vector<uint64_t>> reduced_fractions(const FactoredInt& q, int d) {
  require(d >= 1, "reduced_fractions: d must be >= 1");
  BigInt count = jordan_totient(q, d);
  guard(count <= kFractionGuard, "reduced_fractions: " + count.str() + " fractions exceed the 10^6 guard");
  uint64_t qv = *q.value_u64();
  std::vector<std::vector<uint64_t>> out;
  std::vector<uint64_t> a(d, 1);
  while (true) {
    uint64_t g = qv;
    for (uint64_t v : a) g = gcd_u64(g, v);
    if (g == 1) out.push_back(a);
    int i = d - 1;
    while (i >= 0 && a[i] == qv) a[i--] = 1;
    if (i < 0) break;
    ++a[i];
  }
  return out;
}

inline FractionSet fractions_with_denominators(const std::vector<FactoredInt>& qs, int d) {
  BigInt total = 0;
  for (auto& q : qs) total += jordan_totient(q, d);
  guard(total <= kFractionGuard, "fraction set of size " + total.str() + " exceeds the 10^6 guard");
  FractionSet F;
  F.d = d;
  for (auto& q : qs) {
    uint64_t qv = *q.value_u64();
    for (auto& a : reduced_fractions(q, d)) F.points.push_back({a, q, qv});
  }
  F.sort_unique();
  return F;
}

inline FractionSet farey_set(uint64_t qmax, int d) {
  std::vector<FactoredInt> qs;
  for (uint64_t q = 1; q <= qmax; ++q) qs.push_back(FactoredInt::of(q));
  FractionSet F = fractions_with_denominators(qs, d);
  F.kind = FractionSet::Kind::Farey;
  F.provenance = {{"kind", "farey"}, {"Qmax", qmax}};
  return F;
}

// ---- P_N and U_N ----

struct PNParams {
  int N = 2;
  double rho = 1;
  int N0 = 1;
  int D = 1;
  FactoredInt Q0;
  std::vector<uint64_t> large_primes;  // primes in (N0, N]
};

inline int floor_pow(double base, double expo) {
  long double v = std::pow(static_cast<long double>(base), static_cast<long double>(expo));
  long double f = std::floor(v + 1e-12L);  // integer powers such as 16^(1/4) must floor to 2
  return static_cast<int>(f);
}

inline PNParams pn_params(int N, double rho) {
  require(N >= 2, "P_N: N must be >= 2");
  require(rho > 0 && rho <= 1, "P_N: rho must lie in (0, 1]");
  PNParams P;
  P.N = N;
  P.rho = rho;
  P.N0 = floor_pow(N, rho / 2) + 1;
  P.D = static_cast<int>(std::floor(2.0 / rho + 1e-12)) + 1;
  std::vector<FactoredInt::Factor> f;
  for (uint64_t p : primes_up_to(P.N0)) {
    int v = 0;
    for (uint64_t pk = p; pk <= static_cast<uint64_t>(P.N0); pk *= p) v += static_cast<int>(P.N0 / pk);
    f.push_back({p, v * P.D});
  }
  P.Q0 = FactoredInt(f);
  for (uint64_t p : primes_up_to(N))
    if (p > static_cast<uint64_t>(P.N0)) P.large_primes.push_back(p);
  return P;
}

// All divisors of n with value <= cap (cap = 0: no cap).
inline std::vector<FactoredInt> divisors(const FactoredInt& n, double log_cap = INFINITY) {
  std::vector<FactoredInt> out;
  std::vector<FactoredInt::Factor> cur;
  const auto& f = n.factors();
  auto rec = [&](auto& self, size_t i, double lv) -> void {
    if (i == f.size()) {
      out.emplace_back(cur);
      return;
    }
    double lp = std::log(static_cast<double>(f[i].first));
    for (int e = 0; e <= f[i].second; ++e) {
      if (lv + e * lp > log_cap + 1e-9) break;
      if (e) cur.push_back({f[i].first, e});
      self(self, i + 1, lv + e * lp);
      if (e) cur.pop_back();
    }
  };
  rec(rec, 0, 0.0);
  return out;
}

inline BigInt count_pn_large(const PNParams& P) {
  // sum_{k<=D} C(m,k) D^k, including w = 1
  BigInt total = 0, binom = 1;
  size_t m = P.large_primes.size();
  for (size_t k = 0; k <= std::min<size_t>(m, P.D); ++k) {
    total += binom * boost::multiprecision::pow(BigInt(P.D), static_cast<unsigned>(k));
    binom = binom * (m - k) / (k + 1);
  }
  return total;
}

// Pi(P_N) union {1}: products of <= D distinct large primes at exponents in [1, D].
inline std::vector<FactoredInt> pn_large_parts(const PNParams& P, double log_cap = INFINITY) {
  if (!std::isfinite(log_cap))
    guard(count_pn_large(P) <= kFractionGuard, "Pi(P_N) exceeds the 10^6 guard; pass a q-cap");
  std::vector<FactoredInt> out;
  std::vector<FactoredInt::Factor> cur;
  const auto& ps = P.large_primes;
  auto rec = [&](auto& self, size_t i, double lv) -> void {
    out.emplace_back(cur);
    guard(out.size() <= 20 * kFractionGuard, "Pi(P_N) enumeration too large");
    if (static_cast<int>(cur.size()) == P.D) return;
    for (size_t j = i; j < ps.size(); ++j) {
      double lp = std::log(static_cast<double>(ps[j]));
      if (lv + lp > log_cap + 1e-9) break;
      for (int e = 1; e <= P.D; ++e) {
        if (lv + e * lp > log_cap + 1e-9) break;
        cur.push_back({ps[j], e});
        self(self, j + 1, lv + e * lp);
        cur.pop_back();
      }
    }
  };
  rec(rec, 0, 0.0);
  return out;
}

// P_N, optionally intersected with [1, qcap]; sorted by value.
inline std::vector<FactoredInt> build_PN(int N, double rho, std::optional<uint64_t> qcap = std::nullopt) {
  PNParams P = pn_params(N, rho);
  double log_cap = qcap ? std::log(static_cast<double>(*qcap)) : INFINITY;
  if (!qcap) {
    BigInt total = count_pn_large(P);
    BigInt ndiv = 1;
    for (auto& [p, e] : P.Q0.factors()) ndiv *= e + 1;
    guard(BigInt(total * ndiv) <= kFractionGuard,
          "P_N has " + BigInt(total * ndiv).str() + " elements, above the 10^6 guard; pass a q-cap");
  }
  auto Qs = divisors(P.Q0, log_cap);
  auto ws = pn_large_parts(P, log_cap);
  std::vector<FactoredInt> out;
  for (auto& Q : Qs)
    for (auto& w : ws) {
      if (qcap && Q.log_value() + w.log_value() > log_cap + 1e-9) continue;
      FactoredInt q = Q * w;
      if (qcap) {
        auto v = q.value_u64();
        if (!v || *v > *qcap) continue;
      }
      out.push_back(q);
    }
  std::sort(out.begin(), out.end(), value_less);
  return out;
}

// Splits q = Q*w with Q | Q0 and w in Pi(P_N) union {1}, if possible.
inline std::optional<std::pair<FactoredInt, FactoredInt>> decompose_in_PN(const FactoredInt& q, const PNParams& P) {
  std::vector<FactoredInt::Factor> small, large;
  for (auto& [p, e] : q.factors()) {
    if (p <= static_cast<uint64_t>(P.N0)) {
      if (P.Q0.exponent_of(p) < e) return std::nullopt;
      small.push_back({p, e});
    } else {
      if (p > static_cast<uint64_t>(P.N) || e > P.D) return std::nullopt;
      large.push_back({p, e});
    }
  }
  if (static_cast<int>(large.size()) > P.D) return std::nullopt;
  return std::make_pair(FactoredInt(small), FactoredInt(large));
}

// The torus points a/q in U_M, with U_0 = {} and U_1 = {0}.
inline FractionSet build_UN(int N, double rho, const MultiIndexSet& G, std::optional<uint64_t> qcap = std::nullopt) {
  FractionSet F;
  F.d = G.d();
  F.kind = FractionSet::Kind::UN;
  F.provenance = {{"kind", "UN"}, {"N", N}, {"rho", rho}};
  if (qcap) F.provenance["qcap"] = *qcap;
  if (N <= 0) {
    F.provenance["convention"] = "U_0 is empty";
    return F;
  }
  if (N == 1) {
    F.provenance["convention"] = "U_1 = {0} (integral points)";
    F.points.push_back({std::vector<uint64_t>(G.d(), 1), FactoredInt(), 1});
    return F;
  }
  auto qs = build_PN(N, rho, qcap);
  FractionSet M = fractions_with_denominators(qs, G.d());
  M.kind = F.kind;
  M.provenance = F.provenance;
  return M;
}

// ---- CRT ----

inline int64_t mod_inverse(int64_t a, int64_t m) {
  int64_t g = m, x = 0, x1 = 1, a1 = floor_mod(a, m);
  int64_t b = a1;
  while (b) {
    int64_t t = g / b;
    std::tie(g, b) = std::make_pair(b, g - t * b);
    std::tie(x, x1) = std::make_pair(x1, x - t * x1);
  }
  require(g == 1, "mod_inverse: not invertible");
  return floor_mod(x, m);
}

// a/(q1 q2) = a1/q1 + a2/q2 mod Z^d, a1 in [0,q1)^d, a2 in [0,q2)^d.
inline std::pair<std::vector<int64_t>, std::vector<int64_t>> crt_split(const std::vector<int64_t>& a, int64_t q1, int64_t q2) {
  require(q1 >= 1 && q2 >= 1, "crt_split: moduli must be positive");
  require(std::gcd(q1, q2) == 1, "crt_split: moduli are not coprime");
  std::vector<int64_t> a1(a.size()), a2(a.size());
  int64_t i2 = q1 == 1 ? 0 : mod_inverse(q2, q1);
  int64_t i1 = q2 == 1 ? 0 : mod_inverse(q1, q2);
  for (size_t i = 0; i < a.size(); ++i) {
    a1[i] = q1 == 1 ? 0 : static_cast<int64_t>(mulmod(floor_mod(a[i], q1), i2, q1));
    a2[i] = q2 == 1 ? 0 : static_cast<int64_t>(mulmod(floor_mod(a[i], q2), i1, q2));
  }
  return {a1, a2};
}

// ---- O property ----

struct OPropertyWitness {
  int k = 0;
  std::vector<std::vector<FactoredInt>> sets;  // S_1..S_k, each element a prime power
  int D = 0;                                   // 0: do not check k <= D
};

struct OPropertyResult {
  bool ok = false;
  std::string reason;
};

inline OPropertyResult o_property_verify(const std::vector<FactoredInt>& Lambda, const OPropertyWitness& W,
                                         const std::vector<uint64_t>* allowed_primes = nullptr) {
  auto fail = [](std::string r) { return OPropertyResult{false, std::move(r)}; };
  if (W.k != static_cast<int>(W.sets.size())) return fail("shape: k != number of sets");
  if (W.D > 0 && W.k > W.D) return fail("(i) k exceeds D");
  std::map<uint64_t, int> slot_of_prime;
  std::vector<int> gamma(W.k, 0);
  for (int j = 0; j < W.k; ++j) {
    if (W.sets[j].empty()) return fail("(i) empty set S_" + std::to_string(j + 1));
    for (auto& s : W.sets[j]) {
      if (s.omega() != 1) return fail("(ii) " + s.str() + " is not a prime power");
      auto [p, e] = s.factors()[0];
      if (gamma[j] == 0) gamma[j] = e;
      if (e != gamma[j]) return fail("(ii) unequal exponents in S_" + std::to_string(j + 1));
      if (W.D > 0 && e > W.D) return fail("(ii) exponent exceeds D");
      if (allowed_primes && !std::binary_search(allowed_primes->begin(), allowed_primes->end(), p))
        return fail("(ii) prime " + std::to_string(p) + " not in V");
      if (slot_of_prime.count(p)) return fail("(iv) prime " + std::to_string(p) + " appears twice");
      slot_of_prime[p] = j;
    }
  }
  std::set<FactoredInt> seen;
  for (auto& w : Lambda) {
    if (!seen.insert(w).second) continue;
    if (w.omega() != W.k) return fail("(iii) " + w.str() + " does not have k prime factors");
    std::vector<bool> used(W.k, false);
    for (auto& [p, e] : w.factors()) {
      auto it = slot_of_prime.find(p);
      if (it == slot_of_prime.end()) return fail("(iii) " + w.str() + " uses a prime outside the sets");
      int j = it->second;
      if (used[j] || gamma[j] != e) return fail("(iii) " + w.str() + " is not a product over the sets");
      used[j] = true;
    }
  }
  return {true, ""};
}

// Exhaustive witness search using only the prime powers occurring in Lambda.
inline std::optional<OPropertyWitness> find_o_witness(const std::vector<FactoredInt>& Lambda, int k_max) {
  if (Lambda.empty()) return OPropertyWitness{};
  int k = Lambda[0].omega();
  for (auto& w : Lambda)
    if (w.omega() != k) return std::nullopt;
  if (k > k_max) return std::nullopt;
  if (k == 0) return OPropertyWitness{};
  std::map<uint64_t, int> expo;
  for (auto& w : Lambda)
    for (auto& [p, e] : w.factors()) {
      auto it = expo.find(p);
      if (it != expo.end() && it->second != e) return std::nullopt;  // p^e and p^e' not coprime
      expo[p] = e;
    }
  std::vector<uint64_t> primes;
  for (auto& [p, e] : expo) primes.push_back(p);
  std::vector<int> slot(primes.size(), -1);
  auto index_of = [&](uint64_t p) {
    return static_cast<size_t>(std::lower_bound(primes.begin(), primes.end(), p) - primes.begin());
  };
  std::vector<int> slot_gamma(k, 0);
  auto consistent = [&]() {
    for (auto& w : Lambda) {
      std::vector<bool> used(k, false);
      for (auto& [p, e] : w.factors()) {
        int s = slot[index_of(p)];
        if (s < 0) continue;
        if (used[s]) return false;
        used[s] = true;
      }
    }
    return true;
  };
  std::optional<OPropertyWitness> found;
  auto rec = [&](auto& self, size_t i, int slots_used) -> void {
    if (found) return;
    if (i == primes.size()) {
      OPropertyWitness W;
      W.k = k;
      W.sets.assign(k, {});
      for (size_t t = 0; t < primes.size(); ++t) W.sets[slot[t]].push_back(FactoredInt::prime_power(primes[t], expo[primes[t]]));
      if (o_property_verify(Lambda, W).ok) found = W;
      return;
    }
    for (int s = 0; s < std::min(k, slots_used + 1); ++s) {  // canonical slot labelling
      if (slot_gamma[s] != 0 && slot_gamma[s] != expo[primes[i]]) continue;
      int saved = slot_gamma[s];
      slot_gamma[s] = expo[primes[i]];
      slot[i] = s;
      if (consistent()) self(self, i + 1, std::max(slots_used, s + 1));
      slot[i] = -1;
      slot_gamma[s] = saved;
    }
  };
  rec(rec, 0, 0);
  return found;
}

// ---- shattering families ----

struct PartitionFamily {
  int N = 1, k = 1;
  int64_t seed = 0;       // requested seed
  int64_t seed_used = 0;  // seed of the accepted draw
  int retries = 0;
  std::vector<std::vector<int>> maps;  // maps[l][x] in [1, k], x in [0, N)

  nlohmann::json to_json() const {
    return {{"N", N}, {"k", k}, {"seed", seed}, {"seed_used", seed_used}, {"retries", retries}, {"maps", maps}};
  }
  static PartitionFamily from_json(const nlohmann::json& j) {
    PartitionFamily F;
    F.N = j.at("N");
    F.k = j.at("k");
    F.seed = j.at("seed");
    F.seed_used = j.value("seed_used", F.seed);
    F.retries = j.value("retries", 0);
    F.maps = j.at("maps").get<std::vector<std::vector<int>>>();
    return F;
  }
};

inline int partition_family_size(int N, int k) {
  double kk = std::pow(static_cast<double>(k), k + 1) / std::tgamma(k + 1.0);
  return static_cast<int>(std::ceil(kk * std::log(std::exp(1.0) * N / k) - 1e-12)) + 1;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

inline bool shatter_verify(const PartitionFamily& F) {
  require(F.k >= 1 && F.k <= F.N, "shatter_verify: need 1 <= k <= N");
  guard(binomial(F.N, F.k) <= kFractionGuard,
        "shatter_verify: C(N,k) exceeds the 10^6 exhaustive guard; use a sampling check");
  if (F.k == 1) return true;
  std::vector<int> E(F.k);
  std::iota(E.begin(), E.end(), 0);
  while (true) {
    bool hit = false;
    for (auto& f : F.maps) {
      uint64_t mask = 0;
      for (int x : E) mask |= uint64_t(1) << (f[x] - 1);
      if (std::popcount(mask) == F.k) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
    int i = F.k - 1;
    while (i >= 0 && E[i] == F.N - F.k + i) --i;
    if (i < 0) break;
    ++E[i];
    for (int j = i + 1; j < F.k; ++j) E[j] = E[j - 1] + 1;
  }
  return true;
}

inline PartitionFamily partition_family(int N, int k, int64_t seed, int max_retries = 1000) {
  require(k >= 1, "partition_family: k must be >= 1");
  require(k <= N, "partition_family: k > N");
  require(k <= 64, "partition_family: k > 64");
  PartitionFamily F;
  F.N = N;
  F.k = k;
  F.seed = seed;
  int r = partition_family_size(N, k);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    F.seed_used = seed + attempt;
    F.retries = attempt;
    std::mt19937_64 rng(static_cast<uint64_t>(F.seed_used));
    std::uniform_int_distribution<int> col(1, k);
    F.maps.assign(r, std::vector<int>(N));
    for (auto& f : F.maps) {
      while (true) {
        uint64_t mask = 0;
        for (auto& v : f) {
          v = col(rng);
          mask |= uint64_t(1) << (v - 1);
        }
        if (std::popcount(mask) == k) break;  // resample non-surjective draws
      }
    }
    if (shatter_verify(F)) return F;
  }
  throw GuardError("partition_family: no shattering family after retries");
}

// ---- the O(log N) partition of P_N / U_N ----

struct DenominatorClass {
  int k = 0;
  std::vector<int> gamma;          // exponent pattern
  int map_index = -1;              // which f_i produced the class (-1 for k = 0)
  std::vector<FactoredInt> Lambda; // the w-parts; the class is {Q w : Q | Q0, w in Lambda}
  OPropertyWitness witness;
};

struct IwPartition {
  PNParams params;
  int64_t seed = 0;
  std::vector<PartitionFamily> families;  // one per k (index k-1)
  std::vector<DenominatorClass> classes;
  double log_cap = INFINITY;

  // Explicit constant C with 1 + sum_k D^k r_k(N) <= C log N for every N >= Nmin.
  static double construction_constant(int D, int m_max, double Nmin) {
    double c = 1.0 / std::log(Nmin);
    for (int k = 1; k <= std::min(D, m_max); ++k) {
      double kk = std::pow(static_cast<double>(k), k + 1) / std::tgamma(k + 1.0);
      // r_k(N) <= kk (log N + 1 - log k) + 2
      double ck = kk * (1.0 + std::max(0.0, 1.0 - std::log(static_cast<double>(k))) / std::log(Nmin)) +
                  2.0 / std::log(Nmin);
      c += std::pow(static_cast<double>(D), k) * ck;
    }
    return c;
  }
};

// Classes Pi_{k,i}^gamma of the proof, made disjoint by keeping each w in the
// first class that contains it; empty classes are dropped.
inline IwPartition partition_PN(int N, double rho, int64_t seed, std::optional<uint64_t> qcap = std::nullopt) {
  IwPartition out;
  out.params = pn_params(N, rho);
  out.seed = seed;
  const PNParams& P = out.params;
  out.log_cap = qcap ? std::log(static_cast<double>(*qcap)) : INFINITY;
  const auto& V = P.large_primes;
  const int m = static_cast<int>(V.size());
  if (!qcap)
    guard(count_pn_large(P) <= kFractionGuard, "partition_PN: Pi(P_N) exceeds the 10^6 guard; pass a q-cap");

  DenominatorClass one;
  one.k = 0;
  one.Lambda.push_back(FactoredInt());
  one.witness.D = P.D;
  out.classes.push_back(one);

  std::unordered_set<std::string> taken;
  for (int k = 1; k <= std::min(P.D, m); ++k) {
    PartitionFamily fam = partition_family(m, k, seed * 1009 + k);
    out.families.push_back(fam);
    std::vector<int> gamma(k, 1);
    while (true) {
      for (size_t i = 0; i < fam.maps.size(); ++i) {
        std::vector<std::vector<int>> cls(k);
        for (int x = 0; x < m; ++x) cls[fam.maps[i][x] - 1].push_back(x);
        DenominatorClass C;
        C.k = k;
        C.gamma = gamma;
        C.map_index = static_cast<int>(i);
        C.witness.k = k;
        C.witness.D = P.D;
        C.witness.sets.assign(k, {});
        for (int j = 0; j < k; ++j)
          for (int x : cls[j]) C.witness.sets[j].push_back(FactoredInt::prime_power(V[x], gamma[j]));
        std::vector<int> pick(k, 0);
        while (true) {
          std::vector<FactoredInt::Factor> f;
          std::string key;
          double lv = 0;
          for (int j = 0; j < k; ++j) {
            uint64_t p = V[cls[j][pick[j]]];
            f.push_back({p, gamma[j]});
            lv += gamma[j] * std::log(static_cast<double>(p));
          }
          if (lv <= out.log_cap + 1e-9) {
            FactoredInt w(f);
            for (auto& [p, e] : w.factors()) {
              key += std::to_string(p) + "^" + std::to_string(e) + ",";
            }
            if (taken.insert(key).second) C.Lambda.push_back(std::move(w));
          }
          int j = k - 1;
          while (j >= 0 && pick[j] + 1 == static_cast<int>(cls[j].size())) pick[j--] = 0;
          if (j < 0) break;
          ++pick[j];
        }
        if (!C.Lambda.empty()) out.classes.push_back(std::move(C));
      }
      int j = k - 1;
      while (j >= 0 && gamma[j] == P.D) gamma[j--] = 1;
      if (j < 0) break;
      ++gamma[j];
    }
  }
  return out;
}

// Denominators of one class (optionally capped), sorted by value.
inline std::vector<FactoredInt> class_denominators(const IwPartition& part, const DenominatorClass& C) {
  auto Qs = divisors(part.params.Q0, part.log_cap);
  std::vector<FactoredInt> out;
  for (auto& w : C.Lambda)
    for (auto& Q : Qs) {
      if (Q.log_value() + w.log_value() > part.log_cap + 1e-9) continue;
      out.push_back(Q * w);
    }
  std::sort(out.begin(), out.end(), value_less);
  return out;
}

inline std::vector<FractionSet> partition_UN(int N, double rho, const MultiIndexSet& G, int64_t seed,
                                             std::optional<uint64_t> qcap = std::nullopt) {
  IwPartition part = partition_PN(N, rho, seed, qcap);
  std::vector<std::vector<FactoredInt>> dens;
  BigInt total = 0;
  for (auto& C : part.classes) {
    dens.push_back(class_denominators(part, C));
    for (auto& q : dens.back()) {
      total += jordan_totient(q, G.d());
      guard(total <= kFractionGuard, "partition_UN: fraction count exceeds the 10^6 guard; pass a q-cap");
    }
  }
  std::vector<FractionSet> out;
  for (size_t i = 0; i < part.classes.size(); ++i) {
    FractionSet F = fractions_with_denominators(dens[i], G.d());
    F.kind = FractionSet::Kind::UN;
    F.provenance = {{"kind", "UN_class"}, {"N", N}, {"rho", rho}, {"class", i}};
    out.push_back(std::move(F));
  }
  return out;
}

}  // namespace radonlab
