#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace radonlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using cplx = std::complex<double>;

inline int64_t checked_add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("int64 addition overflow");
  return r;
}

inline int64_t checked_mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("int64 multiplication overflow");
  return r;
}

inline int64_t checked_pow(int64_t base, int e) {
  int64_t r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, base);
  return r;
}

inline int64_t floor_mod(int64_t a, int64_t m) {
  int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Neumaier's variant of Kahan summation.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(T x) {
    add(x);
    return *this;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

class CompensatedComplexSum {
 public:
  void add(cplx z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  CompensatedComplexSum& operator+=(cplx z) {
    add(z);
    return *this;
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum<double> re_, im_;
};

// Fractional part of xi*m in [0,1), exact up to the final rounding to long double.
// xi = M*2^-s with a 53-bit integer M, so xi*m mod 1 is (M*m mod 2^s)/2^s.
inline long double frac_product(double xi, int64_t m) {
  if (xi == 0.0 || m == 0) return 0.0L;
  int e;
  double mant = std::frexp(xi, &e);
  auto M = static_cast<int64_t>(std::ldexp(mant, 53));
  int s = 53 - e;
  if (s <= 0) return 0.0L;
  __int128 P = static_cast<__int128>(M) * m;
  long double f;
  if (s >= 127) {
    f = std::ldexp(static_cast<long double>(P), -s);
    if (f < 0) f += 1.0L;
  } else {
    unsigned __int128 mask = (static_cast<unsigned __int128>(1) << s) - 1;
    auto r = static_cast<unsigned __int128>(P) & mask;
    f = std::ldexp(static_cast<long double>(r), -s);
  }
  if (f >= 1.0L) f -= 1.0L;
  return f;
}

// e(t) = exp(2 pi i t), argument reduced to [-1/2, 1/2) first.
inline cplx unit_phase(long double turns) {
  turns -= std::floor(turns + 0.5L);
  double ang = static_cast<double>(2.0L * std::numbers::pi_v<long double> * turns);
  return {std::cos(ang), std::sin(ang)};
}

// Representative of x mod 1 in [-1/2, 1/2).
inline double torus_reduce(double x) {
  double r = x - std::floor(x + 0.5);
  return r >= 0.5 ? r - 1.0 : r;
}

inline double norm2(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace radonlab
