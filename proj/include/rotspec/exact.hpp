#pragma once

// Exact arithmetic helpers: big integers, big rationals, elements of Q(sqrt d),
// and directed rounding of transcendental constants to rationals.

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>
#include <string>

#include "rotspec/error.hpp"

namespace rotspec {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using BigRational =
    boost::multiprecision::number<boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
                                  boost::multiprecision::et_off>;
using HighFloat = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<50>, boost::multiprecision::et_off>;

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;  // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline BigInt floor(const BigRational& r) {
  return floor_div(numerator(r), denominator(r));
}

inline bool is_perfect_square(const BigInt& d) {
  if (d < 0) return false;
  BigInt s = boost::multiprecision::sqrt(d);
  return s * s == d;
}

/// floor((a + b*sqrt(d)) / c) for integers with c != 0 and d >= 0 not a perfect
/// square (or b == 0).
inline BigInt floor_surd(BigInt a, BigInt b, const BigInt& d, BigInt c) {
  if (c < 0) {
    a = -a;
    b = -b;
    c = -c;
  }
  if (b == 0) return floor_div(a, c);
  // b*sqrt(d) is irrational, so it lies strictly between two integers.
  BigInt s = boost::multiprecision::sqrt(BigInt(b * b * d));
  BigInt fl = b > 0 ? a + s : a - s - 1;
  return floor_div(fl, c);
}

/// Smallest double >= r.
inline double to_double_up(const BigRational& r) {
  double d = static_cast<double>(r);
  if (std::isfinite(d) && BigRational(d) < r) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  return d;
}

/// Largest double <= r.
inline double to_double_down(const BigRational& r) {
  double d = static_cast<double>(r);
  if (std::isfinite(d) && BigRational(d) > r) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  return d;
}

/// Rounds a positive value upward to `digits` significant decimal digits and
/// returns the result as an exact rational.
inline BigRational round_up_significant(const HighFloat& x, int digits = 30) {
  if (x <= 0) return BigRational(0);
  int e = 0;
  HighFloat scaled = x;
  while (scaled >= 10) { scaled /= 10; ++e; }
  while (scaled < 1) { scaled *= 10; --e; }
  const int shift = digits - 1 - e;
  HighFloat m = x * boost::multiprecision::pow(HighFloat(10), shift);
  m += m * HighFloat("1e-40");  // absorbs the working-precision error of x
  BigInt mant = boost::multiprecision::ceil(m).convert_to<BigInt>();
  if (shift >= 0) return BigRational(mant, boost::multiprecision::pow(BigInt(10), shift));
  return BigRational(mant * boost::multiprecision::pow(BigInt(10), -shift));
}

inline HighFloat to_high(const BigRational& r) {
  return HighFloat(numerator(r).str()) / HighFloat(denominator(r).str());
}

/// Element r + s*sqrt(d) of the real quadratic field Q(sqrt d). `d` is a
/// non-square integer >= 2 whenever s != 0.
struct QuadraticNumber {
  BigRational r{0};
  BigRational s{0};
  BigInt d{0};

  static QuadraticNumber rational(const BigRational& v) { return {v, BigRational(0), BigInt(0)}; }

  bool is_rational() const { return s == 0; }

  int sign() const {
    int sr = r.sign();
    int ss = s.sign();
    if (ss == 0) return sr;
    if (sr == 0 || sr == ss) return ss;
    return r * r > s * s * BigRational(d) ? sr : ss;
  }

  friend QuadraticNumber operator-(const QuadraticNumber& x) { return {-x.r, -x.s, x.d}; }

  friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
    return {x.r + y.r, x.s + y.s, x.s != 0 ? x.d : y.d};
  }
  friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) { return x + (-y); }
  friend QuadraticNumber operator*(const QuadraticNumber& x, const BigRational& k) { return {x.r * k, x.s * k, x.d}; }

  QuadraticNumber abs() const { return sign() < 0 ? -*this : *this; }

  friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y) { return (x - y).sign() < 0; }
  friend bool operator<(const QuadraticNumber& x, const BigRational& y) { return (x - rational(y)).sign() < 0; }
  friend bool operator<=(const QuadraticNumber& x, const BigRational& y) { return (x - rational(y)).sign() <= 0; }

  BigInt floor() const {
    if (s == 0) return rotspec::floor(r);
    BigInt l = boost::multiprecision::lcm(denominator(r), denominator(s));
    BigInt a = numerator(r) * (l / denominator(r));
    BigInt b = numerator(s) * (l / denominator(s));
    return floor_surd(a, b, d, l);
  }

  double to_double() const {
    if (s == 0) return static_cast<double>(r);
    HighFloat root = boost::multiprecision::sqrt(HighFloat(d.str()));
    if (r.sign() * s.sign() < 0) {
      // r + s*sqrt(d) = (r^2 - s^2 d) / (r - s*sqrt(d)) avoids cancellation.
      BigRational num = r * r - s * s * BigRational(d);
      HighFloat den = to_high(r) - to_high(s) * root;
      return static_cast<double>(to_high(num) / den);
    }
    return static_cast<double>(to_high(r) + to_high(s) * root);
  }
};

namespace constants {

inline const HighFloat& pi_high() {
  static const HighFloat v = boost::math::constants::pi<HighFloat>();
  return v;
}

inline const HighFloat& sqrt5_high() {
  static const HighFloat v = boost::multiprecision::sqrt(HighFloat(5));
  return v;
}

/// Upper rational bound for pi at 30 significant digits.
inline const BigRational& pi_upper() {
  static const BigRational v = round_up_significant(pi_high());
  return v;
}

/// Upper bound for 2*sqrt(5)/(sqrt(5)-1) = (5+sqrt(5))/2, the Fibonacci
/// reciprocal-sum constant.
inline const BigRational& fibonacci_tail_upper() {
  static const BigRational v = round_up_significant(2 * sqrt5_high() / (sqrt5_high() - 1));
  return v;
}

/// Upper bound for sqrt(3*pi).
inline const BigRational& sqrt_3pi_upper() {
  static const BigRational v = round_up_significant(boost::multiprecision::sqrt(3 * pi_high()));
  return v;
}

}  // namespace constants

}  // namespace rotspec
