#pragma once

// Continued-fraction expansion of a rotation parameter theta in (0,1) and the
// quantitative facts about its convergents, all in exact arithmetic.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rotspec/error.hpp"
#include "rotspec/exact.hpp"

namespace rotspec {

/// (a + b*sqrt(d)) / c with d >= 2 not a perfect square.
struct QuadraticSurd {
  BigInt a;
  BigInt b;
  BigInt c;
  BigInt d;
};

/// A decimal literal known to within 10^-precision of its written value.
struct DecimalString {
  std::string digits;
  int precision = 0;
};

/// Exact or interval-valued real number used as a rotation parameter.
class RealNumberInput {
 public:
  using Variant = std::variant<BigRational, QuadraticSurd, DecimalString>;

  RealNumberInput() = default;  // rational 0

  static RealNumberInput rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw Error(ErrorKind::InvalidInput, "zero denominator");
    return RealNumberInput(BigRational(num, den));
  }

  static RealNumberInput surd(BigInt a, BigInt b, BigInt c, BigInt d) {
    if (c == 0) throw Error(ErrorKind::InvalidInput, "surd denominator is zero");
    if (d < 2 || is_perfect_square(d)) throw Error(ErrorKind::InvalidInput, "surd radicand must be a non-square >= 2");
    if (b == 0) throw Error(ErrorKind::InvalidInput, "degenerate surd (b = 0 is rational)");
    if (c < 0) {
      a = -a;
      b = -b;
      c = -c;
    }
    return RealNumberInput(QuadraticSurd{std::move(a), std::move(b), std::move(c), std::move(d)});
  }

  /// `precision` < 0 means "number of digits written after the decimal point".
  static RealNumberInput decimal(const std::string& digits, int precision = -1) {
    const int frac_digits = parse_decimal(digits).second;
    if (precision < 0) precision = frac_digits;
    if (precision == 0) throw Error(ErrorKind::InvalidInput, "decimal precision must be positive");
    return RealNumberInput(DecimalString{digits, precision});
  }

  const Variant& value() const { return value_; }

  bool is_rational() const { return std::holds_alternative<BigRational>(value_); }
  bool is_surd() const { return std::holds_alternative<QuadraticSurd>(value_); }
  bool is_decimal() const { return std::holds_alternative<DecimalString>(value_); }
  bool is_exact() const { return !is_decimal(); }

  /// Exact value for rational or surd input; the written center for decimals.
  QuadraticNumber center() const {
    if (auto* r = std::get_if<BigRational>(&value_)) return QuadraticNumber::rational(*r);
    if (auto* s = std::get_if<QuadraticSurd>(&value_))
      return {BigRational(s->a, s->c), BigRational(s->b, s->c), s->d};
    return QuadraticNumber::rational(parse_decimal(std::get<DecimalString>(value_).digits).first);
  }

  /// Certified enclosure [lo, hi] for decimal input.
  std::pair<BigRational, BigRational> decimal_interval() const {
    const auto& dec = std::get<DecimalString>(value_);
    BigRational v = parse_decimal(dec.digits).first;
    BigRational radius(BigInt(1), boost::multiprecision::pow(BigInt(10), dec.precision));
    return {v - radius, v + radius};
  }

  double to_double() const { return center().to_double(); }

  /// Round-trippable text in the CLI grammar.
  std::string to_string() const {
    if (auto* r = std::get_if<BigRational>(&value_))
      return "rational:" + numerator(*r).str() + "/" + denominator(*r).str();
    if (auto* s = std::get_if<QuadraticSurd>(&value_))
      return "surd:(" + s->a.str() + "+" + s->b.str() + "*sqrt(" + s->d.str() + "))/" + s->c.str();
    const auto& dec = std::get<DecimalString>(value_);
    return "decimal:" + dec.digits;
  }

  static std::pair<BigRational, int> parse_decimal(const std::string& text) {
    std::string t = text;
    bool negative = false;
    if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
      negative = t[0] == '-';
      t.erase(0, 1);
    }
    auto dot = t.find('.');
    std::string int_part = dot == std::string::npos ? t : t.substr(0, dot);
    std::string frac_part = dot == std::string::npos ? "" : t.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) throw Error(ErrorKind::InvalidInput, "empty decimal '" + text + "'");
    auto all_digits = [](const std::string& s) {
      return std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
    };
    if (!all_digits(int_part) || !all_digits(frac_part))
      throw Error(ErrorKind::InvalidInput, "malformed decimal '" + text + "'");
    std::string all = int_part + frac_part;
    all.erase(0, std::min(all.find_first_not_of('0'), all.size()));  // a leading 0 would read as octal
    BigInt num(all.empty() ? std::string("0") : all);
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac_part.size()));
    BigRational v(num, den);
    return {negative ? BigRational(-v) : v, static_cast<int>(frac_part.size())};
  }

 private:
  explicit RealNumberInput(Variant v) : value_(std::move(v)) {}
  Variant value_;
};

/// Parses "rational:<p>/<q>", "surd:(<a>+<b>*sqrt(<d>))/<c>" or
/// "decimal:<digits>".
inline RealNumberInput parse_theta(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidInput, "theta must be tagged rational:/surd:/decimal:");
  std::string kind = text.substr(0, colon);
  std::string body = text.substr(colon + 1);
  body.erase(std::remove_if(body.begin(), body.end(), [](char ch) { return ch == ' '; }), body.end());
  auto to_int = [&](const std::string& s) {
    if (s.empty()) throw Error(ErrorKind::InvalidInput, "malformed theta '" + text + "'");
    std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size() || !std::all_of(s.begin() + static_cast<std::ptrdiff_t>(start), s.end(),
                                          [](char ch) { return ch >= '0' && ch <= '9'; }))
      throw Error(ErrorKind::InvalidInput, "malformed integer '" + s + "' in theta");
    std::string digits = s.substr(start);
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    return s[0] == '-' ? BigInt(-BigInt(digits)) : BigInt(digits);
  };
  if (kind == "rational") {
    auto slash = body.find('/');
    if (slash == std::string::npos) throw Error(ErrorKind::InvalidInput, "rational theta needs p/q");
    return RealNumberInput::rational(to_int(body.substr(0, slash)), to_int(body.substr(slash + 1)));
  }
  if (kind == "surd") {
    // (<a>+<b>*sqrt(<d>))/<c>; a sign may be folded into the '+', e.g. (1+-1*sqrt(2))
    if (body.size() < 2 || body[0] != '(') throw Error(ErrorKind::InvalidInput, "surd must start with '('");
    auto sqrt_pos = body.find("*sqrt(");
    auto close = body.find("))/");
    if (sqrt_pos == std::string::npos || close == std::string::npos || close < sqrt_pos)
      throw Error(ErrorKind::InvalidInput, "surd must look like (a+b*sqrt(d))/c");
    std::string ab = body.substr(1, sqrt_pos - 1);
    // split a and b at the last sign that is not leading
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < ab.size(); ++i) {
      if ((ab[i] == '+' || ab[i] == '-') && ab[i - 1] != '+' && ab[i - 1] != '-') split = i;
    }
    if (split == std::string::npos) throw Error(ErrorKind::InvalidInput, "surd needs both a and b");
    std::string a_text = ab.substr(0, split);
    std::string b_text = ab.substr(split);
    if (b_text.size() > 1 && b_text[0] == '+' && (b_text[1] == '-' || b_text[1] == '+')) b_text.erase(0, 1);
    std::string d_text = body.substr(sqrt_pos + 6, close - (sqrt_pos + 6));
    std::string c_text = body.substr(close + 3);
    return RealNumberInput::surd(to_int(a_text), to_int(b_text), to_int(c_text), to_int(d_text));
  }
  if (kind == "decimal") return RealNumberInput::decimal(body);
  throw Error(ErrorKind::InvalidInput, "unknown theta kind '" + kind + "'");
}

struct Convergent {
  BigInt p;
  BigInt q;
};

struct PeriodicPart {
  std::size_t preperiod = 0;
  std::size_t period = 0;
};

/// Partial quotients a_1..a_N and convergents p_k/q_k for k = 0..N.
struct ContinuedFractionExpansion {
  RealNumberInput theta;
  std::vector<BigInt> partial_quotients;  // a_1..a_N stored at index 0..N-1
  std::vector<Convergent> convergents;    // k = 0..N
  bool exact = true;
  bool terminated = false;  // rational input whose expansion ended before max_terms
  std::optional<PeriodicPart> periodic_part;

  std::size_t terms() const { return partial_quotients.size(); }
  const BigInt& a(std::size_t k) const { return partial_quotients.at(k - 1); }
  const BigInt& p(std::size_t k) const { return convergents.at(k).p; }
  const BigInt& q(std::size_t k) const { return convergents.at(k).q; }
};

namespace detail {

inline void append_quotient(ContinuedFractionExpansion& cf, const BigInt& a) {
  cf.partial_quotients.push_back(a);
  auto& c = cf.convergents;
  const std::size_t k = cf.partial_quotients.size();
  if (k == 1) {
    c.push_back({BigInt(1), a});
  } else {
    c.push_back({a * c[k - 1].p + c[k - 2].p, a * c[k - 1].q + c[k - 2].q});
  }
}

inline void expand_rational(ContinuedFractionExpansion& cf, BigRational x, std::size_t max_terms) {
  // x in (0,1); each step replaces x by 1/x - floor(1/x)
  while (cf.terms() < max_terms) {
    BigRational inv = BigRational(denominator(x), numerator(x));
    BigInt a = floor(inv);
    append_quotient(cf, a);
    x = inv - BigRational(a);
    if (x == 0) {
      cf.terminated = true;
      return;
    }
  }
}

inline void expand_surd(ContinuedFractionExpansion& cf, const QuadraticSurd& s, std::size_t max_terms) {
  // Bring theta to (P + sqrt(D)) / Q with Q | D - P^2.
  BigInt P = s.a, B = s.b, Q = s.c;
  if (B < 0) {
    P = -P;
    B = -B;
    Q = -Q;
  }
  BigInt D = B * B * s.d;
  if ((D - P * P) % Q != 0) {
    BigInt absq = Q < 0 ? BigInt(-Q) : Q;
    P *= absq;
    D *= Q * Q;
    Q *= absq;
  }
  // floor(theta) = 0 was validated by the caller; step to x_1 = 1/theta.
  auto step = [&](const BigInt& a) {
    P = a * Q - P;
    Q = (D - P * P) / Q;
  };
  step(BigInt(0));

  std::map<std::pair<BigInt, BigInt>, std::size_t> seen;  // state (P,Q) of x_k -> k
  const std::size_t detection_cap = std::max<std::size_t>(max_terms, 1) + 100000;
  std::size_t k = 1;
  while (cf.terms() < max_terms || (!cf.periodic_part && k <= detection_cap)) {
    if (!cf.periodic_part) {
      auto [it, inserted] = seen.emplace(std::make_pair(P, Q), k);
      if (!inserted) {
        cf.periodic_part = PeriodicPart{it->second - 1, k - it->second};
        if (cf.terms() >= max_terms) break;
      }
    }
    BigInt a = floor_surd(P, BigInt(1), D, Q);
    if (cf.terms() < max_terms) append_quotient(cf, a);
    step(a);
    ++k;
  }
}

inline void expand_decimal(ContinuedFractionExpansion& cf, BigRational lo, BigRational hi, std::size_t max_terms) {
  while (cf.terms() < max_terms) {
    if (lo == 0 || hi == 0)
      throw Error(ErrorKind::PrecisionExhausted, "decimal input certifies only " + std::to_string(cf.terms()) +
                                                     " partial quotients");
    BigRational inv_lo = 1 / lo, inv_hi = 1 / hi;
    BigInt a_lo = floor(inv_lo), a_hi = floor(inv_hi);
    if (a_lo != a_hi)
      throw Error(ErrorKind::PrecisionExhausted, "decimal input certifies only " + std::to_string(cf.terms()) +
                                                     " partial quotients");
    append_quotient(cf, a_lo);
    lo = inv_lo - BigRational(a_lo);
    hi = inv_hi - BigRational(a_hi);
  }
}

}  // namespace detail

/// Expands theta in (0,1) to at most `max_terms` partial quotients.
///
/// Rational input stops early at its finite expansion. Surd input is exact to
/// any depth and records the eventual period. Decimal input emits a quotient
/// only when both ends of its uncertainty interval agree on it.
inline ContinuedFractionExpansion expand(const RealNumberInput& theta, std::size_t max_terms) {
  if (max_terms == 0) throw Error(ErrorKind::InvalidInput, "max_terms must be positive");
  ContinuedFractionExpansion cf{theta, {}, {{BigInt(0), BigInt(1)}}, theta.is_exact(), false, std::nullopt};
  const auto& v = theta.value();
  if (auto* r = std::get_if<BigRational>(&v)) {
    if (*r <= 0 || *r >= 1) throw Error(ErrorKind::InvalidInput, "theta must lie in (0,1)");
    detail::expand_rational(cf, *r, max_terms);
  } else if (auto* s = std::get_if<QuadraticSurd>(&v)) {
    if (theta.center().floor() != 0) throw Error(ErrorKind::InvalidInput, "theta must lie in (0,1)");
    detail::expand_surd(cf, *s, max_terms);
  } else {
    auto [lo, hi] = theta.decimal_interval();
    if (lo <= 0 || hi >= 1) throw Error(ErrorKind::InvalidInput, "decimal theta interval must lie inside (0,1)");
    detail::expand_decimal(cf, lo, hi, max_terms);
  }
  return cf;
}

/// |theta - p_n/q_n| against the bound 1/(q_n q_{n+1}).
struct ConvergentGap {
  std::optional<QuadraticNumber> gap;  // exact when theta is exact
  BigRational gap_upper;               // certified upper bound (decimal: interval max)
  BigRational bound;                   // 1/(q_n q_{n+1})
  BigRational square_bound;            // 1/q_n^2
  bool certified = false;              // gap < bound proven
  double gap_approx = 0.0;
};

inline ConvergentGap convergent_gap(const ContinuedFractionExpansion& cf, std::size_t n) {
  if (n + 1 > cf.terms())
    throw Error(ErrorKind::IndexOutOfRange, "convergent_gap needs n+1 <= " + std::to_string(cf.terms()));
  ConvergentGap out;
  BigRational conv(cf.p(n), cf.q(n));
  out.bound = BigRational(BigInt(1), cf.q(n) * cf.q(n + 1));
  out.square_bound = BigRational(BigInt(1), cf.q(n) * cf.q(n));
  if (cf.theta.is_exact()) {
    QuadraticNumber g = (cf.theta.center() - QuadraticNumber::rational(conv)).abs();
    out.gap_approx = g.to_double();
    // a rational theta meets the bound with equality one step before it ends
    out.certified = g < out.bound || (cf.theta.is_rational() && g <= out.bound);
    // rational upper bound for the gap: the bound itself once certified
    out.gap_upper = out.certified ? out.bound : BigRational(1);
    out.gap = std::move(g);
    if (!out.certified) throw Error(ErrorKind::CertificateViolation, "convergent gap not below 1/(q_n q_{n+1})");
  } else {
    auto [lo, hi] = cf.theta.decimal_interval();
    BigRational dlo = lo - conv, dhi = hi - conv;
    if (dlo < 0) dlo = -dlo;
    if (dhi < 0) dhi = -dhi;
    out.gap_upper = std::max(dlo, dhi);
    out.certified = out.gap_upper < out.bound;
    out.gap_approx = static_cast<double>((cf.theta.center() - QuadraticNumber::rational(conv)).abs().r);
  }
  if (!(out.bound < out.square_bound) && cf.q(n + 1) != cf.q(n))
    throw Error(ErrorKind::CertificateViolation, "1/(q_n q_{n+1}) not below 1/q_n^2");
  return out;
}

/// Upper bound (1/q_n) * 2 sqrt5/(sqrt5 - 1) for the tail sum of 1/q_{n+k}.
inline BigRational tail_sum_bound(const ContinuedFractionExpansion& cf, std::size_t n) {
  if (n > cf.terms()) throw Error(ErrorKind::IndexOutOfRange, "tail_sum_bound needs n <= computed terms");
  return constants::fibonacci_tail_upper() / BigRational(cf.q(n));
}

/// Fibonacci numbers with F(0) = F(1) = 1.
inline BigInt fibonacci(std::size_t k) {
  BigInt prev = 1, cur = 1;
  for (std::size_t i = 1; i < k; ++i) {
    BigInt next = prev + cur;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// q_{n+k} >= F(k) q_n.
inline bool fibonacci_growth_check(const ContinuedFractionExpansion& cf, std::size_t n, std::size_t k) {
  if (n + k > cf.terms()) throw Error(ErrorKind::IndexOutOfRange, "fibonacci_growth_check needs n+k <= terms");
  return cf.q(n + k) >= fibonacci(k) * cf.q(n);
}

/// Index k >= 1 with p/q = p_k/q_k, or nullopt.
inline std::optional<std::size_t> is_convergent(const BigInt& p, const BigInt& q, const ContinuedFractionExpansion& cf) {
  if (!(0 < p && p < q)) throw Error(ErrorKind::InvalidInput, "is_convergent needs 0 < p < q");
  if (boost::multiprecision::gcd(p, q) != 1) throw Error(ErrorKind::InvalidInput, "is_convergent needs gcd(p,q) = 1");
  if (cf.q(cf.terms()) < q && !cf.terminated)
    throw Error(ErrorKind::InsufficientTerms, "expansion too short to decide membership (q_N < q)");
  for (std::size_t k = 1; k <= cf.terms(); ++k) {
    if (cf.q(k) == q && cf.p(k) == p) return k;
    if (cf.q(k) > q) break;
  }
  return std::nullopt;
}

/// |theta - p/q| < 1/(2 q^2) for exact theta.
inline bool sufficient_condition_check(const BigInt& p, const BigInt& q, const RealNumberInput& theta) {
  if (!theta.is_exact()) throw Error(ErrorKind::InvalidInput, "sufficient_condition_check needs exact theta");
  if (!(0 < p && p < q)) throw Error(ErrorKind::InvalidInput, "sufficient_condition_check needs 0 < p < q");
  QuadraticNumber gap = (theta.center() - QuadraticNumber::rational(BigRational(p, q))).abs();
  return gap < BigRational(BigInt(1), 2 * q * q);
}

}  // namespace rotspec
