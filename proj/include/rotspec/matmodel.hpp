#pragma once

// Clock and shift matrices u_{p/q}, v_{p/q} and evaluation of Laurent
// polynomials in two unitaries as q x q complex matrices.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rotspec/dense_matrix.hpp"
#include "rotspec/error.hpp"
#include "rotspec/spectral.hpp"

namespace rotspec {

/// c * U^u * V^v; negative powers denote adjoints.
struct Term {
  int u = 0;
  int v = 0;
  Complex c{};
};

/// alpha_plus U + alpha_minus U* + beta_plus V + beta_minus V*.
struct CanonicalFourTerm {
  Complex alpha_plus{};
  Complex alpha_minus{};
  Complex beta_plus{};
  Complex beta_minus{};

  double coefficient_bound() const {
    return std::max({std::abs(alpha_plus), std::abs(alpha_minus), std::abs(beta_plus), std::abs(beta_minus)});
  }
};

class OperatorSpec {
 public:
  OperatorSpec() = default;

  explicit OperatorSpec(std::vector<Term> terms) : terms_(std::move(terms)) { classify(); }

  static OperatorSpec canonical(Complex alpha_plus, Complex alpha_minus, Complex beta_plus, Complex beta_minus) {
    return OperatorSpec({{1, 0, alpha_plus}, {-1, 0, alpha_minus}, {0, 1, beta_plus}, {0, -1, beta_minus}});
  }

  /// U + U* + lambda (V + V*).
  static OperatorSpec almost_mathieu(double coupling = 1.0) { return canonical(1.0, 1.0, coupling, coupling); }

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  const std::optional<CanonicalFourTerm>& canonical_four_term() const { return canonical_; }
  bool is_canonical() const { return canonical_.has_value(); }

  /// M = max of the four canonical coefficient moduli.
  double coefficient_bound_M() const {
    if (!canonical_) throw Error(ErrorKind::NonCanonicalSpec, "coefficient bound M is defined for four-term specs");
    return canonical_->coefficient_bound();
  }

  /// alpha_minus = conj(alpha_plus) and beta_minus = conj(beta_plus).
  bool is_hermitian_form() const {
    if (!canonical_) return false;
    return canonical_->alpha_minus == std::conj(canonical_->alpha_plus) &&
           canonical_->beta_minus == std::conj(canonical_->beta_plus);
  }

  /// True when every realization of the spec is a normal operator: a single
  /// generator, or a unimodular multiple of a self-adjoint four-term form.
  bool is_structurally_normal() const {
    if (!canonical_) return false;
    const auto& c = *canonical_;
    const bool u_only = c.beta_plus == Complex{} && c.beta_minus == Complex{};
    const bool v_only = c.alpha_plus == Complex{} && c.alpha_minus == Complex{};
    if (u_only || v_only) return true;
    // H = e^{i phi} K with K self-adjoint  <=>  x_minus = e^{2 i phi} conj(x_plus) for both pairs.
    auto ratio = [](Complex plus, Complex minus) -> std::optional<Complex> {
      if (std::abs(plus) != std::abs(minus)) return std::nullopt;
      if (plus == Complex{}) return Complex{};
      return minus / std::conj(plus);
    };
    auto ra = ratio(c.alpha_plus, c.alpha_minus);
    auto rb = ratio(c.beta_plus, c.beta_minus);
    if (!ra || !rb) return false;
    if (*ra == Complex{} || *rb == Complex{}) return true;
    return std::abs(*ra - *rb) <= 1e-15 * 4;
  }

  friend bool operator==(const OperatorSpec& a, const OperatorSpec& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].u != b.terms_[i].u || a.terms_[i].v != b.terms_[i].v || a.terms_[i].c != b.terms_[i].c)
        return false;
    return true;
  }

 private:
  void classify() {
    canonical_.reset();
    if (terms_.empty()) return;
    std::map<std::pair<int, int>, Complex> merged;
    for (const auto& t : terms_) merged[{t.u, t.v}] += t.c;
    CanonicalFourTerm c;
    for (const auto& [key, coef] : merged) {
      if (coef == Complex{}) continue;
      if (key == std::pair{1, 0}) c.alpha_plus = coef;
      else if (key == std::pair{-1, 0}) c.alpha_minus = coef;
      else if (key == std::pair{0, 1}) c.beta_plus = coef;
      else if (key == std::pair{0, -1}) c.beta_minus = coef;
      else return;
    }
    canonical_ = c;
  }

  std::vector<Term> terms_;
  std::optional<CanonicalFourTerm> canonical_;
};

/// Sum of coefficient moduli; bounds the norm of every realization.
inline double spec_norm_bound(const OperatorSpec& spec) {
  if (spec.empty()) throw Error(ErrorKind::EmptySpec, "operator spec has no terms");
  double s = 0.0;
  for (const auto& t : spec.terms()) s += std::abs(t.c);
  return s;
}

inline void to_json(nlohmann::json& j, const OperatorSpec& spec) {
  j = nlohmann::json::object();
  auto& terms = j["terms"] = nlohmann::json::array();
  for (const auto& t : spec.terms()) terms.push_back({{"u", t.u}, {"v", t.v}, {"re", t.c.real()}, {"im", t.c.imag()}});
  if (const auto& c = spec.canonical_four_term()) {
    auto pair = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
    j["canonical"] = {{"a+", pair(c->alpha_plus)},
                      {"a-", pair(c->alpha_minus)},
                      {"b+", pair(c->beta_plus)},
                      {"b-", pair(c->beta_minus)}};
  }
}

inline void from_json(const nlohmann::json& j, OperatorSpec& spec) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "operator spec must be a JSON object");
  auto read_pair = [](const nlohmann::json& p) -> Complex {
    if (p.is_number()) return {p.get<double>(), 0.0};
    if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::InvalidInput, "canonical coefficient must be [re, im]");
    return {p[0].get<double>(), p[1].get<double>()};
  };
  std::optional<OperatorSpec> from_canonical;
  if (j.contains("canonical")) {
    const auto& c = j.at("canonical");
    auto get = [&](const char* key) { return c.contains(key) ? read_pair(c.at(key)) : Complex{}; };
    from_canonical = OperatorSpec::canonical(get("a+"), get("a-"), get("b+"), get("b-"));
  }
  if (j.contains("terms")) {
    std::vector<Term> terms;
    for (const auto& t : j.at("terms")) {
      if (!t.contains("u") || !t.contains("v")) throw Error(ErrorKind::InvalidInput, "term needs integer u and v");
      terms.push_back({t.at("u").get<int>(), t.at("v").get<int>(),
                       {t.value("re", 0.0), t.value("im", 0.0)}});
    }
    spec = OperatorSpec(std::move(terms));
    if (from_canonical) {
      if (!spec.is_canonical()) throw Error(ErrorKind::InvalidInput, "'canonical' given for a non-canonical term list");
      const auto& a = *spec.canonical_four_term();
      const auto& b = *from_canonical->canonical_four_term();
      if (a.alpha_plus != b.alpha_plus || a.alpha_minus != b.alpha_minus ||
          a.beta_plus != b.beta_plus || a.beta_minus != b.beta_minus)
        throw Error(ErrorKind::InvalidInput, "'terms' and 'canonical' disagree");
    }
  } else if (from_canonical) {
    spec = *from_canonical;
  } else {
    throw Error(ErrorKind::InvalidInput, "operator spec needs 'terms' or 'canonical'");
  }
}

enum class StructureTag { shift, clock, four_term, general };

inline const char* to_string(StructureTag tag) {
  switch (tag) {
    case StructureTag::shift: return "shift";
    case StructureTag::clock: return "clock";
    case StructureTag::four_term: return "four_term";
    case StructureTag::general: return "general";
  }
  return "general";
}

struct MatrixEntry {
  std::size_t row;
  std::size_t col;
  Complex value;
};

/// q x q realization at rotation number p/q.
struct MatrixModel {
  std::size_t order = 0;
  std::size_t numerator = 0;
  CMatrix entries;
  StructureTag structure = StructureTag::general;
  std::optional<OperatorSpec> spec;

  /// Compressed view of the nonzero entries in column-major order.
  std::vector<MatrixEntry> nonzero_entries() const {
    std::vector<MatrixEntry> out;
    for (std::size_t j = 0; j < order; ++j)
      for (std::size_t i = 0; i < order; ++i)
        if (entries(i, j) != Complex{}) out.push_back({i, j, entries(i, j)});
    return out;
  }
};

namespace detail {

inline void check_order(std::int64_t p, std::int64_t q) {
  if (q < 1) throw Error(ErrorKind::InvalidOrder, "matrix order q must be >= 1");
  if (p < 0 || p >= q) throw Error(ErrorKind::InvalidOrder, "numerator p must satisfy 0 <= p < q");
}

inline std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

/// omega^e for omega = exp(2 pi i p / q), e already reduced into [0, q).
inline Complex root_of_unity(std::int64_t e, std::int64_t q) {
  if (e == 0) return {1.0, 0.0};
  if (2 * e == q) return {-1.0, 0.0};
  if (4 * e == q) return {0.0, 1.0};
  if (4 * e == 3 * q) return {0.0, -1.0};
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(q);
  return {std::cos(angle), std::sin(angle)};
}

/// Diagonal entry k of v^power: omega^{power*k}; negative powers are the
/// conjugated phases of the positive power.
inline Complex clock_phase(std::int64_t p, std::int64_t q, std::int64_t k, int power) {
  if (power == 0) return {1.0, 0.0};
  const std::int64_t mag = power < 0 ? -static_cast<std::int64_t>(power) : power;
  const auto e = static_cast<std::int64_t>((static_cast<__int128>(mod(mag, q)) * k % q) * p % q);
  const Complex w = root_of_unity(e, q);
  return power < 0 ? std::conj(w) : w;
}

}  // namespace detail

/// Cyclic forward shift: ones at (i, i+1) and (q-1, 0).
inline MatrixModel shift_matrix(std::int64_t q) {
  detail::check_order(0, q);
  const auto n = static_cast<std::size_t>(q);
  MatrixModel m{n, 0, CMatrix(n, n), StructureTag::shift, std::nullopt};
  for (std::size_t i = 0; i < n; ++i) m.entries(i, (i + 1) % n) = 1.0;
  return m;
}

/// diag(1, omega, ..., omega^{q-1}) with omega = exp(2 pi i p/q).
inline MatrixModel clock_matrix(std::int64_t p, std::int64_t q) {
  detail::check_order(p, q);
  const auto n = static_cast<std::size_t>(q);
  MatrixModel m{n, static_cast<std::size_t>(p), CMatrix(n, n), StructureTag::clock, std::nullopt};
  for (std::size_t k = 0; k < n; ++k) m.entries(k, k) = detail::clock_phase(p, q, static_cast<std::int64_t>(k), 1);
  return m;
}

/// Evaluates sum c_{jk} u^j v^k at rotation number p/q. p need not be coprime
/// to q.
inline MatrixModel build_operator(const OperatorSpec& spec, std::int64_t p, std::int64_t q) {
  detail::check_order(p, q);
  if (spec.empty()) throw Error(ErrorKind::EmptySpec, "operator spec has no terms");
  const auto n = static_cast<std::size_t>(q);
  MatrixModel m{n, static_cast<std::size_t>(p), CMatrix(n, n),
                spec.is_canonical() ? StructureTag::four_term : StructureTag::general, spec};
  for (const auto& t : spec.terms()) {
    if (t.c == Complex{}) continue;
    // (u^j v^k)(r, c) is nonzero only at c = r + j (mod q), with value omega^{k c}
    const std::int64_t shift = detail::mod(t.u, q);
    for (std::int64_t r = 0; r < q; ++r) {
      const std::int64_t c = (r + shift) % q;
      m.entries(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += t.c * detail::clock_phase(p, q, c, t.v);
    }
  }
  return m;
}

/// Operator norm of u v - omega v u; zero in exact arithmetic.
inline double commutation_defect(std::int64_t p, std::int64_t q) {
  const auto u = shift_matrix(q).entries;
  const auto v = clock_matrix(p, q).entries;
  const Complex omega = detail::root_of_unity(detail::mod(p, q), q);
  return operator_norm(u * v - omega * (v * u));
}

/// CSV of nonzero entries: header "row,col,re,im", zero-based indices.
inline void write_matrix_csv(std::ostream& os, const MatrixModel& m) {
  const auto old_precision = os.precision(17);
  os << "row,col,re,im\n";
  for (const auto& e : m.nonzero_entries())
    os << e.row << ',' << e.col << ',' << e.value.real() << ',' << e.value.imag() << '\n';
  os.precision(old_precision);
}

}  // namespace rotspec
