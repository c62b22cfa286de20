#pragma once

// Certified spectral approximation of rotation-algebra operators by clock and
// shift models at consecutive convergents, plus one-sided sqrt(n) bounds,
// the parameter-continuity bound and finite set geometry.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rotspec/contfrac.hpp"
#include "rotspec/exact.hpp"
#include "rotspec/matmodel.hpp"
#include "rotspec/parallel.hpp"
#include "rotspec/pseudospectra.hpp"
#include "rotspec/spectral.hpp"

namespace rotspec {

inline constexpr std::int64_t kDefaultMaxQ = 4096;

namespace detail {

/// Exact rational upper bound for |c|: the double modulus moved up one ulp.
inline BigRational modulus_upper(Complex c) {
  const double m = std::abs(c);
  if (m == 0.0) return BigRational(0);
  return BigRational(std::nextafter(m, std::numeric_limits<double>::infinity()));
}

inline BigRational inv(const BigInt& q) { return BigRational(BigInt(1), q); }

inline const CanonicalFourTerm& require_canonical(const OperatorSpec& spec) {
  if (spec.empty()) throw Error(ErrorKind::EmptySpec, "operator spec has no terms");
  if (!spec.is_canonical()) throw Error(ErrorKind::NonCanonicalSpec, "explicit constants exist only for four-term specs");
  return *spec.canonical_four_term();
}

inline void require_level(const ContinuedFractionExpansion& cf, std::size_t n, std::size_t lookahead) {
  if (n < 1) throw Error(ErrorKind::IndexOutOfRange, "level n must be >= 1");
  if (n + lookahead > cf.terms())
    throw Error(ErrorKind::IndexOutOfRange, "level " + std::to_string(n) + " needs " + std::to_string(n + lookahead) +
                                                " quotients, have " + std::to_string(cf.terms()));
}

inline BigRational sharp_bound_exact(const OperatorSpec& spec, const ContinuedFractionExpansion& cf, std::size_t n) {
  const auto& c = require_canonical(spec);
  require_level(cf, n, 1);
  const BigRational& pi = constants::pi_upper();
  const BigRational& k = constants::fibonacci_tail_upper();  // 2 sqrt5 / (sqrt5 - 1)
  const BigRational a = modulus_upper(c.alpha_plus) + modulus_upper(c.alpha_minus);
  const BigRational b = modulus_upper(c.beta_plus) + modulus_upper(c.beta_minus);
  const BigRational r0 = inv(cf.q(n - 1)), r1 = inv(cf.q(n)), r2 = inv(cf.q(n + 1));
  const BigRational u_part = 2 * pi * (r0 + r1) + 2 * pi * k * r2;
  const BigRational v_part = pi * r0 + 5 * pi * r1 + 5 * pi * k * r2;
  return a * u_part + b * v_part;
}

inline BigRational clean_bound_exact(const OperatorSpec& spec, const ContinuedFractionExpansion& cf, std::size_t n) {
  const auto& c = require_canonical(spec);
  require_level(cf, n, 0);
  const BigRational m = std::max({modulus_upper(c.alpha_plus), modulus_upper(c.alpha_minus),
                                  modulus_upper(c.beta_plus), modulus_upper(c.beta_minus)});
  return 204 * m * (inv(cf.q(n - 1)) + inv(cf.q(n)));
}

inline std::int64_t small_int(const BigInt& v, std::int64_t max_q, const char* what) {
  if (v > max_q) throw Error(ErrorKind::ResourceBudgetExceeded, std::string(what) + " exceeds the budget max_q = " +
                                                                     std::to_string(max_q));
  return v.convert_to<std::int64_t>();
}

inline void reject_rational(const RealNumberInput& theta) {
  if (theta.is_rational()) throw Error(ErrorKind::ThetaRational, "theta must be irrational; got " + theta.to_string());
}

}  // namespace detail

/// Bound assembled from the model-to-algebra norm estimates, evaluated with
/// outward rounding. Needs q_{n-1}, q_n, q_{n+1}.
inline double sharp_bound(const OperatorSpec& spec, const ContinuedFractionExpansion& cf, std::size_t n) {
  return to_double_up(detail::sharp_bound_exact(spec, cf, n));
}

/// 204 M (1/q_{n-1} + 1/q_n). Also checks that it majorizes sharp_bound when
/// q_{n+1} is available.
inline double clean_bound(const OperatorSpec& spec, const ContinuedFractionExpansion& cf, std::size_t n) {
  const BigRational clean = detail::clean_bound_exact(spec, cf, n);
  if (n + 1 <= cf.terms() && detail::sharp_bound_exact(spec, cf, n) > clean)
    throw Error(ErrorKind::CertificateViolation, "sharp bound exceeds 204 M (1/q_{n-1} + 1/q_n)");
  return to_double_up(clean);
}

enum class CertificateMode { pseudospectrum_sandwich, normal_hausdorff };

inline const char* to_string(CertificateMode m) {
  return m == CertificateMode::normal_hausdorff ? "normal_hausdorff" : "pseudospectrum_sandwich";
}

struct ApproximationCertificate {
  RealNumberInput theta;
  OperatorSpec spec;
  std::size_t level_n = 0;
  BigInt p_prev, q_prev, p_curr, q_curr;
  std::optional<double> epsilon_clean;  // absent for rate-only (general) specs
  std::optional<double> epsilon_sharp;
  CertificateMode mode = CertificateMode::normal_hausdorff;
  bool rate_only = false;
  bool irrationality_assumed = false;  // decimal theta

  /// min(sharp, clean), the radius actually certified.
  std::optional<double> radius() const {
    if (!epsilon_sharp || !epsilon_clean) return std::nullopt;
    return std::min(*epsilon_sharp, *epsilon_clean);
  }
};

struct NormalApproximation {
  PointCloud cloud;
  ApproximationCertificate certificate;
  MatrixModel model_prev;
  MatrixModel model_curr;
};

namespace detail {

struct LevelModels {
  ContinuedFractionExpansion cf;
  MatrixModel prev;
  MatrixModel curr;
};

/// Models at p_{n-1}/q_{n-1} and p_n/q_n. Numerators are taken mod q, so
/// p_1/q_1 = 1/1 realizes as the 1x1 model at rotation 0.
inline LevelModels level_models(const RealNumberInput& theta, const OperatorSpec& spec, std::size_t n,
                                std::int64_t max_q, std::size_t lookahead) {
  if (n < 1) throw Error(ErrorKind::IndexOutOfRange, "level n must be >= 1");
  if (spec.empty()) throw Error(ErrorKind::EmptySpec, "operator spec has no terms");
  auto cf = expand(theta, n + lookahead);
  require_level(cf, n, lookahead);
  auto model = [&](std::size_t k) {
    const std::int64_t q = small_int(cf.q(k), max_q, "convergent denominator");
    const std::int64_t p = BigInt(cf.p(k) % cf.q(k)).convert_to<std::int64_t>();
    return build_operator(spec, p, q);
  };
  MatrixModel prev = model(n - 1);
  MatrixModel curr = model(n);
  return {std::move(cf), std::move(prev), std::move(curr)};
}

inline ApproximationCertificate make_certificate(const RealNumberInput& theta, const OperatorSpec& spec,
                                                 const ContinuedFractionExpansion& cf, std::size_t n,
                                                 CertificateMode mode) {
  ApproximationCertificate cert;
  cert.theta = theta;
  cert.spec = spec;
  cert.level_n = n;
  cert.p_prev = cf.p(n - 1);
  cert.q_prev = cf.q(n - 1);
  cert.p_curr = cf.p(n);
  cert.q_curr = cf.q(n);
  cert.mode = mode;
  cert.irrationality_assumed = theta.is_decimal();
  if (spec.is_canonical()) {
    cert.epsilon_sharp = sharp_bound(spec, cf, n);
    cert.epsilon_clean = clean_bound(spec, cf, n);
  } else {
    cert.rate_only = true;
  }
  return cert;
}

}  // namespace detail

/// sigma(h_{n-1}) U sigma(h_n) with its Hausdorff radius around sigma(H_theta).
inline NormalApproximation certify_normal(const RealNumberInput& theta, const OperatorSpec& spec, std::size_t n,
                                          std::int64_t max_q = kDefaultMaxQ) {
  detail::reject_rational(theta);
  detail::require_canonical(spec);
  auto lv = detail::level_models(theta, spec, n, max_q, 1);
  if (!spec.is_structurally_normal() || !is_normal(lv.prev.entries) || !is_normal(lv.curr.entries))
    throw Error(ErrorKind::ModelsNotNormal,
                "the matrix models are not normal; use the pseudospectrum certificate instead");
  NormalApproximation out;
  out.cloud = union_spectrum(lv.prev.entries, lv.curr.entries);
  out.cloud.label = "sigma(h_" + std::to_string(n - 1) + ") U sigma(h_" + std::to_string(n) + ")";
  out.certificate = detail::make_certificate(theta, spec, lv.cf, n, CertificateMode::normal_hausdorff);
  out.model_prev = std::move(lv.prev);
  out.model_curr = std::move(lv.curr);
  return out;
}

/// Enclosure pair for sigma^(eps + eps_n)(H_theta):
///   inner = mask_eps(h_{n-1}) | mask_eps(h_n)
///   outer = mask_{eps + 2 eps_n}(h_{n-1}) | mask_{eps + 2 eps_n}(h_n)
/// General specs get grids and the inner set only, flagged rate-only.
struct PseudospectrumCertificate {
  ApproximationCertificate certificate;
  double epsilon = 0.0;
  PseudospectrumGrid grid_prev;
  PseudospectrumGrid grid_curr;
  GridMask inner;
  std::optional<GridMask> outer;
  bool inner_subset_outer = true;
};

inline PseudospectrumCertificate certify_pseudospectrum(const RealNumberInput& theta, const OperatorSpec& spec,
                                                        std::size_t n, double epsilon, const GridParams& params = {},
                                                        std::int64_t max_q = kDefaultMaxQ) {
  detail::reject_rational(theta);
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidInput, "epsilon must be positive");
  auto lv = detail::level_models(theta, spec, n, max_q, spec.is_canonical() ? 1 : 0);
  PseudospectrumCertificate out;
  out.certificate = detail::make_certificate(theta, spec, lv.cf, n, CertificateMode::pseudospectrum_sandwich);
  out.epsilon = epsilon;
  const auto radius = out.certificate.radius();
  const double eps_max = epsilon + (radius ? 2.0 * *radius : 0.0);
  const Region region = params.region.value_or(Region::centered_square(spec_norm_bound(spec) + 2.0 * eps_max));
  out.grid_prev = compute_grid(lv.prev.entries, region, params.resolution, params.jobs);
  out.grid_curr = compute_grid(lv.curr.entries, region, params.resolution, params.jobs);
  out.grid_prev.epsilon_levels = out.grid_curr.epsilon_levels = {epsilon};
  out.inner = level_set(out.grid_prev, epsilon);
  out.inner |= level_set(out.grid_curr, epsilon);
  if (radius) {
    out.outer = level_set(out.grid_prev, eps_max);
    *out.outer |= level_set(out.grid_curr, eps_max);
    out.grid_prev.epsilon_levels.push_back(eps_max);
    out.grid_curr.epsilon_levels.push_back(eps_max);
    out.inner_subset_outer = out.inner.subset_of(*out.outer);
    if (!out.inner_subset_outer) throw Error(ErrorKind::CertificateViolation, "inner mask is not inside outer mask");
  }
  return out;
}

/// 36 M sqrt(3 pi), rounded up.
inline double one_sided_constant(const OperatorSpec& spec) {
  const auto& c = detail::require_canonical(spec);
  const BigRational m = std::max({detail::modulus_upper(c.alpha_plus), detail::modulus_upper(c.alpha_minus),
                                  detail::modulus_upper(c.beta_plus), detail::modulus_upper(c.beta_minus)});
  return to_double_up(36 * m * constants::sqrt_3pi_upper());
}

struct OneSidedCertificate {
  RealNumberInput theta;
  OperatorSpec spec;
  std::int64_t denominator_n = 0;
  std::int64_t chosen_p = 0;   // in {0..n-1}
  double distance = 0.0;       // |theta - p'/n| with p' = chosen_p, or n when wrapped; checked exactly
  bool wrapped = false;        // round(n theta) = n, realized at rotation 0
  bool tie_broken = false;     // decimal theta with n theta a half-integer
  double c1 = 0.0;
  double radius = 0.0;         // C1 / sqrt(n)
};

struct OneSidedResult {
  std::optional<PointCloud> cloud;          // normal models
  std::optional<PseudospectrumGrid> grid;   // otherwise, at the requested epsilon
  std::optional<double> epsilon;
  OneSidedCertificate certificate;
  MatrixModel model;
};

/// Nearest p/n to theta. The exact rounding floor(n theta + 1/2) can give
/// p = n near theta = 1; that realizes as rotation 0 since A_theta = A_{theta+1}.
inline OneSidedCertificate one_sided_certificate(const RealNumberInput& theta, const OperatorSpec& spec, std::int64_t n) {
  detail::reject_rational(theta);
  if (n < 1) throw Error(ErrorKind::InvalidInput, "denominator n must be >= 1");
  OneSidedCertificate cert{theta, spec, n};
  const QuadraticNumber x = theta.center();
  const QuadraticNumber nx = x * BigRational(n);
  BigInt p = (nx + QuadraticNumber::rational(BigRational(1, 2))).floor();
  if (nx.is_rational() && (nx - QuadraticNumber::rational(BigRational(p) - BigRational(1, 2))).sign() == 0) {
    // n theta = p - 1/2 exactly: both p-1 and p are nearest, take the even one
    cert.tie_broken = true;
    if (p % 2 != 0) p -= 1;
  }
  const QuadraticNumber dist = (x - QuadraticNumber::rational(BigRational(p, BigInt(n)))).abs();
  if (!(dist <= BigRational(BigInt(1), BigInt(2 * n))))
    throw Error(ErrorKind::CertificateViolation, "|theta - p/n| > 1/(2n)");
  cert.distance = dist.to_double();
  cert.wrapped = p == n;
  cert.chosen_p = cert.wrapped ? 0 : p.convert_to<std::int64_t>();
  cert.c1 = one_sided_constant(spec);
  const double r = cert.c1 / std::sqrt(static_cast<double>(n));
  const double inf = std::numeric_limits<double>::infinity();
  cert.radius = cert.c1 == 0.0 ? 0.0 : std::nextafter(std::nextafter(r, inf), inf);
  return cert;
}

/// h_n at the nearest p/n, its spectrum (normal case) or an epsilon grid,
/// and the containment radius C1/sqrt(n).
inline OneSidedResult one_sided(const RealNumberInput& theta, const OperatorSpec& spec, std::int64_t n,
                                std::optional<double> epsilon = std::nullopt, const GridParams& params = {},
                                std::int64_t max_q = kDefaultMaxQ) {
  OneSidedResult out;
  out.certificate = one_sided_certificate(theta, spec, n);
  if (n > max_q) throw Error(ErrorKind::ResourceBudgetExceeded, "n exceeds the budget max_q = " + std::to_string(max_q));
  out.model = build_operator(spec, out.certificate.chosen_p, n);
  const bool normal = spec.is_structurally_normal() && is_normal(out.model.entries);
  if (normal) {
    auto ev = spectrum(out.model.entries);
    out.cloud = PointCloud{std::move(ev.values), "sigma(h_" + std::to_string(n) + ")"};
  }
  if (epsilon) {
    if (!(*epsilon > 0.0)) throw Error(ErrorKind::InvalidInput, "epsilon must be positive");
    out.epsilon = epsilon;
    const Region region = params.region.value_or(Region::centered_square(spec_norm_bound(spec) + 2.0 * *epsilon));
    out.grid = compute_grid(out.model.entries, region, params.resolution, params.jobs);
    out.grid->epsilon_levels = {*epsilon};
  } else if (!normal) {
    throw Error(ErrorKind::ModelsNotNormal, "h_n is not normal; pass an epsilon for the pseudospectrum form");
  }
  return out;
}

/// 9 sqrt(6 pi |theta - theta'|), rounded up.
inline double haagerup_rordam_bound(double theta, double theta_prime) {
  for (double t : {theta, theta_prime})
    if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorKind::InvalidInput, "rotation parameters must lie in [0,1)");
  BigRational diff = BigRational(theta) - BigRational(theta_prime);
  if (diff < 0) diff = -diff;
  if (diff == 0) return 0.0;
  const HighFloat v = 9 * boost::multiprecision::sqrt(6 * constants::pi_high() * to_high(diff));
  return to_double_up(round_up_significant(v));
}

/// Triangle-inequality consequence for a four-term spec: the sum of the four
/// coefficient moduli times the generator displacement.
inline double spectral_variation_bound(const OperatorSpec& spec, double theta, double theta_prime) {
  const auto& c = detail::require_canonical(spec);
  const BigRational weight = detail::modulus_upper(c.alpha_plus) + detail::modulus_upper(c.alpha_minus) +
                             detail::modulus_upper(c.beta_plus) + detail::modulus_upper(c.beta_minus);
  return to_double_up(weight * BigRational(haagerup_rordam_bound(theta, theta_prime)));
}

namespace detail {

inline void require_points(const PointCloud& p, const char* name) {
  if (p.points.empty()) throw Error(ErrorKind::EmptyCloud, std::string(name) + " is empty");
}

}  // namespace detail

/// sup over p in P of the distance to Q.
inline double one_sided_deviation(const PointCloud& p, const PointCloud& q) {
  detail::require_points(p, "first cloud");
  detail::require_points(q, "second cloud");
  double worst = 0.0;
  for (const auto& a : p.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : q.points) best = std::min(best, std::abs(a - b));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff_distance(const PointCloud& p, const PointCloud& q) {
  return std::max(one_sided_deviation(p, q), one_sided_deviation(q, p));
}

/// Every point of P strictly within delta of Q.
inline bool one_sided_contains(const PointCloud& p, const PointCloud& q, double delta) {
  detail::require_points(p, "first cloud");
  detail::require_points(q, "second cloud");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "delta must be positive");
  for (const auto& a : p.points) {
    bool near = false;
    for (const auto& b : q.points)
      if (std::abs(a - b) < delta) {
        near = true;
        break;
      }
    if (!near) return false;
  }
  return true;
}

struct ConvergenceRow {
  std::size_t n = 0;
  BigInt q_prev;
  BigInt q_curr;
  double epsilon_sharp = 0.0;
  double epsilon_clean = 0.0;
  double empirical_dH = 0.0;
  double tolerance = 0.0;  // epsilon_sharp(n) + epsilon_sharp(n_max) + 1e-8
  bool within_tolerance = true;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool all_within_tolerance() const {
    return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.within_tolerance; });
  }
};

/// certify_normal at each level n_lo..n_hi; the deepest cloud stands in for
/// sigma(H_theta).
inline ConvergenceTable convergence_study(const RealNumberInput& theta, const OperatorSpec& spec, std::size_t n_lo,
                                          std::size_t n_hi, std::int64_t max_q = kDefaultMaxQ, unsigned jobs = 1) {
  if (n_lo < 1 || n_hi < n_lo) throw Error(ErrorKind::InvalidInput, "need 1 <= n_lo <= n_hi");
  detail::reject_rational(theta);
  detail::require_canonical(spec);
  const auto cf = expand(theta, n_hi + 1);
  detail::require_level(cf, n_hi, 1);
  detail::small_int(cf.q(n_hi), max_q, "deepest convergent denominator");
  const std::size_t count = n_hi - n_lo + 1;
  std::vector<NormalApproximation> levels(count);
  parallel_for(count, jobs, [&](std::size_t i) { levels[i] = certify_normal(theta, spec, n_lo + i, max_q); });
  const auto& reference = levels.back();
  const double ref_radius = *reference.certificate.epsilon_sharp;
  ConvergenceTable table;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& cert = levels[i].certificate;
    ConvergenceRow row{n_lo + i, cert.q_prev, cert.q_curr, *cert.epsilon_sharp, *cert.epsilon_clean};
    row.empirical_dH = i + 1 == count ? 0.0 : hausdorff_distance(levels[i].cloud, reference.cloud);
    row.tolerance = row.epsilon_sharp + ref_radius + 1e-8;
    row.within_tolerance = row.empirical_dH <= row.tolerance;
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceTable& t) {
  char buf[160];
  os << "n,q_prev,q_curr,epsilon_sharp,epsilon_clean,empirical_dH\n";
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", r.epsilon_sharp, r.epsilon_clean, r.empirical_dH);
    os << r.n << ',' << r.q_prev.str() << ',' << r.q_curr.str() << buf;
  }
}

/// CSV "re,im", one point per line at 17 significant digits.
inline void write_cloud_csv(std::ostream& os, const PointCloud& cloud) {
  char buf[96];
  os << "re,im\n";
  for (const auto& z : cloud.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
    os << buf;
  }
}

namespace detail {

inline nlohmann::json big_json(const BigInt& v) {
  if (v <= std::numeric_limits<std::int64_t>::max()) return v.convert_to<std::int64_t>();
  return v.str();
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json certificate_json(const ApproximationCertificate& c, const PointCloud* cloud = nullptr) {
  nlohmann::json j;
  j["theta"] = c.theta.to_string();
  j["spec"] = c.spec;
  j["n"] = c.level_n;
  j["q_pair"] = {detail::big_json(c.q_prev), detail::big_json(c.q_curr)};
  j["p_pair"] = {detail::big_json(c.p_prev), detail::big_json(c.p_curr)};
  j["epsilon_sharp"] = detail::optional_json(c.epsilon_sharp);
  j["epsilon_clean"] = detail::optional_json(c.epsilon_clean);
  j["radius"] = detail::optional_json(c.radius());
  j["mode"] = to_string(c.mode);
  j["rate_only"] = c.rate_only;
  if (c.rate_only) j["rate"] = "O(1/q_{n-1} + 1/q_n), no explicit constant for general specs";
  if (c.irrationality_assumed) j["caveat"] = "decimal theta: irrationality assumed";
  if (cloud) {
    auto& pts = j["cloud"] = nlohmann::json::array();
    for (const auto& z : cloud->points) pts.push_back({z.real(), z.imag()});
  }
  return j;
}

inline nlohmann::json certificate_json(const OneSidedCertificate& c, const PointCloud* cloud = nullptr) {
  nlohmann::json j;
  j["theta"] = c.theta.to_string();
  j["spec"] = c.spec;
  j["n"] = c.denominator_n;
  j["p"] = c.chosen_p;
  j["wrapped"] = c.wrapped;
  j["tie_broken"] = c.tie_broken;
  j["distance"] = c.distance;
  j["c1"] = c.c1;
  j["radius"] = c.radius;
  j["mode"] = "one_sided_containment";
  if (cloud) {
    auto& pts = j["cloud"] = nlohmann::json::array();
    for (const auto& z : cloud->points) pts.push_back({z.real(), z.imag()});
  }
  return j;
}

}  // namespace rotspec
