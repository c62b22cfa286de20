#pragma once

// Sampled epsilon-pseudospectra: sigma_min(lambda I - A) on a rectangular grid,
// level-set masks, the perturbation sandwich check and spectrum unions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rotspec/dense_matrix.hpp"
#include "rotspec/error.hpp"
#include "rotspec/parallel.hpp"
#include "rotspec/spectral.hpp"

namespace rotspec {

struct Region {
  double re_min = -1.0;
  double re_max = 1.0;
  double im_min = -1.0;
  double im_max = 1.0;

  static Region centered_square(double half_width) { return {-half_width, half_width, -half_width, half_width}; }
};

struct Resolution {
  std::size_t nx = 256;
  std::size_t ny = 256;
};

/// Finite multiset of complex numbers.
struct PointCloud {
  std::vector<Complex> points;
  std::string label;
};

/// Hex FNV-1a hash of the order and raw entries of a matrix.
inline std::string matrix_fingerprint(const CMatrix& a) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t dims[2] = {a.rows(), a.cols()};
  mix(dims, sizeof dims);
  mix(a.data().data(), a.data().size() * sizeof(Complex));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// sigma_min samples. Sample (i, j) sits at
/// lambda = re_min + i*hx + 1i*(im_min + j*hy) and is stored at index j*nx + i
/// (rows run along the imaginary axis, row-major).
struct PseudospectrumGrid {
  Region region;
  Resolution resolution;
  double hx = 0.0;
  double hy = 0.0;
  std::vector<double> sigma_min_values;
  std::string matrix_fingerprint;
  double matrix_norm = 0.0;  // Frobenius norm of the source, used for tolerances
  std::vector<double> epsilon_levels;

  std::size_t index(std::size_t i, std::size_t j) const { return j * resolution.nx + i; }
  Complex point(std::size_t i, std::size_t j) const {
    return {region.re_min + static_cast<double>(i) * hx, region.im_min + static_cast<double>(j) * hy};
  }
  double value(std::size_t i, std::size_t j) const { return sigma_min_values[index(i, j)]; }
  std::size_t size() const { return sigma_min_values.size(); }

  /// Absolute accuracy promised for a stored sample.
  double tolerance(std::size_t i, std::size_t j) const {
    return 1e-8 * value(i, j) + 1e-12 * (matrix_norm + std::abs(point(i, j)));
  }
};

inline void validate_grid_params(const Region& region, const Resolution& res) {
  if (res.nx < 2 || res.ny < 2) throw Error(ErrorKind::InvalidInput, "grid resolution must be >= 2 per axis");
  if (!(region.re_max > region.re_min) || !(region.im_max > region.im_min))
    throw Error(ErrorKind::InvalidInput, "grid region is degenerate");
}

/// Evaluates sigma_min(lambda I - A) at every grid point. The result is the
/// same for any `jobs`.
inline PseudospectrumGrid compute_grid(const CMatrix& a, const Region& region, const Resolution& res,
                                       unsigned jobs = 0) {
  validate_grid_params(region, res);
  if (!a.square() || a.rows() == 0) throw Error(ErrorKind::InvalidInput, "compute_grid needs a nonempty square matrix");
  PseudospectrumGrid g;
  g.region = region;
  g.resolution = res;
  g.hx = (region.re_max - region.re_min) / static_cast<double>(res.nx - 1);
  g.hy = (region.im_max - region.im_min) / static_cast<double>(res.ny - 1);
  g.sigma_min_values.assign(res.nx * res.ny, 0.0);
  g.matrix_fingerprint = matrix_fingerprint(a);
  g.matrix_norm = a.frobenius_norm();
  const ShiftedSigmaMin kernel(a);
  parallel_for(g.size(), jobs, [&](std::size_t idx) {
    const std::size_t i = idx % res.nx, j = idx / res.nx;
    const Complex lambda = g.point(i, j);
    try {
      g.sigma_min_values[idx] = std::max(0.0, kernel(lambda));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ConvergenceFailure) throw;
      throw Error(ErrorKind::ConvergenceFailure, std::string(e.what()) + " at lambda = (" +
                                                     std::to_string(lambda.real()) + ", " +
                                                     std::to_string(lambda.imag()) + ")");
    }
  });
  return g;
}

/// Boolean mask over a grid, same indexing as the grid.
struct GridMask {
  Resolution resolution;
  std::vector<std::uint8_t> bits;

  bool at(std::size_t i, std::size_t j) const { return bits[j * resolution.nx + i] != 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

  GridMask& operator|=(const GridMask& o) {
    for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = static_cast<std::uint8_t>(bits[k] | o.bits[k]);
    return *this;
  }

  bool subset_of(const GridMask& o) const {
    for (std::size_t k = 0; k < bits.size(); ++k)
      if (bits[k] && !o.bits[k]) return false;
    return true;
  }
};

/// Points with sigma_min <= epsilon (boundary included).
inline GridMask level_set(const PseudospectrumGrid& grid, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidInput, "epsilon must be positive");
  GridMask m{grid.resolution, std::vector<std::uint8_t>(grid.size(), 0)};
  for (std::size_t k = 0; k < grid.size(); ++k) m.bits[k] = grid.sigma_min_values[k] <= epsilon ? 1 : 0;
  return m;
}

struct GridViolation {
  std::size_t i = 0;
  std::size_t j = 0;
  Complex lambda;
  int inclusion = 0;      // 1: S(eps) in T(eps+delta), 2: T(eps+delta) in S(eps+2 delta)
  double excess = 0.0;    // value - threshold at the offending point
};

struct SandwichReport {
  double delta = 0.0;
  double epsilon = 0.0;
  std::size_t inner_count = 0;   // |mask_S(eps)|
  std::size_t middle_count = 0;  // |mask_T(eps + delta)|
  std::size_t outer_count = 0;   // |mask_S(eps + 2 delta)|
  std::vector<GridViolation> violations;  // beyond numerical and one-cell slack
  std::vector<GridViolation> advisories;  // within slack
  bool grid_too_coarse = false;           // advisory only
  std::string slack_note =
      "pointwise comparison on a shared grid; a miss is excused if it is within the kernel tolerance "
      "1e-8*sigma + 1e-12*(||A|| + |lambda|) of the threshold or a neighbouring grid cell satisfies the target";

  bool passed() const { return violations.empty(); }
};

struct GridParams {
  std::optional<Region> region;
  Resolution resolution{};
  unsigned jobs = 0;
};

namespace detail {

inline bool neighbour_in(const GridMask& mask, std::size_t i, std::size_t j) {
  const std::size_t nx = mask.resolution.nx, ny = mask.resolution.ny;
  for (std::size_t jj = j == 0 ? 0 : j - 1; jj <= std::min(ny - 1, j + 1); ++jj)
    for (std::size_t ii = i == 0 ? 0 : i - 1; ii <= std::min(nx - 1, i + 1); ++ii)
      if (mask.at(ii, jj)) return true;
  return false;
}

inline void check_inclusion(const PseudospectrumGrid& from, double from_level, const PseudospectrumGrid& to,
                            double to_level, int which, SandwichReport& report) {
  const GridMask target = level_set(to, to_level);
  for (std::size_t j = 0; j < from.resolution.ny; ++j)
    for (std::size_t i = 0; i < from.resolution.nx; ++i) {
      if (from.value(i, j) > from_level) continue;
      const double v = to.value(i, j);
      if (v <= to_level) continue;
      GridViolation viol{i, j, from.point(i, j), which, v - to_level};
      const bool numerical = v - to_level <= from.tolerance(i, j) + to.tolerance(i, j);
      if (numerical || neighbour_in(target, i, j))
        report.advisories.push_back(viol);
      else
        report.violations.push_back(viol);
    }
}

}  // namespace detail

/// Checks mask_S(eps) <= mask_T(eps + delta) <= mask_S(eps + 2 delta) with
/// delta = ||S - T|| on one shared grid.
inline SandwichReport sandwich_check(const CMatrix& s, const CMatrix& t, double epsilon, const GridParams& params) {
  if (s.rows() != t.rows() || !s.square() || !t.square())
    throw Error(ErrorKind::InvalidInput, "sandwich_check needs square matrices of equal order");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidInput, "epsilon must be positive");
  SandwichReport report;
  report.epsilon = epsilon;
  report.delta = operator_norm(s - t);
  const Region region = params.region.value_or(
      Region::centered_square(std::max(operator_norm(s), operator_norm(t)) + 2.0 * (epsilon + 2.0 * report.delta)));
  const auto gs = compute_grid(s, region, params.resolution, params.jobs);
  const auto gt = compute_grid(t, region, params.resolution, params.jobs);
  report.inner_count = level_set(gs, epsilon).count();
  report.middle_count = level_set(gt, epsilon + report.delta).count();
  report.outer_count = level_set(gs, epsilon + 2.0 * report.delta).count();
  detail::check_inclusion(gs, epsilon, gt, epsilon + report.delta, 1, report);
  detail::check_inclusion(gt, epsilon + report.delta, gs, epsilon + 2.0 * report.delta, 2, report);
  report.grid_too_coarse = !report.advisories.empty();
  return report;
}

/// Multiset union of the spectra of A and B (the spectrum of A (+) B).
inline PointCloud union_spectrum(const CMatrix& a, const CMatrix& b) {
  PointCloud cloud;
  for (const CMatrix* m : {&a, &b}) {
    auto ev = spectrum(*m);
    cloud.points.insert(cloud.points.end(), ev.values.begin(), ev.values.end());
  }
  std::sort(cloud.points.begin(), cloud.points.end(), detail::complex_less);
  cloud.label = "union";
  return cloud;
}

/// CSV with header "re,im,sigma_min", one sample per line in storage order.
inline void write_grid_csv(std::ostream& os, const PseudospectrumGrid& g) {
  char buf[96];
  os << "re,im,sigma_min\n";
  for (std::size_t j = 0; j < g.resolution.ny; ++j)
    for (std::size_t i = 0; i < g.resolution.nx; ++i) {
      const Complex z = g.point(i, j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", z.real(), z.imag(), g.value(i, j));
      os << buf;
    }
}

/// 16-bit gray level of a sample: log10(sigma) clamped to [-8, 2] (sigma <= 0
/// maps to -8), then floor((v + 8) / 10 * 65535 + 0.5).
inline std::uint16_t pgm_level(double sigma) {
  double v = sigma > 0.0 ? std::log10(sigma) : -8.0;
  v = std::clamp(v, -8.0, 2.0);
  return static_cast<std::uint16_t>(std::floor((v + 8.0) / 10.0 * 65535.0 + 0.5));
}

/// Binary PGM (P5, maxval 65535, big-endian samples). The top image row is the
/// largest imaginary part.
inline void write_grid_pgm(std::ostream& os, const PseudospectrumGrid& g) {
  os << "P5\n" << g.resolution.nx << ' ' << g.resolution.ny << "\n65535\n";
  for (std::size_t jj = g.resolution.ny; jj-- > 0;)
    for (std::size_t i = 0; i < g.resolution.nx; ++i) {
      const std::uint16_t level = pgm_level(g.value(i, jj));
      const char bytes[2] = {static_cast<char>(level >> 8), static_cast<char>(level & 0xff)};
      os.write(bytes, 2);
    }
}

}  // namespace rotspec
