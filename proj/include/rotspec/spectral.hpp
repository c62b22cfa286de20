#pragma once

// Dense spectral kernels: Hermitian and normal eigenvalues, singular values,
// operator norms and a fast shifted smallest-singular-value evaluator.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "rotspec/dense_matrix.hpp"
#include "rotspec/error.hpp"

namespace rotspec {

enum class EigenMethod { hermitian, normal, circulant_analytic };

inline const char* to_string(EigenMethod m) {
  switch (m) {
    case EigenMethod::hermitian: return "hermitian";
    case EigenMethod::normal: return "normal";
    case EigenMethod::circulant_analytic: return "circulant_analytic";
  }
  return "unknown";
}

struct EigenvalueSet {
  std::vector<Complex> values;
  std::size_t order = 0;
  double residual_bound = 0.0;
  EigenMethod method = EigenMethod::hermitian;
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxQlIterations = 60;

/// Real symmetric tridiagonal matrix, optionally with the unitary Q such that
/// A = Q T Q*.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;  // size n-1 (stored with a trailing zero slot)
  CMatrix q;
  bool has_q = false;
};

/// Householder vector v with (I - tau v v*) x = beta e_1, beta = -phase(x_0) |x|.
/// Returns false when x is already a multiple of e_1.
inline bool make_reflector(std::span<Complex> x, Complex& beta, double& tau) {
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += std::norm(x[i]);
  const double a0 = std::abs(x[0]);
  if (tail == 0.0) {
    beta = x[0];
    tau = 0.0;
    return false;
  }
  const double alpha = std::sqrt(a0 * a0 + tail);
  const Complex phase = a0 == 0.0 ? Complex{1.0, 0.0} : x[0] / a0;
  beta = -phase * alpha;
  x[0] -= beta;
  tau = 1.0 / (alpha * alpha + alpha * a0);  // 2 / |v|^2
  return true;
}

/// Unitary reduction of a Hermitian matrix to real symmetric tridiagonal form.
inline Tridiagonal tridiagonalize(CMatrix a, bool want_q) {
  const std::size_t n = a.rows();
  Tridiagonal t;
  t.diag.assign(n, 0.0);
  t.offdiag.assign(n, 0.0);
  std::vector<Complex> sub(n > 0 ? n - 1 : 0);
  std::vector<std::vector<Complex>> reflectors;
  std::vector<double> taus;
  std::vector<Complex> p(n), w(n);

  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    std::span<Complex> x(&a(k + 1, k), m);
    Complex beta;
    double tau;
    const bool reflected = make_reflector(x, beta, tau);
    sub[k] = beta;
    if (want_q) {
      reflectors.emplace_back(x.begin(), x.end());
      taus.push_back(reflected ? tau : 0.0);
    }
    if (!reflected) continue;
    // p = tau * A22 v
    for (std::size_t i = 0; i < m; ++i) p[i] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const Complex vj = x[j];
      const Complex* col = &a(k + 1, k + 1 + j);
      for (std::size_t i = 0; i < m; ++i) p[i] += col[i] * vj;
    }
    Complex vp = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      p[i] *= tau;
      vp += std::conj(x[i]) * p[i];
    }
    const double kcoef = 0.5 * tau * vp.real();
    for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - kcoef * x[i];
    // A22 -= v w* + w v*
    for (std::size_t j = 0; j < m; ++j) {
      const Complex wj = std::conj(w[j]);
      const Complex vj = std::conj(x[j]);
      Complex* col = &a(k + 1, k + 1 + j);
      for (std::size_t i = 0; i < m; ++i) col[i] -= x[i] * wj + w[i] * vj;
    }
  }
  for (std::size_t k = 0; k < n; ++k) t.diag[k] = a(k, k).real();
  if (n >= 2) sub[n - 2] = a(n - 1, n - 2);

  // Diagonal phases making the subdiagonal real and nonnegative.
  std::vector<Complex> phase(n, Complex{1.0, 0.0});
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double mag = std::abs(sub[k]);
    t.offdiag[k] = mag;
    phase[k + 1] = mag == 0.0 ? Complex{1.0, 0.0} : phase[k] * (sub[k] / mag);
  }

  if (want_q) {
    t.q = CMatrix::identity(n);
    for (std::size_t kk = reflectors.size(); kk-- > 0;) {
      if (taus[kk] == 0.0) continue;
      const auto& v = reflectors[kk];
      const std::size_t off = kk + 1;
      for (std::size_t j = off; j < n; ++j) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) dot += std::conj(v[i]) * t.q(off + i, j);
        dot *= taus[kk];
        for (std::size_t i = 0; i < v.size(); ++i) t.q(off + i, j) -= v[i] * dot;
      }
    }
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) t.q(i, j) *= phase[j];
    t.has_q = true;
  }
  return t;
}

/// Implicit QL with Wilkinson-type shifts on a real symmetric tridiagonal
/// matrix. `d` receives the eigenvalues (unsorted); columns of `z` (if given)
/// are rotated along.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, CMatrix* z) {
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  if (n == 0) return;
  e.resize(static_cast<std::size_t>(n), 0.0);
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  auto D = [&](std::ptrdiff_t i) -> double& { return d[static_cast<std::size_t>(i)]; };
  auto E = [&](std::ptrdiff_t i) -> double& { return e[static_cast<std::size_t>(i)]; };
  const std::size_t rows = z ? z->rows() : 0;

  for (std::ptrdiff_t l = 0; l < n; ++l) {
    int iter = 0;
    std::ptrdiff_t m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(D(m)) + std::abs(D(m + 1));
        if (std::abs(E(m)) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == kMaxQlIterations)
          throw Error(ErrorKind::ConvergenceFailure,
                      "tridiagonal QL did not converge for eigenvalue index " + std::to_string(l));
        double g = (D(l + 1) - D(l)) / (2.0 * E(l));
        double r = std::hypot(g, 1.0);
        g = D(m) - D(l) + E(l) / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        std::ptrdiff_t i;
        for (i = m - 1; i >= l; --i) {
          double f = s * E(i);
          const double b = c * E(i);
          r = std::hypot(f, g);
          E(i + 1) = r;
          if (r == 0.0) {
            D(i + 1) -= p;
            E(m) = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = D(i + 1) - p;
          r = (D(i) - g) * s + 2.0 * c * b;
          p = s * r;
          D(i + 1) = g + p;
          g = c * r - b;
          if (z) {
            Complex* zi = &(*z)(0, static_cast<std::size_t>(i));
            Complex* zi1 = &(*z)(0, static_cast<std::size_t>(i + 1));
            for (std::size_t k = 0; k < rows; ++k) {
              const Complex t = zi1[k];
              zi1[k] = s * zi[k] + c * t;
              zi[k] = c * zi[k] - s * t;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        D(l) -= p;
        E(l) = g;
        E(m) = 0.0;
      }
    } while (m != l);
  }
}

inline void require_square(const CMatrix& a, const char* what) {
  if (!a.square()) throw Error(ErrorKind::InvalidInput, std::string(what) + " needs a square matrix");
}

inline bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// Upper and lower Householder reflections to an upper bidiagonal matrix;
/// returns the moduli of the diagonal and superdiagonal (m >= n).
inline void bidiagonalize(CMatrix a, std::vector<double>& diag, std::vector<double>& super) {
  const std::size_t m = a.rows(), n = a.cols();
  diag.assign(n, 0.0);
  super.assign(n > 0 ? n - 1 : 0, 0.0);
  std::vector<Complex> row(n);
  for (std::size_t k = 0; k < n; ++k) {
    // left reflector on column k, rows k..m-1
    {
      std::span<Complex> x(&a(k, k), m - k);
      Complex beta;
      double tau;
      if (make_reflector(x, beta, tau)) {
        for (std::size_t j = k + 1; j < n; ++j) {
          Complex* col = &a(k, j);
          Complex dot = 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) dot += std::conj(x[i]) * col[i];
          dot *= tau;
          for (std::size_t i = 0; i < x.size(); ++i) col[i] -= x[i] * dot;
        }
      }
      diag[k] = std::abs(beta);
    }
    if (k + 1 >= n) continue;
    // right reflector on row k, columns k+1..n-1 (reflect the conjugated row)
    const std::size_t len = n - k - 1;
    for (std::size_t j = 0; j < len; ++j) row[j] = std::conj(a(k, k + 1 + j));
    std::span<Complex> y(row.data(), len);
    Complex beta;
    double tau;
    if (make_reflector(y, beta, tau)) {
      // A(i, k+1:) <- A(i, k+1:) (I - tau v v*) for rows i > k
      for (std::size_t i = k + 1; i < m; ++i) {
        Complex dot = 0.0;
        for (std::size_t j = 0; j < len; ++j) dot += a(i, k + 1 + j) * y[j];
        dot *= tau;
        for (std::size_t j = 0; j < len; ++j) a(i, k + 1 + j) -= dot * std::conj(y[j]);
      }
    }
    super[k] = std::abs(beta);
  }
}

/// Nonzero pattern with at most one entry per row and column (permutation
/// times diagonal): the 2-norm is the largest entry modulus.
inline bool generalized_permutation_norm(const CMatrix& a, double& norm) {
  std::vector<char> row_used(a.rows(), 0);
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    int count = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const Complex v = a(i, j);
      if (v == Complex{}) continue;
      if (++count > 1 || row_used[i]) return false;
      row_used[i] = 1;
      best = std::max(best, std::abs(v));
    }
  }
  norm = best;
  return true;
}

}  // namespace detail

/// All singular values in descending order: Golub-Kahan bidiagonalization, then
/// implicit QL on the symmetric tridiagonal [0 B; B^T 0] embedding.
inline std::vector<double> singular_values(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return {};
  CMatrix work = a.rows() >= a.cols() ? a : a.adjoint();
  const std::size_t n = work.cols();
  std::vector<double> diag, super;
  detail::bidiagonalize(std::move(work), diag, super);
  std::vector<double> d(2 * n, 0.0), e(2 * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    e[2 * k] = diag[k];
    if (k + 1 < n) e[2 * k + 1] = super[k];
  }
  detail::tridiagonal_ql(d, e, nullptr);
  std::sort(d.begin(), d.end(), std::greater<>());
  d.resize(n);
  for (auto& s : d) s = std::abs(s);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

inline double smallest_singular_value(const CMatrix& a) {
  detail::require_square(a, "smallest_singular_value");
  if (a.rows() == 0) return 0.0;
  return singular_values(a).back();
}

/// Largest singular value.
inline double operator_norm(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  double norm;
  if (detail::generalized_permutation_norm(a, norm)) return norm;
  return singular_values(a).front();
}

/// ||A A* - A* A|| <= tol ||A||^2.
inline bool is_normal(const CMatrix& a, double tol = 1e-10) {
  detail::require_square(a, "is_normal");
  const CMatrix ah = a.adjoint();
  const CMatrix commutator = a * ah - ah * a;
  // Cheap sufficient test first: ||C||_2 <= ||C||_F and ||A||_2 >= column norms.
  double lower = a.frobenius_norm() / std::sqrt(static_cast<double>(std::max<std::size_t>(a.rows(), 1)));
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (const auto& v : a.column(j)) s += std::norm(v);
    lower = std::max(lower, std::sqrt(s));
  }
  const double cf = commutator.frobenius_norm();
  if (cf <= tol * lower * lower) return true;
  const double na = operator_norm(a);
  return operator_norm(commutator) <= tol * na * na;
}

inline bool is_hermitian(const CMatrix& a, double tol = 1e-12) {
  if (!a.square()) return false;
  double diff = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) diff += std::norm(a(i, j) - std::conj(a(j, i)));
  return std::sqrt(diff) <= tol * a.frobenius_norm();
}

struct HermitianEigen {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // column k pairs with values[k]
};

/// Full eigendecomposition of a Hermitian matrix (no Hermitian check).
inline HermitianEigen hermitian_eigensystem(const CMatrix& a) {
  detail::require_square(a, "hermitian_eigensystem");
  auto t = detail::tridiagonalize(a, true);
  detail::tridiagonal_ql(t.diag, t.offdiag, &t.q);
  const std::size_t n = t.diag.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return t.diag[x] < t.diag[y]; });
  HermitianEigen out{std::vector<double>(n), CMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = t.diag[order[k]];
    auto src = t.q.column(order[k]);
    std::copy(src.begin(), src.end(), out.vectors.column(k).begin());
  }
  return out;
}

/// Real eigenvalues of a Hermitian matrix, ascending, with multiplicity.
/// With `with_residuals`, eigenvectors are formed and residual_bound is the
/// largest ||Av - lambda v||; otherwise it is the backward-error estimate
/// n * eps * ||A||_F.
inline EigenvalueSet hermitian_eigenvalues(const CMatrix& a, bool with_residuals = false) {
  detail::require_square(a, "hermitian_eigenvalues");
  if (!is_hermitian(a)) throw Error(ErrorKind::NotHermitian, "matrix is not Hermitian within 1e-12 ||A||");
  const std::size_t n = a.rows();
  EigenvalueSet out;
  out.order = n;
  out.method = EigenMethod::hermitian;
  std::vector<double> vals;
  if (with_residuals) {
    auto eig = hermitian_eigensystem(a);
    vals = eig.values;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      auto av = a * eig.vectors.column(k);
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) r += std::norm(av[i] - vals[k] * eig.vectors(i, k));
      worst = std::max(worst, std::sqrt(r));
    }
    out.residual_bound = worst;
  } else {
    auto t = detail::tridiagonalize(a, false);
    detail::tridiagonal_ql(t.diag, t.offdiag, nullptr);
    vals = std::move(t.diag);
    std::sort(vals.begin(), vals.end());
    out.residual_bound = static_cast<double>(n) * detail::kEps * a.frobenius_norm();
  }
  out.values.reserve(n);
  for (double v : vals) out.values.emplace_back(v, 0.0);
  return out;
}

/// Complex eigenvalues of a normal matrix via the commuting Hermitian pair
/// H1 = (A + A*)/2, H2 = (A - A*)/(2i): diagonalize H1, then diagonalize H2
/// restricted to each H1 eigenspace.
inline EigenvalueSet normal_eigenvalues(const CMatrix& a) {
  detail::require_square(a, "normal_eigenvalues");
  if (!is_normal(a)) throw Error(ErrorKind::NotNormal, "matrix is not normal within 1e-10 ||A||^2");
  const std::size_t n = a.rows();
  EigenvalueSet out;
  out.order = n;
  out.method = EigenMethod::normal;
  if (n == 0) return out;

  const CMatrix ah = a.adjoint();
  CMatrix h1 = (a + ah) * Complex{0.5, 0.0};
  CMatrix h2 = (a - ah) * Complex{0.0, -0.5};
  auto e1 = hermitian_eigensystem(h1);
  // ||A|| proxy for the clustering threshold: ||H1|| + ||H2||_1
  double h2_norm1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (const auto& v : h2.column(j)) s += std::abs(v);
    h2_norm1 = std::max(h2_norm1, s);
  }
  const double scale = std::max(std::abs(e1.values.front()), std::abs(e1.values.back())) + h2_norm1;
  const double cluster_tol = 1e-8 * scale;

  const CMatrix av = a * e1.vectors;
  const CMatrix h2v = h2 * e1.vectors;
  double worst = 0.0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && e1.values[end] - e1.values[end - 1] <= cluster_tol) ++end;
    const std::size_t k = end - start;
    // C = V_c* H2 V_c, then Rayleigh quotients of A on its eigenvectors
    CMatrix c(k, k), vav(k, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < k; ++i) {
        Complex s2 = 0.0, sa = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const Complex vr = std::conj(e1.vectors(r, start + i));
          s2 += vr * h2v(r, start + j);
          sa += vr * av(r, start + j);
        }
        c(i, j) = s2;
        vav(i, j) = sa;
      }
    // eigenvector x = V_c w, residual ||A x - lambda x|| from the cached A V_c
    auto record = [&](std::span<const Complex> w, Complex lambda) {
      double res = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        Complex ax = 0.0, x = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          ax += av(r, start + i) * w[i];
          x += e1.vectors(r, start + i) * w[i];
        }
        res += std::norm(ax - lambda * x);
      }
      worst = std::max(worst, std::sqrt(res));
      out.values.push_back(lambda);
    };
    if (k == 1) {
      const Complex one[1] = {Complex{1.0, 0.0}};
      record(one, vav(0, 0));
    } else {
      CMatrix herm = (c + c.adjoint()) * Complex{0.5, 0.0};
      auto ec = hermitian_eigensystem(herm);
      for (std::size_t j = 0; j < k; ++j) {
        auto w = ec.vectors.column(j);
        auto vw = vav * w;
        Complex lambda = 0.0;
        for (std::size_t i = 0; i < k; ++i) lambda += std::conj(w[i]) * vw[i];
        record(w, lambda);
      }
    }
    start = end;
  }
  // for normal A each computed value is within its residual of the spectrum
  out.residual_bound = worst;
  std::sort(out.values.begin(), out.values.end(), detail::complex_less);
  return out;
}

/// Hermitian path when the matrix is Hermitian, normal path otherwise.
inline EigenvalueSet spectrum(const CMatrix& a) {
  if (is_hermitian(a)) return hermitian_eigenvalues(a);
  return normal_eigenvalues(a);
}

/// Smallest singular value of (lambda I - A) for many shifts lambda.
///
/// A is reduced once to upper Hessenberg form H by a unitary similarity, so
/// sigma_min(lambda I - A) = sigma_min(lambda I - H). Each shift costs one
/// Givens QR of lambda I - H followed by Lanczos with full reorthogonalization
/// on (R*R)^{-1}; the reported value is ||R y|| for the converged Ritz vector
/// y. A full SVD is the fallback if that ever goes non-finite.
/// Results depend only on (A, lambda): the starting vector comes from a fixed seed.
///
/// Hermitian A (within 1e-12 ||A||) skips all of that: sigma_min(lambda I - A)
/// is the distance from lambda to the nearest eigenvalue, found by bisection
/// over the sorted spectrum.
class ShiftedSigmaMin {
 public:
  explicit ShiftedSigmaMin(const CMatrix& a) : n_(a.rows()), hess_(a), norm_estimate_(a.frobenius_norm()) {
    detail::require_square(a, "ShiftedSigmaMin");
    if (n_ > 0 && is_hermitian(a)) {
      for (const auto& z : hermitian_eigenvalues(a).values) real_spectrum_.push_back(z.real());
      std::sort(real_spectrum_.begin(), real_spectrum_.end());
      hermitian_ = true;
      return;
    }
    reduce_to_hessenberg();
  }

  std::size_t order() const { return n_; }
  bool uses_eigenvalues() const { return hermitian_; }

  double operator()(Complex lambda) const {
    if (n_ == 0) return 0.0;
    if (hermitian_) {
      const auto it = std::lower_bound(real_spectrum_.begin(), real_spectrum_.end(), lambda.real());
      double best = std::numeric_limits<double>::infinity();
      if (it != real_spectrum_.end()) best = std::abs(lambda - *it);
      if (it != real_spectrum_.begin()) best = std::min(best, std::abs(lambda - *std::prev(it)));
      return best;
    }
    CMatrix r = shifted_triangle(lambda);
    if (n_ == 1) return std::abs(r(0, 0));
    const double value = lanczos(r, norm_estimate_ + std::abs(lambda));
    if (std::isfinite(value)) return value;
    CMatrix shifted = hess_ * Complex{-1.0, 0.0};
    for (std::size_t i = 0; i < n_; ++i) shifted(i, i) += lambda;
    return smallest_singular_value(shifted);
  }

 private:
  static constexpr std::uint64_t kSeed = 0x5eed0001u;

  void reduce_to_hessenberg() {
    for (std::size_t k = 0; k + 2 < n_; ++k) {
      const std::size_t m = n_ - k - 1;
      std::span<Complex> x(&hess_(k + 1, k), m);
      Complex beta;
      double tau;
      if (!detail::make_reflector(x, beta, tau)) continue;
      std::vector<Complex> v(x.begin(), x.end());
      // left: rows k+1.., columns k+1..
      for (std::size_t j = k + 1; j < n_; ++j) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += std::conj(v[i]) * hess_(k + 1 + i, j);
        dot *= tau;
        for (std::size_t i = 0; i < m; ++i) hess_(k + 1 + i, j) -= v[i] * dot;
      }
      // right: all rows, columns k+1..
      for (std::size_t i = 0; i < n_; ++i) {
        Complex dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += hess_(i, k + 1 + j) * v[j];
        dot *= tau;
        for (std::size_t j = 0; j < m; ++j) hess_(i, k + 1 + j) -= dot * std::conj(v[j]);
      }
      hess_(k + 1, k) = beta;
      for (std::size_t i = k + 2; i < n_; ++i) hess_(i, k) = 0.0;
    }
  }

  CMatrix shifted_triangle(Complex lambda) const {
    CMatrix r = hess_ * Complex{-1.0, 0.0};
    for (std::size_t i = 0; i < n_; ++i) r(i, i) += lambda;
    for (std::size_t k = 0; k + 1 < n_; ++k) {
      const Complex a = r(k, k), b = r(k + 1, k);
      if (b == Complex{}) continue;
      const double aa = std::abs(a);
      const double rr = std::hypot(aa, std::abs(b));
      double c;
      Complex s;
      if (aa == 0.0) {
        c = 0.0;
        s = std::conj(b) / std::abs(b);
      } else {
        c = aa / rr;
        s = (a / aa) * std::conj(b) / rr;
      }
      for (std::size_t j = k; j < n_; ++j) {
        const Complex x = r(k, j), y = r(k + 1, j);
        r(k, j) = c * x + s * y;
        r(k + 1, j) = -std::conj(s) * x + c * y;
      }
      r(k + 1, k) = 0.0;
    }
    return r;
  }

  double lanczos(const CMatrix& r, double scale) const {
    const std::size_t n = n_;
    // Guard tiny pivots; sigma_min(R) <= min |r_ii| so the answer is tiny anyway.
    const double floor = 4.0 * detail::kEps * scale;
    std::vector<Complex> pivots(n);
    for (std::size_t i = 0; i < n; ++i) {
      Complex d = r(i, i);
      if (std::abs(d) < floor) d = std::abs(d) == 0.0 ? Complex{floor, 0.0} : d * (floor / std::abs(d));
      pivots[i] = d;
    }
    std::mt19937_64 rng(kSeed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto random_unit = [&](const std::vector<std::vector<Complex>>& basis) {
      std::vector<Complex> v(n);
      for (auto& z : v) z = {dist(rng), dist(rng)};
      reorthogonalize(basis, v);
      const double nv = norm(v);
      for (auto& z : v) z /= nv;
      return v;
    };

    std::vector<std::vector<Complex>> basis;
    std::vector<double> alpha, beta;  // beta[k] couples basis k and k+1
    basis.push_back(random_unit(basis));
    double previous = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<Complex> w = basis[k];
      solve_normal(r, pivots, w);
      Complex a = 0.0;
      for (std::size_t i = 0; i < n; ++i) a += std::conj(basis[k][i]) * w[i];
      alpha.push_back(a.real());
      reorthogonalize(basis, w);
      double b = norm(w);

      // largest Ritz value of (R*R)^{-1}, i.e. the smallest of R*R; once it
      // stalls, check the Ritz residual before stopping
      std::vector<double> d = alpha, e = beta;
      detail::tridiagonal_ql(d, e, nullptr);
      const double theta = *std::max_element(d.begin(), d.end());
      const bool stalled = std::abs(theta - previous) <= 1e-10 * theta;
      previous = theta;
      if (stalled || k + 1 == n) {
        const std::size_t m = alpha.size();
        std::vector<double> dd = alpha, ee = beta;
        CMatrix z = CMatrix::identity(m);
        detail::tridiagonal_ql(dd, ee, &z);
        const std::size_t top = static_cast<std::size_t>(std::max_element(dd.begin(), dd.end()) - dd.begin());
        if (k + 1 == n || b * std::abs(z(m - 1, top)) <= 1e-9 * dd[top]) {
          std::vector<Complex> y(n);
          for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < n; ++i) y[i] += z(j, top) * basis[j][i];
          const double ny = norm(y);
          for (auto& c : y) c /= ny;
          return norm(apply_r(r, y));
        }
      }
      if (b <= detail::kEps * theta) {
        // invariant subspace: continue from a fresh direction
        w = random_unit(basis);
        b = 0.0;
      } else {
        for (auto& c : w) c /= b;
      }
      beta.push_back(b);
      basis.push_back(std::move(w));
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  static double norm(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
  }

  /// Two passes of classical Gram-Schmidt against the basis.
  static void reorthogonalize(const std::vector<std::vector<Complex>>& basis, std::vector<Complex>& w) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) dot += std::conj(q[i]) * w[i];
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= dot * q[i];
      }
  }

  std::vector<Complex> apply_r(const CMatrix& r, const std::vector<Complex>& x) const {
    std::vector<Complex> y(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const Complex xj = x[j];
      const Complex* col = &r(0, j);
      for (std::size_t i = 0; i <= j; ++i) y[i] += col[i] * xj;
    }
    return y;
  }

  /// x <- (R* R)^{-1} x using the guarded pivots.
  void solve_normal(const CMatrix& r, const std::vector<Complex>& piv, std::vector<Complex>& x) const {
    const std::size_t n = n_;
    // R* y = x (lower triangular with conj entries)
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = x[i];
      const Complex* col = &r(0, i);
      for (std::size_t k = 0; k < i; ++k) s -= std::conj(col[k]) * x[k];
      x[i] = s / std::conj(piv[i]);
    }
    // R z = y
    for (std::size_t ii = n; ii-- > 0;) {
      x[ii] /= piv[ii];
      const Complex xi = x[ii];
      const Complex* col = &r(0, ii);
      for (std::size_t k = 0; k < ii; ++k) x[k] -= col[k] * xi;
    }
  }

  std::size_t n_;
  CMatrix hess_;
  double norm_estimate_;
  bool hermitian_ = false;
  std::vector<double> real_spectrum_;  // ascending
};

}  // namespace rotspec
