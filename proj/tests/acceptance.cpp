// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "rotspec/cli.hpp"
#include "rotspec/rotspec.hpp"

using namespace rotspec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RealNumberInput golden() { return parse_theta("surd:(-1+1*sqrt(5))/2"); }

// |theta - p/q| < 1/(q q') for theta = (a + b sqrt d)/c, b, c > 0, using
// integer comparisons only: with x = q b sqrt d and y = p c - q a the claim is
// |x - y| < c/q'.
bool gap_below(const BigInt& a, const BigInt& b, const BigInt& d, const BigInt& c, const BigInt& p, const BigInt& q,
               const BigInt& q_next) {
  const BigRational x2 = BigRational(q * q * b * b * d);
  const BigRational y = BigRational(p * c - q * a);
  const BigRational t(c, q_next);
  const BigRational hi = y + t, lo = y - t;
  const bool below_hi = hi > 0 && x2 < hi * hi;
  const bool above_lo = lo < 0 || lo * lo < x2;
  return below_hi && above_lo;
}

Outcome criterion1() {
  struct Case {
    const char* text;
    int a, b, d, c;
  };
  const Case cases[] = {{"surd:(-1+1*sqrt(5))/2", -1, 1, 5, 2}, {"surd:(-1+1*sqrt(2))/1", -1, 1, 2, 1}};
  std::size_t checked = 0;
  for (const auto& cs : cases) {
    const auto cf = expand(parse_theta(cs.text), 41);
    if (cf.terms() != 41 || !cf.exact) return {false, std::string("expansion of ") + cs.text + " incomplete"};
    for (std::size_t n = 1; n <= 40; ++n) {
      if (!gap_below(cs.a, cs.b, cs.d, cs.c, cf.p(n), cf.q(n), cf.q(n + 1)))
        return {false, std::string(cs.text) + " fails the gap inequality at n=" + std::to_string(n)};
      if (!convergent_gap(cf, n).certified) return {false, "library gap not certified at n=" + std::to_string(n)};
      ++checked;
    }
  }
  const auto g = expand(golden(), 40);
  BigInt f0 = 1, f1 = 1;  // q_n = F_{n+1}
  for (std::size_t n = 1; n <= 40; ++n) {
    const BigInt f2 = f0 + f1;
    f0 = f1;
    f1 = f2;
    if (g.q(n) != f0) return {false, "golden q_" + std::to_string(n) + " = " + g.q(n).str() + ", Fibonacci " + f0.str()};
  }
  if (g.q(40) != BigInt(165580141)) return {false, "golden q_40 = " + g.q(40).str()};
  return {true, std::to_string(checked) + " exact gap inequalities; golden q_40 = 165580141"};
}

double unitarity_defect(const CMatrix& a) {
  return operator_norm(a.adjoint() * a - CMatrix::identity(a.rows()));
}

Outcome criterion2() {
  const auto cf = expand(golden(), 17);
  double worst_c = 0, worst_u = 0;
  std::size_t count = 0;
  for (std::size_t n = 2; n <= 16; ++n) {
    const auto q = static_cast<std::int64_t>(cf.q(n));
    const auto p = static_cast<std::int64_t>(cf.p(n));
    worst_c = std::max(worst_c, commutation_defect(p, q));
    worst_u = std::max({worst_u, unitarity_defect(shift_matrix(q).entries), unitarity_defect(clock_matrix(p, q).entries)});
    ++count;
  }
  if (cf.q(16) != BigInt(1597)) return {false, "largest q is " + cf.q(16).str()};
  const bool ok = worst_c <= 1e-12 && worst_u <= 1e-13;
  return {ok, std::to_string(count) + " pairs q=2..1597; max commutation " + fmt("%.3g", worst_c) + ", max unitarity " +
                  fmt("%.3g", worst_u)};
}

Outcome criterion3() {
  double worst_h = 0.0;
  for (std::int64_t q = 1; q <= 512; ++q) {
    const CMatrix u = shift_matrix(q).entries;
    const auto got = hermitian_eigenvalues(u + u.adjoint()).values;
    std::vector<double> want;
    for (std::int64_t k = 0; k < q; ++k) want.push_back(2 * std::cos(2 * std::numbers::pi * double(k) / double(q)));
    std::sort(want.begin(), want.end());
    if (got.size() != want.size()) return {false, "wrong eigenvalue count at q=" + std::to_string(q)};
    for (std::size_t k = 0; k < want.size(); ++k) worst_h = std::max(worst_h, std::abs(got[k] - want[k]));
  }
  // the normal path is O(q^3) per order; sample every order to 128, then every 16th
  double worst_n = 0.0;
  std::size_t sampled = 0;
  for (std::int64_t q = 1; q <= 512; q += (q < 128 ? 1 : 16)) {
    const auto got = normal_eigenvalues(shift_matrix(q).entries).values;
    if (got.size() != static_cast<std::size_t>(q)) return {false, "wrong root count at q=" + std::to_string(q)};
    for (std::int64_t k = 0; k < q; ++k) {
      const Complex root = std::polar(1.0, 2 * std::numbers::pi * double(k) / double(q));
      double best = INFINITY;
      for (const auto& z : got) best = std::min(best, std::abs(z - root));
      worst_n = std::max(worst_n, best);
    }
    ++sampled;
  }
  const bool ok = worst_h <= 1e-10 && worst_n <= 1e-9;
  return {ok, "hermitian q=1..512 max err " + fmt("%.3g", worst_h) + "; normal " + std::to_string(sampled) +
                  " orders up to 512 max err " + fmt("%.3g", worst_n)};
}

// Q diag(d) Q* with Q a product of random Householder reflectors, so the
// eigenvalues are known without any eigensolver.
CMatrix hermitian_with_spectrum(const std::vector<double>& d, std::mt19937_64& rng) {
  const std::size_t n = d.size();
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = d[i];
  for (int r = 0; r < 3; ++r) {
    std::vector<Complex> v(n);
    double norm2 = 0;
    for (auto& x : v) {
      x = {g(rng), g(rng)};
      norm2 += std::norm(x);
    }
    CMatrix h = CMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) -= 2.0 * v[i] * std::conj(v[j]) / norm2;
    a = h * a * h;
  }
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = 0; j < i; ++j) a(j, i) = std::conj(a(i, j));
  }
  return a;
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> order(1, 64);
  std::uniform_real_distribution<double> u(-3, 3);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> d(order(rng));
    for (auto& x : d) x = u(rng);
    const CMatrix a = hermitian_with_spectrum(d, rng);
    const double norm_a = std::max(std::abs(*std::max_element(d.begin(), d.end())),
                                   std::abs(*std::min_element(d.begin(), d.end())));
    for (int s = 0; s < 20; ++s) {
      const Complex lambda{u(rng), u(rng) * 0.5};
      double want = INFINITY;
      for (double x : d) want = std::min(want, std::abs(lambda - x));
      const double got = smallest_singular_value(lambda * CMatrix::identity(d.size()) - a);
      worst = std::max(worst, std::abs(got - want) / (norm_a + std::abs(lambda)));
    }
  }
  return {worst <= 1e-7, "1000 samples; max |sigma_min - dist| / (||A||+|lambda|) = " + fmt("%.3g", worst)};
}

Outcome criterion5() {
  const auto spec = OperatorSpec::almost_mathieu();
  std::vector<NormalApproximation> levels;
  for (std::size_t n = 3; n <= 12; ++n) levels.push_back(certify_normal(golden(), spec, n));
  if (levels.back().certificate.q_curr != BigInt(233)) return {false, "q_12 = " + levels.back().certificate.q_curr.str()};
  double worst_pair = -INFINITY, worst_deep = -INFINITY;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double si = *levels[i].certificate.epsilon_sharp;
    for (std::size_t j = i + 1; j < levels.size(); ++j) {
      const double sj = *levels[j].certificate.epsilon_sharp;
      const double dh = hausdorff_distance(levels[i].cloud, levels[j].cloud);
      worst_pair = std::max(worst_pair, dh - (si + sj + 1e-8));
    }
    if (i + 1 < levels.size())
      worst_deep = std::max(worst_deep, hausdorff_distance(levels[i].cloud, levels.back().cloud) - (si + 1e-8));
  }
  const bool ok = worst_pair <= 0 && worst_deep <= 0;
  return {ok, "45 pairs, levels 3..12; max margin used " + fmt("%.4g", worst_pair) + " (pairs), " +
                  fmt("%.4g", worst_deep) + " (against level 12)"};
}

Outcome criterion6() {
  const auto spec = OperatorSpec::canonical(1, 0, 0, 0);
  PointCloud circle;
  for (int k = 0; k < 4096; ++k) circle.points.push_back(std::polar(1.0, 2 * std::numbers::pi * k / 4096.0));
  std::string worst;
  double min_lower_margin = INFINITY, min_upper_margin = INFINITY;
  for (std::size_t n = 5; n <= 12; ++n) {
    const auto r = certify_normal(golden(), spec, n);
    const double dh = hausdorff_distance(r.cloud, circle);
    const double qsum = static_cast<double>(r.certificate.q_prev + r.certificate.q_curr);
    const double floor = std::numbers::pi / (2 * qsum) - 2 * std::numbers::pi / 4096;
    const double ceiling = *r.certificate.epsilon_sharp;
    min_lower_margin = std::min(min_lower_margin, dh - floor);
    min_upper_margin = std::min(min_upper_margin, ceiling - dh);
    if (dh < floor || dh > ceiling)
      return {false, "level " + std::to_string(n) + ": d_H " + fmt("%.6g", dh) + " outside [" + fmt("%.6g", floor) +
                         ", " + fmt("%.6g", ceiling) + "]"};
  }
  return {true, "levels 5..12 inside [floor, epsilon_sharp]; min margins " + fmt("%.3g", min_lower_margin) + " above, " +
                    fmt("%.3g", min_upper_margin) + " below"};
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> order(1, 32);
  std::uniform_real_distribution<double> size(0.0, 0.5), eps(0.05, 0.5), u(-2, 2);
  std::size_t violations = 0, coarse = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = order(rng);
    std::vector<double> d(n), e(n);
    for (auto& x : d) x = u(rng);
    for (auto& x : e) x = u(rng);
    const CMatrix s = hermitian_with_spectrum(d, rng);
    CMatrix pert = hermitian_with_spectrum(e, rng);
    double target = size(rng);
    if (target == 0.0) target = 0.25;
    pert *= target / operator_norm(pert);
    GridParams gp;
    gp.resolution = {128, 128};
    const auto r = sandwich_check(s, s + pert, eps(rng), gp);
    if (!(r.delta > 0.0 && r.delta <= 0.5 + 1e-12)) return {false, "perturbation norm out of range: " + fmt("%.3g", r.delta)};
    violations += r.violations.size();
    coarse += r.grid_too_coarse;
  }
  return {violations == 0, "100 pairs on 128x128; " + std::to_string(violations) + " violations, " +
                               std::to_string(coarse) + " pairs with slack advisories"};
}

Outcome criterion8() {
  const auto spec = OperatorSpec::almost_mathieu();
  const auto deep = certify_normal(golden(), spec, 12);
  const double deep_sharp = *deep.certificate.epsilon_sharp;
  std::string detail;
  for (std::int64_t n : {10, 50, 200}) {
    const auto r = one_sided(golden(), spec, n);
    if (!r.cloud) return {false, "no eigenvalue cloud at n=" + std::to_string(n)};
    const double delta = r.certificate.radius + deep_sharp;
    if (!one_sided_contains(*r.cloud, deep.cloud, delta))
      return {false, "n=" + std::to_string(n) + " deviation " + fmt("%.6g", one_sided_deviation(*r.cloud, deep.cloud)) +
                         " not below " + fmt("%.6g", delta)};
    detail += "n=" + std::to_string(n) + " dev " + fmt("%.4g", one_sided_deviation(*r.cloud, deep.cloud)) + " < " +
              fmt("%.4g", delta) + "; ";
  }
  const long double reference = 36.0L * std::sqrt(3.0L * std::numbers::pi_v<long double>);
  const double c1 = one_sided_constant(spec);
  const bool c1_ok = std::abs(c1 - reference) <= 5e-7L * reference && c1 >= reference * (1 - 1e-15L);
  detail += "C1 = " + fmt("%.9g", c1) + " vs 36*sqrt(3*pi) = " + fmt("%.9g", double(reference)) +
            " (the quoted 110.540 does not match this value)";
  return {c1_ok, detail};
}

Outcome criterion9() {
  // upper bound with pi rounded up and sqrt5 rounded down, since
  // (3s - 1)/(s - 1) decreases in s
  const BigRational pi_hi(BigInt(31415927), BigInt(10000000));
  const BigRational s_lo(BigInt(22360679), BigInt(10000000));
  const BigRational majorant = BigRational(14) * pi_hi * (3 * s_lo - 1) / (s_lo - 1);
  const long double s = std::sqrt(5.0L), pi = std::numbers::pi_v<long double>;
  const long double approx = 14 * pi * (3 * s - 1) / (s - 1);
  const long double k = 2 * s / (s - 1);
  const double k_lib = static_cast<double>(constants::fibonacci_tail_upper());
  // the library constant F must not undercut (5 + sqrt5)/2: (2F - 5)^2 >= 5
  const BigRational w = 2 * constants::fibonacci_tail_upper() - 5;
  const bool tail_is_upper = w > 0 && w * w >= 5;
  const bool ok = majorant <= BigRational(204) && std::abs(approx - 203.10L) < 0.05L &&
                  std::abs(k - 3.618034L) < 5e-7L && std::abs(k_lib - double(k)) <= 5e-7 * double(k) &&
                  tail_is_upper;
  // the quoted 203.10 agrees with the value to four significant figures only
  return {ok, "14*pi*(3*sqrt5-1)/(sqrt5-1) = " + fmt("%.6f", double(approx)) + " (quoted 203.10) <= " +
                  fmt("%.6f", static_cast<double>(majorant)) + " (certified) <= 204; 2*sqrt5/(sqrt5-1) = " +
                  fmt("%.7f", double(k)) + ", library " + fmt("%.7f", k_lib)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion10() {
  const auto root = std::filesystem::temp_directory_path() / "rotspec_acceptance_jobs";
  std::filesystem::remove_all(root);
  std::vector<std::string> outputs;
  for (const char* jobs : {"1", "8", "1", "8"}) {
    const auto dir = root / (std::string("run") + std::to_string(outputs.size()));
    std::ostringstream out, err;
    const int code = cli::run({"pseudospectrum", "--level", "7", "--epsilon", "0.25", "--grid", "96", "--jobs", jobs,
                               "--out-dir", dir.string()},
                              out, err);
    if (code != 0) return {false, "pseudospectrum exited " + std::to_string(code) + ": " + err.str()};
    outputs.push_back(slurp(dir / "grid_prev.csv") + slurp(dir / "grid_curr.csv"));
  }
  std::filesystem::remove_all(root);
  const bool ok = outputs[0] == outputs[1] && outputs[0] == outputs[2] && outputs[0] == outputs[3] &&
                  outputs[0].size() > 1000;
  return {ok, "4 runs (jobs 1,8,1,8), " + std::to_string(outputs[0].size()) + " bytes each, identical=" +
                  (ok ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t k = 0; k < std::size(criteria); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[k]();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu: %s - %s [%.2fs]\n", k + 1, r.pass ? "PASS" : "FAIL", r.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
