#pragma once

// rotspec command-line front end. run() is the whole program, so the CLI can
// also be driven in-process.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rotspec/approx.hpp"
#include "rotspec/contfrac.hpp"
#include "rotspec/matmodel.hpp"
#include "rotspec/parallel.hpp"
#include "rotspec/pseudospectra.hpp"
#include "rotspec/spectral.hpp"

namespace rotspec::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInput = 3, kNumerical = 4, kCertificate = 5 };

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConvergenceFailure: return kNumerical;
    case ErrorKind::CertificateViolation: return kCertificate;
    default: return kInput;
  }
}

inline const char* kDefaultTheta = "surd:(-1+1*sqrt(5))/2";

struct RunConfig {
  std::string command;
  std::string theta = kDefaultTheta;
  std::string spec_json;  // inline JSON
  std::string spec_file;
  std::string out_dir = ".";
  std::string format = "csv";
  unsigned jobs = 0;
  std::int64_t max_q = kDefaultMaxQ;
  std::size_t terms = 10;
  std::size_t level = 5;
  double epsilon = 0.5;
  bool epsilon_set = false;
  std::size_t grid = 256;
  std::vector<double> region;  // re_min, re_max, im_min, im_max
  std::int64_t q_max = 20;
  std::vector<std::int64_t> ns{10, 100, 1000};
  std::size_t from = 3;
  std::size_t to = 9;
};

namespace detail {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline OperatorSpec load_spec(const RunConfig& cfg) {
  if (!cfg.spec_json.empty() && !cfg.spec_file.empty()) throw UsageError("give --spec or --spec-file, not both");
  nlohmann::json j;
  try {
    if (!cfg.spec_file.empty()) {
      std::ifstream in(cfg.spec_file);
      if (!in) throw Error(ErrorKind::InvalidInput, "cannot read spec file " + cfg.spec_file);
      j = nlohmann::json::parse(in);
    } else if (!cfg.spec_json.empty()) {
      j = nlohmann::json::parse(cfg.spec_json);
    } else {
      return OperatorSpec::almost_mathieu();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("spec JSON: ") + e.what());
  }
  try {
    return j.get<OperatorSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("spec JSON: ") + e.what());
  }
}

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorKind::InvalidInput, "cannot create output directory " + cfg.out_dir + ": " + ec.message());
  return std::filesystem::path(cfg.out_dir) / name;
}

template <typename Writer>
void write_file(const RunConfig& cfg, const std::string& name, std::ostream& log, Writer&& writer) {
  const auto path = out_path(cfg, name);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
  writer(os);
  if (!os) throw Error(ErrorKind::InvalidInput, "write failed for " + path.string());
  log << "wrote " << path.string() << "\n";
}

inline GridParams grid_params(const RunConfig& cfg) {
  GridParams gp;
  gp.resolution = {cfg.grid, cfg.grid};
  gp.jobs = cfg.jobs;
  if (!cfg.region.empty()) {
    if (cfg.region.size() != 4) throw UsageError("--region needs re_min,re_max,im_min,im_max");
    gp.region = Region{cfg.region[0], cfg.region[1], cfg.region[2], cfg.region[3]};
  }
  return gp;
}

inline nlohmann::json region_json(const Region& r) { return {r.re_min, r.re_max, r.im_min, r.im_max}; }

// Commands ------------------------------------------------------------------

inline int cmd_expand(const RunConfig& cfg, std::ostream& out) {
  const auto theta = parse_theta(cfg.theta);
  auto cf = expand(theta, cfg.terms);
  // one extra quotient gives the bound at the last printed level
  std::optional<ContinuedFractionExpansion> ahead;
  try {
    ahead = expand(theta, cfg.terms + 1);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PrecisionExhausted) throw;
  }
  const ContinuedFractionExpansion& full = ahead ? *ahead : cf;
  nlohmann::json rows = nlohmann::json::array();
  bool all_ok = true;
  if (cfg.format != "json") out << "k,a_k,p_k,q_k,gap,bound,certified\n";
  for (std::size_t k = 1; k <= cf.terms(); ++k) {
    std::string gap, bound, certified = "n/a";
    if (k + 1 <= full.terms()) {
      const auto g = convergent_gap(full, k);
      gap = fmt17(g.gap_approx);
      bound = fmt17(static_cast<double>(g.bound));
      certified = g.certified ? "yes" : "no";
      all_ok = all_ok && (g.certified || !theta.is_exact());
    } else if (cf.terminated && k == cf.terms()) {
      gap = "0";
      certified = "exact";
    }
    if (cfg.format == "json") {
      rows.push_back({{"k", k}, {"a", cf.a(k).str()}, {"p", cf.p(k).str()}, {"q", cf.q(k).str()},
                      {"gap", gap}, {"bound", bound}, {"certified", certified}});
    } else {
      out << k << ',' << cf.a(k).str() << ',' << cf.p(k).str() << ',' << cf.q(k).str() << ',' << gap << ','
          << bound << ',' << certified << '\n';
    }
  }
  if (cfg.format == "json") {
    nlohmann::json j{{"theta", theta.to_string()}, {"exact", cf.exact}, {"terminated", cf.terminated}, {"rows", rows}};
    if (cf.periodic_part) j["periodic_part"] = {cf.periodic_part->preperiod, cf.periodic_part->period};
    out << j.dump(2) << "\n";
  } else {
    out << "# " << (cf.terminated ? "terminating" : "nonterminating") << (cf.exact ? ", exact" : ", precision-limited");
    if (cf.periodic_part) out << ", preperiod " << cf.periodic_part->preperiod << " period " << cf.periodic_part->period;
    out << "\n";
  }
  return all_ok ? kOk : kCertificate;
}

inline int cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  const auto theta = parse_theta(cfg.theta);
  const auto spec = load_spec(cfg);
  NormalApproximation r;
  try {
    r = certify_normal(theta, spec, cfg.level, cfg.max_q);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ModelsNotNormal)
      throw Error(ErrorKind::ModelsNotNormal, "models are not normal; run the 'pseudospectrum' command instead");
    throw;
  }
  write_file(cfg, "cloud.csv", out, [&](std::ostream& os) { write_cloud_csv(os, r.cloud); });
  write_file(cfg, "certificate.json", out,
             [&](std::ostream& os) { os << certificate_json(r.certificate, &r.cloud).dump(2) << "\n"; });
  const auto& c = r.certificate;
  out << "n=" << c.level_n << " q_pair=" << c.q_prev.str() << "," << c.q_curr.str() << " points=" << r.cloud.points.size()
      << " epsilon_sharp=" << fmt17(*c.epsilon_sharp) << " epsilon_clean=" << fmt17(*c.epsilon_clean)
      << " radius=" << fmt17(*c.radius()) << "\n";
  return kOk;
}

inline int cmd_pseudospectrum(const RunConfig& cfg, std::ostream& out) {
  if (!(cfg.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  const auto theta = parse_theta(cfg.theta);
  const auto spec = load_spec(cfg);
  const auto r = certify_pseudospectrum(theta, spec, cfg.level, cfg.epsilon, grid_params(cfg), cfg.max_q);
  write_file(cfg, "grid_prev.csv", out, [&](std::ostream& os) { write_grid_csv(os, r.grid_prev); });
  write_file(cfg, "grid_curr.csv", out, [&](std::ostream& os) { write_grid_csv(os, r.grid_curr); });
  if (cfg.format == "pgm") {
    write_file(cfg, "grid_prev.pgm", out, [&](std::ostream& os) { write_grid_pgm(os, r.grid_prev); });
    write_file(cfg, "grid_curr.pgm", out, [&](std::ostream& os) { write_grid_pgm(os, r.grid_curr); });
  }
  nlohmann::json j;
  j["certificate"] = certificate_json(r.certificate);
  j["epsilon"] = r.epsilon;
  j["outer_epsilon"] = r.outer ? nlohmann::json(r.grid_prev.epsilon_levels.back()) : nlohmann::json(nullptr);
  j["region"] = region_json(r.grid_prev.region);
  j["resolution"] = {r.grid_prev.resolution.nx, r.grid_prev.resolution.ny};
  j["fingerprints"] = {r.grid_prev.matrix_fingerprint, r.grid_curr.matrix_fingerprint};
  j["inner_count"] = r.inner.count();
  j["outer_count"] = r.outer ? nlohmann::json(r.outer->count()) : nlohmann::json(nullptr);
  j["inner_subset_outer"] = r.inner_subset_outer;
  j["indexing"] = "sample (i,j) at re_min + i*hx + 1i*(im_min + j*hy), stored row j-major";
  write_file(cfg, "report.json", out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
  out << "inner=" << r.inner.count();
  if (r.outer) out << " outer=" << r.outer->count();
  out << (r.certificate.rate_only ? " rate-only" : " certified") << "\n";
  return kOk;
}

inline int cmd_butterfly(const RunConfig& cfg, std::ostream& out) {
  if (cfg.q_max < 1) throw UsageError("--q-max must be >= 1");
  if (cfg.q_max > cfg.max_q) throw Error(ErrorKind::ResourceBudgetExceeded, "--q-max exceeds --max-q");
  const auto spec = load_spec(cfg);
  if (!spec.is_canonical()) throw Error(ErrorKind::NonCanonicalSpec, "butterfly needs a four-term spec");
  std::vector<std::pair<std::int64_t, std::int64_t>> fractions;
  for (std::int64_t q = 1; q <= cfg.q_max; ++q)
    for (std::int64_t p = 0; p < q; ++p)
      if (std::gcd(p, q) == 1) fractions.emplace_back(p, q);
  std::vector<std::vector<double>> values(fractions.size());
  parallel_for(fractions.size(), cfg.jobs, [&](std::size_t i) {
    const auto m = build_operator(spec, fractions[i].first, fractions[i].second);
    for (const auto& z : hermitian_eigenvalues(m.entries).values) values[i].push_back(z.real());
  });
  write_file(cfg, "butterfly.csv", out, [&](std::ostream& os) {
    os << "p,q,eigenvalue\n";
    for (std::size_t i = 0; i < fractions.size(); ++i)
      for (double v : values[i]) os << fractions[i].first << ',' << fractions[i].second << ',' << fmt17(v) << '\n';
  });
  std::size_t rows = 0;
  for (const auto& v : values) rows += v.size();
  out << "fractions=" << fractions.size() << " rows=" << rows << "\n";
  return kOk;
}

inline int cmd_onesided(const RunConfig& cfg, std::ostream& out) {
  const auto theta = parse_theta(cfg.theta);
  const auto spec = load_spec(cfg);
  if (cfg.ns.empty()) throw UsageError("--n needs at least one denominator");
  if (cfg.epsilon_set && !(cfg.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  const std::optional<double> eps = cfg.epsilon_set ? std::optional<double>(cfg.epsilon) : std::nullopt;
  const auto gp = grid_params(cfg);
  nlohmann::json summary = nlohmann::json::array();
  std::ostringstream table;
  table << "n,p,distance,c1,radius\n";
  for (std::int64_t n : cfg.ns) {
    const auto r = one_sided(theta, spec, n, eps, gp, cfg.max_q);
    const auto& c = r.certificate;
    if (r.cloud)
      write_file(cfg, "onesided_n" + std::to_string(n) + ".csv", out,
                 [&](std::ostream& os) { write_cloud_csv(os, *r.cloud); });
    if (r.grid)
      write_file(cfg, "onesided_n" + std::to_string(n) + "_grid.csv", out,
                 [&](std::ostream& os) { write_grid_csv(os, *r.grid); });
    if (r.grid && cfg.format == "pgm")
      write_file(cfg, "onesided_n" + std::to_string(n) + "_grid.pgm", out,
                 [&](std::ostream& os) { write_grid_pgm(os, *r.grid); });
    summary.push_back(certificate_json(c));
    table << n << ',' << c.chosen_p << ',' << fmt17(c.distance) << ',' << fmt17(c.c1) << ',' << fmt17(c.radius) << '\n';
  }
  write_file(cfg, "onesided.csv", out, [&](std::ostream& os) { os << table.str(); });
  write_file(cfg, "onesided.json", out, [&](std::ostream& os) { os << summary.dump(2) << "\n"; });
  out << table.str();
  return kOk;
}

inline int cmd_converge(const RunConfig& cfg, std::ostream& out) {
  const auto theta = parse_theta(cfg.theta);
  const auto spec = load_spec(cfg);
  const auto table = convergence_study(theta, spec, cfg.from, cfg.to, cfg.max_q, cfg.jobs);
  write_file(cfg, "convergence.csv", out, [&](std::ostream& os) { write_convergence_csv(os, table); });
  write_convergence_csv(out, table);
  if (!table.all_within_tolerance()) {
    out << "empirical Hausdorff distance exceeds its certified tolerance\n";
    return kCertificate;
  }
  return kOk;
}

// Config file ---------------------------------------------------------------

/// Fills options not given on the command line from a JSON config.
inline void apply_config(RunConfig& cfg, const nlohmann::json& j, const CLI::App& app) {
  const CLI::App* sub = app.get_subcommands().front();
  auto given = [](const CLI::App* a, const char* flag) {
    const CLI::Option* o = a->get_option_no_throw(flag);
    return o != nullptr && o->count() > 0;
  };
  auto unset = [&](const char* flag) { return !given(&app, flag) && !given(sub, flag); };
  try {
    if (j.contains("theta") && unset("--theta")) cfg.theta = j.at("theta").get<std::string>();
    if (j.contains("spec") && unset("--spec") && unset("--spec-file"))
      cfg.spec_json = j.at("spec").is_string() ? j.at("spec").get<std::string>() : j.at("spec").dump();
    if (j.contains("spec_file") && unset("--spec-file") && unset("--spec"))
      cfg.spec_file = j.at("spec_file").get<std::string>();
    if (j.contains("out_dir") && unset("--out-dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("format") && unset("--format")) cfg.format = j.at("format").get<std::string>();
    if (j.contains("jobs") && unset("--jobs")) cfg.jobs = j.at("jobs").get<unsigned>();
    if (j.contains("max_q") && unset("--max-q")) cfg.max_q = j.at("max_q").get<std::int64_t>();
    if (j.contains("terms") && unset("--terms")) cfg.terms = j.at("terms").get<std::size_t>();
    if (j.contains("level") && unset("--level")) cfg.level = j.at("level").get<std::size_t>();
    if (j.contains("epsilon") && unset("--epsilon")) {
      cfg.epsilon = j.at("epsilon").get<double>();
      cfg.epsilon_set = true;
    }
    if (j.contains("grid") && unset("--grid")) cfg.grid = j.at("grid").get<std::size_t>();
    if (j.contains("region") && unset("--region")) cfg.region = j.at("region").get<std::vector<double>>();
    if (j.contains("q_max") && unset("--q-max")) cfg.q_max = j.at("q_max").get<std::int64_t>();
    if (j.contains("n") && unset("--n")) cfg.ns = j.at("n").get<std::vector<std::int64_t>>();
    if (j.contains("from") && unset("--from")) cfg.from = j.at("from").get<std::size_t>();
    if (j.contains("to") && unset("--to")) cfg.to = j.at("to").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

}  // namespace detail

/// Runs one command. `args` excludes the program name. Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  std::string config_path;
  CLI::App app{"Certified spectra and pseudospectra of rotation-algebra operators", "rotspec"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--theta", cfg.theta, "rational:p/q | surd:(a+b*sqrt(d))/c | decimal:digits");
  app.add_option("--spec", cfg.spec_json, "operator spec as inline JSON (default: Almost Mathieu)");
  app.add_option("--spec-file", cfg.spec_file, "operator spec JSON file");
  app.add_option("--out-dir", cfg.out_dir, "output directory");
  app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json", "pgm"}));
  app.add_option("--jobs", cfg.jobs, "worker threads (0 = all cores)");
  app.add_option("--max-q", cfg.max_q, "largest matrix order allowed")->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "JSON config file; flags take precedence");

  auto* expand_cmd = app.add_subcommand("expand", "continued fraction with convergent gaps");
  expand_cmd->add_option("--terms", cfg.terms, "number of partial quotients")->check(CLI::PositiveNumber);

  auto* spectrum_cmd = app.add_subcommand("spectrum", "certified spectrum for normal models");
  spectrum_cmd->add_option("--level,-n", cfg.level, "convergent level n >= 1");

  auto* pseudo_cmd = app.add_subcommand("pseudospectrum", "certified pseudospectrum enclosure on a grid");
  pseudo_cmd->add_option("--level,-n", cfg.level, "convergent level n >= 1");
  pseudo_cmd->add_option("--epsilon", cfg.epsilon, "pseudospectrum level (> 0)");
  pseudo_cmd->add_option("--grid", cfg.grid, "samples per axis")->check(CLI::Range(2, 1 << 14));
  pseudo_cmd->add_option("--region", cfg.region, "re_min,re_max,im_min,im_max")->delimiter(',')->expected(4);

  auto* butterfly_cmd = app.add_subcommand("butterfly", "eigenvalues at every reduced p/q with q <= q_max");
  butterfly_cmd->add_option("--q-max", cfg.q_max, "largest denominator in the sweep");

  auto* onesided_cmd = app.add_subcommand("onesided", "one-sided containment at denominators n");
  onesided_cmd->add_option("--n", cfg.ns, "denominators, comma separated")->delimiter(',');
  onesided_cmd->add_option("--epsilon", cfg.epsilon, "grid level for non-normal models (> 0)");
  onesided_cmd->add_option("--grid", cfg.grid, "samples per axis")->check(CLI::Range(2, 1 << 14));
  onesided_cmd->add_option("--region", cfg.region, "re_min,re_max,im_min,im_max")->delimiter(',')->expected(4);

  auto* converge_cmd = app.add_subcommand("converge", "Hausdorff convergence table against the deepest level");
  converge_cmd->add_option("--from", cfg.from, "first level");
  converge_cmd->add_option("--to", cfg.to, "last level (reference)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  const CLI::Option* eps_opt = sub->get_option_no_throw("--epsilon");
  cfg.epsilon_set = eps_opt != nullptr && eps_opt->count() > 0;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw detail::UsageError("cannot read config " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw detail::UsageError(std::string("config: ") + e.what());
      }
      detail::apply_config(cfg, j, app);
    }
    if (cfg.command == "expand") return detail::cmd_expand(cfg, out);
    if (cfg.command == "spectrum") return detail::cmd_spectrum(cfg, out);
    if (cfg.command == "pseudospectrum") return detail::cmd_pseudospectrum(cfg, out);
    if (cfg.command == "butterfly") return detail::cmd_butterfly(cfg, out);
    if (cfg.command == "onesided") return detail::cmd_onesided(cfg, out);
    if (cfg.command == "converge") return detail::cmd_converge(cfg, out);
    throw detail::UsageError("unknown command " + cfg.command);
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

}  // namespace rotspec::cli
