#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rotspec/cli.hpp"

namespace fs = std::filesystem;
using namespace rotspec;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotspec_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(CliExpand, GoldenTable) {
  const auto r = run_cli({"expand", "--theta", "surd:(-1+1*sqrt(5))/2", "--terms", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 10u);  // header, 8 rows, footer
  EXPECT_EQ(ls[0], "k,a_k,p_k,q_k,gap,bound,certified");
  for (std::size_t k = 1; k <= 8; ++k) EXPECT_NE(ls[k].find(",yes"), std::string::npos) << ls[k];
  EXPECT_EQ(ls[5].substr(0, 9), "5,1,5,8,0");
}

TEST(CliExpand, RationalTerminates) {
  const auto r = run_cli({"expand", "--theta", "rational:7/10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[3], "3,3,7,10,0,,exact");
  EXPECT_NE(ls[4].find("terminating"), std::string::npos);
}

TEST(CliExpand, DecimalHalfNeedsPrecision) {
  // one decimal digit cannot certify the first quotient of 0.5
  EXPECT_EQ(run_cli({"expand", "--theta", "decimal:0.5", "--terms", "1"}).code, 3);
  EXPECT_EQ(run_cli({"expand", "--theta", "decimal:0.500000", "--terms", "1"}).code, 3);
  const auto r = run_cli({"expand", "--theta", "decimal:0.45", "--terms", "1", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["rows"][0]["a"], "2");
}

TEST(CliExpand, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  EXPECT_EQ(run_cli({"expand", "--terms", "0"}).code, 2);
  EXPECT_EQ(run_cli({"expand", "--format", "xml"}).code, 2);
  EXPECT_EQ(run_cli({"expand", "--theta", "nonsense"}).code, 3);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(CliSpectrum, AlmostMathieu) {
  const auto dir = fresh_dir("spectrum");
  const auto r = run_cli({"spectrum", "--level", "5", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cloud = lines(slurp(dir / "cloud.csv"));
  ASSERT_EQ(cloud.size(), 14u);
  EXPECT_EQ(cloud[0], "re,im");
  const auto cert = nlohmann::json::parse(slurp(dir / "certificate.json"));
  EXPECT_NEAR(cert["epsilon_sharp"].get<double>(), 21.508424942930493, 1e-12);
  EXPECT_EQ(cert["cloud"].size(), 13u);
  // cloud CSV round-trips bit-exactly at 17 digits
  for (std::size_t k = 0; k < 13; ++k) {
    const auto& line = cloud[k + 1];
    const double re = std::stod(line.substr(0, line.find(',')));
    EXPECT_EQ(re, cert["cloud"][k][0].get<double>());
  }
}

TEST(CliSpectrum, UOnlyOnUnitCircle) {
  const auto dir = fresh_dir("spectrum_u");
  const auto r = run_cli({"spectrum", "--spec", R"({"canonical": {"a+": [1, 0]}})", "--level", "6", "--out-dir",
                          dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cloud = lines(slurp(dir / "cloud.csv"));
  ASSERT_EQ(cloud.size(), 1u + 8u + 13u);
  for (std::size_t k = 1; k < cloud.size(); ++k) {
    const auto comma = cloud[k].find(',');
    const Complex z{std::stod(cloud[k].substr(0, comma)), std::stod(cloud[k].substr(comma + 1))};
    EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
  }
}

TEST(CliSpectrum, ErrorCodes) {
  const auto dir = fresh_dir("spectrum_err");
  EXPECT_EQ(run_cli({"spectrum", "--theta", "rational:3/5", "--out-dir", dir.string()}).code, 3);
  const auto nn = run_cli({"spectrum", "--spec", R"({"canonical": {"a+": [1, 0], "b+": [2, 0]}})", "--out-dir",
                           dir.string()});
  EXPECT_EQ(nn.code, 3);
  EXPECT_NE(nn.err.find("pseudospectrum"), std::string::npos);
  EXPECT_EQ(run_cli({"spectrum", "--spec", "{not json", "--out-dir", dir.string()}).code, 3);
  EXPECT_EQ(run_cli({"spectrum", "--level", "14", "--max-q", "100", "--out-dir", dir.string()}).code, 3);
}

TEST(CliPseudospectrum, GridsAndReport) {
  const auto dir = fresh_dir("pseudo");
  const auto r = run_cli({"pseudospectrum", "--epsilon", "0.5", "--grid", "24", "--level", "4", "--format", "pgm",
                          "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"grid_prev.csv", "grid_curr.csv", "grid_prev.pgm", "grid_curr.pgm", "report.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(lines(slurp(dir / "grid_prev.csv")).size(), 1u + 24u * 24u);
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_TRUE(rep["inner_subset_outer"].get<bool>());
  EXPECT_LE(rep["inner_count"].get<int>(), rep["outer_count"].get<int>());
}

TEST(CliPseudospectrum, EpsilonAndGeneralSpec) {
  const auto dir = fresh_dir("pseudo_general");
  EXPECT_EQ(run_cli({"pseudospectrum", "--epsilon", "0", "--out-dir", dir.string()}).code, 2);
  EXPECT_EQ(run_cli({"pseudospectrum", "--epsilon", "-1", "--out-dir", dir.string()}).code, 2);
  const auto r = run_cli({"pseudospectrum", "--spec", R"({"terms": [{"u": 1, "v": 1, "re": 1}, {"u": 0, "v": 1, "re": 2}]})",
                          "--epsilon", "0.3", "--grid", "12", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_TRUE(rep["certificate"]["rate_only"].get<bool>());
  // U + 2V is a four-term spec: full constants even though it is not normal
  const auto c = run_cli({"pseudospectrum", "--spec", R"({"canonical": {"a+": [1, 0], "b+": [2, 0]}})", "--epsilon",
                          "0.3", "--grid", "12", "--out-dir", dir.string()});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_FALSE(nlohmann::json::parse(slurp(dir / "report.json"))["certificate"]["rate_only"].get<bool>());
}

TEST(CliPseudospectrum, JobsByteIdentical) {
  const auto d1 = fresh_dir("jobs1"), d8 = fresh_dir("jobs8");
  std::vector<std::string> base{"pseudospectrum", "--epsilon", "0.25", "--grid", "40", "--level", "6"};
  auto a1 = base, a8 = base;
  a1.insert(a1.end(), {"--jobs", "1", "--out-dir", d1.string()});
  a8.insert(a8.end(), {"--jobs", "8", "--out-dir", d8.string()});
  ASSERT_EQ(run_cli(a1).code, 0);
  ASSERT_EQ(run_cli(a8).code, 0);
  EXPECT_EQ(slurp(d1 / "grid_prev.csv"), slurp(d8 / "grid_prev.csv"));
  EXPECT_EQ(slurp(d1 / "grid_curr.csv"), slurp(d8 / "grid_curr.csv"));
}

TEST(CliButterfly, RowCounts) {
  const auto dir = fresh_dir("butterfly");
  ASSERT_EQ(run_cli({"butterfly", "--q-max", "20", "--out-dir", dir.string()}).code, 0);
  const auto ls = lines(slurp(dir / "butterfly.csv"));
  std::size_t want = 0;
  for (int q = 1; q <= 20; ++q)
    for (int p = 0; p < q; ++p)
      if (std::gcd(p, q) == 1) want += q;
  EXPECT_EQ(ls.size(), 1u + want);
  for (std::size_t k = 1; k < ls.size(); ++k) {
    const double v = std::stod(ls[k].substr(ls[k].rfind(',') + 1));
    EXPECT_LE(std::abs(v), 4.0 + 1e-12);
  }

  ASSERT_EQ(run_cli({"butterfly", "--q-max", "2", "--out-dir", dir.string()}).code, 0);
  const auto two = lines(slurp(dir / "butterfly.csv"));
  ASSERT_EQ(two.size(), 4u);
  EXPECT_EQ(two[1], "0,1,4");
  EXPECT_NEAR(std::stod(two[2].substr(4)), -2 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(std::stod(two[3].substr(4)), 2 * std::sqrt(2.0), 1e-14);

  ASSERT_EQ(run_cli({"butterfly", "--q-max", "3", "--spec", R"({"canonical": {"a+": [1, 0], "a-": [2, 0], "b+": [3, 0], "b-": [3, 0]}})",
                     "--out-dir", dir.string()}).code, 3);  // not Hermitian
  ASSERT_EQ(run_cli({"butterfly", "--q-max", "1", "--spec", R"({"canonical": {"a+": [1, 0], "a-": [1, 0], "b+": [3, 0], "b-": [3, 0]}})",
                     "--out-dir", dir.string()}).code, 0);
  EXPECT_EQ(lines(slurp(dir / "butterfly.csv"))[1], "0,1,8");
}

TEST(CliButterfly, JobsIndependent) {
  const auto d1 = fresh_dir("bf1"), d4 = fresh_dir("bf4");
  ASSERT_EQ(run_cli({"butterfly", "--q-max", "15", "--jobs", "1", "--out-dir", d1.string()}).code, 0);
  ASSERT_EQ(run_cli({"butterfly", "--q-max", "15", "--jobs", "4", "--out-dir", d4.string()}).code, 0);
  EXPECT_EQ(slurp(d1 / "butterfly.csv"), slurp(d4 / "butterfly.csv"));
}

TEST(CliOnesided, Radii) {
  const auto dir = fresh_dir("onesided");
  const auto r = run_cli({"onesided", "--n", "1,10,100,1000", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(slurp(dir / "onesided.csv"));
  ASSERT_EQ(ls.size(), 5u);
  const double c1 = 36 * std::sqrt(3 * std::numbers::pi);
  const double n[] = {1, 10, 100, 1000};
  for (int k = 0; k < 4; ++k) {
    const double radius = std::stod(ls[k + 1].substr(ls[k + 1].rfind(',') + 1));
    EXPECT_NEAR(radius, c1 / std::sqrt(n[k]), 1e-9);
  }
  EXPECT_TRUE(fs::exists(dir / "onesided_n1000.csv"));
  const auto zero = run_cli({"onesided", "--n", "10", "--spec", R"({"canonical": {"a+": [0, 0]}})", "--out-dir",
                             dir.string()});
  ASSERT_EQ(zero.code, 0) << zero.err;
  EXPECT_EQ(lines(slurp(dir / "onesided.csv"))[1].substr(lines(slurp(dir / "onesided.csv"))[1].rfind(',') + 1), "0");
}

TEST(CliConverge, TableAndBudget) {
  const auto dir = fresh_dir("converge");
  const auto r = run_cli({"converge", "--from", "3", "--to", "9", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(slurp(dir / "convergence.csv"));
  ASSERT_EQ(ls.size(), 8u);
  EXPECT_EQ(ls[0], "n,q_prev,q_curr,epsilon_sharp,epsilon_clean,empirical_dH");
  EXPECT_EQ(ls[7].substr(ls[7].rfind(',') + 1), "0");
  EXPECT_EQ(run_cli({"converge", "--from", "3", "--to", "15", "--max-q", "300", "--out-dir", dir.string()}).code, 3);
  const auto single = run_cli({"converge", "--from", "5", "--to", "5", "--out-dir", dir.string()});
  ASSERT_EQ(single.code, 0);
  EXPECT_EQ(lines(slurp(dir / "convergence.csv")).size(), 2u);
}

TEST(CliConfig, PrecedenceFlagsOverConfig) {
  const auto dir = fresh_dir("config");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"theta": "rational:7/10", "terms": 2, "out_dir": ")" << (dir / "out").string() << R"("})";
  }
  const auto r = run_cli({"expand", "--config", (dir / "cfg.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).size(), 4u);  // two rows from the config
  const auto f = run_cli({"expand", "--config", (dir / "cfg.json").string(), "--terms", "3"});
  EXPECT_EQ(lines(f.out).size(), 5u);  // flag wins
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << "{oops";
  }
  EXPECT_EQ(run_cli({"expand", "--config", (dir / "bad.json").string()}).code, 2);
  EXPECT_EQ(run_cli({"expand", "--config", (dir / "missing.json").string()}).code, 2);
}

TEST(CliBinary, ExitCodeFromProcess) {
  const char* exe = std::getenv("ROTSPEC_CLI");
  if (!exe) GTEST_SKIP() << "ROTSPEC_CLI not set";
  const std::string cmd = std::string(exe) + " expand --theta rational:3/2 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 3);
  const int ok = std::system((std::string(exe) + " expand --terms 3 > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(ok), 0);
}
