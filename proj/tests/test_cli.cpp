#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mbc/cli.hpp"
#include "mbc/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mbc;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mbc_test_cli_" + name);
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"check"}).code == kExitUsage);
  CHECK(run({"check", "--example", "3"}).code == kExitUsage);
  CHECK(run({"solve", "--example", "1", "--gamma", "0", "--h", "0.01"}).code == kExitUsage);
  CHECK(run({"solve", "--example", "1", "--gamma", "-1", "--h", "0.01"}).code == kExitUsage);
  CHECK(run({"solve", "--example", "1", "--gamma", "0.1", "--h", "0.3"}).code == kExitUsage);
  CHECK(run({"solve", "--example", "1", "--gamma", "0.1", "--h", "0.01", "--bogus"}).code == kExitUsage);
  CHECK(run({"sweep", "--example", "1", "--gamma-exponents", "9:4", "--h", "0.01", "--out", "x"}).code == kExitUsage);
  CHECK(run({"sweep", "--example", "1", "--gamma-exponents", "4:5", "--h", "1e-6", "--out", "x"}).code == kExitUsage);
  CHECK(run({"reg-estimate", "--example", "1", "--eps", "1e-6:1e-2", "--out", "x"}).code == kExitUsage);
  const auto r = run({"solve", "--bogus"});
  CHECK(r.code == kExitUsage);
  CHECK_FALSE(r.err.empty());
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("check prints the degenerate point of example 2") {
  const auto r = run({"check", "--example", "2"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("min |p_bar'| on threshold level sets: 0 at x = 0.222222") != std::string::npos);
  CHECK(r.out.find("p_bar(0) = 0, p_bar(1) = 0 (exact)") != std::string::npos);
  const auto r1 = run({"check", "--example", "1"});
  CHECK(r1.code == kExitOk);
  CHECK(r1.out.find("classification violations: 0") != std::string::npos);
}

TEST_CASE("solve writes nodal fields") {
  const auto path = temp_path("solve.csv");
  auto r = run({"solve", "--example", "1", "--gamma", "0.0625", "--h", "0.01", "--out", path.string()});
  CHECK(r.code == kExitOk);
  const auto lines = read_lines(path);
  REQUIRE(lines.size() == 102);
  CHECK(lines[0] == "x,u,y,p,lambda");
  CHECK(lines[1].rfind("0,", 0) == 0);
  CHECK(lines.back().rfind("1,", 0) == 0);

  r = run({"solve", "--example", "1", "--gamma", "0.0625", "--h", "0.01"});
  CHECK(r.out.rfind("x,u,y,p,lambda\n", 0) == 0);

  // A single active-set iteration is not enough from the default start.
  r = run({"solve", "--example", "2", "--gamma", "0.0625", "--h", "0.001", "--max-iter", "1"});
  CHECK(r.code == kExitNotConverged);
}

TEST_CASE("sweep and config files") {
  const auto out = temp_path("sweep.csv");
  auto r = run({"sweep", "--example", "1", "--gamma-exponents", "4:14:2", "--h", "1e-4", "--out", out.string()});
  CHECK(r.code == kExitOk);
  auto lines = read_lines(out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == kRateCsvHeader);

  const auto cfg = temp_path("sweep.cfg");
  {
    std::ofstream f(cfg);
    f << "# manifest\nexample = 2\ngamma-exponents = 4:6\nh = 1e-3\nout = " << out.string() << "\nworkers = 2\n";
  }
  r = run({"sweep", "--config", cfg.string()});
  CHECK(r.code == kExitOk);
  lines = read_lines(out);
  CHECK(lines.size() == 4);

  // Flags override the file.
  r = run({"sweep", "--config", cfg.string(), "--gamma-exponents", "4:5"});
  CHECK(r.code == kExitOk);
  CHECK(read_lines(out).size() == 3);

  {
    std::ofstream f(cfg);
    f << "colour = blue\n";
  }
  CHECK(run({"sweep", "--config", cfg.string()}).code == kExitUsage);
  CHECK(run({"check", "--config", temp_path("missing.cfg").string()}).code == kExitUsage);
}

TEST_CASE("reg-estimate") {
  const auto out = temp_path("reg.csv");
  const auto r = run({"reg-estimate", "--example", "1", "--eps", "1e-6:1e-2:8", "--out", out.string()});
  CHECK(r.code == kExitOk);
  const auto lines = read_lines(out);
  REQUIRE(lines.size() == 9);
  CHECK(lines[0] == "epsilon,measure,kappa_fit,c_fit");
}
