#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hol/cli.hpp"
#include "json.hpp"

using namespace hol;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hol_cli_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"maximal", "--bogus", "1"}).code == kExitUsage);
  // --w belongs to the theorem commands only
  CHECK(run({"maximal", "--w", "exp"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("precondition errors exit 2") {
  CHECK(run({"constants", "--p", "0.5"}).code == kExitPrecondition);
  CHECK(run({"constants", "--u", "no-such-weight"}).code == kExitPrecondition);
  CHECK(run({"constants", "--theorem", "6.1"}).code == kExitPrecondition);
  CHECK(run({"maximal", "--p", "1", "--q", "2", "--u", "one", "--v", "one"}).code == kExitPrecondition);
  CHECK(run({"sweep", "--count", "0"}).code == kExitPrecondition);
  CHECK(run({"verify", "--suite", "nope"}).code == kExitPrecondition);
  CHECK(run({"verify", "--suite", "levels", "--preset", "nope"}).code == kExitPrecondition);
}

TEST_CASE("maximal example") {
  const auto r = run({"maximal", "--p", "2", "--q", "2", "--u", "one", "--v", "one"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("result").at("total").get<double>() == doctest::Approx(2.9467).epsilon(1e-3));
  CHECK(j.at("options").at("p") == "2");
  CHECK(j.at("config").at("x_max").get<double>() == 1e6);
}

TEST_CASE("levels suite example") {
  const auto r = run({"verify", "--suite", "levels", "--preset", "exp"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.rfind("PASS levels", 0) == 0);
}

TEST_CASE("a failing suite exits 3") {
  // four cells cannot approach the Hardy constant
  const auto r = run({"verify", "--suite", "hardy", "--grid-points", "4", "--restarts", "2"});
  CHECK(r.code == kExitFail);
  CHECK(r.out.rfind("FAIL hardy", 0) == 0);
}

TEST_CASE("constants example: A0 = A1 for the indicator kernel with r = q") {
  const auto r = run({"constants", "--theorem", "2.1", "--kernel", "indicator", "--u", "exp", "--w", "exp", "--v", "one",
                      "--p", "2", "--r", "2", "--q", "2", "--grid-points", "128", "--restarts", "4"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out).at("result");
  CHECK(j.at("A0").at("value").get<double>() == doctest::Approx(j.at("A1").at("value").get<double>()).epsilon(1e-5));
  CHECK(j.at("theorem") == "2.1");
}

TEST_CASE("identical flags give identical bytes") {
  const std::vector<std::string> a = {"oracle", "--theorem", "3.1", "--grid-points", "64", "--restarts", "3", "--seed", "5"};
  const auto r1 = run(a), r2 = run(a);
  REQUIRE(r1.code == kExitOk);
  CHECK(r1.out == r2.out);
}

TEST_CASE("config file sits between defaults and flags") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  const auto cfg = dir / "hol.conf";
  {
    std::ofstream f(cfg);
    f << "# settings\nseed = 7\nband-hi = 3.5\n\nrestarts=2\n";
  }
  ::setenv("HOL_CONFIG", cfg.c_str(), 1);
  const auto out = dir / "art";
  const auto r = run({"verify", "--suite", "dyadic-sum", "--seed", "9", "--out", out.string()});
  CHECK(r.code == kExitOk);
  const auto j = read_json(out / "verify.json");
  CHECK(j.at("options").at("seed") == 9);
  CHECK(j.at("options").at("band-hi") == 3.5);
  CHECK(j.at("options").at("restarts") == 2);
  CHECK(j.at("config").at("seed") == 9);
  {
    std::ofstream f(cfg);
    f << "colour = blue\n";
  }
  CHECK(run({"verify", "--suite", "oinarov"}).code == kExitPrecondition);
  ::unsetenv("HOL_CONFIG");
  fs::remove_all(dir);
}

TEST_CASE("sweep CSV schema and ordering") {
  const auto out = scratch("sweep");
  const auto r = run({"sweep", "--param", "v.alpha", "--start", "0.5", "--stop", "0", "--count", "2", "--grid-points",
                      "64", "--restarts", "2", "--out", out.string()});
  REQUIRE((r.code == kExitOk || r.code == kExitFail));
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "sweep_value,A0,A1,A2,total,oracle,ratio,pass");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rfind("0.5,", 0) == 0);
  CHECK(rows[1].rfind("0,", 0) == 0);
  std::ifstream csv(out / "sweep.csv");
  std::stringstream buf;
  buf << csv.rdbuf();
  CHECK(buf.str() == r.out);
  const auto j = read_json(out / "sweep.json");
  CHECK(j.at("points").size() == 2);
  fs::remove_all(out);
}
