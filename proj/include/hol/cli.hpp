#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace hol {

/// Every setting of the command line in one place. Defaults are overridden by
/// the key=value file named in HOL_CONFIG, which is overridden by flags.
struct CliOptions {
  std::string theorem = "2.1";
  std::string kernel = "indicator";
  std::string u = "exp";
  std::string v = "one";
  std::string w = "exp";
  std::string p = "2";
  std::string r = "2";
  std::string q = "2";
  int grid_points = 512;
  double xmin = 1e-6;
  double xmax = 1e6;
  std::uint64_t seed = 42;
  int restarts = 16;
  double band_lo = 1.0 / 16.0;
  double band_hi = 4.0;
  std::string out;
  std::string suite = "all";
  std::string preset = "all";
  // sweep: v.alpha, u.alpha, w.alpha (the base weight times x^value), p, r or q
  std::string param = "v.alpha";
  double start = -0.5;
  double stop = 0.5;
  int count = 5;
  bool estimate = false;

  /// Applies one key=value setting; keys are the flag names without dashes.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Exit codes of run_cli.
enum CliExit { kExitOk = 0, kExitUsage = 1, kExitPrecondition = 2, kExitFail = 3, kExitNumeric = 4 };

/// Runs one subcommand (constants, oracle, maximal, verify, sweep); args
/// exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hol
