#pragma once

// Runnable verification suites: each checks one family of identities or
// equivalences and returns a JSON report free of timings, so two runs with
// the same seed give identical reports.

#include <string>
#include <vector>

#include "hol/constants.hpp"
#include "hol/gammamax.hpp"
#include "json.hpp"

namespace hol {

/// Weight presets: "one", "sqrt" (x^1/2), "exp" (e^-x), "chi01" (indicator of
/// [0, 1]), "x^a" for a power, an inline JSON object, or a path to a JSON file.
WeightFn weight_preset(const std::string& name);
/// Kernel presets: "indicator", "difference" (x - y), "difference^b",
/// "log_ratio", an inline JSON object or a path to a JSON file.
KernelFn kernel_preset(const std::string& name);
/// Names accepted by the levels suite.
std::vector<std::string> level_preset_names();

struct VerifyConfig {
  std::uint64_t seed = 42;
  double band_lo = 1.0 / 16.0;
  double band_hi = 4.0;
  /// Largest max/min of the oracle/total ratio across a sweep.
  double spread_max = 16.0;
  /// "all" or one name from level_preset_names().
  std::string preset = "all";
  ConstantsConfig constants;
  GammaConfig gamma;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::json report = nlohmann::json::object();
};

/// One point of an equivalence sweep: the theorem's constants against the
/// oracle's best-constant estimate for the parent inequality.
struct EquivalencePoint {
  ConstantBreakdown breakdown;
  NormEstimate oracle;
  EquivalenceReport report;

  [[nodiscard]] nlohmann::json to_json() const;
};

EquivalencePoint equivalence_point(Theorem t, const TheoremData& d, const ConstantsConfig& cfg, double band_lo,
                                   double band_hi);

/// levels, dyadic-sum, oinarov, hardy, p-inf, bracket, gamma, min, bands.
std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, const VerifyConfig& cfg);

}  // namespace hol
