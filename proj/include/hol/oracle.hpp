#pragma once

// Lower-bound estimation of best constants by direct maximization of
// ||Op f|| / ||f|| over nonnegative step functions.

#include <cstdint>
#include <optional>
#include <vector>

#include "hol/form.hpp"
#include "hol/operators.hpp"
#include "json.hpp"

namespace hol {

struct OracleConfig {
  int restarts = 16;
  int max_iter = 500;
  std::uint64_t seed = 42;
  int grid_points = 512;
  double x_min = 1e-6;
  double x_max = 1e6;
  double stop_tol = 1e-5;
  int stop_window = 5;

  [[nodiscard]] nlohmann::json to_json() const;
  /// Reads the oracle.* keys; anything missing keeps its default.
  static OracleConfig from_json(const nlohmann::json& j);
};

struct NormEstimate {
  ExtReal value;
  GridFunction witness;
  int restarts_used = 0;
  bool converged = false;
  std::vector<double> history;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// ||Op f||_{L^r_u} <= C ||f||_{L^p_v}.
struct InequalitySpec {
  OperatorKind op;
  double p = 2.0;
  WeightFn v;
  double r = 2.0;
  WeightFn u;
};

/// Target space L^q_weight of a localized norm; the weight may depend on the
/// window (kernel sections such as w(.) k(., t)).
struct LocalTarget {
  double q = 2.0;
  RealFn weight;
  std::vector<double> breaks;

  static LocalTarget of(double q, const WeightFn& w);
};

/// A ratio num(f) / den(f) on a common mesh; den defaults to the source
/// norm of num.
struct RatioProblem {
  const Form* num = nullptr;
  const Form* den = nullptr;
  bool decreasing = false;

  [[nodiscard]] double ratio(const std::vector<double>& f) const;
};

/// Multi-start ascent on a ratio problem.
NormEstimate maximize_ratio(const RatioProblem& prob, const OracleConfig& cfg);

FormSpec operator_form(const InequalitySpec& spec, const OracleConfig& cfg);
NormEstimate best_constant(const InequalitySpec& spec, const OracleConfig& cfg);

FormSpec local_form(const LocalOpSpec& op, double p, const WeightFn& v, const LocalTarget& target,
                    const OracleConfig& cfg);
NormEstimate local_norm(const LocalOpSpec& op, double p, const WeightFn& v, const LocalTarget& target,
                        const OracleConfig& cfg);

/// Ratio of a stored witness, recomputed on a fresh form.
ExtReal witness_ratio(const Form& form, const GridFunction& witness);

struct EquivalenceReport {
  double ratio = 0.0;
  bool pass = false;
  double band_lo = 1.0 / 16.0;
  double band_hi = 4.0;
  std::string dominant;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// oracle / total against [band_lo, band_hi]; terms are (name, value) pairs
/// used to report the dominant one. Throws DiagnosticError when the total
/// vanishes but the oracle does not.
EquivalenceReport equivalence_report(ExtReal oracle_value, ExtReal total,
                                     const std::vector<std::pair<std::string, ExtReal>>& terms,
                                     double band_lo = 1.0 / 16.0, double band_hi = 4.0);

/// Pool adjacent violators: the nonincreasing sequence closest to y in the
/// weighted least-squares sense.
std::vector<double> pav_decreasing(const std::vector<double>& y, const std::vector<double>& w);

}  // namespace hol
