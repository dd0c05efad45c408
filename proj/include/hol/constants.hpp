#pragma once

// The three-term characterization constants of the eight inequalities:
// two auxiliary best constants (A0, A1) and a localized term A2.

#include <string>
#include <utility>

#include "hol/oracle.hpp"
#include "json.hpp"

namespace hol {

enum class Theorem { T21, T22, T31, T32, T41, T42, T51, T52 };

/// "2.1", "2.2", "3.1", "3.2", "4.1", "4.2", "5.1", "5.2".
Theorem parse_theorem(const std::string& s);
std::string to_string(Theorem t);

/// Operator whose best constant the theorem characterizes.
OpTag theorem_operator(Theorem t);
/// Level maps of u: sigma (cumulative) for sections 2 and 4, zeta (tail) otherwise.
bool sigma_side(Theorem t);

struct TheoremData {
  WeightFn u;
  WeightFn v;
  WeightFn w;
  KernelFn k;
  Exponents e;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct ConstantsConfig {
  OracleConfig oracle;
  /// Settings for the many local norms inside A2.
  OracleConfig local{4, 200, 42, 128, 1e-6, 1e6, 1e-5, 5};
  /// Window of the dyadic levels used by A2.
  double a2_x_min = 1e-4;
  double a2_x_max = 1e4;
  int t_per_cell = 4;
  /// Cap on the number of dyadic levels (linear-in-x levels of fast-decaying
  /// weights would otherwise run to the end of the window).
  int max_levels = 40;
  /// Log-grid points on which composite weights are tabulated.
  int table_points = 2049;
  /// Report the lower Muckenhoupt bound instead of running the oracle when
  /// the auxiliary inequality is a kernel-free Hardy inequality with p = r.
  bool muckenhoupt_fast_path = false;

  [[nodiscard]] nlohmann::json to_json() const;
  static ConstantsConfig from_json(const nlohmann::json& j);
};

struct TermResult {
  ExtReal value;
  std::string method;  // oracle, closed-form or quadrature
  nlohmann::json diagnostics = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;
};

struct ConstantBreakdown {
  std::string theorem;
  std::string regime;  // "p<=r" or "r<p"
  std::string q_mode;  // "finite" or "ess-sup"
  /// "sum" for A0 + A1 + A2; "p=inf" and "r=inf" replace the sum by a single value.
  std::string mode = "sum";
  TermResult A0, A1, A2;
  ExtReal total;
  nlohmann::json diagnostics = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;
};

/// The auxiliary inequality behind A0 (which = 0) or A1 (which = 1), as a form
/// over f with composite weights tabulated on a log grid.
FormSpec auxiliary_form(Theorem t, int which, const TheoremData& d, const ConstantsConfig& cfg);

std::pair<TermResult, TermResult> compute_A0_A1(Theorem t, const TheoremData& d, const ConstantsConfig& cfg);
TermResult compute_A2(Theorem t, const TheoremData& d, const ConstantsConfig& cfg);
ConstantBreakdown compute_breakdown(Theorem t, const TheoremData& d, const ConstantsConfig& cfg);

/// ||Op(1/v)||_{L^r_u}, the exact constant when p = inf.
ExtReal reciprocal_weight_value(Theorem t, const TheoremData& d);

/// The inequality ||Op f||_{L^r_u} <= C ||f||_{L^p_v} itself.
InequalitySpec parent_inequality(Theorem t, const TheoremData& d);

}  // namespace hol
