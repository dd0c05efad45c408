#pragma once

// Boundedness of the Hardy-Littlewood maximal operator between Gamma spaces:
// the four closed-form constants and a direct estimator on the decreasing cone.

#include <string>

#include "hol/oracle.hpp"
#include "json.hpp"

namespace hol {

/// ||M||_{Gamma^p(v) -> Gamma^q(u)}.
struct GammaSetup {
  double p = 2.0;
  double q = 2.0;
  WeightFn u;
  WeightFn v;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct GammaConfig {
  /// Window for suprema over t and range of the V table.
  double x_min = 1e-6;
  double x_max = 1e6;
  int sup_samples = 512;
  int table_points = 4097;
  OracleConfig oracle;

  [[nodiscard]] nlohmann::json to_json() const;
  static GammaConfig from_json(const nlohmann::json& j);
};

/// V(z) = int_0^inf v(y) dy / (y^p + z^p).
ExtReal compute_V(const WeightFn& v, double p, double z);

/// zeta^m(x) for the weight s^-q u(s).
ExtReal zeta_q_map(const WeightFn& u, double q, double x, int m);

/// Throws PreconditionError unless 0 < int_t^inf s^-q u < inf and V is finite
/// on the working window.
void check_setup(const GammaSetup& s, const GammaConfig& cfg = {});

struct MaximalConstants {
  ExtReal A_cal0, A_cal2, A_bf0, A_bf2, total;
  std::string q_branch;  // "p<=q" or "q<p"
  std::string p_branch;  // "p<=1" or "p>1"
  nlohmann::json diagnostics = nlohmann::json::object();

  [[nodiscard]] nlohmann::json to_json() const;
};

MaximalConstants maximal_constants(const GammaSetup& s, const GammaConfig& cfg = {});

/// f**(x) = (1/x) int_0^x f.
ExtReal double_star(const GridFunction& f, double x);

/// LHS / RHS of the restricted inequality
///   (int ((1/x) int_0^x f**)^q u)^(1/q) <= C (int (f**)^p v)^(1/p)
/// for nonincreasing f.
ExtReal direct_min_ratio(const GridFunction& f, const GammaSetup& s);

/// Lower bound for the best C above by ascent on the nonincreasing cone.
NormEstimate estimate_min_constant(const GammaSetup& s, const GammaConfig& cfg = {});

}  // namespace hol
