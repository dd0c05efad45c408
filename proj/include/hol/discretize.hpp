#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hol/extreal.hpp"
#include "hol/weight.hpp"
#include "json.hpp"

namespace hol {

/// inf{y > 0 : int_0^y u >= level}, inf of the empty set being +inf.
double level_point(const WeightFn& u, double level);
/// sup{y > 0 : int_y^inf u >= level}, sup of the empty set being 0.
double tail_level_point(const WeightFn& u, double level);

/// sigma^m(x): sigma doubles the cumulative integral of u, sigma^-1 halves it.
/// Once an iterate is +inf the result stays +inf.
ExtReal sigma_map(const WeightFn& u, double x, int m);
/// zeta^m(x): zeta halves the tail integral of u, zeta^-1 doubles it.
ExtReal zeta_map(const WeightFn& u, double x, int m);

/// Throws PreconditionError unless int_0^t u < inf for t > 0 (checked at t).
void require_locally_integrable(const WeightFn& u, double t = 1.0);
/// Throws PreconditionError unless 0 < int_t^inf u < inf (checked at t and at
/// large arguments).
void require_tail_finite_positive(const WeightFn& u, double t = 1.0);

/// Dyadic level points a_n. On the cumulative side int_0^{a_n} u = 2^n; on the
/// tail side int_{a_n}^inf u = 2^-n. Either way a_n increases with n.
struct Discretization {
  int n0 = 0;
  int N = 0;
  /// True when the levels stop for a mathematical reason (a_{N+1} = inf, or
  /// a_{N+1} = 0 below on the tail side) rather than at the window edge.
  bool N_finite = false;
  bool tail_side = false;
  std::map<int, double> a;
  WeightFn u_ref;

  [[nodiscard]] double at(int n) const { return a.at(n); }
  [[nodiscard]] std::vector<double> finite_points() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Levels of int_0^x u with n0 chosen so a_{n0} is the first level point at
/// or above x_min; stops after the first point beyond x_max or at a_{N+1} = inf.
Discretization dyadic_sequence(const WeightFn& u, double x_min = 1e-6, double x_max = 1e6,
                               std::optional<int> n0 = std::nullopt);
/// Levels of int_x^inf u, anchored the same way.
Discretization tail_dyadic_sequence(const WeightFn& u, double x_min = 1e-6, double x_max = 1e6,
                                    std::optional<int> n0 = std::nullopt);

struct DyadicSum {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// lhs = sum_n 2^n (sum_{i>=n} lambda_i)^s (or sup_{i>=n} lambda_i when
/// use_sup), rhs = sum_n 2^n lambda_n^s; lambda is finitely supported.
DyadicSum dyadic_sum_ratio(const std::map<int, double>& lambda, double s, bool use_sup = false);

}  // namespace hol
