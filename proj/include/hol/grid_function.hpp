#pragma once

#include <vector>

#include "hol/extreal.hpp"
#include "hol/weight.hpp"
#include "json.hpp"

namespace hol {

/// Nonnegative step function: values[i] on [breaks[i], breaks[i+1]), zero
/// outside [breaks.front(), breaks.back()). The last breakpoint may be +inf.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<double> breaks, std::vector<double> values, bool decreasing = false);

  static GridFunction constant(double c, double lo = 0.0, double hi = kInf);
  /// Cell values are the cell averages of f (finite breakpoints only).
  static GridFunction average(const RealFn& f, std::vector<double> breaks);
  /// Cell values are f at the geometric (or arithmetic, for a zero end) midpoint.
  static GridFunction sample(const RealFn& f, std::vector<double> breaks);
  static GridFunction from_json(const nlohmann::json& j);

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] std::size_t cells() const { return values_.size(); }
  [[nodiscard]] double lo(std::size_t i) const { return breaks_[i]; }
  [[nodiscard]] double hi(std::size_t i) const { return breaks_[i + 1]; }
  [[nodiscard]] const std::vector<double>& breakpoints() const { return breaks_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] bool decreasing() const { return decreasing_; }
  [[nodiscard]] bool is_zero() const;

  /// Exact integral of f over [a, b].
  [[nodiscard]] double integral(double a, double b) const;
  [[nodiscard]] GridFunction scaled(double c) const;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] RealFn as_function() const;

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
  bool decreasing_ = false;
};

/// Exponents of a weighted inequality L^p_v -> L^r_u with inner mean q.
/// s is given by 1/s = (1/r - 1/p)_+, so s = inf exactly when p <= r.
struct Exponents {
  double p = 2.0;
  double r = 2.0;
  double q = 2.0;

  Exponents() = default;
  Exponents(double p_, double r_, double q_);

  [[nodiscard]] double s() const;
  [[nodiscard]] bool p_le_r() const { return p <= r; }
};

/// (int f^p v)^(1/p) for finite p, ess sup v f for p = inf.
ExtReal lebesgue_norm(const GridFunction& f, double p, const WeightFn& v);

/// The same norm for a callable f over [a, b], by adaptive quadrature
/// (or sampled essential supremum when p = inf).
ExtReal lebesgue_norm_fn(const RealFn& f, double p, const WeightFn& v, double a = 0.0, double b = kInf,
                         const std::vector<double>& breaks = {});

}  // namespace hol
