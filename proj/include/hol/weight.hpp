#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hol/extreal.hpp"
#include "hol/quadrature.hpp"
#include "json.hpp"

namespace hol {

using RealFn = std::function<double(double)>;

/// coef * x^alpha * exp(-beta x) restricted to [lo, hi).
struct PowerExpTerm {
  double coef = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double lo = 0.0;
  double hi = kInf;

  [[nodiscard]] double operator()(double x) const;
  /// Integral over [a, b] intersected with [lo, hi); closed form where one exists.
  [[nodiscard]] double integral(double a, double b) const;
};

/// Nonnegative weight on [0, inf).
///
/// Preset weights (power, exponential, indicator, grid tables and their
/// finite sums and products) are held as a sum of PowerExpTerm so integrals
/// have closed forms. Arbitrary callables are accepted through custom() and
/// are integrated by adaptive quadrature.
class WeightFn {
 public:
  WeightFn();  // identically one

  static WeightFn constant(double c);
  static WeightFn power(double alpha, double lo = 0.0, double hi = kInf);
  static WeightFn exponential(double beta);
  static WeightFn indicator(double a, double b);
  /// Cell i holds values[i] * x^exponents[i] on [breaks[i], breaks[i+1]).
  static WeightFn grid(const std::vector<double>& breaks, const std::vector<double>& values,
                       const std::vector<double>& exponents = {});
  static WeightFn product(const std::vector<WeightFn>& factors);
  static WeightFn sum(const std::vector<WeightFn>& terms);
  static WeightFn custom(RealFn fn, std::string name, std::vector<double> breakpoints = {});

  static WeightFn from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const { return spec_; }

  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] ExtReal integrate(double a, double b) const;
  /// Cumulative integral over [0, x].
  [[nodiscard]] double cumulative(double x) const { return integrate(0.0, x).value(); }
  /// Tail integral over [x, inf).
  [[nodiscard]] double tail(double x) const { return integrate(x, kInf).value(); }

  [[nodiscard]] WeightFn scaled(double c) const;
  /// Pointwise reciprocal with 1/0 = inf; exact for single-term presets.
  [[nodiscard]] WeightFn reciprocal() const;

  [[nodiscard]] bool is_closed_form() const { return !custom_; }
  [[nodiscard]] bool is_zero() const;
  [[nodiscard]] const std::vector<PowerExpTerm>& terms() const { return terms_; }
  /// Points where the weight may jump or change formula.
  [[nodiscard]] std::vector<double> breakpoints() const;
  [[nodiscard]] std::string describe() const { return spec_.dump(); }
  [[nodiscard]] RealFn as_function() const;

 private:
  std::vector<PowerExpTerm> terms_;
  std::shared_ptr<const RealFn> custom_;
  std::vector<double> custom_breaks_;
  nlohmann::json spec_;
};

/// Integral of w over [a, b], 0 <= a <= b <= inf. Divergence gives +inf.
ExtReal integrate(const WeightFn& w, ExtReal a, ExtReal b);

/// Essential supremum of a weight over [a, b]; 0 for an empty interval.
ExtReal ess_sup(const WeightFn& w, ExtReal a, ExtReal b);

/// Essential supremum of a callable over [a, b], sampled on a log grid of
/// `samples` points with golden-section refinement around the grid maximum.
double ess_sup_fn(const RealFn& f, double a, double b, const std::vector<double>& breaks = {},
                  int samples = 2048);

}  // namespace hol
