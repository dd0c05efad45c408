#pragma once

// Pointwise evaluation of the eight quasilinear operators and of the
// localized operators built from them, by nested adaptive quadrature.

#include <string>

#include "hol/extreal.hpp"
#include "hol/grid_function.hpp"
#include "hol/kernels.hpp"
#include "hol/weight.hpp"

namespace hol {

enum class OpTag { T, calT, S, calS, boldT, frakT, boldS, frakS };

OpTag parse_op_tag(const std::string& s);
std::string to_string(OpTag t);

struct OperatorKind {
  OpTag tag = OpTag::T;
  double q = 1.0;  // inf selects the ess sup form
  WeightFn w;
  KernelFn k;

  /// Outer integration runs over [x, inf) (true) or [0, x] (false).
  [[nodiscard]] bool outer_upper() const;
  /// Inner integral runs over [0, y] (true) or [y, inf) (false).
  [[nodiscard]] bool inner_lower() const;
  /// The kernel sits in the inner integral (T, calT, S, calS) rather than the outer weight.
  [[nodiscard]] bool kernel_inside() const;
};

/// (Op f)(x); +inf when the outer integral diverges.
ExtReal apply_operator(const OperatorKind& op, const GridFunction& f, double x);

enum class LocalFamily { H, Hstar, calH, calHstar, boldH, boldHstar, frakH, frakHstar };

LocalFamily parse_local_family(const std::string& s);
std::string to_string(LocalFamily f);

/// A localized operator. The one-parameter form has window [t, inf) on the
/// sigma side (H, Hstar, boldH, boldHstar) and (0, t] on the zeta side; the
/// two-parameter form has window [c, d) or (c, d] and shifts the free
/// inner endpoint through sigma or zeta of u.
struct LocalOpSpec {
  LocalFamily family = LocalFamily::H;
  bool single = true;
  double t = 0.0;
  double c = 0.0;
  double d = kInf;
  WeightFn u;
  KernelFn k;

  static LocalOpSpec at(LocalFamily family, double t, KernelFn k = KernelFn());
  static LocalOpSpec window(LocalFamily family, double c, double d, WeightFn u, KernelFn k = KernelFn());

  [[nodiscard]] bool sigma_side() const;
  [[nodiscard]] bool has_kernel() const;
  /// Inner integral runs from a fixed endpoint up to x (true) or from x up to it.
  [[nodiscard]] bool up_to_x() const;
};

/// Resolved geometry of a localized operator: x in the window, inner
/// integral over [endpoint, x] or [x, endpoint].
struct LocalShape {
  double win_lo = 0.0;
  double win_hi = kInf;
  bool left_closed = true;  // [lo, hi) when true, (lo, hi] otherwise
  bool up_to_x = true;
  double endpoint = 0.0;
  bool kernel = true;

  [[nodiscard]] bool contains(double x) const;
  [[nodiscard]] bool empty() const { return !(win_hi > win_lo); }
};

LocalShape local_shape(const LocalOpSpec& spec);

ExtReal apply_local(const LocalOpSpec& spec, const GridFunction& f, double x);

}  // namespace hol
