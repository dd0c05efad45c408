#include "hol/discretize.hpp"

#include <cmath>

namespace hol {

namespace {

// Smallest point where switched(val(y)) turns from false to true for a
// monotone val, given it is false at lo and true at hi. Returns the bracket.
template <class P, class G>
std::pair<double, double> bisect_switch(const P& switched, const G& val, double lo, double hi) {
  // Illinois steps on val; switched(val) alone decides which end moves, so
  // flat stretches resolve as plain bisection would
  double vlo = val(lo), vhi = val(hi);
  int side = 0;
  for (int it = 0; it < 400; ++it) {
    if (hi - lo <= 1e-14 * hi) break;
    double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (std::isfinite(vlo) && std::isfinite(vhi) && vlo < 0.0 && vhi > 0.0) {
      const double s = lo + (hi - lo) * (-vlo / (vhi - vlo));
      if (s > lo && s < hi) mid = s;
    }
    if (!(mid > lo && mid < hi)) break;
    const double vm = val(mid);
    if (switched(vm)) {
      hi = mid;
      vhi = vm;
      if (side == 1) vlo *= 0.5;
      side = 1;
    } else {
      lo = mid;
      vlo = vm;
      if (side == -1) vhi *= 0.5;
      side = -1;
    }
  }
  return {lo, hi};
}

bool positive_far_tail(const WeightFn& u) {
  if (!u.is_closed_form()) return u.integrate(1e12, kInf).value() > 0.0;
  for (const auto& term : u.terms()) {
    if (std::isinf(term.hi) && term.coef > 0.0) return true;
  }
  return false;
}

}  // namespace

double level_point(const WeightFn& u, double level) {
  if (level <= 0.0) return 0.0;
  const double total = u.integrate(0.0, kInf).value();
  if (total < level) return kInf;
  // a total mass spread to infinity is never attained at a finite point
  if (std::isfinite(total) && level >= total * (1.0 - 1e-13) && positive_far_tail(u)) return kInf;
  auto mass = [&](double y) { return std::log(u.integrate(0.0, y).value() / level); };
  auto reached = [&](double y) { return mass(y) >= 0.0; };
  auto hit = [](double m) { return m >= 0.0; };
  double hi = 1.0;
  while (!reached(hi)) {
    hi *= 4.0;
    if (hi > 1e300) return kInf;
  }
  double lo = hi;
  while (lo > 1e-300 && reached(lo)) lo *= 0.25;
  if (reached(lo)) return 0.0;
  return bisect_switch(hit, mass, lo, std::min(hi, 4.0 * lo)).second;
}

double tail_level_point(const WeightFn& u, double level) {
  if (level <= 0.0) return kInf;
  if (u.integrate(0.0, kInf).value() < level) return 0.0;
  // below[y] is true once the tail has dropped under the level
  auto gap = [&](double y) { return std::log(level / u.integrate(y, kInf).value()); };
  auto below = [&](double y) { return gap(y) > 0.0; };
  auto under = [](double g) { return g > 0.0; };
  double lo = 1.0;
  while (below(lo)) {
    lo *= 0.25;
    if (lo < 1e-300) return 0.0;
  }
  double hi = lo;
  while (!below(hi)) {
    hi *= 4.0;
    if (hi > 1e300) return kInf;
  }
  return bisect_switch(under, gap, std::max(lo, hi * 0.25), hi).first;
}

void require_locally_integrable(const WeightFn& u, double t) {
  const double at = std::max(t, 1.0);
  if (u.integrate(0.0, at).is_inf()) {
    throw PreconditionError("weight must have finite integrals over [0, t] for every finite t");
  }
}

void require_tail_finite_positive(const WeightFn& u, double t) {
  const double lo = t > 0.0 ? std::min(t, 1e-6) : 1e-6;
  if (u.integrate(lo, kInf).is_inf()) {
    throw PreconditionError("weight must have finite tail integrals over [t, inf) for every t > 0");
  }
  if (!positive_far_tail(u)) throw PreconditionError("weight must have positive tail integrals over [t, inf) for every t > 0");
}

ExtReal sigma_map(const WeightFn& u, double x, int m) {
  if (!(x >= 0.0)) throw PreconditionError("sigma_map requires x >= 0");
  require_locally_integrable(u, std::isfinite(x) ? x : 1.0);
  double y = x;
  const int steps = std::abs(m);
  for (int i = 0; i < steps; ++i) {
    if (std::isinf(y)) return ExtReal::infinity();
    const double base = u.integrate(0.0, y).value();
    y = level_point(u, m > 0 ? 2.0 * base : 0.5 * base);
  }
  return y;
}

ExtReal zeta_map(const WeightFn& u, double x, int m) {
  if (!(x >= 0.0)) throw PreconditionError("zeta_map requires x >= 0");
  require_tail_finite_positive(u, x > 0.0 ? x : 1.0);
  double y = x;
  const int steps = std::abs(m);
  for (int i = 0; i < steps; ++i) {
    if (std::isinf(y)) return ExtReal::infinity();
    const double base = u.integrate(y, kInf).value();
    if (std::isinf(base)) {
      // zeta(0) with a non-integrable origin: sup of {y : tail >= inf} is empty
      if (m > 0) return 0.0;
      y = 0.0;
      continue;
    }
    y = tail_level_point(u, m > 0 ? 0.5 * base : 2.0 * base);
  }
  return y;
}

std::vector<double> Discretization::finite_points() const {
  std::vector<double> pts;
  for (const auto& [n, v] : a) {
    if (std::isfinite(v) && v > 0.0) pts.push_back(v);
  }
  return pts;
}

nlohmann::json Discretization::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [n, v] : a) {
    pts.push_back({{"n", n}, {"value", std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v)}});
  }
  return {{"n0", n0}, {"N", N}, {"N_finite", N_finite}, {"tail_side", tail_side}, {"a", pts}};
}

Discretization dyadic_sequence(const WeightFn& u, double x_min, double x_max, std::optional<int> n0) {
  if (!(x_max > x_min) || !(x_min > 0.0)) throw PreconditionError("window needs 0 < x_min < x_max");
  require_locally_integrable(u, x_max);
  Discretization d;
  d.u_ref = u;
  if (n0) {
    d.n0 = *n0;
  } else {
    double base = u.integrate(0.0, x_min).value();
    if (base <= 0.0) base = 1e-12 * u.integrate(0.0, x_max).value();
    if (base <= 0.0) throw DiagnosticError("weight vanishes on the whole window");
    d.n0 = static_cast<int>(std::ceil(std::log2(base) - 1e-12));
  }
  for (int n = d.n0;; ++n) {
    const double an = level_point(u, std::ldexp(1.0, n));
    d.a[n] = an;
    if (std::isinf(an)) {
      d.N = n - 1;
      d.N_finite = true;
      break;
    }
    if (an > x_max || n - d.n0 > 4000) {
      d.N = n;
      break;
    }
  }
  if (d.a.size() < 2) throw DiagnosticError("window too narrow to contain two dyadic levels");
  return d;
}

Discretization tail_dyadic_sequence(const WeightFn& u, double x_min, double x_max, std::optional<int> n0) {
  if (!(x_max > x_min) || !(x_min > 0.0)) throw PreconditionError("window needs 0 < x_min < x_max");
  require_tail_finite_positive(u, x_min);
  Discretization d;
  d.u_ref = u;
  d.tail_side = true;
  if (n0) {
    d.n0 = *n0;
  } else {
    const double base = u.integrate(x_min, kInf).value();
    d.n0 = static_cast<int>(std::ceil(-std::log2(base) - 1e-12));
  }
  for (int n = d.n0;; ++n) {
    const double an = tail_level_point(u, std::ldexp(1.0, -n));
    d.a[n] = an;
    if (an > x_max || std::isinf(an) || n - d.n0 > 4000) {
      d.N = n;
      break;
    }
  }
  if (d.a.size() < 2) throw DiagnosticError("window too narrow to contain two dyadic levels");
  return d;
}

DyadicSum dyadic_sum_ratio(const std::map<int, double>& lambda, double s, bool use_sup) {
  if (!(s > 0.0)) throw PreconditionError("dyadic sum exponent must be positive");
  DyadicSum out;
  if (lambda.empty()) return out;
  for (const auto& [n, v] : lambda) {
    if (!(v >= 0.0) || std::isinf(v)) throw PreconditionError("sequence values must be finite and nonnegative");
  }
  const int lo = lambda.begin()->first;
  const int hi = lambda.rbegin()->first;
  // suffix aggregate for n = hi .. lo
  double agg = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  for (int n = hi; n >= lo; --n) {
    const auto it = lambda.find(n);
    const double ln = it == lambda.end() ? 0.0 : it->second;
    agg = use_sup ? std::max(agg, ln) : agg + ln;
    lhs += std::ldexp(std::pow(agg, s), n);
    rhs += ln == 0.0 ? 0.0 : std::ldexp(std::pow(ln, s), n);
  }
  // every n < lo sees the full aggregate: sum_{n<lo} 2^n = 2^lo
  lhs += std::ldexp(std::pow(agg, s), lo);
  out.lhs = lhs;
  out.rhs = rhs;
  out.ratio = div0(lhs, rhs);
  return out;
}

}  // namespace hol
