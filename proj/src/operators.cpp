#include "hol/operators.hpp"

#include <algorithm>
#include <cmath>

#include "hol/discretize.hpp"

namespace hol {

namespace {

constexpr double kOuterTol = 1e-9;
constexpr double kInnerTol = 1e-10;

QuadOptions quad(double tol) {
  QuadOptions o;
  o.rel_tol = tol;
  o.throw_on_failure = false;
  return o;
}

std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// int_a^b k-section * f over the support of f, where section(z) is the kernel factor.
template <class K>
double kernel_integral(const GridFunction& f, double a, double b, const K& section) {
  if (f.cells() == 0) return 0.0;
  const auto& br = f.breakpoints();
  a = std::max(a, br.front());
  b = std::min(b, br.back());
  if (!(b > a)) return 0.0;
  auto g = [&](double z) { return mul0(section(z), f(z)); };
  return integrate_pieces(g, a, b, br, quad(kInnerTol));
}

}  // namespace

OpTag parse_op_tag(const std::string& s) {
  static const std::pair<const char*, OpTag> names[] = {
      {"T", OpTag::T},         {"calT", OpTag::calT},   {"S", OpTag::S},         {"calS", OpTag::calS},
      {"boldT", OpTag::boldT}, {"frakT", OpTag::frakT}, {"boldS", OpTag::boldS}, {"frakS", OpTag::frakS}};
  for (const auto& [n, t] : names) {
    if (s == n) return t;
  }
  throw PreconditionError("unknown operator '" + s + "'");
}

std::string to_string(OpTag t) {
  switch (t) {
    case OpTag::T: return "T";
    case OpTag::calT: return "calT";
    case OpTag::S: return "S";
    case OpTag::calS: return "calS";
    case OpTag::boldT: return "boldT";
    case OpTag::frakT: return "frakT";
    case OpTag::boldS: return "boldS";
    case OpTag::frakS: return "frakS";
  }
  return "?";
}

bool OperatorKind::outer_upper() const {
  return tag == OpTag::T || tag == OpTag::S || tag == OpTag::boldT || tag == OpTag::boldS;
}

bool OperatorKind::inner_lower() const {
  return tag == OpTag::T || tag == OpTag::calS || tag == OpTag::boldT || tag == OpTag::frakS;
}

bool OperatorKind::kernel_inside() const {
  return tag == OpTag::T || tag == OpTag::calT || tag == OpTag::S || tag == OpTag::calS;
}

ExtReal apply_operator(const OperatorKind& op, const GridFunction& f, double x) {
  if (!(x >= 0.0)) throw PreconditionError("operator argument must be nonnegative");
  if (!(op.q > 0.0)) throw PreconditionError("operator exponent q must be positive");
  if (f.is_zero() || op.w.is_zero()) return 0.0;

  auto inner = [&](double y) {
    if (!op.kernel_inside()) return op.inner_lower() ? f.integral(0.0, y) : f.integral(y, kInf);
    if (op.inner_lower()) return kernel_integral(f, 0.0, y, [&](double z) { return op.k(y, z); });
    return kernel_integral(f, y, kInf, [&](double z) { return op.k(z, y); });
  };
  auto weight = [&](double y) {
    const double wy = op.w(y);
    if (op.kernel_inside() || wy == 0.0) return wy;
    return mul0(op.outer_upper() ? op.k(y, x) : op.k(x, y), wy);
  };
  const double lo = op.outer_upper() ? x : 0.0;
  const double hi = op.outer_upper() ? kInf : x;
  if (!(hi > lo)) return 0.0;
  std::vector<double> br = merged(f.breakpoints(), op.w.breakpoints());
  br.push_back(x);

  if (std::isinf(op.q)) {
    auto g = [&](double y) { return mul0(weight(y), inner(y)); };
    return ess_sup_fn(g, lo, hi, br, 1024);
  }
  auto g = [&](double y) {
    const double wy = weight(y);
    if (wy == 0.0) return 0.0;
    return mul0(wy, pow0(inner(y), op.q));
  };
  const double total = integrate_pieces(g, lo, hi, br, quad(kOuterTol));
  return pow0(total, 1.0 / op.q);
}

LocalFamily parse_local_family(const std::string& s) {
  static const std::pair<const char*, LocalFamily> names[] = {
      {"H", LocalFamily::H},         {"Hstar", LocalFamily::Hstar},         {"calH", LocalFamily::calH},
      {"calHstar", LocalFamily::calHstar}, {"boldH", LocalFamily::boldH}, {"boldHstar", LocalFamily::boldHstar},
      {"frakH", LocalFamily::frakH}, {"frakHstar", LocalFamily::frakHstar}};
  for (const auto& [n, t] : names) {
    if (s == n) return t;
  }
  throw PreconditionError("unknown local operator family '" + s + "'");
}

std::string to_string(LocalFamily f) {
  switch (f) {
    case LocalFamily::H: return "H";
    case LocalFamily::Hstar: return "Hstar";
    case LocalFamily::calH: return "calH";
    case LocalFamily::calHstar: return "calHstar";
    case LocalFamily::boldH: return "boldH";
    case LocalFamily::boldHstar: return "boldHstar";
    case LocalFamily::frakH: return "frakH";
    case LocalFamily::frakHstar: return "frakHstar";
  }
  return "?";
}

LocalOpSpec LocalOpSpec::at(LocalFamily family, double t, KernelFn k) {
  if (!(t >= 0.0)) throw PreconditionError("local operator parameter must be nonnegative");
  LocalOpSpec s;
  s.family = family;
  s.single = true;
  s.t = t;
  s.k = std::move(k);
  return s;
}

LocalOpSpec LocalOpSpec::window(LocalFamily family, double c, double d, WeightFn u, KernelFn k) {
  LocalOpSpec s;
  s.family = family;
  s.single = false;
  s.c = c;
  s.d = d;
  s.u = std::move(u);
  s.k = std::move(k);
  if (s.sigma_side()) {
    if (!(c > 0.0) || !(d >= c)) throw PreconditionError("sigma-side window needs 0 < c <= d <= inf");
  } else {
    if (!(c >= 0.0) || !(d >= c) || std::isinf(d)) throw PreconditionError("zeta-side window needs 0 <= c <= d < inf");
  }
  return s;
}

bool LocalOpSpec::sigma_side() const {
  return family == LocalFamily::H || family == LocalFamily::Hstar || family == LocalFamily::boldH ||
         family == LocalFamily::boldHstar;
}

bool LocalOpSpec::has_kernel() const {
  return family == LocalFamily::H || family == LocalFamily::Hstar || family == LocalFamily::calH ||
         family == LocalFamily::calHstar;
}

bool LocalOpSpec::up_to_x() const {
  return family == LocalFamily::H || family == LocalFamily::boldH || family == LocalFamily::calHstar ||
         family == LocalFamily::frakHstar;
}

bool LocalShape::contains(double x) const {
  if (left_closed) return x >= win_lo && x < win_hi;
  return x > win_lo && x <= win_hi;
}

LocalShape local_shape(const LocalOpSpec& spec) {
  LocalShape sh;
  sh.up_to_x = spec.up_to_x();
  sh.kernel = spec.has_kernel();
  sh.left_closed = spec.sigma_side();
  if (spec.single) {
    if (spec.sigma_side()) {
      sh.win_lo = spec.t;
      sh.win_hi = kInf;
    } else {
      sh.win_lo = 0.0;
      sh.win_hi = spec.t;
    }
    sh.endpoint = sh.up_to_x ? 0.0 : kInf;
    return sh;
  }
  sh.win_lo = spec.c;
  sh.win_hi = spec.d;
  if (spec.sigma_side()) {
    sh.endpoint = sh.up_to_x ? sigma_map(spec.u, spec.c, -1).value()
                             : (std::isinf(spec.d) ? kInf : sigma_map(spec.u, spec.d, 1).value());
  } else {
    sh.endpoint = sh.up_to_x ? (spec.c == 0.0 ? 0.0 : zeta_map(spec.u, spec.c, -1).value())
                             : zeta_map(spec.u, spec.d, 1).value();
  }
  return sh;
}

ExtReal apply_local(const LocalOpSpec& spec, const GridFunction& f, double x) {
  if (!(x >= 0.0)) throw PreconditionError("operator argument must be nonnegative");
  const LocalShape sh = local_shape(spec);
  if (!sh.contains(x)) return 0.0;
  if (sh.up_to_x) {
    if (!(x > sh.endpoint)) return 0.0;
    if (!sh.kernel) return f.integral(sh.endpoint, x);
    return kernel_integral(f, sh.endpoint, x, [&](double z) { return spec.k(x, z); });
  }
  if (!(sh.endpoint > x)) return 0.0;
  if (!sh.kernel) return f.integral(x, sh.endpoint);
  return kernel_integral(f, x, sh.endpoint, [&](double z) { return spec.k(z, x); });
}

}  // namespace hol
