#include "hol/gammamax.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hol/discretize.hpp"
#include "hol/json_util.hpp"

namespace hol {

using json = nlohmann::json;

namespace {

QuadOptions quad(double tol = 1e-9) {
  QuadOptions o;
  o.rel_tol = tol;
  o.throw_on_failure = false;
  return o;
}

// Values of a positive function on a log grid, interpolated linearly in
// log-log coordinates (exact for powers); exact evaluation off the grid.
class LogTable {
 public:
  LogTable(RealFn fn, std::vector<double> xs) : fn_(std::move(fn)), xs_(std::move(xs)) {
    for (double x : xs_) ys_.push_back(fn_(x));
    init();
  }
  LogTable(RealFn fn, std::vector<double> xs, std::vector<double> ys)
      : fn_(std::move(fn)), xs_(std::move(xs)), ys_(std::move(ys)) {
    init();
  }

  double operator()(double x) const {
    if (!(x >= xs_.front()) || !(x <= xs_.back())) return fn_(x);
    const double pos = (std::log(x) - llo_) / step_;
    const int i = std::clamp(static_cast<int>(pos), 0, static_cast<int>(xs_.size()) - 2);
    const double t = std::clamp(pos - i, 0.0, 1.0);
    const double a = ys_[i], b = ys_[i + 1];
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    if (std::isinf(a) || std::isinf(b)) return kInf;
    if (a > 0.0 && b > 0.0) return a * std::pow(b / a, t);
    return a + (b - a) * t;
  }

 private:
  void init() {
    llo_ = std::log(xs_.front());
    step_ = (std::log(xs_.back()) - llo_) / static_cast<double>(xs_.size() - 1);
  }

  RealFn fn_;
  std::vector<double> xs_, ys_;
  double llo_ = 0.0, step_ = 1.0;
};

struct Ctx {
  GammaSetup s;
  GammaConfig cfg;
  WeightFn uq;  // s^-q u(s)
  std::shared_ptr<LogTable> V;
  std::vector<double> breaks;
  bool V0_finite = false;  // int_0^inf v y^-p < inf

  Ctx(const GammaSetup& setup, const GammaConfig& c) : s(setup), cfg(c) {
    uq = WeightFn::product({WeightFn::power(-s.q), s.u});
    const WeightFn v = s.v;
    const double p = s.p;
    auto exact = [v, p](double z) { return compute_V(v, p, z).value(); };
    V = std::make_shared<LogTable>(exact, log_grid(cfg.x_min * 1e-3, cfg.x_max * 1e3, cfg.table_points));
    breaks = s.u.breakpoints();
    const auto vb = s.v.breakpoints();
    breaks.insert(breaks.end(), vb.begin(), vb.end());
    V0_finite = std::isfinite(integrate_pieces([&](double y) { return mul0(v(y), pow0(y, -p)); }, 0.0, kInf,
                                               vb, quad()));
  }

  [[nodiscard]] double T(double x) const { return uq.tail(x); }
  [[nodiscard]] double zeta(double x, int m) const { return zeta_map(uq, x, m).value(); }
  [[nodiscard]] double sup(const RealFn& f) const {
    return ess_sup_fn(f, cfg.x_min, cfg.x_max, breaks, cfg.sup_samples);
  }
  [[nodiscard]] double integral(const RealFn& f) const { return integrate_pieces(f, 0.0, kInf, breaks, quad(1e-8)); }
};

// x^-q u(x) (log(x / zeta^-2(x)))^q, vanishing where zeta^-2(x) = 0 (the
// inner integral over [0, zeta^-2(x)] is then empty).
RealFn log_weight(const Ctx& c) {
  return [&c](double x) {
    if (!(x > 0.0)) return 0.0;
    const double ux = c.s.u(x);
    if (ux == 0.0) return 0.0;
    const double z2 = c.zeta(x, -2);
    if (!(z2 > 0.0)) return 0.0;
    return ux * std::pow(x, -c.s.q) * std::pow(std::log(x / z2), c.s.q);
  };
}

// int_y^inf g on a log grid, by cumulative sums from the top.
std::shared_ptr<LogTable> tail_table(const RealFn& g, double lo, double hi, int n, const std::vector<double>& br) {
  const auto xs = log_grid(lo, hi, n);
  std::vector<double> ys(xs.size());
  double acc = integrate_pieces(g, xs.back(), kInf, br, quad());
  ys.back() = acc;
  for (std::size_t i = xs.size() - 1; i-- > 0;) {
    if (!std::isinf(acc)) acc += integrate_pieces(g, xs[i], xs[i + 1], br, quad());
    ys[i] = acc;
  }
  auto exact = [g, br](double y) { return integrate_pieces(g, y, kInf, br, quad()); };
  return std::make_shared<LogTable>(exact, xs, ys);
}

// int_0^x g on a log grid, by cumulative sums from the origin.
std::shared_ptr<LogTable> head_table(const RealFn& g, double lo, double hi, int n, const std::vector<double>& br) {
  const auto xs = log_grid(lo, hi, n);
  std::vector<double> ys(xs.size());
  double acc = integrate_pieces(g, 0.0, xs.front(), br, quad());
  ys.front() = acc;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!std::isinf(acc)) acc += integrate_pieces(g, xs[i - 1], xs[i], br, quad());
    ys[i] = acc;
  }
  auto exact = [g, br](double x) { return integrate_pieces(g, 0.0, x, br, quad()); };
  return std::make_shared<LogTable>(exact, xs, ys);
}

// The Hardy constant of int_x^inf h against z^p V(z).
double A_cal0(const Ctx& c, json& diag) {
  const double p = c.s.p, q = c.s.q;
  const WeightFn u = c.s.u;
  if (p <= q) {
    diag["A_cal0"] = "sup";
    const double S = c.sup([&](double t) { return div0(pow0(u.cumulative(t), p / q), mul0(std::pow(t, p), (*c.V)(t))); });
    return pow0(S, 1.0 / p);
  }
  diag["A_cal0"] = "integral";
  const double I = c.integral([&](double t) {
    const double ut = u(t);
    if (ut == 0.0) return 0.0;
    return mul0(mul0(pow0(std::pow(t, p) * (*c.V)(t), q / (q - p)), pow0(u.cumulative(t), q / (p - q))), ut);
  });
  return pow0(I, (p - q) / (p * q));
}

// The constant of the log-weighted inequality for int_0^{zeta^-2(x)} h.
double A_bf0(const Ctx& c, json& diag) {
  const double p = c.s.p, q = c.s.q;
  const RealFn g = log_weight(c);
  const double z2 = c.zeta(c.cfg.x_max, 2);
  const double hi = std::isfinite(z2) ? std::max(c.cfg.x_max, z2) : c.cfg.x_max;
  const auto G = tail_table(g, c.cfg.x_min, hi, c.cfg.table_points, c.breaks);
  if (p <= q) {
    diag["A_bf0"] = "sup";
    const double S = c.sup([&](double t) { return div0(pow0((*G)(c.zeta(t, 2)), p / q), (*c.V)(t)); });
    return pow0(S, 1.0 / p);
  }
  diag["A_bf0"] = "integral";
  const double I = c.integral([&](double x) {
    const double gx = g(x);
    if (gx == 0.0) return 0.0;
    return mul0(pow0(div0((*G)(x), (*c.V)(c.zeta(x, -2))), q / (p - q)), gx);
  });
  return pow0(I, (p - q) / (p * q));
}

// x^-q u(x) (int_x^inf s^-q u)^(q/(p-q)), the outer density of the q < p forms.
double outer_density(const Ctx& c, double x) {
  const double ux = c.s.u(x);
  if (ux == 0.0) return 0.0;
  const double p = c.s.p, q = c.s.q;
  return mul0(ux * std::pow(x, -q), pow0(c.T(x), q / (p - q)));
}

double A_cal2(const Ctx& c, json& diag) {
  const double p = c.s.p, q = c.s.q;
  const auto& V = *c.V;
  if (p <= q && p <= 1.0) {
    diag["A_cal2"] = "sup";
    return c.sup([&](double t) { return mul0(pow0(c.T(t), 1.0 / q), pow0(V(t), -1.0 / p)); });
  }
  if (p <= q) {
    diag["A_cal2"] = "sup";
    const auto J = head_table([&V, p](double x) { return pow0(V(x), 1.0 / (1.0 - p)) / x; }, c.cfg.x_min, c.cfg.x_max,
                              c.cfg.table_points, c.breaks);
    const double pp = p / (p - 1.0);
    return c.sup([&](double t) { return mul0(pow0(c.T(t), 1.0 / q), pow0((*J)(t), 1.0 / pp)); });
  }
  diag["A_cal2"] = "integral";
  double I;
  if (p <= 1.0) {
    I = c.integral([&](double x) {
      const double w = outer_density(c, x);
      if (w == 0.0) return 0.0;
      const double z = c.zeta(x, 1), zm = c.zeta(x, -1);
      const double b = div0(z - zm, z * pow0(V(z), 1.0 / p));
      return mul0(w, pow0(b, p * q / (p - q)));
    });
  } else {
    I = c.integral([&](double x) {
      const double w = outer_density(c, x);
      if (w == 0.0) return 0.0;
      const double z = c.zeta(x, 1), zm = c.zeta(x, -1);
      const double K = integrate_fn(
          [&](double t) { return pow0(div0(t - zm, std::pow(t, p) * V(t)), 1.0 / (p - 1.0)); }, zm, z, quad(1e-8));
      return mul0(w, pow0(K, q * (p - 1.0) / (p - q)));
    });
  }
  return pow0(I, (p - q) / (p * q));
}

double A_bf2(const Ctx& c, json& diag) {
  const double p = c.s.p, q = c.s.q;
  const auto& V = *c.V;
  // sup_{s in (a, b)} log(b/s)^e / V(s); unbounded as s -> 0 when V(0) < inf
  auto log_sup = [&](double a, double b, double e, int samples) {
    if (!(a > 0.0) && c.V0_finite) return kInf;
    const double lo = a > 0.0 ? a : b * 1e-12;
    return ess_sup_fn([&](double s) { return div0(pow0(std::log(b / s), e), V(s)); }, lo, b, {}, samples);
  };
  if (p <= q && p <= 1.0) {
    diag["A_bf2"] = "sup";
    // (log(t/s)^p / V(s))^(1/p) = V(s)^(-1/p) log(t/s)
    return c.sup([&](double t) { return mul0(pow0(c.T(t), 1.0 / q), pow0(log_sup(0.0, t, p, 128), 1.0 / p)); });
  }
  if (p <= q) {
    diag["A_bf2"] = "sup";
    const double pp = p / (p - 1.0);
    return c.sup([&](double t) {
      const double K = integrate_fn(
          [&](double x) { return pow0(V(x), 1.0 / (1.0 - p)) * pow0(std::log(t / x), 1.0 / (p - 1.0)) / x; }, 0.0, t,
          quad(1e-8));
      return mul0(pow0(c.T(t), 1.0 / q), pow0(K, 1.0 / pp));
    });
  }
  diag["A_bf2"] = "integral";
  double I;
  if (p <= 1.0) {
    I = c.integral([&](double x) {
      const double w = outer_density(c, x);
      if (w == 0.0) return 0.0;
      return mul0(w, pow0(log_sup(c.zeta(x, -1), c.zeta(x, 1), p, 64), q / (p - q)));
    });
  } else {
    I = c.integral([&](double x) {
      const double w = outer_density(c, x);
      if (w == 0.0) return 0.0;
      const double z = c.zeta(x, 1), zm = c.zeta(x, -1);
      const double K = integrate_fn(
          [&](double t) { return pow0(std::log(z / t) / V(t), 1.0 / (p - 1.0)) / t; }, zm, z, quad(1e-8));
      return mul0(w, pow0(K, q * (p - 1.0) / (p - q)));
    });
  }
  return pow0(I, (p - q) / (p * q));
}

// Leading zero cells are allowed: oracle witnesses leave out a singular
// origin cell.
void require_nonincreasing(const GridFunction& f) {
  const auto& v = f.values();
  std::size_t i = 0;
  while (i < v.size() && v[i] == 0.0) ++i;
  for (++i; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) throw PreconditionError("function must be nonincreasing");
  }
}

}  // namespace

json GammaSetup::to_json() const { return {{"p", num_json(p)}, {"q", num_json(q)}, {"u", u.to_json()}, {"v", v.to_json()}}; }

json GammaConfig::to_json() const {
  return {{"x_min", x_min},
          {"x_max", x_max},
          {"sup_samples", sup_samples},
          {"table_points", table_points},
          {"oracle", oracle.to_json()}};
}

GammaConfig GammaConfig::from_json(const json& j) {
  GammaConfig c;
  c.x_min = j.value("x_min", c.x_min);
  c.x_max = j.value("x_max", c.x_max);
  c.sup_samples = j.value("sup_samples", c.sup_samples);
  c.table_points = j.value("table_points", c.table_points);
  if (j.contains("oracle")) c.oracle = OracleConfig::from_json(j.at("oracle"));
  return c;
}

json MaximalConstants::to_json() const {
  return {{"A_cal0", num_json(A_cal0.value())},
          {"A_cal2", num_json(A_cal2.value())},
          {"A_bf0", num_json(A_bf0.value())},
          {"A_bf2", num_json(A_bf2.value())},
          {"total", num_json(total.value())},
          {"branch", {{"q", q_branch}, {"p", p_branch}}},
          {"diagnostics", diagnostics}};
}

ExtReal compute_V(const WeightFn& v, double p, double z) {
  if (!(p > 0.0) || !(z > 0.0)) throw PreconditionError("V needs p > 0 and z > 0");
  std::vector<double> br = v.breakpoints();
  br.push_back(z);
  const double zp = std::pow(z, p);
  return integrate_pieces([&](double y) { return mul0(v(y), 1.0 / (std::pow(y, p) + zp)); }, 0.0, kInf, br, quad(1e-11));
}

ExtReal zeta_q_map(const WeightFn& u, double q, double x, int m) {
  if (!(q > 0.0)) throw PreconditionError("zeta maps need q > 0");
  const WeightFn uq = WeightFn::product({WeightFn::power(-q), u});
  require_tail_finite_positive(uq, x > 0.0 ? x : 1.0);
  return zeta_map(uq, x, m);
}

void check_setup(const GammaSetup& s, const GammaConfig& cfg) {
  if (!(s.p > 0.0) || !std::isfinite(s.p) || !(s.q > 0.0) || !std::isfinite(s.q)) {
    throw PreconditionError("maximal operator setup needs 0 < p, q < inf");
  }
  if (!(cfg.x_min > 0.0) || !(cfg.x_max > cfg.x_min)) throw PreconditionError("window needs 0 < x_min < x_max");
  const WeightFn uq = WeightFn::product({WeightFn::power(-s.q), s.u});
  for (double t : {cfg.x_min, 1.0, cfg.x_max}) require_tail_finite_positive(uq, t);
  for (double z : {cfg.x_min, 1.0, cfg.x_max}) {
    if (compute_V(s.v, s.p, z).is_inf()) throw PreconditionError("V(z) diverges");
  }
}

MaximalConstants maximal_constants(const GammaSetup& s, const GammaConfig& cfg) {
  check_setup(s, cfg);
  const Ctx c(s, cfg);
  MaximalConstants m;
  m.q_branch = s.p <= s.q ? "p<=q" : "q<p";
  m.p_branch = s.p <= 1.0 ? "p<=1" : "p>1";
  json forms = json::object();
  m.A_cal0 = A_cal0(c, forms);
  m.A_bf0 = A_bf0(c, forms);
  m.A_cal2 = A_cal2(c, forms);
  m.A_bf2 = A_bf2(c, forms);
  m.total = m.A_cal0.value() + m.A_bf0.value() + m.A_cal2.value() + m.A_bf2.value();
  m.diagnostics = {{"forms", forms}, {"V_at_1", num_json((*c.V)(1.0))}, {"setup", s.to_json()}, {"config", cfg.to_json()}};
  return m;
}

ExtReal double_star(const GridFunction& f, double x) {
  if (!(x > 0.0)) throw PreconditionError("f** needs x > 0");
  return f.integral(0.0, x) / x;
}

ExtReal direct_min_ratio(const GridFunction& f, const GammaSetup& s) {
  require_nonincreasing(f);
  const auto& br = f.breakpoints();
  const auto& vals = f.values();
  // int_0^x f(z) log(x/z) dz = x times the mean of f** over (0, x)
  auto inner = [&](double x) {
    auto prim = [x](double z) { return z > 0.0 ? z * std::log(x / z) + z : 0.0; };
    double acc = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double a = br[i];
      if (a >= x) break;
      const double b = std::min(br[i + 1], x);
      acc += mul0(vals[i], prim(b) - prim(a));
    }
    return acc;
  };
  std::vector<double> pts = br;
  const auto ub = s.u.breakpoints(), vb = s.v.breakpoints();
  pts.insert(pts.end(), ub.begin(), ub.end());
  pts.insert(pts.end(), vb.begin(), vb.end());
  const auto o = quad(1e-10);
  const double L = integrate_pieces([&](double x) { return mul0(s.u(x), std::pow(inner(x) / x, s.q)); }, 0.0, kInf, pts, o);
  const double R = integrate_pieces([&](double t) { return mul0(s.v(t), std::pow(f.integral(0.0, t) / t, s.p)); }, 0.0,
                                    kInf, pts, o);
  return div0(pow0(L, 1.0 / s.q), pow0(R, 1.0 / s.p));
}

NormEstimate estimate_min_constant(const GammaSetup& s, const GammaConfig& cfg) {
  if (!(s.p > 0.0) || !(s.q > 0.0)) throw PreconditionError("maximal operator setup needs p, q > 0");
  const OracleConfig& oc = cfg.oracle;
  std::vector<double> br = s.u.breakpoints();
  const auto vb = s.v.breakpoints();
  br.insert(br.end(), vb.begin(), vb.end());
  auto base = [&]() {
    FormSpec f;
    f.U_breaks = br;
    f.extra_breaks = {1.0};
    f.p = s.p;
    f.x_min = oc.x_min;
    f.x_max = oc.x_max;
    f.cells = oc.grid_points;
    f.f_from_origin = true;
    return f;
  };
  const RealFn zero = [](double) { return 0.0; };
  const RealFn id = [](double x) { return x; };
  // (1/x) int_0^x f** = (1/x) int_0^x log(x/z) f(z) dz
  FormSpec num = base();
  num.inner = InnerSpec{zero, id, LevelKernel{KernelFn::log_ratio(), true, {}}};
  const WeightFn u = s.u, v = s.v;
  const double p = s.p, q = s.q;
  num.U = [u, q](double x) { return mul0(u(x), pow0(x, -q)); };
  num.r = q;
  FormSpec den = base();
  den.inner = InnerSpec{zero, id, std::nullopt};
  den.U = [v, p](double t) { return mul0(v(t), pow0(t, -p)); };
  den.r = p;
  const Form N(num), D(den);
  return maximize_ratio(RatioProblem{&N, &D, true}, oc);
}

}  // namespace hol
