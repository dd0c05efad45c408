#include "hol/constants.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <tuple>

#include "hol/json_util.hpp"

namespace hol {

using json = nlohmann::json;

namespace {

const char* const kTheoremNames[] = {"2.1", "2.2", "3.1", "3.2", "4.1", "4.2", "5.1", "5.2"};

RealFn constant_fn(double c) {
  return [c](double) { return c; };
}
RealFn identity_fn() {
  return [](double x) { return x; };
}

// Function values on a log grid, interpolated geometrically between
// positive neighbours and linearly otherwise; exact outside the grid.
class Table {
 public:
  Table(RealFn fn, double lo, double hi, int n) : fn_(std::move(fn)), xs_(log_grid(lo, hi, n)) {
    ys_.reserve(xs_.size());
    for (double x : xs_) ys_.push_back(fn_(x));
    llo_ = std::log(lo);
    step_ = (std::log(hi) - llo_) / (n - 1);
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
  RealFn fn_;
  std::vector<double> xs_, ys_;
  double llo_ = 0.0, step_ = 1.0;
};

RealFn level_map(const WeightFn& u, bool sigma, int m) {
  if (m == 0) return identity_fn();
  if (sigma) {
    return [u, m](double x) {
      if (!(x > 0.0)) return 0.0;
      return sigma_map(u, x, m).value();
    };
  }
  return [u, m](double x) {
    if (!(x > 0.0)) return m < 0 ? 0.0 : zeta_map(u, x, m).value();
    if (std::isinf(x)) return kInf;
    return zeta_map(u, x, m).value();
  };
}

// Shape of an auxiliary inequality
//   ( int u(x) Phi(x) (inner f)(x)^r dx )^(1/r)
// with Phi built from w on a segment [seg_lo(x), seg_hi(x)], or of the
// two-level inequalities with k(., .) at a shifted point in front.
struct Aux {
  RealFn seg_lo, seg_hi;
  // factor g(x, y, seg_lo, seg_hi) multiplying w(y); empty means 1
  std::function<double(double, double, double, double)> g;
  bool g_to_q = false;
  // the indicator kernel is 1 on every segment, leaving closed-form integrals of w
  bool g_indicator = false;
  RealFn in_lo, in_hi;
  std::optional<LevelKernel> in_kernel;

  bool two_level = false;
  RealFn kfac;
  RealFn out_lo, out_hi;
  bool inner_from_origin = true;

  // the segment moves with sigma or zeta maps (no closed form for Phi)
  bool shifted = false;
  // +1: kernel-free int_0^x f, -1: kernel-free int_x^inf f, 0: other
  int hardy = 0;
};

Aux aux_shape(Theorem t, int which, const TheoremData& d) {
  const KernelFn k = d.k;
  const bool sig = sigma_side(t);
  auto M = [&](int m) { return level_map(d.u, sig, m); };
  const RealFn zero = constant_fn(0.0), inf = constant_fn(kInf), id = identity_fn();
  const bool ind = k.is_indicator();
  Aux a;
  a.g_indicator = ind;
  auto kyx = [k](double x, double y, double, double) { return k(y, x); };
  auto kxy = [k](double x, double y, double, double) { return k(x, y); };
  switch (t) {
    case Theorem::T21:
      a.seg_lo = id;
      a.seg_hi = inf;
      a.in_lo = zero;
      a.in_hi = id;
      if (which == 0) {
        a.in_kernel = LevelKernel{k, true, {}};
        a.hardy = ind ? 1 : 0;
      } else {
        a.g = kyx;
        a.g_to_q = true;
        a.hardy = 1;
      }
      break;
    case Theorem::T22: {
      const RealFn s2 = M(2);
      a.seg_lo = id;
      a.shifted = true;
      a.seg_hi = s2;
      a.in_lo = s2;
      a.in_hi = inf;
      if (which == 0) {
        a.in_kernel = LevelKernel{k, false, s2};
      } else {
        a.g = [k](double, double y, double, double hi) { return k(hi, y); };
        a.g_to_q = true;
      }
      break;
    }
    case Theorem::T31:
      a.seg_lo = zero;
      a.seg_hi = id;
      a.in_lo = id;
      a.in_hi = inf;
      if (which == 0) {
        a.in_kernel = LevelKernel{k, false, {}};
        a.hardy = ind ? -1 : 0;
      } else {
        a.g = kxy;
        a.g_to_q = true;
        a.hardy = -1;
      }
      break;
    case Theorem::T32: {
      const RealFn z2 = M(-2);
      a.seg_lo = z2;
      a.shifted = true;
      a.seg_hi = id;
      a.in_lo = zero;
      a.in_hi = z2;
      if (which == 0) {
        a.in_kernel = LevelKernel{k, true, z2};
      } else {
        a.g = [k](double, double y, double lo, double) { return k(y, lo); };
        a.g_to_q = true;
      }
      break;
    }
    case Theorem::T41:
    case Theorem::T42:
      if (which == 0) {
        const bool plain = t == Theorem::T41;
        const RealFn s3 = plain ? inf : M(3);
        a.shifted = !plain;
        a.seg_lo = id;
        a.seg_hi = s3;
        a.g = kyx;
        a.in_lo = plain ? zero : s3;
        a.in_hi = plain ? id : inf;
        a.hardy = plain ? 1 : 0;
      } else {
        const RealFn s2 = M(2);
        a.two_level = true;
        a.kfac = [k, s2](double x) {
          const double y = s2(x);
          return std::isinf(y) ? 0.0 : k(y, x);
        };
        a.out_lo = s2;
        a.out_hi = inf;
        a.inner_from_origin = t == Theorem::T41;
      }
      break;
    case Theorem::T51:
    case Theorem::T52:
      if (which == 0) {
        const bool plain = t == Theorem::T51;
        const RealFn z3 = plain ? zero : M(-3);
        a.shifted = !plain;
        a.seg_lo = z3;
        a.seg_hi = id;
        a.g = kxy;
        a.in_lo = plain ? id : zero;
        a.in_hi = plain ? inf : z3;
        a.hardy = plain ? -1 : 0;
      } else {
        const RealFn z2 = M(-2);
        a.two_level = true;
        a.kfac = [k, z2](double x) {
          const double y = z2(x);
          return y > 0.0 ? k(x, y) : 0.0;
        };
        a.out_lo = zero;
        a.out_hi = z2;
        a.inner_from_origin = t == Theorem::T52;
      }
      break;
  }
  return a;
}

// Phi(x): (int_seg g^e w)^(r/q) for finite q, (ess sup_seg g w)^r for q = inf.
RealFn composite_weight(const Aux& a, const TheoremData& d) {
  const WeightFn w = d.w;
  const double q = d.e.q, r = d.e.r;
  const bool sup = std::isinf(q);
  const double outer_pow = sup ? r : r / q;
  const double g_pow = (a.g_to_q && !sup) ? q : 1.0;
  const auto g = a.g_indicator ? decltype(a.g)() : a.g;
  const RealFn lo_f = a.seg_lo, hi_f = a.seg_hi;
  const std::vector<double> wb = w.breakpoints();
  return [=](double x) {
    const double lo = lo_f(x), hi = hi_f(x);
    if (!(hi > lo)) return 0.0;
    double F;
    if (!g) {
      F = sup ? ess_sup(w, lo, hi).value() : w.integrate(lo, hi).value();
    } else {
      auto h = [&](double y) { return mul0(pow0(g(x, y, lo, hi), g_pow), w(y)); };
      std::vector<double> br = wb;
      br.push_back(x);
      if (sup) {
        F = ess_sup_fn(h, lo, hi, br, 512);
      } else {
        QuadOptions o;
        o.rel_tol = 1e-8;
        o.throw_on_failure = false;
        F = integrate_pieces(h, lo, hi, br, o);
      }
    }
    return pow0(F, outer_pow);
  };
}

std::vector<double> merged_breaks(std::initializer_list<std::vector<double>> lists) {
  std::vector<double> out;
  for (const auto& l : lists) out.insert(out.end(), l.begin(), l.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void check_exponents(const Exponents& e) {
  if (!(e.p >= 1.0)) throw PreconditionError("source exponent p must satisfy p >= 1");
  if (!(e.r > 0.0) || !(e.q > 0.0)) throw PreconditionError("exponents r and q must be positive");
}

void check_standing(Theorem t, const WeightFn& u) {
  if (sigma_side(t)) {
    require_locally_integrable(u);
  } else {
    require_tail_finite_positive(u);
  }
}

// Classical two-sided bound for a kernel-free Hardy inequality with p = r:
// sup_t (int_t^inf U)^(1/p) (int_0^t v^(1-p'))^(1/p') for int_0^x f, and the
// mirrored quantity for int_x^inf f. The best constant lies in [B, c_p B].
struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  double argmax = 0.0;
};

Bracket muckenhoupt_bracket(const RealFn& U, const std::vector<double>& Ubr, const WeightFn& v, double p, int dir,
                            double lo, double hi) {
  QuadOptions o;
  o.rel_tol = 1e-8;
  o.throw_on_failure = false;
  const bool p1 = p == 1.0;
  const double pp = p1 ? kInf : p / (p - 1.0);
  const auto vb = v.breakpoints();
  const RealFn sigma = [&](double y) { return pow0(v(y), -1.0 / (p - 1.0)); };
  const WeightFn vinv = v.reciprocal();
  const auto ts = log_grid(lo, hi, 241);
  const std::size_t n = ts.size();
  // masses of U and sigma to the left (dir > 0: right) of each grid point
  auto sweep = [&](const RealFn& f, const std::vector<double>& br) {
    std::vector<double> seg(n + 1);
    seg[0] = integrate_pieces(f, 0.0, ts[0], br, o);
    for (std::size_t i = 0; i + 1 < n; ++i) seg[i + 1] = integrate_pieces(f, ts[i], ts[i + 1], br, o);
    seg[n] = integrate_pieces(f, ts[n - 1], kInf, br, o);
    std::vector<double> left(n), right(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) left[i] = acc += seg[i];
    acc = 0.0;
    for (std::size_t i = n; i-- > 0;) right[i] = acc += seg[i + 1];
    return std::make_pair(left, right);
  };
  const auto [Ul, Ur] = sweep(U, Ubr);
  std::vector<double> Sl(n), Sr(n);
  if (!p1) std::tie(Sl, Sr) = sweep(sigma, vb);
  auto value_at = [&](std::size_t i, double t) {
    // masses at t from those at grid point i
    const double a = std::min(t, ts[i]), b = std::max(t, ts[i]);
    const double sgn = t >= ts[i] ? 1.0 : -1.0;
    const double dU = integrate_pieces(U, a, b, Ubr, o) * sgn;
    const double Upart = dir > 0 ? Ur[i] - dU : Ul[i] + dU;
    double Vpart;
    if (p1) {
      Vpart = dir > 0 ? ess_sup(vinv, 0.0, t).value() : ess_sup(vinv, t, kInf).value();
    } else {
      const double dS = integrate_pieces(sigma, a, b, vb, o) * sgn;
      Vpart = pow0(std::max(dir > 0 ? Sl[i] + dS : Sr[i] - dS, 0.0), 1.0 / pp);
    }
    return mul0(pow0(std::max(Upart, 0.0), 1.0 / p), Vpart);
  };
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = value_at(i, ts[i]);
  const std::size_t i = std::max_element(vals.begin(), vals.end()) - vals.begin();
  Bracket b;
  b.lower = vals[i];
  b.argmax = ts[i];
  if (std::isfinite(vals[i]) && vals[i] > 0.0 && i > 0 && i + 1 < n) {
    const double l = std::log(ts[i - 1]), h = std::log(ts[i + 1]);
    const double s = golden_max([&](double z) { return value_at(i, std::exp(z)); }, l, h, 1e-10, 80);
    const double vs = value_at(i, std::exp(s));
    if (vs > b.lower) {
      b.lower = vs;
      b.argmax = std::exp(s);
    }
  }
  const double factor = p1 ? 1.0 : std::pow(p, 1.0 / p) * std::pow(pp, 1.0 / pp);
  b.upper = b.lower * factor;
  return b;
}

// Localized operator and target weight of the A2 term.
LocalFamily local_family(Theorem t) {
  switch (t) {
    case Theorem::T21: return LocalFamily::H;
    case Theorem::T22: return LocalFamily::Hstar;
    case Theorem::T31: return LocalFamily::calH;
    case Theorem::T32: return LocalFamily::calHstar;
    case Theorem::T41: return LocalFamily::boldH;
    case Theorem::T42: return LocalFamily::boldHstar;
    case Theorem::T51: return LocalFamily::frakH;
    case Theorem::T52: return LocalFamily::frakHstar;
  }
  return LocalFamily::H;
}

bool section_four(Theorem t) { return t == Theorem::T41 || t == Theorem::T42; }
bool section_five(Theorem t) { return t == Theorem::T51 || t == Theorem::T52; }

// w(.) k(., s) on the sigma side, w(.) k(s, .) on the zeta side; plain w for
// sections 2 and 3.
LocalTarget local_target(Theorem t, const TheoremData& d, double s) {
  if (!section_four(t) && !section_five(t)) return LocalTarget::of(d.e.q, d.w);
  const WeightFn w = d.w;
  const KernelFn k = d.k;
  LocalTarget lt;
  lt.q = d.e.q;
  if (section_four(t)) {
    lt.weight = [w, k, s](double y) { return mul0(w(y), k(y, s)); };
  } else {
    lt.weight = [w, k, s](double y) { return mul0(w(y), k(s, y)); };
  }
  lt.breaks = w.breakpoints();
  if (std::isfinite(s) && s > 0.0) lt.breaks.push_back(s);
  return lt;
}

double local_value(const LocalOpSpec& op, const TheoremData& d, const LocalTarget& target,
                   const ConstantsConfig& cfg) {
  return local_norm(op, d.e.p, d.v, target, cfg.local).value.value();
}

// A2-type supremum points: the dyadic levels and t_per_cell log-uniform
// points inside each finite cell.
std::vector<double> sup_grid(const Discretization& disc, int per_cell) {
  const auto pts = disc.finite_points();
  std::vector<double> g;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    g.push_back(pts[i]);
    if (i + 1 < pts.size()) {
      const auto in = log_grid(pts[i], pts[i + 1], per_cell + 2);
      g.insert(g.end(), in.begin() + 1, in.end() - 1);
    }
  }
  return g;
}

// Dyadic levels inside [a2_x_min, a2_x_max], at most max_levels of them
// counted from the first.
Discretization levels(Theorem t, const ConstantsConfig& cfg, const WeightFn& u) {
  Discretization d = sigma_side(t) ? dyadic_sequence(u, cfg.a2_x_min, cfg.a2_x_max)
                                   : tail_dyadic_sequence(u, cfg.a2_x_min, cfg.a2_x_max);
  const int last = d.n0 + cfg.max_levels;
  if (d.N > last) {
    d.a.erase(d.a.upper_bound(last), d.a.end());
    d.N = last;
    d.N_finite = false;
  }
  return d;
}

// sup_t level(t) ||Loc_t||, with level(t) given by the caller.
TermResult sup_term(Theorem t, const TheoremData& d, const ConstantsConfig& cfg, const RealFn& level) {
  const Discretization disc = levels(t, cfg, d.u);
  const auto grid = sup_grid(disc, cfg.t_per_cell);
  TermResult res;
  res.method = "oracle";
  json pts = json::array();
  double best = 0.0, arg = 0.0;
  for (double x : grid) {
    const double lv = level(x);
    double n = 0.0;
    if (lv > 0.0) {
      n = local_value(LocalOpSpec::at(local_family(t), x, d.k), d, local_target(t, d, x), cfg);
    }
    const double val = mul0(lv, n);
    pts.push_back({num_json(x), num_json(n), num_json(val)});
    if (val > best) {
      best = val;
      arg = x;
    }
  }
  res.value = best;
  res.diagnostics = {{"branch", "sup"},
                     {"argmax_t", num_json(arg)},
                     {"points", pts},
                     {"discretization", disc.to_json()}};
  return res;
}

// The r < p outer integral, local norms held constant between dyadic nodes
// at the larger of the two adjacent values.
TermResult integral_term(Theorem t, const TheoremData& d, const ConstantsConfig& cfg) {
  const double p = d.e.p, s = d.e.s();
  const double gam = 1.0 + s / p;
  const bool sig = sigma_side(t);
  const Discretization disc = levels(t, cfg, d.u);
  std::vector<std::pair<int, double>> nodes;
  for (const auto& [n, a] : disc.a) {
    if (std::isfinite(a) && a > 0.0) nodes.emplace_back(n, a);
  }
  const LocalFamily fam = local_family(t);
  std::vector<double> norms;
  json pts = json::array();
  for (const auto& [n, x] : nodes) {
    LocalOpSpec op;
    LocalTarget target;
    if (sig) {
      const double c = sigma_map(d.u, x, -1).value();
      const double e = sigma_map(d.u, x, section_four(t) ? 2 : 1).value();
      op = LocalOpSpec::window(fam, c, e, d.u, d.k);
      target = local_target(t, d, c);
    } else {
      const double c = zeta_map(d.u, x, -1).value();
      const double e = zeta_map(d.u, x, section_five(t) ? 2 : 1).value();
      op = LocalOpSpec::window(fam, c, e, d.u, d.k);
      target = local_target(t, d, e);
    }
    const double nv = local_value(op, d, target, cfg);
    norms.push_back(nv);
    pts.push_back({n, num_json(x), num_json(nv)});
  }
  // level masses: int_0^x u = 2^n on the sigma side, int_x^inf u = 2^-n on the zeta side
  auto mass = [&](int n) { return std::ldexp(1.0, sig ? n : -n); };
  auto piece = [&](double m0, double m1) { return std::abs(pow0(m1, gam) - pow0(m0, gam)) / gam; };
  double sum = 0.0;
  bool truncated = false;
  const std::size_t K = nodes.size();
  if (K > 0) {
    // origin cell [0, a_first)
    const double m_first = mass(nodes.front().first);
    const double m_origin = sig ? 0.0 : d.u.integrate(0.0, kInf).value();
    if (std::isinf(m_origin)) {
      truncated = true;
    } else {
      sum += mul0(pow0(norms.front(), s), piece(m_origin, m_first));
    }
    for (std::size_t i = 0; i + 1 < K; ++i) {
      const double nv = std::max(norms[i], norms[i + 1]);
      sum += mul0(pow0(nv, s), piece(mass(nodes[i].first), mass(nodes[i + 1].first)));
    }
    // terminal cell [a_last, inf)
    const double m_last = mass(nodes.back().first);
    const double m_end = sig ? d.u.integrate(0.0, kInf).value() : 0.0;
    if (std::isinf(m_end)) {
      truncated = true;
    } else {
      sum += mul0(pow0(norms.back(), s), piece(m_last, m_end));
    }
  }
  TermResult res;
  res.method = "oracle";
  res.value = pow0(sum, 1.0 / s);
  res.diagnostics = {{"branch", "integral"},
                     {"s", num_json(s)},
                     {"truncated", truncated},
                     {"nodes", pts},
                     {"discretization", disc.to_json()}};
  return res;
}

GridFunction reciprocal_step(const WeightFn& v) {
  bool piecewise_constant = v.is_closed_form();
  for (const auto& term : v.terms()) {
    if (term.alpha != 0.0 || term.beta != 0.0) piecewise_constant = false;
  }
  std::vector<double> br{0.0};
  if (piecewise_constant) {
    for (double b : v.breakpoints()) {
      if (b > 0.0 && std::isfinite(b)) br.push_back(b);
    }
  } else {
    const auto g = log_grid(1e-8, 1e8, 1025);
    br.insert(br.end(), g.begin(), g.end());
  }
  br.push_back(kInf);
  std::vector<double> vals(br.size() - 1);
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], b = br[i + 1];
    double m;
    if (a == 0.0) {
      m = std::isinf(b) ? 1.0 : 0.5 * b;
    } else if (std::isinf(b)) {
      m = 2.0 * a;
    } else {
      m = std::sqrt(a * b);
    }
    const double vv = v(m);
    vals[i] = vv > 0.0 ? 1.0 / vv : kInf;
  }
  return GridFunction(br, vals);
}

}  // namespace

Theorem parse_theorem(const std::string& s) {
  for (int i = 0; i < 8; ++i) {
    if (s == kTheoremNames[i]) return static_cast<Theorem>(i);
  }
  throw PreconditionError("unknown theorem '" + s + "' (expected one of 2.1 2.2 3.1 3.2 4.1 4.2 5.1 5.2)");
}

std::string to_string(Theorem t) { return kTheoremNames[static_cast<int>(t)]; }

OpTag theorem_operator(Theorem t) {
  switch (t) {
    case Theorem::T21: return OpTag::T;
    case Theorem::T22: return OpTag::S;
    case Theorem::T31: return OpTag::calT;
    case Theorem::T32: return OpTag::calS;
    case Theorem::T41: return OpTag::boldT;
    case Theorem::T42: return OpTag::boldS;
    case Theorem::T51: return OpTag::frakT;
    case Theorem::T52: return OpTag::frakS;
  }
  return OpTag::T;
}

bool sigma_side(Theorem t) {
  return t == Theorem::T21 || t == Theorem::T22 || t == Theorem::T41 || t == Theorem::T42;
}

json TheoremData::to_json() const {
  return {{"u", u.to_json()}, {"v", v.to_json()}, {"w", w.to_json()}, {"k", k.to_json()},
          {"p", num_json(e.p)}, {"r", num_json(e.r)}, {"q", num_json(e.q)}};
}

json ConstantsConfig::to_json() const {
  return {{"oracle", oracle.to_json()},
          {"local", local.to_json()},
          {"a2_x_min", a2_x_min},
          {"a2_x_max", a2_x_max},
          {"t_per_cell", t_per_cell},
          {"max_levels", max_levels},
          {"table_points", table_points},
          {"muckenhoupt_fast_path", muckenhoupt_fast_path}};
}

ConstantsConfig ConstantsConfig::from_json(const json& j) {
  ConstantsConfig c;
  c.oracle = OracleConfig::from_json(j);
  if (j.contains("local")) {
    json merged = c.local.to_json();
    merged.update(j.at("local"));
    c.local = OracleConfig::from_json(merged);
  }
  c.a2_x_min = j.value("a2_x_min", c.a2_x_min);
  c.a2_x_max = j.value("a2_x_max", c.a2_x_max);
  c.t_per_cell = j.value("t_per_cell", c.t_per_cell);
  c.max_levels = j.value("max_levels", c.max_levels);
  c.table_points = j.value("table_points", c.table_points);
  c.muckenhoupt_fast_path = j.value("muckenhoupt_fast_path", c.muckenhoupt_fast_path);
  return c;
}

json TermResult::to_json() const {
  return {{"value", num_json(value.value())}, {"method", method}, {"diagnostics", diagnostics}};
}

json ConstantBreakdown::to_json() const {
  json j = {{"theorem", theorem}, {"regime", regime}, {"q_mode", q_mode}, {"mode", mode},
            {"total", num_json(total.value())}, {"diagnostics", diagnostics}};
  if (mode == "sum") {
    j["A0"] = A0.to_json();
    j["A1"] = A1.to_json();
    j["A2"] = A2.to_json();
  }
  return j;
}

FormSpec auxiliary_form(Theorem t, int which, const TheoremData& d, const ConstantsConfig& cfg) {
  check_exponents(d.e);
  if (std::isinf(d.e.r)) throw PreconditionError("auxiliary inequalities need a finite r");
  if (which != 0 && which != 1) throw PreconditionError("auxiliary inequality index must be 0 or 1");
  const Aux a = aux_shape(t, which, d);
  const OracleConfig& oc = cfg.oracle;
  FormSpec s;
  const WeightFn u = d.u;
  if (!a.two_level) {
    // an empty inner interval kills the term whatever Phi is
    const RealFn lo = a.in_lo, hi = a.in_hi;
    RealFn phi = [lo, hi, c = composite_weight(a, d)](double x) { return hi(x) > lo(x) ? c(x) : 0.0; };
    if (a.shifted || (a.g && !a.g_indicator) || std::isinf(d.e.q)) {
      auto tab = std::make_shared<Table>(std::move(phi), oc.x_min, oc.x_max, cfg.table_points);
      phi = [tab](double x) { return (*tab)(x); };
    }
    s.U = [u, phi](double x) {
      const double ux = u(x);
      return ux == 0.0 ? 0.0 : mul0(ux, phi(x));
    };
    s.inner = InnerSpec{a.in_lo, a.in_hi, a.in_kernel};
  } else {
    const double e = std::isinf(d.e.q) ? d.e.r : d.e.r / d.e.q;
    auto kf = std::make_shared<Table>(
        [kfac = a.kfac, e](double x) { return pow0(kfac(x), e); }, oc.x_min, oc.x_max, cfg.table_points);
    s.U = [u, kf](double x) {
      const double ux = u(x);
      return ux == 0.0 ? 0.0 : mul0(ux, (*kf)(x));
    };
    s.inner = a.inner_from_origin ? InnerSpec{constant_fn(0.0), identity_fn(), std::nullopt}
                                  : InnerSpec{identity_fn(), constant_fn(kInf), std::nullopt};
    OuterSpec o;
    o.lo = a.out_lo;
    o.hi = a.out_hi;
    o.w = d.w.as_function();
    o.w_breaks = d.w.breakpoints();
    o.q = d.e.q;
    s.outer = o;
  }
  s.U_breaks = merged_breaks({d.u.breakpoints(), d.w.breakpoints()});
  s.r = d.e.r;
  s.p = d.e.p;
  s.v = d.v;
  s.x_min = oc.x_min;
  s.x_max = oc.x_max;
  s.cells = oc.grid_points;
  s.f_from_origin = true;
  return s;
}

std::pair<TermResult, TermResult> compute_A0_A1(Theorem t, const TheoremData& d, const ConstantsConfig& cfg) {
  check_exponents(d.e);
  std::pair<TermResult, TermResult> out;
  if (d.u.is_zero() || d.w.is_zero()) {
    out.first.value = 0.0;
    out.second.value = 0.0;
    out.first.method = out.second.method = "closed-form";
    return out;
  }
  check_standing(t, d.u);
  for (int which = 0; which < 2; ++which) {
    TermResult& res = which == 0 ? out.first : out.second;
    const FormSpec spec = auxiliary_form(t, which, d, cfg);
    const Aux a = aux_shape(t, which, d);
    json diag = {{"grid_points", spec.cells}, {"x_min", spec.x_min}, {"x_max", spec.x_max}};
    const bool bracketable = a.hardy != 0 && !a.two_level && d.e.p == d.e.r && std::isfinite(d.e.p);
    if (bracketable) {
      const Bracket b = muckenhoupt_bracket(spec.U, spec.U_breaks, d.v, d.e.p, a.hardy, cfg.oracle.x_min,
                                            cfg.oracle.x_max);
      diag["bracket"] = {num_json(b.lower), num_json(b.upper)};
      diag["bracket_argmax"] = num_json(b.argmax);
      if (cfg.muckenhoupt_fast_path) {
        res.value = b.lower;
        res.method = "closed-form";
        res.diagnostics = diag;
        continue;
      }
    }
    const Form F(spec);
    const NormEstimate est = maximize_ratio(RatioProblem{&F, nullptr, false}, cfg.oracle);
    res.value = est.value;
    res.method = "oracle";
    diag["restarts_used"] = est.restarts_used;
    diag["converged"] = est.converged;
    res.diagnostics = diag;
  }
  return out;
}

TermResult compute_A2(Theorem t, const TheoremData& d, const ConstantsConfig& cfg) {
  check_exponents(d.e);
  if (d.u.is_zero() || d.w.is_zero()) {
    TermResult z;
    z.value = 0.0;
    z.method = "closed-form";
    return z;
  }
  check_standing(t, d.u);
  if (std::isinf(d.e.r)) throw PreconditionError("A2 needs a finite r; use the r = inf breakdown mode");
  const double r = d.e.r;
  if (d.e.p_le_r()) {
    const WeightFn u = d.u;
    if (sigma_side(t)) return sup_term(t, d, cfg, [u, r](double x) { return pow0(u.cumulative(x), 1.0 / r); });
    return sup_term(t, d, cfg, [u, r](double x) { return pow0(u.tail(x), 1.0 / r); });
  }
  return integral_term(t, d, cfg);
}

ExtReal reciprocal_weight_value(Theorem t, const TheoremData& d) {
  if (d.u.is_zero() || d.w.is_zero()) return 0.0;
  const GridFunction g = reciprocal_step(d.v);
  for (double x : g.values()) {
    if (std::isinf(x)) return ExtReal::infinity();
  }
  OperatorKind op;
  op.tag = theorem_operator(t);
  op.q = d.e.q;
  op.w = d.w;
  op.k = d.k;
  const auto br = merged_breaks({d.u.breakpoints(), d.w.breakpoints()});
  auto Tf = [&](double x) { return apply_operator(op, g, x).value(); };
  if (std::isinf(d.e.r)) return ess_sup_fn([&](double x) { return mul0(d.u(x), Tf(x)); }, 0.0, kInf, br);
  QuadOptions o;
  o.rel_tol = 1e-8;
  const double r = d.e.r;
  const double I = integrate_pieces([&](double x) { return mul0(d.u(x), pow0(Tf(x), r)); }, 0.0, kInf, br, o);
  return pow0(I, 1.0 / r);
}

InequalitySpec parent_inequality(Theorem t, const TheoremData& d) {
  InequalitySpec s;
  s.op.tag = theorem_operator(t);
  s.op.q = d.e.q;
  s.op.w = d.w;
  s.op.k = d.k;
  s.p = d.e.p;
  s.v = d.v;
  s.r = d.e.r;
  s.u = d.u;
  return s;
}

ConstantBreakdown compute_breakdown(Theorem t, const TheoremData& d, const ConstantsConfig& cfg) {
  check_exponents(d.e);
  ConstantBreakdown b;
  b.theorem = to_string(t);
  b.regime = d.e.p_le_r() ? "p<=r" : "r<p";
  b.q_mode = std::isinf(d.e.q) ? "ess-sup" : "finite";
  b.diagnostics = {{"config", cfg.to_json()}, {"data", d.to_json()}};
  if (std::isinf(d.e.p)) {
    b.mode = "p=inf";
    b.total = reciprocal_weight_value(t, d);
    b.diagnostics["method"] = "quadrature";
    return b;
  }
  if (std::isinf(d.e.r)) {
    if (!sigma_side(t)) throw PreconditionError("r = inf is characterized only for theorems 2.x and 4.x");
    b.mode = "r=inf";
    if (d.u.is_zero() || d.w.is_zero()) {
      b.total = 0.0;
      return b;
    }
    check_standing(t, d.u);
    const WeightFn u = d.u;
    const TermResult s = sup_term(t, d, cfg, [u](double x) { return ess_sup(u, 0.0, x).value(); });
    b.total = s.value;
    b.diagnostics["method"] = s.method;
    b.diagnostics["sup"] = s.diagnostics;
    return b;
  }
  auto [a0, a1] = compute_A0_A1(t, d, cfg);
  b.A0 = std::move(a0);
  b.A1 = std::move(a1);
  b.A2 = compute_A2(t, d, cfg);
  b.total = b.A0.value + b.A1.value + b.A2.value;
  return b;
}

}  // namespace hol
