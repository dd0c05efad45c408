#include "hol/weight.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

namespace hol {

namespace {

using nlohmann::json;

double term_value_raw(double coef, double alpha, double beta, double x) {
  if (coef == 0.0) return 0.0;
  double v = coef * pow0(x, alpha);
  if (beta != 0.0) v = mul0(v, std::exp(-beta * x));
  return v;
}

// Closed-form integral of x^alpha over [lo, hi].
double power_integral(double alpha, double lo, double hi) {
  if (alpha == -1.0) {
    if (lo == 0.0 || std::isinf(hi)) return kInf;
    return std::log(hi / lo);
  }
  const double s = alpha + 1.0;
  if (s < 0.0 && lo == 0.0) return kInf;
  if (s > 0.0 && std::isinf(hi)) return kInf;
  const double ph = std::isinf(hi) ? 0.0 : std::pow(hi, s);
  const double pl = (lo == 0.0) ? 0.0 : std::pow(lo, s);
  return (ph - pl) / s;
}

// Integral of x^alpha e^{-beta x} over [lo, hi] for beta > 0, alpha > -1.
double gamma_integral(double alpha, double beta, double lo, double hi) {
  if (alpha == 0.0) {
    const double head = std::exp(-beta * lo);
    return std::isinf(hi) ? head / beta : -head * std::expm1(-beta * (hi - lo)) / beta;
  }
  const double s = alpha + 1.0;
  const double x = beta * lo;
  const double y = beta * hi;
  double val;
  if (x >= s) {
    val = boost::math::tgamma(s, x) - (std::isinf(y) ? 0.0 : boost::math::tgamma(s, y));
  } else {
    val = (std::isinf(y) ? boost::math::tgamma(s) : boost::math::tgamma_lower(s, y)) -
          boost::math::tgamma_lower(s, x);
  }
  return std::max(0.0, val) * std::pow(beta, -s);
}

std::vector<PowerExpTerm> multiply_terms(const std::vector<PowerExpTerm>& a, const std::vector<PowerExpTerm>& b) {
  std::vector<PowerExpTerm> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      PowerExpTerm t{x.coef * y.coef, x.alpha + y.alpha, x.beta + y.beta, std::max(x.lo, y.lo), std::min(x.hi, y.hi)};
      if (t.hi > t.lo && t.coef != 0.0) out.push_back(t);
    }
  }
  return out;
}

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0)) throw PreconditionError(std::string(what) + " must be nonnegative");
}

}  // namespace

double PowerExpTerm::operator()(double x) const {
  if (x < lo || x >= hi) return 0.0;
  return term_value_raw(coef, alpha, beta, x);
}

double PowerExpTerm::integral(double a, double b) const {
  const double l = std::max(a, lo);
  const double h = std::min(b, hi);
  if (!(h > l) || coef == 0.0) return 0.0;
  if (beta == 0.0) return mul0(coef, power_integral(alpha, l, h));
  if (beta > 0.0 && alpha > -1.0) return coef * gamma_integral(alpha, beta, l, h);
  if (beta < 0.0 && std::isinf(h)) return kInf;
  if (l == 0.0 && alpha <= -1.0) return kInf;
  const PowerExpTerm self = *this;
  QuadOptions opt;
  opt.rel_tol = 1e-11;
  return integrate_fn([&](double x) { return term_value_raw(self.coef, self.alpha, self.beta, x); }, l, h, opt);
}

WeightFn::WeightFn() : terms_{PowerExpTerm{}}, spec_(json{{"kind", "const"}, {"value", 1.0}}) {}

WeightFn WeightFn::constant(double c) {
  require_nonneg(c, "constant weight");
  WeightFn w;
  w.terms_ = {PowerExpTerm{c, 0.0, 0.0, 0.0, kInf}};
  w.spec_ = json{{"kind", "const"}, {"value", c}};
  return w;
}

WeightFn WeightFn::power(double alpha, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo)) throw PreconditionError("power weight needs 0 <= a < b");
  WeightFn w;
  w.terms_ = {PowerExpTerm{1.0, alpha, 0.0, lo, hi}};
  w.spec_ = json{{"kind", "power"}, {"alpha", alpha}};
  if (lo != 0.0) w.spec_["a"] = lo;
  if (!std::isinf(hi)) w.spec_["b"] = hi;
  return w;
}

WeightFn WeightFn::exponential(double beta) {
  WeightFn w;
  w.terms_ = {PowerExpTerm{1.0, 0.0, beta, 0.0, kInf}};
  w.spec_ = json{{"kind", "exp"}, {"beta", beta}};
  return w;
}

WeightFn WeightFn::indicator(double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw PreconditionError("indicator needs 0 <= a <= b");
  WeightFn w;
  w.terms_.clear();
  if (b > a) w.terms_ = {PowerExpTerm{1.0, 0.0, 0.0, a, b}};
  w.spec_ = json{{"kind", "indicator"}, {"a", a}, {"b", std::isinf(b) ? json("inf") : json(b)}};
  return w;
}

WeightFn WeightFn::grid(const std::vector<double>& breaks, const std::vector<double>& values,
                        const std::vector<double>& exponents) {
  if (breaks.size() != values.size() + 1) throw PreconditionError("grid weight needs |breakpoints| = |values| + 1");
  if (!exponents.empty() && exponents.size() != values.size()) {
    throw PreconditionError("grid weight exponents must match values");
  }
  WeightFn w;
  w.terms_.clear();
  for (std::size_t i = 0; i < values.size(); ++i) {
    require_nonneg(values[i], "grid weight value");
    if (!(breaks[i + 1] > breaks[i]) || breaks[i] < 0.0) {
      throw PreconditionError("grid breakpoints must be nonnegative and strictly increasing");
    }
    const double e = exponents.empty() ? 0.0 : exponents[i];
    if (values[i] != 0.0) w.terms_.push_back(PowerExpTerm{values[i], e, 0.0, breaks[i], breaks[i + 1]});
  }
  json jb = json::array();
  for (double b : breaks) jb.push_back(std::isinf(b) ? json("inf") : json(b));
  w.spec_ = json{{"kind", "grid"}, {"breakpoints", jb}, {"values", values}};
  if (!exponents.empty()) w.spec_["exponents"] = exponents;
  return w;
}

WeightFn WeightFn::product(const std::vector<WeightFn>& factors) {
  WeightFn w;
  json specs = json::array();
  bool all_closed = true;
  for (const auto& f : factors) {
    specs.push_back(f.spec_);
    all_closed = all_closed && f.is_closed_form();
  }
  if (all_closed) {
    std::vector<PowerExpTerm> acc = {PowerExpTerm{}};
    for (const auto& f : factors) acc = multiply_terms(acc, f.terms_);
    w.terms_ = std::move(acc);
  } else {
    std::vector<WeightFn> copy = factors;
    std::vector<double> br;
    for (const auto& f : factors) {
      auto b = f.breakpoints();
      br.insert(br.end(), b.begin(), b.end());
    }
    w = custom(
        [copy](double x) {
          double v = 1.0;
          for (const auto& f : copy) v = mul0(v, f(x));
          return v;
        },
        "product", br);
  }
  w.spec_ = json{{"kind", "product"}, {"factors", specs}};
  return w;
}

WeightFn WeightFn::sum(const std::vector<WeightFn>& terms) {
  WeightFn w;
  json specs = json::array();
  bool all_closed = true;
  for (const auto& f : terms) {
    specs.push_back(f.spec_);
    all_closed = all_closed && f.is_closed_form();
  }
  if (all_closed) {
    w.terms_.clear();
    for (const auto& f : terms) w.terms_.insert(w.terms_.end(), f.terms_.begin(), f.terms_.end());
  } else {
    std::vector<WeightFn> copy = terms;
    std::vector<double> br;
    for (const auto& f : terms) {
      auto b = f.breakpoints();
      br.insert(br.end(), b.begin(), b.end());
    }
    w = custom(
        [copy](double x) {
          double v = 0.0;
          for (const auto& f : copy) v += f(x);
          return v;
        },
        "sum", br);
  }
  w.spec_ = json{{"kind", "sum"}, {"terms", specs}};
  return w;
}

WeightFn WeightFn::custom(RealFn fn, std::string name, std::vector<double> breakpoints) {
  WeightFn w;
  w.terms_.clear();
  w.custom_ = std::make_shared<const RealFn>(std::move(fn));
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  w.custom_breaks_ = std::move(breakpoints);
  w.spec_ = json{{"kind", "custom"}, {"name", std::move(name)}};
  return w;
}

namespace {
double json_number(const json& j) {
  if (j.is_string()) return parse_extended(j.get<std::string>());
  return j.get<double>();
}
}  // namespace

WeightFn WeightFn::from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw PreconditionError("weight JSON needs a 'kind' field");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const" || kind == "one") return constant(j.value("value", 1.0));
  if (kind == "power") {
    return power(j.at("alpha").get<double>(), j.contains("a") ? json_number(j["a"]) : 0.0,
                 j.contains("b") ? json_number(j["b"]) : kInf);
  }
  if (kind == "exp") return exponential(j.value("beta", 1.0));
  if (kind == "indicator") return indicator(json_number(j.at("a")), json_number(j.at("b")));
  if (kind == "grid") {
    std::vector<double> br;
    for (const auto& b : j.at("breakpoints")) br.push_back(json_number(b));
    std::vector<double> ex;
    if (j.contains("exponents")) ex = j["exponents"].get<std::vector<double>>();
    return grid(br, j.at("values").get<std::vector<double>>(), ex);
  }
  if (kind == "product") {
    std::vector<WeightFn> fs;
    for (const auto& f : j.at("factors")) fs.push_back(from_json(f));
    return product(fs);
  }
  if (kind == "sum") {
    std::vector<WeightFn> fs;
    for (const auto& f : j.at("terms")) fs.push_back(from_json(f));
    return sum(fs);
  }
  throw PreconditionError("unknown weight kind '" + kind + "'");
}

double WeightFn::operator()(double x) const {
  if (custom_) return (*custom_)(x);
  double v = 0.0;
  for (const auto& t : terms_) v += t(x);
  return v;
}

ExtReal WeightFn::integrate(double a, double b) const {
  if (!(a >= 0.0) || !(b >= a)) throw PreconditionError("integrate requires 0 <= a <= b");
  if (a == b) return 0.0;
  if (custom_) {
    QuadOptions opt;
    return integrate_pieces(*custom_, a, b, custom_breaks_, opt);
  }
  double total = 0.0;
  for (const auto& t : terms_) {
    const double v = t.integral(a, b);
    if (std::isinf(v)) return ExtReal::infinity();
    total += v;
  }
  return std::max(0.0, total);
}

WeightFn WeightFn::scaled(double c) const {
  require_nonneg(c, "scale factor");
  WeightFn w = *this;
  if (custom_) {
    auto fn = custom_;
    w = custom([fn, c](double x) { return mul0(c, (*fn)(x)); }, "scaled", custom_breaks_);
  } else {
    for (auto& t : w.terms_) t.coef *= c;
    w.terms_.erase(std::remove_if(w.terms_.begin(), w.terms_.end(), [](const PowerExpTerm& t) { return t.coef == 0.0; }),
                   w.terms_.end());
  }
  w.spec_ = json{{"kind", "product"}, {"factors", json::array({json{{"kind", "const"}, {"value", c}}, spec_})}};
  return w;
}

WeightFn WeightFn::reciprocal() const {
  if (!custom_ && terms_.size() == 1 && terms_[0].lo == 0.0 && std::isinf(terms_[0].hi)) {
    const auto& t = terms_[0];
    WeightFn w;
    w.terms_ = {PowerExpTerm{1.0 / t.coef, -t.alpha, -t.beta, 0.0, kInf}};
    w.spec_ = json{{"kind", "reciprocal"}, {"of", spec_}};
    return w;
  }
  WeightFn self = *this;
  WeightFn w = custom([self](double x) { return div0(1.0, self(x)); }, "reciprocal", breakpoints());
  w.spec_ = json{{"kind", "reciprocal"}, {"of", spec_}};
  return w;
}

bool WeightFn::is_zero() const {
  if (custom_) return false;
  return std::all_of(terms_.begin(), terms_.end(), [](const PowerExpTerm& t) { return t.coef == 0.0 || !(t.hi > t.lo); });
}

std::vector<double> WeightFn::breakpoints() const {
  std::vector<double> br = custom_breaks_;
  for (const auto& t : terms_) {
    if (t.lo > 0.0) br.push_back(t.lo);
    if (std::isfinite(t.hi)) br.push_back(t.hi);
  }
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  return br;
}

RealFn WeightFn::as_function() const {
  WeightFn self = *this;
  return [self](double x) { return self(x); };
}

ExtReal integrate(const WeightFn& w, ExtReal a, ExtReal b) { return w.integrate(a.value(), b.value()); }

double ess_sup_fn(const RealFn& f, double a, double b, const std::vector<double>& breaks, int samples) {
  if (!(b > a)) return 0.0;
  const double lo = std::max(a, 1e-9);
  const double hi = std::min(b, 1e9);
  std::vector<double> pts;
  if (hi > lo) pts = log_grid(lo, hi, samples);
  if (a > 0.0) pts.push_back(a);
  if (std::isfinite(b)) pts.push_back(b * (1.0 - 1e-13));
  for (double x : breaks) {
    if (x > a && x <= b) {
      pts.push_back(x);
      pts.push_back(x * (1.0 - 1e-13));
    }
  }
  if (a == 0.0) pts.push_back(std::min(1e-12, 0.5 * b));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double v = f(pts[i]);
    if (std::isnan(v)) continue;
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (std::isinf(best) || best == 0.0 || pts.size() < 3) return best;
  // refine inside the neighbouring grid cells
  const double l = pts[arg == 0 ? 0 : arg - 1];
  const double r = pts[std::min(arg + 1, pts.size() - 1)];
  if (r > l && l > 0.0) {
    auto g = [&](double s) { return f(std::exp(s)); };
    const double s = golden_max(g, std::log(l), std::log(r), 1e-14);
    best = std::max(best, g(s));
  }
  return best;
}

ExtReal ess_sup(const WeightFn& w, ExtReal a_, ExtReal b_) {
  const double a = a_.value(), b = b_.value();
  if (!(b > a)) return 0.0;
  if (w.is_closed_form()) {
    for (const auto& t : w.terms()) {
      const double lo = std::max(a, t.lo), hi = std::min(b, t.hi);
      if (!(hi > lo) || t.coef == 0.0) continue;
      if (lo == 0.0 && (t.alpha < 0.0)) return ExtReal::infinity();
      if (std::isinf(hi) && (t.beta < 0.0 || (t.beta == 0.0 && t.alpha > 0.0))) return ExtReal::infinity();
    }
  }
  return ess_sup_fn(w.as_function(), a, b, w.breakpoints());
}

}  // namespace hol
