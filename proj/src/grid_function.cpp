#include "hol/grid_function.hpp"

#include <algorithm>
#include <cmath>

namespace hol {

using nlohmann::json;

GridFunction::GridFunction(std::vector<double> breaks, std::vector<double> values, bool decreasing)
    : breaks_(std::move(breaks)), values_(std::move(values)), decreasing_(decreasing) {
  if (values_.empty() && breaks_.empty()) return;
  if (breaks_.size() != values_.size() + 1) {
    throw PreconditionError("grid function needs |breakpoints| = |values| + 1");
  }
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (!(breaks_[i + 1] > breaks_[i])) throw PreconditionError("grid breakpoints must be strictly increasing");
  }
  if (breaks_.front() < 0.0) throw PreconditionError("grid breakpoints must be nonnegative");
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (std::isinf(breaks_[i])) throw PreconditionError("only the last breakpoint may be infinite");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || std::isinf(values_[i])) {
      throw PreconditionError("grid values must be finite and nonnegative");
    }
    if (decreasing_ && i > 0 && values_[i] > values_[i - 1]) {
      throw PreconditionError("values of a decreasing grid function must be nonincreasing");
    }
  }
}

GridFunction GridFunction::constant(double c, double lo, double hi) { return GridFunction({lo, hi}, {c}, true); }

GridFunction GridFunction::average(const RealFn& f, std::vector<double> breaks) {
  std::vector<double> vals;
  QuadOptions opt;
  opt.rel_tol = 1e-10;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (std::isinf(breaks[i + 1])) throw PreconditionError("cell averages need finite breakpoints");
    vals.push_back(integrate_fn(f, breaks[i], breaks[i + 1], opt) / (breaks[i + 1] - breaks[i]));
  }
  return GridFunction(std::move(breaks), std::move(vals));
}

GridFunction GridFunction::sample(const RealFn& f, std::vector<double> breaks) {
  std::vector<double> vals;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    double m;
    if (std::isinf(b)) {
      m = 2.0 * std::max(a, 1.0);
    } else if (a == 0.0) {
      m = 0.5 * b;
    } else {
      m = std::sqrt(a * b);
    }
    vals.push_back(f(m));
  }
  return GridFunction(std::move(breaks), std::move(vals));
}

GridFunction GridFunction::from_json(const json& j) {
  std::vector<double> br;
  for (const auto& b : j.at("breakpoints")) br.push_back(b.is_string() ? parse_extended(b.get<std::string>()) : b.get<double>());
  return GridFunction(std::move(br), j.at("values").get<std::vector<double>>(), j.value("decreasing", false));
}

double GridFunction::operator()(double x) const {
  if (values_.empty() || x < breaks_.front() || x >= breaks_.back()) return 0.0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

bool GridFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double GridFunction::integral(double a, double b) const {
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double l = std::max(a, breaks_[i]);
    const double h = std::min(b, breaks_[i + 1]);
    if (h > l && values_[i] != 0.0) total += values_[i] * (h - l);
  }
  return total;
}

GridFunction GridFunction::scaled(double c) const {
  if (!(c >= 0.0)) throw PreconditionError("scale factor must be nonnegative");
  GridFunction g = *this;
  for (auto& v : g.values_) v *= c;
  return g;
}

json GridFunction::to_json() const {
  json br = json::array();
  for (double b : breaks_) br.push_back(std::isinf(b) ? json("inf") : json(b));
  return json{{"breakpoints", br}, {"values", values_}, {"decreasing", decreasing_}};
}

RealFn GridFunction::as_function() const {
  GridFunction self = *this;
  return [self](double x) { return self(x); };
}

Exponents::Exponents(double p_, double r_, double q_) : p(p_), r(r_), q(q_) {
  if (!(p >= 1.0)) throw PreconditionError("p must be at least 1");
  if (!(r > 0.0)) throw PreconditionError("r must be positive");
  if (!(q > 0.0)) throw PreconditionError("q must be positive");
}

double Exponents::s() const {
  if (p <= r) return kInf;
  const double inv = 1.0 / r - (std::isinf(p) ? 0.0 : 1.0 / p);
  return 1.0 / inv;
}

ExtReal lebesgue_norm(const GridFunction& f, double p, const WeightFn& v) {
  if (!(p > 0.0)) throw PreconditionError("norm exponent must be positive");
  if (std::isinf(p)) {
    double best = 0.0;
    for (std::size_t i = 0; i < f.cells(); ++i) {
      if (f.values()[i] == 0.0) continue;
      best = std::max(best, mul0(f.values()[i], ess_sup(v, f.lo(i), f.hi(i)).value()));
    }
    return best;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const double fi = f.values()[i];
    if (fi == 0.0) continue;
    total += mul0(std::pow(fi, p), v.integrate(f.lo(i), f.hi(i)).value());
  }
  return pow0(total, 1.0 / p);
}

ExtReal lebesgue_norm_fn(const RealFn& f, double p, const WeightFn& v, double a, double b,
                         const std::vector<double>& breaks) {
  if (!(p > 0.0)) throw PreconditionError("norm exponent must be positive");
  std::vector<double> br = breaks;
  const auto vb = v.breakpoints();
  br.insert(br.end(), vb.begin(), vb.end());
  if (std::isinf(p)) {
    return ess_sup_fn([&](double x) { return mul0(f(x), v(x)); }, a, b, br);
  }
  const double total = integrate_pieces([&](double x) { return mul0(std::pow(f(x), p), v(x)); }, a, b, br);
  return pow0(total, 1.0 / p);
}

}  // namespace hol
