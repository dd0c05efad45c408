#pragma once

// Adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals,
// Gauss-Legendre rules and golden-section search.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "hol/extreal.hpp"

namespace hol {

/// Adaptive refinement hit its subdivision cap before reaching tolerance.
class QuadratureError : public DiagnosticError {
 public:
  QuadratureError(const std::string& what, double partial, double error)
      : DiagnosticError(what + " (partial estimate " + std::to_string(partial) + ", error estimate " +
                        std::to_string(error) + ")"),
        partial_(partial),
        error_(error) {}
  [[nodiscard]] double partial() const { return partial_; }
  [[nodiscard]] double error() const { return error_; }

 private:
  double partial_;
  double error_;
};

struct QuadOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_subdivisions = 2000;
  bool throw_on_failure = true;
  // Semi-infinite integrals are summed over doubling blocks; the sum is not
  // declared converged before the blocks pass this point (and its mirror
  // image 1/scale_hint near the origin).
  double scale_hint = 1e6;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  kron *= h;
  gauss *= h;
  double err = std::abs(kron - gauss);
  if (!std::isfinite(kron)) err = kInf;
  return {a, b, kron, err};
}

}  // namespace detail

/// Globally adaptive G7-K15 on a finite interval [a, b].
template <class F>
QuadResult gk_adaptive(const F& f, double a, double b, const QuadOptions& opt = {}) {
  if (!(b > a)) return {};
  std::priority_queue<detail::Segment> heap;
  detail::Segment first = detail::gk15(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int splits = 0;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (splits >= opt.max_subdivisions || !std::isfinite(total)) {
      return {total, err, false};
    }
    detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) return {total, err, false};
    detail::Segment left = detail::gk15(f, worst.a, mid);
    detail::Segment right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
    if (splits % 64 == 0) {  // resum to shed accumulated rounding
      std::vector<detail::Segment> all;
      all.reserve(heap.size());
      total = 0.0;
      err = 0.0;
      while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
      }
      for (const auto& s : all) {
        total += s.value;
        err += s.error;
        heap.push(s);
      }
    }
  }
  return {total, err, true};
}

namespace detail {

template <class F>
double checked_block(const F& f, double a, double b, const QuadOptions& opt, double scale) {
  QuadOptions o = opt;
  o.abs_tol = std::max(opt.abs_tol, 0.1 * opt.rel_tol * scale);
  QuadResult r = gk_adaptive(f, a, b, o);
  if (!r.converged && std::isfinite(r.value) && opt.throw_on_failure) {
    throw QuadratureError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]",
                          r.value, r.error);
  }
  if (!std::isfinite(r.value)) return kInf;
  return r.value;
}

// Integral over [a, inf) as a sum of doubling blocks.
template <class F>
double integrate_upper_tail(const F& f, double a, const QuadOptions& opt) {
  double c = a;
  double total = 0.0;
  int quiet = 0;
  const double stop_after = std::max(a * 256.0, opt.scale_hint);
  while (c < 1e300) {
    const double d = 2.0 * c;
    const double block = checked_block(f, c, d, opt, std::abs(total));
    if (std::isinf(block)) return kInf;
    total += block;
    if (total != 0.0 && std::abs(block) <= 0.25 * opt.rel_tol * std::abs(total)) {
      ++quiet;
    } else {
      quiet = 0;
    }
    c = d;
    if (quiet >= 4 && c >= stop_after) return total;
  }
  return total == 0.0 ? 0.0 : kInf;
}

// Integral over (0, b] as a sum of halving blocks.
template <class F>
double integrate_lower_tail(const F& f, double b, const QuadOptions& opt) {
  double c = b;
  double total = 0.0;
  int quiet = 0;
  const double stop_after = std::min(b / 256.0, 1.0 / opt.scale_hint);
  while (c > 1e-300) {
    const double d = 0.5 * c;
    const double block = checked_block(f, d, c, opt, std::abs(total));
    if (std::isinf(block)) return kInf;
    total += block;
    if (total != 0.0 && std::abs(block) <= 0.25 * opt.rel_tol * std::abs(total)) {
      ++quiet;
    } else {
      quiet = 0;
    }
    c = d;
    if (quiet >= 4 && c <= stop_after) return total;
  }
  return total == 0.0 ? 0.0 : kInf;
}

}  // namespace detail

/// Integral of a nonnegative-valued function over [a, b], 0 <= a <= b <= inf.
/// Divergent integrals come back as +inf; a finite block that fails to
/// converge raises QuadratureError unless opt.throw_on_failure is false.
template <class F>
double integrate_fn(const F& f, double a, double b, const QuadOptions& opt = {}) {
  if (!(a >= 0.0) || !(b >= a)) throw PreconditionError("integrate_fn requires 0 <= a <= b");
  if (a == b) return 0.0;
  if (std::isinf(b)) {
    double head = 0.0;
    double start = a;
    if (a == 0.0) {
      head = integrate_fn(f, 0.0, 1.0, opt);
      if (std::isinf(head)) return kInf;
      start = 1.0;
    }
    const double tail = detail::integrate_upper_tail(f, start, opt);
    return head + tail;
  }
  // wide intervals go in geometric blocks so mass near the left end is seen
  if (a == 0.0 && b > 1.0) {
    const double head = integrate_fn(f, 0.0, 1.0, opt);
    if (std::isinf(head)) return kInf;
    const double rest = integrate_fn(f, 1.0, b, opt);
    return std::isinf(rest) ? kInf : head + rest;
  }
  if (a > 0.0 && b / a > 64.0) {
    const int n = static_cast<int>(std::ceil(std::log2(b / a) / 4.0));
    double total = 0.0, lo = a;
    for (int i = 1; i <= n; ++i) {
      const double hi = i == n ? b : a * std::pow(b / a, static_cast<double>(i) / n);
      QuadResult r = gk_adaptive(f, lo, hi, opt);
      if (!std::isfinite(r.value)) return kInf;
      if (!r.converged && opt.throw_on_failure) {
        throw QuadratureError("adaptive quadrature did not converge", r.value, r.error);
      }
      total += r.value;
      lo = hi;
    }
    return total;
  }
  if (a == 0.0) {
    QuadOptions o = opt;
    o.throw_on_failure = false;
    QuadResult r = gk_adaptive(f, 0.0, b, o);
    if (r.converged && std::isfinite(r.value)) return r.value;
    return detail::integrate_lower_tail(f, b, opt);
  }
  QuadResult r = gk_adaptive(f, a, b, opt);
  if (!r.converged && opt.throw_on_failure && std::isfinite(r.value)) {
    throw QuadratureError("adaptive quadrature did not converge", r.value, r.error);
  }
  return std::isfinite(r.value) ? r.value : kInf;
}

/// Integral over [a, b] split at the given interior breakpoints.
template <class F>
double integrate_pieces(const F& f, double a, double b, const std::vector<double>& breaks,
                        const QuadOptions& opt = {}) {
  std::vector<double> pts{a};
  for (double x : breaks) {
    if (x > a && x < b) pts.push_back(x);
  }
  std::sort(pts.begin() + 1, pts.end());
  pts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] <= pts[i]) continue;
    const double piece = integrate_fn(f, pts[i], pts[i + 1], opt);
    if (std::isinf(piece)) return kInf;
    total += piece;
  }
  return total;
}

/// Vector-valued adaptive G7-K15 on a finite interval: f(x, out) fills m values.
/// The error criterion is applied to the largest component.
template <class F>
std::vector<double> gk_adaptive_vec(const F& f, int m, double a, double b, double rel_tol, int max_splits = 400) {
  struct Seg {
    double a, b, err;
    std::vector<double> val;
    bool operator<(const Seg& o) const { return err < o.err; }
  };
  std::vector<double> buf(m);
  auto rule = [&](double lo, double hi) {
    Seg s{lo, hi, 0.0, std::vector<double>(m, 0.0)};
    std::vector<double> gauss(m, 0.0);
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    f(c, buf.data());
    for (int k = 0; k < m; ++k) {
      s.val[k] = buf[k] * detail::kWgk[7];
      gauss[k] = buf[k] * detail::kWg[3];
    }
    std::vector<double> tmp(m);
    for (int j = 0; j < 7; ++j) {
      const double dx = h * detail::kXgk[j];
      f(c - dx, buf.data());
      for (int k = 0; k < m; ++k) tmp[k] = buf[k];
      f(c + dx, buf.data());
      for (int k = 0; k < m; ++k) {
        const double sum = tmp[k] + buf[k];
        s.val[k] += detail::kWgk[j] * sum;
        if (j % 2 == 1) gauss[k] += detail::kWg[j / 2] * sum;
      }
    }
    double err = 0.0;
    for (int k = 0; k < m; ++k) {
      s.val[k] *= h;
      err = std::max(err, std::abs(s.val[k] - h * gauss[k]));
    }
    s.err = std::isfinite(err) ? err : kInf;
    return s;
  };
  auto magnitude = [&](const std::vector<double>& v) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    return mx;
  };
  std::priority_queue<Seg> heap;
  Seg first = rule(a, b);
  std::vector<double> total = first.val;
  double err = first.err;
  heap.push(std::move(first));
  for (int splits = 0; splits < max_splits && err > rel_tol * magnitude(total); ++splits) {
    Seg worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    Seg l = rule(worst.a, mid);
    Seg r = rule(mid, worst.b);
    for (int k = 0; k < m; ++k) total[k] += l.val[k] + r.val[k] - worst.val[k];
    err += l.err + r.err - worst.err;
    heap.push(std::move(l));
    heap.push(std::move(r));
  }
  return total;
}

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    g.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    g.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

/// Golden-section search for a maximizer of a unimodal f on [a, b].
template <class F>
double golden_max(const F& f, double a, double b, double tol = 1e-10, int max_iter = 200) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol * (std::abs(a) + std::abs(b) + 1e-300); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

/// Log-uniform points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) g[i] = std::exp(a + (b - a) * i / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace hol
