#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hol/form.hpp"
#include "hol/quadrature.hpp"

using namespace hol;

namespace {

RealFn zero_fn() {
  return [](double) { return 0.0; };
}
RealFn id_fn() {
  return [](double x) { return x; };
}
RealFn inf_fn() {
  return [](double) { return kInf; };
}

FormSpec hardy(const WeightFn& U, double r, double p) {
  FormSpec s;
  s.inner = InnerSpec{zero_fn(), id_fn(), std::nullopt};
  s.U = U.as_function();
  s.U_breaks = U.breakpoints();
  s.r = r;
  s.p = p;
  s.x_min = 1e-3;
  s.x_max = 1e3;
  s.cells = 96;
  return s;
}

void check_gradient(const Form& F, const std::vector<double>& f) {
  std::vector<double> gN, gD;
  F.numerator(f, &gN);
  F.denominator(f, &gD);
  double gmax = 0.0, dmax = 0.0;
  for (int c = 0; c < F.dim(); ++c) {
    gmax = std::max(gmax, std::abs(gN[c]));
    dmax = std::max(dmax, std::abs(gD[c]));
  }
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, F.dim() - 1);
  int checked = 0;
  for (int t = 0; t < 400 && checked < 12; ++t) {
    const int c = pick(rng);
    if (!F.active(c) || f[c] <= 0.0) continue;
    const double h = 1e-4 * f[c];
    auto fp = f, fm = f;
    fp[c] += h;
    fm[c] -= h;
    const double dN = (F.numerator(fp) - F.numerator(fm)) / (2 * h);
    const double dD = (F.denominator(fp) - F.denominator(fm)) / (2 * h);
    CHECK(gN[c] == doctest::Approx(dN).epsilon(1e-5).scale(1e-3 * gmax));
    CHECK(gD[c] == doctest::Approx(dD).epsilon(1e-5).scale(1e-3 * dmax));
    ++checked;
  }
  CHECK(checked > 0);
}

}  // namespace

TEST_CASE("mesh nodes and weights") {
  const Mesh m({0.0, 1.0, 2.0, 4.0});
  CHECK(m.cells() == 4);
  CHECK(m.is_tail(3));
  CHECK(std::isinf(m.hi(3)));
  for (int b = 1; b < m.nodes(); ++b) CHECK(m.x(b) > m.x(b - 1));
  CHECK(m.locate(1.0) == 1);
  CHECK(m.locate(100.0) == 3);
  // Lagrange weights integrate polynomials of the cell degree exactly
  for (int c = 0; c < 3; ++c) {
    const auto w = m.product_weights(c, m.lo(c), m.hi(c), 1, [](double, double* v) { v[0] = 1.0; });
    double tot = 0.0, mom = 0.0;
    for (int k = 0; k < m.node_count(c); ++k) {
      tot += w[k];
      mom += w[k] * m.x(m.first_node(c) + k);
    }
    CHECK(tot == doctest::Approx(m.hi(c) - m.lo(c)).epsilon(1e-12));
    CHECK(mom == doctest::Approx(0.5 * (m.hi(c) * m.hi(c) - m.lo(c) * m.lo(c))).epsilon(1e-12));
  }
  // tail cell: int_4^inf y^-2 = 1/4
  const auto w = m.product_weights(3, 4.0, kInf, 1, [](double y, double* v) { v[0] = 1.0 / (y * y); });
  double tot = 0.0;
  for (double x : w) tot += x;
  CHECK(tot == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("single level Hardy form on an indicator") {
  auto spec = hardy(WeightFn::indicator(0, 4), 2.0, 2.0);
  spec.extra_breaks = {1.0, 2.0};
  const Form F(spec);
  const auto f = F.sample([](double x) { return (x >= 1.0 && x < 2.0) ? 1.0 : 0.0; });
  CHECK(F.numerator(f) == doctest::Approx(std::sqrt(7.0 / 3.0)).epsilon(1e-9));
  CHECK(F.denominator(f) == doctest::Approx(1.0).epsilon(1e-12));
  const auto g = F.to_grid(f);
  CHECK(g.integral(0, 10) == doctest::Approx(1.0).epsilon(1e-12));
  const auto back = F.from_grid(g);
  for (int c = 0; c < F.dim(); ++c) CHECK(back[c] == doctest::Approx(f[c]).epsilon(1e-12));
}

TEST_CASE("Hardy form on a power profile matches quadrature") {
  // U = x^-2 on R+, f = x^-1/2 on [x_min, x_max]
  const auto U = WeightFn::power(-2.0);
  auto spec = hardy(U, 2.0, 2.0);
  const Form F(spec);
  const auto f = F.sample([](double x) { return 1.0 / std::sqrt(x); });
  const auto g = F.to_grid(f);
  const double a = spec.x_min;
  auto I = [&](double x) { return g.integral(0.0, x); };
  auto integrand = [&](double x) { return std::pow(x, -2.0) * I(x) * I(x); };
  std::vector<double> br = g.breakpoints();
  const double direct = std::sqrt(integrate_pieces(integrand, a, kInf, br, {}));
  CHECK(F.numerator(f) == doctest::Approx(direct).epsilon(1e-6));
  check_gradient(F, f);
}

TEST_CASE("two level form with kernel matches nested quadrature") {
  // (int_0^inf u(x) (int_x^inf w(y) (int_0^y (y - z) f(z) dz)^q dy)^(r/q) dx)^(1/r)
  const auto u = WeightFn::exponential(1.0);
  const auto w = WeightFn::product({WeightFn::power(-3.0), WeightFn::indicator(0.5, 1e9)});
  FormSpec s;
  s.inner = InnerSpec{zero_fn(), id_fn(), LevelKernel{KernelFn::difference_power(1.0), true, {}}};
  s.outer = OuterSpec{id_fn(), inf_fn(), w.as_function(), w.breakpoints(), std::nullopt, 2.0};
  s.U = u.as_function();
  s.r = 1.5;
  s.p = 2.0;
  s.x_min = 1e-2;
  s.x_max = 20.0;
  s.cells = 64;
  const Form F(s);
  const auto f = F.sample([](double x) { return std::exp(-x) * (1.0 + std::sin(x)); });
  const auto g = F.to_grid(f);
  const auto br = g.breakpoints();
  QuadOptions o;
  o.rel_tol = 1e-9;
  auto inner = [&](double y) {
    return integrate_pieces([&](double z) { return (y - z) * g(z); }, 0.0, y, br, o);
  };
  auto outer = [&](double x) {
    std::vector<double> b2 = br;
    b2.push_back(0.5);
    return integrate_pieces([&](double y) { return w(y) * std::pow(inner(y), 2.0); }, x, kInf, b2, o);
  };
  o.rel_tol = 1e-7;
  const double direct =
      std::pow(integrate_pieces([&](double x) { return u(x) * std::pow(outer(x), 0.75); }, 0.0, kInf, {0.5}, o), 1 / 1.5);
  CHECK(F.numerator(f) == doctest::Approx(direct).epsilon(1e-5));
  check_gradient(F, f);
}

TEST_CASE("sup levels") {
  // r = inf: sup_x 1 * int_0^x f over the window
  auto spec = hardy(WeightFn::constant(1.0), kInf, 1.0);
  spec.extra_breaks = {1.0, 3.0};
  const Form F(spec);
  const auto f = F.sample([](double x) { return (x >= 1.0 && x < 3.0) ? 1.0 : 0.0; });
  CHECK(F.numerator(f) == doctest::Approx(2.0).epsilon(1e-9));
  // q = inf outer: (int_0^2 sup_{y >= x} chi_[0,5](y) I(y) dx)
  FormSpec s = hardy(WeightFn::indicator(0, 2), 1.0, 2.0);
  const auto w = WeightFn::indicator(0, 5);
  s.outer = OuterSpec{id_fn(), inf_fn(), w.as_function(), w.breakpoints(), std::nullopt, kInf};
  s.extra_breaks = {1.0, 3.0};
  const Form G(s);
  const auto h = G.sample([](double x) { return (x >= 1.0 && x < 3.0) ? 1.0 : 0.0; });
  CHECK(G.numerator(h) == doctest::Approx(4.0).epsilon(1e-6));
  // p = inf denominator
  auto sp = hardy(WeightFn::indicator(0, 4), 2.0, kInf);
  sp.v = WeightFn::power(1.0);
  sp.extra_breaks = {2.0};
  const Form P(sp);
  const auto one = P.sample([](double x) { return x < 2.0 ? 1.0 : 0.0; });
  CHECK(P.denominator(one) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("divergent weights give an infinite form") {
  auto s = hardy(WeightFn::power(-1.0), 2.0, 2.0);
  const Form F(s);
  const auto f = F.sample([](double x) { return x < 1.0 ? 1.0 : 0.0; });
  CHECK(std::isinf(F.numerator(f)));
}

TEST_CASE("non-separable kernels match quadrature") {
  // (int_0^inf e^-x (int_0^x (x - z)^(1/2) f(z) dz)^2 dx)^(1/2)
  FormSpec s;
  s.inner = InnerSpec{zero_fn(), id_fn(), LevelKernel{KernelFn::difference_power(0.5), true, {}}};
  const auto u = WeightFn::exponential(1.0);
  s.U = u.as_function();
  s.r = 2.0;
  s.p = 2.0;
  s.x_min = 1e-2;
  s.x_max = 30.0;
  s.cells = 96;
  const Form F(s);
  const auto f = F.sample([](double x) { return 1.0 / (1.0 + x); });
  const auto g = F.to_grid(f);
  const auto br = g.breakpoints();
  QuadOptions o;
  o.rel_tol = 1e-10;
  auto inner = [&](double x) {
    return integrate_pieces([&](double z) { return std::sqrt(std::max(0.0, x - z)) * g(z); }, 0.0, x, br, o);
  };
  o.rel_tol = 1e-8;
  const double direct = std::sqrt(integrate_pieces([&](double x) { return u(x) * std::pow(inner(x), 2.0); }, 0.0, kInf, br, o));
  CHECK(F.numerator(f) == doctest::Approx(direct).epsilon(1e-5));
  check_gradient(F, f);
}
