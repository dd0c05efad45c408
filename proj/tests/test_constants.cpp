#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hol/constants.hpp"

using namespace hol;

namespace {

ConstantsConfig quick() {
  ConstantsConfig c;
  c.oracle.grid_points = 128;
  c.oracle.restarts = 4;
  c.local.grid_points = 64;
  c.local.restarts = 3;
  c.a2_x_min = 1e-3;
  c.a2_x_max = 1e3;
  c.t_per_cell = 2;
  return c;
}

TheoremData exp_preset(double p, double r, double q) {
  TheoremData d;
  d.u = WeightFn::exponential(1.0);
  d.w = WeightFn::exponential(1.0);
  d.v = WeightFn::constant(1.0);
  d.e = Exponents(p, r, q);
  return d;
}

}  // namespace

TEST_CASE("theorem names round-trip") {
  for (const char* s : {"2.1", "2.2", "3.1", "3.2", "4.1", "4.2", "5.1", "5.2"}) CHECK(to_string(parse_theorem(s)) == s);
  CHECK_THROWS_AS(parse_theorem("6.1"), PreconditionError);
  CHECK(theorem_operator(Theorem::T42) == OpTag::boldS);
  CHECK(sigma_side(Theorem::T41));
  CHECK(!sigma_side(Theorem::T32));
}

TEST_CASE("indicator kernel with r = q makes A0 and A1 coincide") {
  const auto cfg = quick();
  const auto [a0, a1] = compute_A0_A1(Theorem::T21, exp_preset(2, 2, 2), cfg);
  CHECK(a0.value.value() > 0.0);
  CHECK(a0.value.value() == doctest::Approx(a1.value.value()).epsilon(1e-5));
}

TEST_CASE("A1 sits inside the Muckenhoupt bracket") {
  auto cfg = quick();
  cfg.oracle.grid_points = 256;
  const auto [a0, a1] = compute_A0_A1(Theorem::T21, exp_preset(2, 2, 2), cfg);
  const double lo = std::exp(-0.5) / 2.0;
  const auto& br = a1.diagnostics.at("bracket");
  CHECK(br[0].get<double>() == doctest::Approx(lo).epsilon(1e-6));
  CHECK(br[1].get<double>() == doctest::Approx(2.0 * lo).epsilon(1e-6));
  CHECK(a1.diagnostics.at("bracket_argmax").get<double>() == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(a1.value.value() >= lo);
  CHECK(a1.value.value() <= 2.0 * lo);
  cfg.muckenhoupt_fast_path = true;
  const auto fast = compute_A0_A1(Theorem::T21, exp_preset(2, 2, 2), cfg);
  CHECK(fast.second.method == "closed-form");
  CHECK(fast.second.value.value() == doctest::Approx(lo).epsilon(1e-6));
}

TEST_CASE("ess sup composite weights") {
  // q = inf: ess sup_{y >= x} e^-y = e^-x, so U = e^-3x and the bracket peaks at t = 1/3
  const auto cfg = quick();
  const auto [a0, a1] = compute_A0_A1(Theorem::T21, exp_preset(2, 2, kInf), cfg);
  const double lo = std::exp(-0.5) / 3.0;
  CHECK(a1.diagnostics.at("bracket")[0].get<double>() == doctest::Approx(lo).epsilon(1e-5));
  CHECK(a1.value.value() >= lo * (1 - 1e-6));
  CHECK(a1.value.value() <= 2.0 * lo);
}

TEST_CASE("vanishing weights give zero terms") {
  const auto cfg = quick();
  auto d = exp_preset(2, 2, 2);
  d.w = WeightFn::constant(0.0);
  const auto [a0, a1] = compute_A0_A1(Theorem::T21, d, cfg);
  CHECK(a0.value.value() == 0.0);
  CHECK(a1.value.value() == 0.0);
  auto z = exp_preset(2, 2, 2);
  z.u = WeightFn::constant(0.0);
  CHECK(compute_A2(Theorem::T21, z, cfg).value.value() == 0.0);
  CHECK(compute_A2(Theorem::T31, z, cfg).value.value() == 0.0);
}

TEST_CASE("two-level auxiliary form against nested quadrature") {
  // 4.1, second inequality: int u(x) k(s2, x) int_{s2}^inf w(y) (int_0^y f)^2 dy dx, s2 = sigma^2(x)
  const auto cfg = quick();
  auto d = exp_preset(2, 2, 2);
  d.k = KernelFn::difference_power(1.0);
  auto spec = auxiliary_form(Theorem::T41, 1, d, cfg);
  spec.extra_breaks.push_back(1.0);
  const Form F(spec);
  const auto f = F.from_grid(GridFunction::constant(1.0, 0.0, 1.0));
  const double n = F.numerator(f);
  auto inner = [](double y) { return std::min(y, 1.0); };
  QuadOptions o;
  o.rel_tol = 1e-9;
  auto outer = [&](double x) {
    const double s2 = sigma_map(d.u, x, 2).value();
    if (std::isinf(s2)) return 0.0;
    const double W = integrate_pieces([&](double y) { return std::exp(-y) * inner(y) * inner(y); }, s2, kInf, {1.0}, o);
    return std::exp(-x) * (s2 - x) * W;
  };
  const double ref = std::sqrt(integrate_pieces(outer, 0.0, std::log(4.0 / 3.0), {}, o));
  CHECK(n == doctest::Approx(ref).epsilon(2e-4));
}

TEST_CASE("zeta-side composite with shifted inner limit against quadrature") {
  // 3.2, first inequality with k = 1, u = e^-x: z2 = zeta^-2(x) = max(x - log 4, 0)
  const auto cfg = quick();
  const auto d = exp_preset(2, 2, 2);
  auto spec = auxiliary_form(Theorem::T32, 0, d, cfg);
  spec.extra_breaks.push_back(2.0);
  const Form F(spec);
  const auto f = F.from_grid(GridFunction::constant(1.0, 0.0, 2.0));
  QuadOptions o;
  o.rel_tol = 1e-9;
  const double L4 = std::log(4.0);
  auto integrand = [&](double x) {
    const double z2 = x - L4;
    if (z2 <= 0.0) return 0.0;
    const double phi = std::exp(-z2) - std::exp(-x);
    const double in = std::min(z2, 2.0);
    return std::exp(-x) * phi * in * in;
  };
  const double ref = std::sqrt(integrate_pieces(integrand, 0.0, kInf, {L4, 2.0 + L4}, o));
  CHECK(F.numerator(f) == doctest::Approx(ref).epsilon(2e-4));
}

TEST_CASE("scaling covariance") {
  const auto cfg = quick();
  const auto d = exp_preset(2, 2, 2);
  const auto base = compute_breakdown(Theorem::T21, d, cfg);
  for (double c : {4.0, 0.25}) {
    auto du = d;
    du.u = d.u.scaled(c);
    const auto bu = compute_breakdown(Theorem::T21, du, cfg);
    const double fu = std::pow(c, 1.0 / d.e.r);
    CHECK(bu.A0.value.value() == doctest::Approx(fu * base.A0.value.value()).epsilon(1e-6));
    CHECK(bu.A1.value.value() == doctest::Approx(fu * base.A1.value.value()).epsilon(1e-6));
    CHECK(bu.A2.value.value() == doctest::Approx(fu * base.A2.value.value()).epsilon(1e-6));
    auto dv = d;
    dv.v = d.v.scaled(c);
    const auto bv = compute_breakdown(Theorem::T21, dv, cfg);
    const double fv = std::pow(c, -1.0 / d.e.p);
    CHECK(bv.total.value() == doctest::Approx(fv * base.total.value()).epsilon(1e-6));
  }
}

TEST_CASE("scaling covariance in the r < p regime") {
  const auto cfg = quick();
  const auto d = exp_preset(2, 1, 2);
  const auto a = compute_A2(Theorem::T21, d, cfg);
  CHECK(a.diagnostics.at("branch") == "integral");
  auto du = d;
  du.u = d.u.scaled(4.0);
  CHECK(compute_A2(Theorem::T21, du, cfg).value.value() == doctest::Approx(4.0 * a.value.value()).epsilon(1e-6));
}

TEST_CASE("A2 supremum for an indicator weight is attained by t = 1") {
  const auto cfg = quick();
  auto d = exp_preset(2, 2, 2);
  d.u = WeightFn::indicator(0.0, 1.0);
  const auto a = compute_A2(Theorem::T21, d, cfg);
  CHECK(a.diagnostics.at("branch") == "sup");
  CHECK(a.value.value() > 0.0);
  CHECK(a.diagnostics.at("argmax_t").get<double>() <= 1.0 + 1e-12);
}

TEST_CASE("breakdowns across theorems and regimes") {
  const auto cfg = quick();
  auto d = exp_preset(2, 2, 2);
  d.k = KernelFn::difference_power(1.0);
  const auto b = compute_breakdown(Theorem::T41, d, cfg);
  CHECK(std::isfinite(b.total.value()));
  CHECK(b.total.value() > 0.0);
  CHECK(b.total.value() == doctest::Approx(b.A0.value.value() + b.A1.value.value() + b.A2.value.value()));
  CHECK(b.regime == "p<=r");
  CHECK(b.to_json().dump() == compute_breakdown(Theorem::T41, d, cfg).to_json().dump());
  for (auto t : {Theorem::T22, Theorem::T31, Theorem::T32, Theorem::T42, Theorem::T51, Theorem::T52}) {
    for (double q : {2.0, kInf}) {
      // v = e^x keeps every inequality of the family bounded
      auto dd = exp_preset(2, 1, q);
      dd.v = WeightFn::exponential(-1.0);
      dd.k = KernelFn::difference_power(0.5);
      const auto bb = compute_breakdown(t, dd, cfg);
      INFO("theorem " << to_string(t) << " q " << q);
      CHECK(bb.regime == "r<p");
      CHECK(bb.q_mode == (std::isinf(q) ? "ess-sup" : "finite"));
      CHECK(bb.A2.diagnostics.at("branch") == "integral");
      CHECK(std::isfinite(bb.total.value()));
      CHECK(bb.total.value() > 0.0);
    }
  }
}

TEST_CASE("terms are bounded by the parent best constant up to the band") {
  auto cfg = quick();
  const auto d = exp_preset(2, 2, 2);
  const auto b = compute_breakdown(Theorem::T21, d, cfg);
  const auto C = best_constant(parent_inequality(Theorem::T21, d), cfg.oracle).value.value();
  const double kappa = 16.0;
  for (const auto* term : {&b.A0, &b.A1, &b.A2}) CHECK(C >= term->value.value() / kappa);
}

TEST_CASE("p = inf and r = inf modes") {
  const auto cfg = quick();
  auto d = exp_preset(kInf, 1, 1);
  const auto b = compute_breakdown(Theorem::T21, d, cfg);
  CHECK(b.mode == "p=inf");
  CHECK(b.total.value() == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(!b.to_json().contains("A0"));
  auto r = exp_preset(2, kInf, 2);
  const auto br = compute_breakdown(Theorem::T21, r, cfg);
  CHECK(br.mode == "r=inf");
  CHECK(br.total.value() > 0.0);
  CHECK(std::isfinite(br.total.value()));
  CHECK_THROWS_AS(compute_breakdown(Theorem::T31, r, cfg), PreconditionError);
}

TEST_CASE("standing assumptions are enforced") {
  const auto cfg = quick();
  auto d = exp_preset(2, 2, 2);
  d.u = WeightFn::constant(1.0);
  CHECK_THROWS_AS(compute_A0_A1(Theorem::T31, d, cfg), PreconditionError);
  d.u = WeightFn::power(-1.0);
  CHECK_THROWS_AS(compute_A2(Theorem::T21, d, cfg), PreconditionError);
}

TEST_CASE("config round trip") {
  ConstantsConfig c;
  c.local.restarts = 7;
  c.t_per_cell = 3;
  const auto back = ConstantsConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
}
