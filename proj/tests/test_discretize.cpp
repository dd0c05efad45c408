#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hol/discretize.hpp"

using namespace hol;

namespace {

std::vector<WeightFn> presets() {
  return {WeightFn::constant(1.0), WeightFn::power(0.5), WeightFn::exponential(1.0), WeightFn::indicator(0, 1)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("sigma examples") {
  const auto one = WeightFn::constant(1.0);
  CHECK(sigma_map(one, 3.0, 1).value() == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(sigma_map(one, 3.0, -1).value() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(sigma_map(WeightFn::indicator(0, 1), 0.8, 1).is_inf());
  CHECK(sigma_map(WeightFn::indicator(0, 1), 0.5, 1).value() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigma_map(one, 3.0, 0).value() == 3.0);
  CHECK_THROWS_AS(sigma_map(WeightFn::power(-1.0), 1.0, 1), PreconditionError);
}

TEST_CASE("zeta examples") {
  const auto e = WeightFn::exponential(1.0);
  CHECK(zeta_map(e, 1.0, 1).value() == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));
  CHECK(zeta_map(e, 0.5, -1).value() == 0.0);
  CHECK(zeta_map(e, 1.0, 2).value() == doctest::Approx(1.0 + 2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(zeta_map(WeightFn::constant(1.0), 1.0, 1), PreconditionError);
  CHECK_THROWS_AS(zeta_map(WeightFn::indicator(0, 1), 0.5, 1), PreconditionError);
}

TEST_CASE("level identities at sampled points") {
  const auto xs = log_grid(1e-3, 1e3, 64);
  for (const auto& u : presets()) {
    for (double x : xs) {
      const double Ix = u.cumulative(x);
      const double lo = sigma_map(u, x, -1).value();
      if (Ix > 0) CHECK(rel(u.cumulative(lo), 0.5 * Ix) <= 1e-9);
      const auto hi = sigma_map(u, x, 1);
      if (!hi.is_inf() && Ix > 0) CHECK(rel(u.cumulative(hi.value()), 2.0 * Ix) <= 1e-9);
    }
  }
  const auto tails = {WeightFn::exponential(1.0), WeightFn::power(-2.0), WeightFn::product({WeightFn::power(2.0), WeightFn::exponential(0.5)})};
  for (const auto& u : tails) {
    for (double x : xs) {
      const double Jx = u.tail(x);
      const double z = zeta_map(u, x, 1).value();
      CHECK(rel(u.tail(z), 0.5 * Jx) <= 1e-9);
      const double zi = zeta_map(u, x, -1).value();
      if (zi > 0) CHECK(rel(u.tail(zi), 2.0 * Jx) <= 1e-9);
    }
  }
}

TEST_CASE("maps are monotone and compose") {
  const auto u = WeightFn::power(0.5);
  const auto xs = log_grid(1e-2, 1e2, 40);
  double prev = 0.0;
  for (double x : xs) {
    const double s = sigma_map(u, x, 1).value();
    CHECK(s >= prev);
    prev = s;
    const double s2 = sigma_map(u, x, 2).value();
    CHECK(rel(s2, sigma_map(u, s, 1).value()) <= 1e-10);
    CHECK(rel(sigma_map(u, s, -1).value(), x) <= 1e-9);
  }
  const auto e = WeightFn::exponential(1.0);
  prev = 0.0;
  for (double x : xs) {
    const double z = zeta_map(e, x, 1).value();
    CHECK(z >= prev);
    prev = z;
  }
}

TEST_CASE("dyadic sequences") {
  const auto d1 = dyadic_sequence(WeightFn::constant(1.0), 1e-3, 1e3);
  for (const auto& [n, a] : d1.a) CHECK(rel(a, std::ldexp(1.0, n)) <= 1e-12);
  CHECK(!d1.N_finite);

  const auto dc = dyadic_sequence(WeightFn::indicator(0, 1), 0.5, 1e6);
  CHECK(dc.n0 == -1);
  CHECK(dc.at(-1) == doctest::Approx(0.5));
  CHECK(dc.at(0) == doctest::Approx(1.0));
  CHECK(dc.N == 0);
  CHECK(dc.N_finite);
  CHECK(std::isinf(dc.at(1)));

  const auto de = dyadic_sequence(WeightFn::exponential(1.0), std::log(2.0), 1e6);
  CHECK(de.n0 == -1);
  CHECK(de.at(-1) == doctest::Approx(std::log(2.0)));
  CHECK(de.N == -1);
  CHECK(std::isinf(de.at(0)));

  for (const auto& u : presets()) {
    const auto d = dyadic_sequence(u);
    for (const auto& [n, a] : d.a) {
      if (std::isfinite(a)) CHECK(rel(u.cumulative(a), std::ldexp(1.0, n)) <= 1e-9);
    }
    CHECK(d.a.begin()->second >= 1e-6);
  }

  const auto dt = tail_dyadic_sequence(WeightFn::exponential(1.0), 1e-3, 50.0);
  for (const auto& [n, a] : dt.a) CHECK(rel(std::exp(-a), std::ldexp(1.0, -n)) <= 1e-9);

  CHECK_THROWS_AS(dyadic_sequence(WeightFn::constant(1.0), 1.0, 1.0), PreconditionError);
  CHECK(dc.to_json()["a"].size() == 3);
}

TEST_CASE("dyadic sum relation") {
  std::map<int, double> spike{{0, 1.0}};
  CHECK(dyadic_sum_ratio(spike, 1.0).ratio == 2.0);
  for (int m : {-7, -1, 3, 12}) {
    CHECK(std::abs(dyadic_sum_ratio({{m, 2.5}}, 1.0).ratio - 2.0) <= 1e-12);
  }
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 30), start(-20, 10);
  std::exponential_distribution<double> mag(1.0);
  std::bernoulli_distribution zero(0.3);
  for (double s : {0.5, 1.0, 2.0}) {
    for (int t = 0; t < 200; ++t) {
      std::map<int, double> lam;
      const int a = start(rng);
      const int L = len(rng);
      for (int n = a; n < a + L; ++n) lam[n] = zero(rng) ? 0.0 : mag(rng);
      lam[a] = std::max(lam[a], 0.1);
      const auto r = dyadic_sum_ratio(lam, s);
      CHECK(r.ratio >= 1.0);
      if (s == 1.0) CHECK(r.ratio <= 2.0 + 1e-12);
      const auto rs = dyadic_sum_ratio(lam, s, true);
      CHECK(rs.ratio >= 1.0);
      CHECK(rs.lhs <= r.lhs * (1 + 1e-12));
    }
  }
  CHECK(dyadic_sum_ratio({}, 1.0).ratio == 0.0);
  CHECK(dyadic_sum_ratio({{0, 0.0}}, 1.0).ratio == 0.0);
}
