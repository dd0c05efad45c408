#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hol/operators.hpp"

using namespace hol;

namespace {

const OpTag kAll[] = {OpTag::T,     OpTag::calT,  OpTag::S,     OpTag::calS,
                      OpTag::boldT, OpTag::frakT, OpTag::boldS, OpTag::frakS};

OperatorKind make(OpTag tag, double q, WeightFn w, KernelFn k = KernelFn()) {
  OperatorKind op;
  op.tag = tag;
  op.q = q;
  op.w = std::move(w);
  op.k = std::move(k);
  return op;
}

GridFunction random_step(std::mt19937_64& rng, double hi) {
  std::uniform_real_distribution<double> val(0.0, 2.0);
  const auto br = log_grid(0.05, hi, 9);
  std::vector<double> b{0.0};
  b.insert(b.end(), br.begin(), br.end());
  std::vector<double> v(b.size() - 1);
  for (auto& x : v) x = val(rng);
  return GridFunction(b, v);
}

}  // namespace

TEST_CASE("operator values on simple data") {
  const auto e = WeightFn::exponential(1.0);
  const auto chi = GridFunction::constant(1.0, 0.0, 1.0);
  CHECK(apply_operator(make(OpTag::T, 1.0, e), chi, 2.0).value() == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
  CHECK(apply_operator(make(OpTag::T, 1.0, e), chi, 0.0).value() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
  const auto lin = KernelFn::difference_power(1.0);
  CHECK(apply_operator(make(OpTag::boldT, 1.0, e, lin), chi, 1.0).value() ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  const auto one = GridFunction::constant(1.0);
  CHECK(apply_operator(make(OpTag::T, kInf, e), one, 2.0).value() == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-8));
  const GridFunction zero({0.0, 1.0}, {0.0});
  for (auto t : kAll) CHECK(apply_operator(make(t, 2.0, e, lin), zero, 1.5).value() == 0.0);
}

TEST_CASE("operators against hand integrals") {
  // S with k = 1, w = chi_[0,2], q = 2, f = chi_[0,1]: int_x^2 (1-y)_+^2 dy
  const auto chi = GridFunction::constant(1.0, 0.0, 1.0);
  const auto w = WeightFn::indicator(0, 2);
  CHECK(apply_operator(make(OpTag::S, 2.0, w), chi, 0.5).value() == doctest::Approx(std::sqrt(0.125 / 3.0)).epsilon(1e-9));
  // calS with k = 1, w = 1, q = 1, f = chi_[0,1], x = 2: int_0^2 min(y,1) dy = 1.5
  CHECK(apply_operator(make(OpTag::calS, 1.0, WeightFn::constant(1.0)), chi, 2.0).value() ==
        doctest::Approx(1.5).epsilon(1e-9));
  // calT with k = 1, w = 1, q = 1, x = 0.5: int_0^0.5 (1 - y) dy = 0.375
  CHECK(apply_operator(make(OpTag::calT, 1.0, WeightFn::constant(1.0)), chi, 0.5).value() ==
        doctest::Approx(0.375).epsilon(1e-9));
  // frakS with k = x - y, w = 1, q = 1, x = 2: int_0^2 (2 - y) min(y, 1) dy
  const double fs = (1.0 - 1.0 / 3.0) + 0.5;
  CHECK(apply_operator(make(OpTag::frakS, 1.0, WeightFn::constant(1.0), KernelFn::difference_power(1.0)), chi, 2.0)
            .value() == doctest::Approx(fs).epsilon(1e-9));
  // divergent outer integral
  CHECK(apply_operator(make(OpTag::T, 1.0, WeightFn::constant(1.0)), chi, 1.0).is_inf());
}

TEST_CASE("localized operators") {
  const auto one = GridFunction::constant(1.0);
  const auto u = WeightFn::constant(1.0);
  const auto H24 = LocalOpSpec::window(LocalFamily::H, 2, 4, u);
  CHECK(apply_local(H24, one, 3.0).value() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(apply_local(H24, one, 5.0).value() == 0.0);
  CHECK(apply_local(H24, one, 4.0).value() == 0.0);
  const auto chi = GridFunction::constant(1.0, 0.0, 1.0);
  CHECK(apply_local(LocalOpSpec::at(LocalFamily::boldH, 2.0), chi, 3.0).value() == doctest::Approx(1.0));
  // H*_{2,4}: int_x^{sigma(4) = 8}
  const auto Hs = LocalOpSpec::window(LocalFamily::Hstar, 2, 4, u);
  CHECK(apply_local(Hs, one, 3.0).value() == doctest::Approx(5.0).epsilon(1e-10));
  // zeta side with u = e^-x: calH_{c,d} on (c, d], upper end zeta(d) = d + log 2
  const auto e = WeightFn::exponential(1.0);
  const auto cH = LocalOpSpec::window(LocalFamily::frakH, 0.5, 1.0, e);
  CHECK(apply_local(cH, one, 1.0).value() == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(apply_local(cH, one, 0.5).value() == 0.0);
  const auto cHs = LocalOpSpec::window(LocalFamily::frakHstar, 1.0, 2.0, e);
  CHECK(apply_local(cHs, one, 2.0).value() == doctest::Approx(2.0 - (1.0 - std::log(2.0))).epsilon(1e-10));
  CHECK(apply_local(LocalOpSpec::at(LocalFamily::calHstar, 2.0, KernelFn::difference_power(1.0)), one, 2.0).value() ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(apply_local(LocalOpSpec::at(LocalFamily::calHstar, 2.0), one, 2.5).value() == 0.0);
  CHECK_THROWS_AS(LocalOpSpec::window(LocalFamily::H, 0.0, 1.0, u), PreconditionError);
  CHECK_THROWS_AS(LocalOpSpec::window(LocalFamily::calH, 0.0, kInf, e), PreconditionError);
}

TEST_CASE("monotonicity, homogeneity and shape") {
  std::mt19937_64 rng(11);
  const auto w = WeightFn::product({WeightFn::exponential(0.5), WeightFn::power(0.5)});
  const auto k = KernelFn::difference_power(1.0);
  const auto xs = log_grid(0.1, 8.0, 7);
  for (int trial = 0; trial < 3; ++trial) {
    const auto f = random_step(rng, 6.0);
    std::vector<double> bigger = f.values();
    for (auto& v : bigger) v += 0.3;
    const GridFunction g(f.breakpoints(), bigger);
    for (auto t : kAll) {
      for (double q : {0.5, 2.0, kInf}) {
        const auto op = make(t, q, w, k);
        double prev = -1.0;
        for (double x : xs) {
          const double a = apply_operator(op, f, x).value();
          CHECK(a <= apply_operator(op, g, x).value() * (1 + 1e-8));
          CHECK(apply_operator(op, f.scaled(3.0), x).value() == doctest::Approx(3.0 * a).epsilon(1e-7));
          if (prev >= 0.0) {
            if (op.outer_upper()) {
              CHECK(a <= prev * (1 + 1e-8) + 1e-14);
            } else {
              CHECK(a >= prev * (1 - 1e-8) - 1e-14);
            }
          }
          prev = a;
        }
      }
    }
  }
}

TEST_CASE("indicator kernel makes T and boldT agree") {
  std::mt19937_64 rng(5);
  const auto w = WeightFn::exponential(1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const auto f = random_step(rng, 5.0);
    for (double x : {0.0, 0.3, 1.0, 2.5}) {
      for (double q : {1.0, 3.0, kInf}) {
        CHECK(apply_operator(make(OpTag::T, q, w), f, x).value() ==
              doctest::Approx(apply_operator(make(OpTag::boldT, q, w), f, x).value()).epsilon(1e-7));
      }
    }
  }
}
