#include "hol/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hol/json_util.hpp"

namespace hol {

using nlohmann::json;

namespace {

RealFn constant_fn(double c) {
  return [c](double) { return c; };
}
RealFn identity_fn() {
  return [](double x) { return x; };
}

struct Evaluator {
  const RatioProblem& prob;
  const Form& F;
  std::vector<int> act;  // active cells
  std::vector<double> len;

  explicit Evaluator(const RatioProblem& p) : prob(p), F(*p.num) {
    for (int c = 0; c < F.dim(); ++c) {
      if (F.active(c) && (!p.den || p.den->active(c))) {
        act.push_back(c);
        len.push_back(F.mesh().hi(c) - F.mesh().lo(c));
      }
    }
  }

  double den(const std::vector<double>& f, std::vector<double>* g) const {
    return prob.den ? prob.den->numerator(f, g) : F.denominator(f, g);
  }

  double ratio(const std::vector<double>& f) const { return div0(F.numerator(f), den(f, nullptr)); }

  void project(std::vector<double>& f) const {
    if (!prob.decreasing) return;
    std::vector<double> y(act.size());
    for (std::size_t i = 0; i < act.size(); ++i) y[i] = f[act[i]];
    y = pav_decreasing(y, len);
    for (std::size_t i = 0; i < act.size(); ++i) f[act[i]] = y[i];
  }

  // Scales f to unit denominator; false when that is impossible.
  bool normalize(std::vector<double>& f) const {
    const double d = den(f, nullptr);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    for (int c : act) f[c] /= d;
    return true;
  }

  // Keeps multiplicative updates away from exact zeros. Without a separate
  // denominator the floor is taken on each cell's share of ||f||, so cells
  // with enormous v do not swamp the norm.
  void floor(std::vector<double>& f) const {
    const auto& V = F.source_weights();
    const double p = F.p();
    const bool shares = !prob.den;
    auto share = [&](int c) {
      if (!shares || !(V[c] > 0.0)) return f[c];
      return std::isinf(p) ? f[c] * V[c] : f[c] * std::pow(V[c], 1.0 / p);
    };
    double m = 0.0;
    for (int c : act) m = std::max(m, share(c));
    if (!(m > 0.0)) return;
    for (int c : act) {
      double lo = 1e-12 * m;
      if (shares && V[c] > 0.0) lo /= std::isinf(p) ? V[c] : std::pow(V[c], 1.0 / p);
      f[c] = std::max(f[c], lo);
    }
    if (prob.decreasing) project(f);
  }
};

struct Run {
  double value = 0.0;
  std::vector<double> f;
  std::vector<double> history;
  bool converged = false;
};

Run ascend(const Evaluator& E, std::vector<double> f, const OracleConfig& cfg) {
  Run run;
  const Form& F = E.F;
  const double p = F.p();
  const bool boyd = !E.prob.den && !E.prob.decreasing && p > 1.0 && std::isfinite(p);
  E.floor(f);
  E.project(f);
  if (!E.normalize(f)) {
    run.f = f;
    return run;
  }
  double R = E.ratio(f);
  double eta = 1.0;
  std::vector<double> gN, gD, trial;
  for (int it = 0; it < cfg.max_iter; ++it) {
    run.history.push_back(R);
    const int n = static_cast<int>(run.history.size());
    if (n > cfg.stop_window) {
      const double old = run.history[n - 1 - cfg.stop_window];
      if (R - old <= cfg.stop_tol * R) {
        run.converged = true;
        break;
      }
    }
    if (!std::isfinite(R)) break;
    const double N = F.numerator(f, &gN);
    const double D = E.den(f, &gD);
    if (!(N > 0.0)) break;

    double best = R;
    std::vector<double> best_f;
    if (boyd) {
      trial = f;
      const auto& V = F.source_weights();
      for (int c : E.act) trial[c] = V[c] > 0.0 && gN[c] > 0.0 ? std::pow(gN[c] / V[c], 1.0 / (p - 1.0)) : 0.0;
      E.floor(trial);
      if (E.normalize(trial)) {
        const double Rt = E.ratio(trial);
        if (Rt > best) {
          best = Rt;
          best_f = trial;
        }
      }
    }
    std::vector<double> G(F.dim(), 0.0);
    double gs = 0.0;
    for (int c : E.act) {
      G[c] = f[c] * (gN[c] / N - gD[c] / D);
      gs = std::max(gs, std::abs(G[c]));
    }
    if (gs > 0.0) {
      for (int k = 0; k < 30; ++k) {
        trial = f;
        for (int c : E.act) trial[c] = f[c] * std::exp(std::clamp(eta * G[c] / gs, -30.0, 30.0));
        E.floor(trial);
        if (E.normalize(trial)) {
          const double Rt = E.ratio(trial);
          if (Rt > R) {
            if (Rt > best) {
              best = Rt;
              best_f = trial;
            }
            eta = std::min(eta * 1.5, 8.0);
            break;
          }
        }
        eta *= 0.5;
        if (eta < 1e-9) {
          eta = 1e-9;
          break;
        }
      }
    }
    if (!best_f.empty()) {
      f = std::move(best_f);
      R = best;
    }
  }
  run.value = R;
  run.f = std::move(f);
  return run;
}

std::vector<std::vector<double>> candidates(const Evaluator& E, const OracleConfig& cfg) {
  const Form& F = E.F;
  const auto& mesh = F.mesh();
  const int C = F.dim();
  std::vector<std::vector<double>> out;
  const bool dec = E.prob.decreasing;
  // single-cell indicators, or initial segments on the decreasing cone
  for (std::size_t i = 0; i < E.act.size(); ++i) {
    std::vector<double> f(C, 0.0);
    if (dec) {
      for (std::size_t j = 0; j <= i; ++j) f[E.act[j]] = 1.0;
    } else {
      f[E.act[i]] = 1.0;
    }
    out.push_back(std::move(f));
  }
  // power profiles
  for (int k = -16; k <= 8; ++k) {
    const double g = k / 8.0;
    if (dec && g > 0.0) continue;
    out.push_back(F.sample([g](double x) { return std::pow(x, g); }));
  }
  // v^(1-p') on initial and final segments, powers on dyadic windows
  const double p = F.p();
  const auto& v = F.spec().v;
  if (E.act.empty()) return out;
  const double lo = std::max(mesh.lo(E.act.front()), cfg.x_min);
  const double hi = mesh.hi(E.act.back());
  const auto ts = log_grid(lo, hi, 12);
  for (double t : ts) {
    if (p > 1.0 && std::isfinite(p)) {
      const double e = -1.0 / (p - 1.0);
      out.push_back(F.sample([&, t](double x) { return x < t ? std::pow(v(x), e) : 0.0; }));
      if (!dec) out.push_back(F.sample([&, t](double x) { return x >= t ? std::pow(v(x), e) : 0.0; }));
    }
    if (!dec) {
      for (double g : {-1.0, -0.5, 0.0}) {
        out.push_back(F.sample([t, g](double x) { return (x >= t && x < 16.0 * t) ? std::pow(x, g) : 0.0; }));
      }
    }
  }
  // seeded random profiles
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    std::vector<double> f(C, 0.0);
    double walk = 0.0;
    for (int c : E.act) {
      walk += 0.3 * gauss(rng);
      f[c] = std::exp(walk);
    }
    if (dec) E.project(f);
    out.push_back(std::move(f));
  }
  return out;
}

void sanitize(std::vector<double>& f) {
  for (auto& x : f) {
    if (!std::isfinite(x) || x < 0.0) x = 0.0;
  }
}

NormEstimate finish(const Form& F, const std::vector<double>& f, double value, int used, bool conv,
                    std::vector<double> history) {
  NormEstimate est;
  est.value = value;
  est.witness = F.to_grid(f);
  est.restarts_used = used;
  est.converged = conv;
  est.history = std::move(history);
  return est;
}

}  // namespace

json OracleConfig::to_json() const {
  return {{"restarts", restarts},   {"max_iter", max_iter}, {"seed", seed},
          {"grid_points", grid_points}, {"x_min", x_min},     {"x_max", x_max},
          {"stop_tol", stop_tol},   {"stop_window", stop_window}};
}

OracleConfig OracleConfig::from_json(const json& j) {
  OracleConfig c;
  const json& o = j.contains("oracle") ? j.at("oracle") : j;
  c.restarts = o.value("restarts", c.restarts);
  c.max_iter = o.value("max_iter", c.max_iter);
  c.seed = o.value("seed", c.seed);
  c.grid_points = o.value("grid_points", c.grid_points);
  c.x_min = o.value("x_min", c.x_min);
  c.x_max = o.value("x_max", c.x_max);
  c.stop_tol = o.value("stop_tol", c.stop_tol);
  c.stop_window = o.value("stop_window", c.stop_window);
  return c;
}

json NormEstimate::to_json() const {
  json h = json::array();
  for (double x : history) h.push_back(num_json(x));
  return {{"value", num_json(value.value())},
          {"witness", witness.cells() ? witness.to_json() : json(nullptr)},
          {"restarts_used", restarts_used},
          {"converged", converged},
          {"history", h}};
}

LocalTarget LocalTarget::of(double q, const WeightFn& w) { return {q, w.as_function(), w.breakpoints()}; }

double RatioProblem::ratio(const std::vector<double>& f) const {
  const double n = num->numerator(f);
  const double d = den ? den->numerator(f) : num->denominator(f);
  return div0(n, d);
}

namespace {

NormEstimate maximize_ratio_raw(const RatioProblem& prob, const OracleConfig& cfg) {
  if (!prob.num) throw PreconditionError("ratio problem needs a numerator form");
  if (prob.den && prob.den->mesh().breaks() != prob.num->mesh().breaks()) {
    throw PreconditionError("numerator and denominator forms must share a mesh");
  }
  if (cfg.restarts < 1 || cfg.max_iter < 1) throw PreconditionError("oracle needs restarts >= 1 and max_iter >= 1");
  const Evaluator E(prob);
  const Form& F = *prob.num;
  const int C = F.dim();
  if (E.act.empty()) return finish(F, std::vector<double>(C, 0.0), 0.0, 0, true, {0.0});

  // p = inf: the extremal is the largest admissible f, 1/v cellwise
  if (!prob.den && std::isinf(F.p())) {
    std::vector<double> f(C, 0.0);
    const auto& V = F.source_weights();
    for (int c : E.act) {
      if (V[c] == 0.0) {
        std::vector<double> ind(C, 0.0);
        ind[c] = 1.0;
        if (F.numerator(ind) > 0.0) return finish(F, ind, kInf, 1, true, {kInf});
        continue;
      }
      f[c] = 1.0 / V[c];
    }
    const double R = E.ratio(f);
    return finish(F, f, R, 1, true, {R});
  }

  auto pool = candidates(E, cfg);
  std::vector<double> score(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    sanitize(pool[i]);
    E.project(pool[i]);
    score[i] = E.ratio(pool[i]);
    if (std::isinf(score[i])) return finish(F, pool[i], kInf, 0, true, {kInf});
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  if (!(score[order.front()] > 0.0)) return finish(F, std::vector<double>(C, 0.0), 0.0, 0, true, {0.0});

  Run best;
  best.value = -1.0;
  int used = 0;
  for (std::size_t k = 0; k < order.size() && used < cfg.restarts; ++k) {
    if (!(score[order[k]] > 0.0)) break;
    ++used;
    Run r = ascend(E, pool[order[k]], cfg);
    if (r.value > best.value) best = std::move(r);
    if (std::isinf(best.value)) break;
  }
  return finish(F, best.f, best.value, used, best.converged, std::move(best.history));
}

}  // namespace

NormEstimate maximize_ratio(const RatioProblem& prob, const OracleConfig& cfg) {
  NormEstimate est = maximize_ratio_raw(prob, cfg);
  if (prob.decreasing) {
    const GridFunction& w = est.witness;
    est.witness = GridFunction(w.breakpoints(), w.values(), true);
  }
  return est;
}

FormSpec operator_form(const InequalitySpec& spec, const OracleConfig& cfg) {
  if (!(spec.p >= 1.0)) throw PreconditionError("source exponent p must satisfy p >= 1");
  if (!(spec.r > 0.0) || !(spec.op.q > 0.0)) throw PreconditionError("exponents r and q must be positive");
  const auto& op = spec.op;
  FormSpec s;
  if (op.kernel_inside()) {
    if (op.inner_lower()) {
      s.inner = InnerSpec{constant_fn(0.0), identity_fn(), LevelKernel{op.k, true, {}}};
    } else {
      s.inner = InnerSpec{identity_fn(), constant_fn(kInf), LevelKernel{op.k, false, {}}};
    }
  } else {
    s.inner = op.inner_lower() ? InnerSpec{constant_fn(0.0), identity_fn(), std::nullopt}
                               : InnerSpec{identity_fn(), constant_fn(kInf), std::nullopt};
  }
  OuterSpec o;
  o.lo = op.outer_upper() ? identity_fn() : constant_fn(0.0);
  o.hi = op.outer_upper() ? constant_fn(kInf) : identity_fn();
  o.w = op.w.as_function();
  o.w_breaks = op.w.breakpoints();
  o.q = op.q;
  // the kernel in the outer weight is k(y, x) on [x, inf) and k(x, y) on [0, x]
  if (!op.kernel_inside()) o.kernel = LevelKernel{op.k, !op.outer_upper(), {}};
  s.outer = o;
  s.U = spec.u.as_function();
  s.U_breaks = spec.u.breakpoints();
  s.r = spec.r;
  s.p = spec.p;
  s.v = spec.v;
  s.x_min = cfg.x_min;
  s.x_max = cfg.x_max;
  s.cells = cfg.grid_points;
  s.f_from_origin = true;
  return s;
}

NormEstimate best_constant(const InequalitySpec& spec, const OracleConfig& cfg) {
  if (spec.op.w.is_zero() || spec.u.is_zero()) {
    NormEstimate e;
    e.value = 0.0;
    e.converged = true;
    e.history = {0.0};
    return e;
  }
  const Form F(operator_form(spec, cfg));
  return maximize_ratio(RatioProblem{&F, nullptr, false}, cfg);
}

FormSpec local_form(const LocalOpSpec& op, double p, const WeightFn& v, const LocalTarget& target,
                    const OracleConfig& cfg) {
  if (!(p >= 1.0)) throw PreconditionError("source exponent p must satisfy p >= 1");
  if (!(target.q > 0.0)) throw PreconditionError("target exponent must be positive");
  const LocalShape sh = local_shape(op);
  FormSpec s;
  const double e = sh.endpoint;
  if (sh.up_to_x) {
    s.inner = InnerSpec{constant_fn(e), identity_fn(), std::nullopt};
    if (sh.kernel) s.inner.kernel = LevelKernel{op.k, true, {}};
  } else {
    s.inner = InnerSpec{identity_fn(), constant_fn(e), std::nullopt};
    if (sh.kernel) s.inner.kernel = LevelKernel{op.k, false, {}};
  }
  const RealFn tw = target.weight;
  const double wl = sh.win_lo, wh = sh.win_hi;
  s.U = [tw, wl, wh](double x) { return (x >= wl && x <= wh) ? tw(x) : 0.0; };
  s.U_breaks = target.breaks;
  s.r = target.q;
  s.p = p;
  s.v = v;
  // f only matters between the endpoint and the far end of the window
  const double flo = sh.up_to_x ? e : wl;
  const double fhi = sh.up_to_x ? wh : e;
  const double lo = std::min(flo, wl);
  const double hi = std::max(fhi, wh);
  double fin = 0.0;
  for (double x : {wl, wh, e}) {
    if (std::isfinite(x)) fin = std::max(fin, x);
  }
  s.f_from_origin = !(lo > 0.0);
  s.x_min = s.f_from_origin ? std::min(cfg.x_min, fin > 0.0 ? fin * 1e-6 : cfg.x_min) : lo;
  s.x_max = std::isfinite(hi) ? hi : std::max(cfg.x_max, fin * 1e6);
  if (!(s.x_max > s.x_min)) s.x_max = s.x_min * (1.0 + 1e-9);
  s.cells = cfg.grid_points;
  for (double x : {wl, wh, e}) {
    if (std::isfinite(x) && x > 0.0) s.extra_breaks.push_back(x);
  }
  return s;
}

NormEstimate local_norm(const LocalOpSpec& op, double p, const WeightFn& v, const LocalTarget& target,
                        const OracleConfig& cfg) {
  const LocalShape sh = local_shape(op);
  const bool degenerate = sh.up_to_x ? !(sh.win_hi > sh.endpoint) : !(sh.endpoint > sh.win_lo);
  if (sh.empty() || degenerate) {
    NormEstimate e;
    e.value = 0.0;
    e.converged = true;
    e.history = {0.0};
    return e;
  }
  const Form F(local_form(op, p, v, target, cfg));
  return maximize_ratio(RatioProblem{&F, nullptr, false}, cfg);
}

ExtReal witness_ratio(const Form& form, const GridFunction& witness) {
  const auto f = form.from_grid(witness);
  return RatioProblem{&form, nullptr, false}.ratio(f);
}

json EquivalenceReport::to_json() const {
  return {{"ratio", num_json(ratio)},
          {"pass", pass},
          {"band", {num_json(band_lo), num_json(band_hi)}},
          {"dominant", dominant}};
}

EquivalenceReport equivalence_report(ExtReal oracle_value, ExtReal total,
                                     const std::vector<std::pair<std::string, ExtReal>>& terms, double band_lo,
                                     double band_hi) {
  EquivalenceReport rep;
  rep.band_lo = band_lo;
  rep.band_hi = band_hi;
  if (total.is_zero() && !oracle_value.is_zero()) {
    throw DiagnosticError("characterization total vanishes while the oracle value is positive");
  }
  rep.ratio = div0(oracle_value.value(), total.value());
  if (oracle_value.is_zero() && total.is_zero()) {
    rep.pass = true;
  } else if (oracle_value.is_inf() && total.is_inf()) {
    rep.pass = true;
  } else {
    rep.pass = rep.ratio >= band_lo && rep.ratio <= band_hi;
  }
  double m = -1.0;
  for (const auto& [name, v] : terms) {
    if (v.value() > m) {
      m = v.value();
      rep.dominant = name;
    }
  }
  return rep;
}

std::vector<double> pav_decreasing(const std::vector<double>& y, const std::vector<double>& w) {
  struct Block {
    double sum, weight;
    int count;
  };
  std::vector<Block> st;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    st.push_back({y[i] * wi, wi, 1});
    // a later block above an earlier one violates monotonicity
    while (st.size() > 1) {
      const auto& b = st[st.size() - 1];
      const auto& a = st[st.size() - 2];
      if (a.sum / a.weight >= b.sum / b.weight) break;
      Block m{a.sum + b.sum, a.weight + b.weight, a.count + b.count};
      st.pop_back();
      st.back() = m;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : st) out.insert(out.end(), b.count, b.sum / b.weight);
  return out;
}

}  // namespace hol
