#include "hol/form.hpp"

#include <algorithm>
#include <cmath>

namespace hol {

namespace {

// d/dx x^e at x >= 0, with the one-sided value at 0 taken as 0 unless e == 1.
double dpow(double x, double e) {
  if (e == 1.0) return 1.0;
  if (x == 0.0) return 0.0;
  return e * std::pow(x, e - 1.0);
}

double pw(double x, double e) {
  if (e == 1.0) return x;
  if (x == 0.0) return 0.0;
  return std::pow(x, e);
}

std::vector<double> merge_breaks(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double x : pts) {
    if (!std::isfinite(x) || x < 0.0) continue;
    if (!out.empty() && x - out.back() <= 1e-12 * x) continue;
    out.push_back(x);
  }
  return out;
}

QuadOptions loose_quad() {
  QuadOptions o;
  o.rel_tol = 1e-10;
  o.throw_on_failure = false;
  return o;
}

}  // namespace

Mesh::Mesh(std::vector<double> breaks, int nodes_per_cell, int edge_nodes)
    : breaks_(std::move(breaks)), inner_(gauss_legendre(nodes_per_cell)), edge_(gauss_legendre(edge_nodes)) {
  if (breaks_.size() < 2 || breaks_.front() != 0.0) throw PreconditionError("mesh needs breakpoints 0 = b_0 < b_1 < ...");
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (!(breaks_[i + 1] > breaks_[i]) || !std::isfinite(breaks_[i + 1])) {
      throw PreconditionError("mesh breakpoints must be finite and strictly increasing");
    }
  }
  first_.push_back(0);
  for (int c = 0; c < cells(); ++c) {
    const auto& g = rule(c);
    const int G = static_cast<int>(g.nodes.size());
    for (int k = 0; k < G; ++k) {
      // tail coordinates run backwards in x
      const double t = is_tail(c) ? g.nodes[G - 1 - k] : g.nodes[k];
      x_.push_back(from_coord(c, t));
      node_cell_.push_back(c);
    }
    first_.push_back(static_cast<int>(x_.size()));
  }
}

int Mesh::locate(double x) const {
  if (x <= 0.0) return 0;
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  return static_cast<int>(it - breaks_.begin()) - 1;
}

double Mesh::coord(int c, double x) const {
  if (is_tail(c)) return std::isinf(x) ? 0.0 : lo(c) / x;
  return (x - lo(c)) / (hi(c) - lo(c));
}

double Mesh::from_coord(int c, double t) const {
  if (is_tail(c)) return t == 0.0 ? kInf : lo(c) / t;
  return lo(c) + t * (hi(c) - lo(c));
}

void Mesh::basis(int c, double x, double* out) const {
  const double t = coord(c, x);
  const int n = node_count(c);
  const int b0 = first_node(c);
  for (int k = 0; k < n; ++k) {
    const double tk = coord(c, x_[b0 + k]);
    double v = 1.0;
    for (int m = 0; m < n; ++m) {
      if (m == k) continue;
      const double tm = coord(c, x_[b0 + m]);
      v *= (t - tm) / (tk - tm);
    }
    out[k] = v;
  }
}

std::vector<double> Mesh::product_weights(int c, double a, double b, int m,
                                          const std::function<void(double, double*)>& h) const {
  const int G = node_count(c);
  std::vector<double> hv(m), bv(G);
  double s0, s1;
  double jac_const = 0.0;
  if (is_tail(c)) {
    s0 = std::isinf(b) ? 0.0 : lo(c) / b;
    s1 = lo(c) / a;
  } else {
    s0 = coord(c, a);
    s1 = coord(c, b);
    jac_const = hi(c) - lo(c);
  }
  if (!(s1 > s0)) return std::vector<double>(static_cast<std::size_t>(m) * G, 0.0);
  const bool tail = is_tail(c);
  const double L = lo(c);
  auto integrand = [&](double s, double* out) {
    const double y = tail ? L / s : L + s * jac_const;
    const double jac = tail ? L / (s * s) : jac_const;
    h(y, hv.data());
    basis(c, y, bv.data());
    for (int l = 0; l < m; ++l) {
      for (int k = 0; k < G; ++k) out[l * G + k] = hv[l] * jac * bv[k];
    }
  };
  return gk_adaptive_vec(integrand, m * G, s0, s1, 1e-10, 200);
}

std::vector<double> Mesh::share_weights(int c, double a, double b, const RealFn& h) const {
  const int G = node_count(c);
  const int b0 = first_node(c);
  std::vector<double> out(G, 0.0);
  for (int k = 0; k < G; ++k) {
    const double left = k == 0 ? lo(c) : 0.5 * (x_[b0 + k - 1] + x_[b0 + k]);
    const double right = k + 1 == G ? hi(c) : 0.5 * (x_[b0 + k] + x_[b0 + k + 1]);
    const double l = std::max(a, left), r = std::min(b, right);
    if (r > l) out[k] = integrate_fn(h, l, r, loose_quad());
  }
  return out;
}

RowMap::RowMap(int rows, int cols, int channels)
    : rows_(rows),
      cols_(cols),
      L_(channels),
      alpha_(static_cast<std::size_t>(rows) * channels, 0.0),
      beta_(static_cast<std::size_t>(cols) * channels, 0.0),
      c0_(rows, 0),
      c1_(rows, 0),
      pending_(rows) {}

void RowMap::set_range(int row, int c0, int c1, const double* alpha) {
  c0_[row] = c0;
  c1_[row] = c1;
  for (int l = 0; l < L_; ++l) alpha_[static_cast<std::size_t>(row) * L_ + l] = alpha[l];
}

void RowMap::add_entry(int row, int col, double value) { pending_[row].emplace_back(col, value); }

void RowMap::finalize() {
  ptr_.assign(rows_ + 1, 0);
  idx_.clear();
  val_.clear();
  for (int a = 0; a < rows_; ++a) {
    for (const auto& [c, v] : pending_[a]) {
      idx_.push_back(c);
      val_.push_back(v);
    }
    ptr_[a + 1] = static_cast<int>(idx_.size());
  }
  pending_.clear();
  pending_.shrink_to_fit();
}

void RowMap::apply(const double* x, double* y) const {
  std::fill(y, y + rows_, 0.0);
  if (L_ > 0) {
    std::vector<double> P(cols_ + 1), S(cols_ + 1), A(cols_ + 1);
    for (int l = 0; l < L_; ++l) {
      P[0] = 0.0;
      A[0] = 0.0;
      for (int j = 0; j < cols_; ++j) {
        const double t = mul0(beta_[static_cast<std::size_t>(j) * L_ + l], x[j]);
        P[j + 1] = P[j] + t;
        A[j + 1] = A[j] + std::abs(t);
      }
      S[cols_] = 0.0;
      for (int j = cols_ - 1; j >= 0; --j) S[j] = S[j + 1] + mul0(beta_[static_cast<std::size_t>(j) * L_ + l], x[j]);
      const double Atot = A[cols_];
      for (int a = 0; a < rows_; ++a) {
        const int c0 = c0_[a], c1 = c1_[a];
        if (c1 <= c0) continue;
        // sum from whichever end carries less outside mass
        const double s = (A[c0] <= Atot - A[c1]) ? P[c1] - P[c0] : S[c0] - S[c1];
        y[a] += alpha_[static_cast<std::size_t>(a) * L_ + l] * s;
      }
    }
  }
  for (int a = 0; a < rows_; ++a) {
    for (int e = ptr_[a]; e < ptr_[a + 1]; ++e) y[a] += mul0(val_[e], x[idx_[e]]);
    if (y[a] < 0.0) y[a] = 0.0;  // rounding in signed channels
  }
}

void RowMap::apply_transpose(const double* g, double* out) const {
  if (L_ > 0) {
    std::vector<double> d(cols_ + 1);
    for (int l = 0; l < L_; ++l) {
      std::fill(d.begin(), d.end(), 0.0);
      for (int a = 0; a < rows_; ++a) {
        if (c1_[a] <= c0_[a] || g[a] == 0.0) continue;
        const double v = alpha_[static_cast<std::size_t>(a) * L_ + l] * g[a];
        d[c0_[a]] += v;
        d[c1_[a]] -= v;
      }
      double run = 0.0;
      for (int j = 0; j < cols_; ++j) {
        run += d[j];
        out[j] += mul0(beta_[static_cast<std::size_t>(j) * L_ + l], run);
      }
    }
  }
  for (int a = 0; a < rows_; ++a) {
    if (g[a] == 0.0) continue;
    for (int e = ptr_[a]; e < ptr_[a + 1]; ++e) out[idx_[e]] += mul0(val_[e], g[a]);
  }
}

Form::Form(FormSpec spec) : spec_(std::move(spec)) {
  if (!(spec_.x_max > spec_.x_min) || !(spec_.x_min > 0.0)) throw PreconditionError("form window needs 0 < x_min < x_max");
  if (spec_.cells < 1) throw PreconditionError("form needs at least one cell");
  std::vector<double> pts = log_grid(spec_.x_min, spec_.x_max, spec_.cells + 1);
  std::vector<double> extra = spec_.extra_breaks;
  extra.insert(extra.end(), spec_.U_breaks.begin(), spec_.U_breaks.end());
  if (spec_.outer) extra.insert(extra.end(), spec_.outer->w_breaks.begin(), spec_.outer->w_breaks.end());
  const auto vb = spec_.v.breakpoints();
  extra.insert(extra.end(), vb.begin(), vb.end());
  for (double e : extra) {
    if (std::isfinite(e) && e > 0.0 && e < 1e300) pts.push_back(e);
  }
  pts = merge_breaks(pts);
  // split wide cells outside the window so three nodes still resolve them
  std::vector<double> br{0.0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a = br.back(), b = pts[i];
    if (a > 0.0 && b / a > 4.0 && (b <= spec_.x_min * (1 + 1e-12) || a >= spec_.x_max * (1 - 1e-12))) {
      const int pieces = std::min(64, static_cast<int>(std::ceil(std::log2(b / a))));
      for (int k = 1; k < pieces; ++k) br.push_back(a * std::pow(b / a, static_cast<double>(k) / pieces));
    }
    if (b > br.back()) br.push_back(b);
  }
  mesh_ = Mesh(br);

  const int C = mesh_.cells();
  active_.assign(C, 0);
  V_.assign(C, 0.0);
  const double f_lo = spec_.f_from_origin ? 0.0 : spec_.x_min;
  for (int c = 0; c < C; ++c) {
    if (mesh_.is_tail(c)) continue;
    if (mesh_.lo(c) >= f_lo * (1 - 1e-12) && mesh_.hi(c) <= spec_.x_max * (1 + 1e-12)) active_[c] = 1;
  }
  // f on a cell next to a non-integrable singularity of U or w at the origin
  // would be charged an infinite weight the true form does not see
  if (active_[0]) {
    const QuadOptions opt = loose_quad();
    bool sing = std::isinf(integrate_fn(spec_.U, 0.0, mesh_.hi(0), opt));
    if (spec_.outer) sing = sing || std::isinf(integrate_fn(spec_.outer->w, 0.0, mesh_.hi(0), opt));
    if (sing) active_[0] = 0;
  }
  for (int c = 0; c < C; ++c) {
    if (!active_[c]) continue;
    V_[c] = std::isinf(spec_.p) ? ess_sup(spec_.v, mesh_.lo(c), mesh_.hi(c)).value()
                                : spec_.v.integrate(mesh_.lo(c), mesh_.hi(c)).value();
    // a cell of infinite source weight only admits f = 0
    if (std::isinf(V_[c])) {
      active_[c] = 0;
      V_[c] = 0.0;
    }
  }
  build_inner();
  if (spec_.outer) build_outer();
  build_final();
}

void Form::build_inner() {
  const auto& in = spec_.inner;
  const int C = mesh_.cells();
  const int B = mesh_.nodes();
  const bool has_k = in.kernel.has_value();
  const bool separable = !has_k || !in.kernel->k.channels().empty();
  const int L = has_k ? static_cast<int>(in.kernel->k.channels().size()) : 1;
  inner_ = RowMap(B, C, separable ? L : 0);
  const QuadOptions opt = loose_quad();
  if (separable) {
    auto& beta = inner_.beta();
    for (int c = 0; c < C; ++c) {
      if (!active_[c]) continue;
      for (int l = 0; l < L; ++l) {
        double v;
        if (!has_k) {
          v = mesh_.hi(c) - mesh_.lo(c);
        } else {
          const auto& ch = in.kernel->k.channels()[l];
          const auto& col = in.kernel->x_first ? ch.psi : ch.phi;
          v = gk_adaptive(col, mesh_.lo(c), mesh_.hi(c), opt).value;
        }
        beta[static_cast<std::size_t>(c) * L + l] = v;
      }
    }
  }
  const GaussRule cell_rule = gauss_legendre(8);
  std::vector<double> alpha(L, 1.0);
  for (int a = 0; a < B; ++a) {
    const double x = mesh_.x(a);
    double lo = std::max(0.0, in.lo(x));
    double hi = in.hi(x);
    double xa = x;
    if (has_k) {
      xa = in.kernel->arg ? in.kernel->arg(x) : x;
      if (in.kernel->x_first) {
        hi = std::min(hi, xa);
      } else {
        lo = std::max(lo, xa);
      }
    }
    if (!(hi > lo)) continue;
    auto kf = [&](double z) {
      if (!has_k) return 1.0;
      return in.kernel->x_first ? in.kernel->k(xa, z) : in.kernel->k(z, xa);
    };
    int first_full = -1, last_full = -1;
    for (int j = mesh_.locate(lo); j < C && mesh_.lo(j) < hi; ++j) {
      const double aj = std::max(lo, mesh_.lo(j));
      const double bj = std::min(hi, mesh_.hi(j));
      if (!(bj > aj) || !active_[j]) continue;
      const bool full = aj == mesh_.lo(j) && bj == mesh_.hi(j);
      if (full && separable) {
        if (first_full < 0) first_full = j;
        last_full = j;
        continue;
      }
      double v = bj - aj;
      if (has_k && full) {
        // smooth off the diagonal: a fixed Gauss rule is enough
        v = 0.0;
        for (std::size_t i = 0; i < cell_rule.nodes.size(); ++i) {
          v += cell_rule.weights[i] * kf(aj + cell_rule.nodes[i] * (bj - aj));
        }
        v *= bj - aj;
      } else if (has_k) {
        v = integrate_fn(kf, aj, bj, opt);
      }
      if (v != 0.0) inner_.add_entry(a, j, v);
    }
    if (first_full >= 0) {
      if (has_k) {
        for (int l = 0; l < L; ++l) {
          const auto& ch = in.kernel->k.channels()[l];
          alpha[l] = in.kernel->x_first ? ch.phi(xa) : ch.psi(xa);
        }
      }
      inner_.set_range(a, first_full, last_full + 1, alpha.data());
    }
  }
  inner_.finalize();
}

void Form::build_outer() {
  const auto& out = *spec_.outer;
  has_outer_ = true;
  const int C = mesh_.cells();
  const int B = mesh_.nodes();
  const bool has_k = out.kernel.has_value();
  const QuadOptions opt = loose_quad();
  auto row_arg = [&](double x) { return (has_k && out.kernel->arg) ? out.kernel->arg(x) : x; };
  auto kern = [&](double xa, double y) {
    if (!has_k) return 1.0;
    return out.kernel->x_first ? out.kernel->k(xa, y) : out.kernel->k(y, xa);
  };
  auto range_of = [&](double x, double& lo, double& hi) {
    lo = std::max(0.0, out.lo(x));
    hi = out.hi(x);
    if (has_k) {
      const double xa = row_arg(x);
      if (out.kernel->x_first) {
        hi = std::min(hi, xa);
      } else {
        lo = std::max(lo, xa);
      }
    }
  };

  if (std::isinf(out.q)) {
    outer_sup_ = true;
    sup_b0_.assign(B, 0);
    sup_b1_.assign(B, 0);
    if (!has_k) {
      sup_w_.resize(B);
      for (int b = 0; b < B; ++b) sup_w_[b] = out.w(mesh_.x(b));
    } else {
      sup_rows_.assign(B, {});
    }
    for (int a = 0; a < B; ++a) {
      double lo, hi;
      range_of(mesh_.x(a), lo, hi);
      if (!(hi >= lo)) continue;
      int b0 = 0;
      while (b0 < B && mesh_.x(b0) < lo) ++b0;
      int b1 = b0;
      while (b1 < B && mesh_.x(b1) <= hi) ++b1;
      if (!has_k) {
        sup_b0_[a] = b0;
        sup_b1_[a] = b1;
      } else {
        const double xa = row_arg(mesh_.x(a));
        for (int b = b0; b < b1; ++b) {
          const double wv = mul0(out.w(mesh_.x(b)), kern(xa, mesh_.x(b)));
          if (wv != 0.0) sup_rows_[a].emplace_back(b, wv);
        }
      }
    }
    return;
  }

  const bool separable = !has_k || !out.kernel->k.channels().empty();
  const int L = has_k ? static_cast<int>(out.kernel->k.channels().size()) : 1;
  outer_ = RowMap(B, B, separable ? L : 0);
  std::vector<char> divergent(C, 0);
  for (int c = 0; c < C; ++c) {
    if (c != 0 && !mesh_.is_tail(c)) continue;
    if (std::isinf(integrate_fn(out.w, mesh_.lo(c), mesh_.hi(c), opt))) divergent[c] = 1;
  }
  if (separable) {
    auto& beta = outer_.beta();
    for (int c = 0; c < C; ++c) {
      if (divergent[c]) continue;
      const int G = mesh_.node_count(c);
      auto h = [&](double y, double* vals) {
        const double wy = out.w(y);
        for (int l = 0; l < L; ++l) {
          if (!has_k) {
            vals[l] = wy;
          } else {
            const auto& ch = out.kernel->k.channels()[l];
            // the integration variable y sits in the slot opposite to x
            vals[l] = mul0(wy, out.kernel->x_first ? ch.psi(y) : ch.phi(y));
          }
        }
      };
      const auto pwts = mesh_.product_weights(c, mesh_.lo(c), mesh_.hi(c), L, h);
      for (int k = 0; k < G; ++k) {
        for (int l = 0; l < L; ++l) beta[static_cast<std::size_t>(mesh_.first_node(c) + k) * L + l] = pwts[l * G + k];
      }
    }
  }
  std::vector<double> plain;
  if (!separable) {
    plain.assign(B, 0.0);
    for (int c = 0; c < C; ++c) {
      if (divergent[c]) continue;
      const auto pwts = mesh_.product_weights(c, mesh_.lo(c), mesh_.hi(c), 1, [&](double y, double* v) { v[0] = out.w(y); });
      for (int k = 0; k < mesh_.node_count(c); ++k) plain[mesh_.first_node(c) + k] = pwts[k];
    }
  }
  std::vector<double> alpha(L, 1.0);
  for (int a = 0; a < B; ++a) {
    const double x = mesh_.x(a);
    double lo, hi;
    range_of(x, lo, hi);
    if (!(hi > lo)) continue;
    const double xa = row_arg(x);
    int first_full = -1, last_full = -1;
    for (int j = mesh_.locate(lo); j < C && mesh_.lo(j) < hi; ++j) {
      const double aj = std::max(lo, mesh_.lo(j));
      const double bj = std::min(hi, mesh_.hi(j));
      if (!(bj > aj)) continue;
      const bool full = aj == mesh_.lo(j) && bj == mesh_.hi(j);
      if (full && separable && !divergent[j]) {
        if (first_full < 0) first_full = j;
        last_full = j;
        continue;
      }
      auto wk = [&](double y) { return mul0(out.w(y), kern(xa, y)); };
      const int G = mesh_.node_count(j);
      if (divergent[j] && std::isinf(integrate_fn(wk, aj, bj, opt))) {
        for (int k = 0; k < G; ++k) outer_.add_entry(a, mesh_.first_node(j) + k, kInf);
        continue;
      }
      if (full && !divergent[j]) {
        // non-separable kernel: interpolate it at the nodes
        for (int k = 0; k < G; ++k) {
          const int b = mesh_.first_node(j) + k;
          const double v = mul0(plain[b], kern(xa, mesh_.x(b)));
          if (v != 0.0) outer_.add_entry(a, b, v);
        }
        continue;
      }
      const auto pwts = mesh_.product_weights(j, aj, bj, 1, [&](double y, double* v) { v[0] = wk(y); });
      for (int k = 0; k < G; ++k) {
        if (pwts[k] != 0.0) outer_.add_entry(a, mesh_.first_node(j) + k, pwts[k]);
      }
    }
    if (first_full >= 0) {
      if (has_k) {
        for (int l = 0; l < L; ++l) {
          const auto& ch = out.kernel->k.channels()[l];
          alpha[l] = out.kernel->x_first ? ch.phi(xa) : ch.psi(xa);
        }
      }
      outer_.set_range(a, mesh_.first_node(first_full), mesh_.first_node(last_full + 1), alpha.data());
    }
  }
  outer_.finalize();
}

void Form::build_final() {
  const int B = mesh_.nodes();
  Wfinal_.assign(B, 0.0);
  if (std::isinf(spec_.r)) {
    for (int a = 0; a < B; ++a) Wfinal_[a] = spec_.U(mesh_.x(a));
    return;
  }
  const QuadOptions opt = loose_quad();
  for (int c = 0; c < mesh_.cells(); ++c) {
    const int G = mesh_.node_count(c);
    const int b0 = mesh_.first_node(c);
    if ((c == 0 || mesh_.is_tail(c)) && std::isinf(integrate_fn(spec_.U, mesh_.lo(c), mesh_.hi(c), opt))) {
      for (int k = 0; k < G; ++k) Wfinal_[b0 + k] = kInf;
      continue;
    }
    auto pwts = mesh_.product_weights(c, mesh_.lo(c), mesh_.hi(c), 1, [&](double y, double* v) { v[0] = spec_.U(y); });
    if (std::any_of(pwts.begin(), pwts.end(), [](double w) { return w < 0.0 || !std::isfinite(w); })) {
      pwts = mesh_.share_weights(c, mesh_.lo(c), mesh_.hi(c), spec_.U);
    }
    for (int k = 0; k < G; ++k) Wfinal_[b0 + k] = pwts[k];
  }
}

std::vector<double> Form::inner_values(const std::vector<double>& f) const {
  std::vector<double> I(mesh_.nodes());
  inner_.apply(f.data(), I.data());
  return I;
}

double Form::numerator(const std::vector<double>& f, std::vector<double>* grad) const {
  const int B = mesh_.nodes();
  std::vector<double> I = inner_values(f);
  std::vector<double> O(B), S, J;
  std::vector<int> arg;
  const double q = has_outer_ ? spec_.outer->q : 1.0;
  if (has_outer_ && !outer_sup_) {
    J.resize(B);
    S.resize(B);
    for (int b = 0; b < B; ++b) J[b] = pw(I[b], q);
    outer_.apply(J.data(), S.data());
    for (int a = 0; a < B; ++a) O[a] = pw(S[a], 1.0 / q);
  } else if (outer_sup_) {
    arg.assign(B, -1);
    if (sup_rows_.empty()) {
      // range maxima of w_b I_b through a sparse table of argmax indices
      std::vector<double> val(B);
      for (int b = 0; b < B; ++b) val[b] = mul0(sup_w_[b], I[b]);
      std::vector<std::vector<int>> tab{std::vector<int>(B)};
      for (int b = 0; b < B; ++b) tab[0][b] = b;
      for (int k = 1; (1 << k) <= B; ++k) {
        std::vector<int> row(B - (1 << k) + 1);
        const auto& prev = tab[k - 1];
        for (std::size_t i = 0; i < row.size(); ++i) {
          const int l = prev[i], r = prev[i + (1 << (k - 1))];
          row[i] = val[r] > val[l] ? r : l;
        }
        tab.push_back(std::move(row));
      }
      for (int a = 0; a < B; ++a) {
        const int b0 = sup_b0_[a], b1 = sup_b1_[a];
        if (b1 <= b0) continue;
        const int k = static_cast<int>(std::floor(std::log2(b1 - b0)));
        const int l = tab[k][b0], r = tab[k][b1 - (1 << k)];
        arg[a] = val[r] > val[l] ? r : l;
        O[a] = val[arg[a]];
      }
    } else {
      for (int a = 0; a < B; ++a) {
        for (const auto& [b, wv] : sup_rows_[a]) {
          const double v = mul0(wv, I[b]);
          if (v > O[a] || arg[a] < 0) {
            O[a] = v;
            arg[a] = b;
          }
        }
      }
    }
  } else {
    O = I;
  }

  double N;
  int top = -1;
  if (std::isinf(spec_.r)) {
    N = 0.0;
    for (int a = 0; a < B; ++a) {
      const double v = mul0(Wfinal_[a], O[a]);
      if (v > N) {
        N = v;
        top = a;
      }
    }
  } else {
    double total = 0.0;
    for (int a = 0; a < B; ++a) total += mul0(Wfinal_[a], pw(O[a], spec_.r));
    N = pw(total, 1.0 / spec_.r);
  }
  if (!grad) return N;
  grad->assign(dim(), 0.0);
  if (N == 0.0 || !std::isfinite(N)) return N;

  std::vector<double> gO(B, 0.0);
  if (std::isinf(spec_.r)) {
    if (top >= 0) gO[top] = Wfinal_[top];
  } else {
    const double scale = pw(N, 1.0 - spec_.r);
    for (int a = 0; a < B; ++a) {
      if (Wfinal_[a] != 0.0 && O[a] > 0.0) gO[a] = scale * Wfinal_[a] * dpow(O[a], spec_.r) / spec_.r;
    }
  }
  std::vector<double> gI(B, 0.0);
  if (has_outer_ && !outer_sup_) {
    std::vector<double> gS(B, 0.0), gJ(B, 0.0);
    for (int a = 0; a < B; ++a) {
      if (gO[a] != 0.0) gS[a] = gO[a] * dpow(S[a], 1.0 / q);
    }
    outer_.apply_transpose(gS.data(), gJ.data());
    for (int b = 0; b < B; ++b) gI[b] = gJ[b] * dpow(I[b], q);
  } else if (outer_sup_) {
    for (int a = 0; a < B; ++a) {
      if (gO[a] == 0.0 || arg[a] < 0) continue;
      const int b = arg[a];
      double wv = 0.0;
      if (sup_rows_.empty()) {
        wv = sup_w_[b];
      } else {
        for (const auto& [bb, w] : sup_rows_[a]) {
          if (bb == b) wv = w;
        }
      }
      gI[b] += gO[a] * wv;
    }
  } else {
    gI = gO;
  }
  inner_.apply_transpose(gI.data(), grad->data());
  for (int c = 0; c < dim(); ++c) {
    if (!active_[c]) (*grad)[c] = 0.0;
  }
  return N;
}

double Form::denominator(const std::vector<double>& f, std::vector<double>* grad) const {
  const int C = dim();
  if (grad) grad->assign(C, 0.0);
  const double p = spec_.p;
  if (std::isinf(p)) {
    double D = 0.0;
    int top = -1;
    for (int c = 0; c < C; ++c) {
      const double v = mul0(V_[c], f[c]);
      if (v > D) {
        D = v;
        top = c;
      }
    }
    if (grad && top >= 0) (*grad)[top] = V_[top];
    return D;
  }
  // scaled by the largest cell share f V^(1/p) so f^p cannot underflow
  // against a huge V
  std::vector<double> share(C, 0.0);
  double m = 0.0;
  for (int c = 0; c < C; ++c) {
    if (!active_[c]) continue;
    share[c] = mul0(pw(V_[c], 1.0 / p), f[c]);
    m = std::max(m, share[c]);
  }
  if (!(m > 0.0)) return 0.0;
  if (std::isinf(m)) return kInf;
  double total = 0.0;
  for (int c = 0; c < C; ++c) total += pw(share[c] / m, p);
  const double D = m * pw(total, 1.0 / p);
  if (grad && std::isfinite(D)) {
    for (int c = 0; c < C; ++c) {
      if (active_[c] && f[c] > 0.0) (*grad)[c] = mul0(pw(V_[c], 1.0 / p), pw(share[c] / D, p - 1.0));
    }
  }
  return D;
}

GridFunction Form::to_grid(const std::vector<double>& f) const {
  std::vector<double> br, vals;
  for (int c = 0; c < dim(); ++c) {
    if (!active_[c]) continue;
    if (br.empty()) br.push_back(mesh_.lo(c));
    br.push_back(mesh_.hi(c));
    vals.push_back(f[c]);
  }
  return GridFunction(br, vals);
}

std::vector<double> Form::from_grid(const GridFunction& g) const {
  std::vector<double> f(dim(), 0.0);
  for (int c = 0; c < dim(); ++c) {
    if (active_[c]) f[c] = g.integral(mesh_.lo(c), mesh_.hi(c)) / (mesh_.hi(c) - mesh_.lo(c));
  }
  return f;
}

std::vector<double> Form::sample(const RealFn& fn) const {
  std::vector<double> f(dim(), 0.0);
  for (int c = 0; c < dim(); ++c) {
    if (!active_[c]) continue;
    const double a = mesh_.lo(c), b = mesh_.hi(c);
    const double m = a > 0.0 ? std::sqrt(a * b) : 0.5 * b;
    const double v = fn(m);
    f[c] = std::isfinite(v) && v > 0.0 ? v : 0.0;
  }
  return f;
}

}  // namespace hol
