#include "hol/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "hol/quadrature.hpp"

namespace hol {

using nlohmann::json;

KernelFn::KernelFn() : KernelFn(indicator()) {}

KernelFn KernelFn::indicator() {
  KernelFn k = custom([](double x, double y) { return x >= y ? 1.0 : 0.0; }, 2.0, "indicator", 0.0);
  k.kind_ = "indicator";
  k.channels_ = {{[](double) { return 1.0; }, [](double) { return 1.0; }}};
  k.spec_ = json{{"kind", "indicator"}};
  return k;
}

KernelFn KernelFn::difference_power(double beta) {
  if (!(beta >= 0.0)) throw PreconditionError("difference kernel needs beta >= 0");
  if (beta == 0.0) {
    KernelFn k = indicator();
    k.spec_ = json{{"kind", "difference_power"}, {"beta", 0.0}};
    return k;
  }
  const double D = std::pow(2.0, std::abs(beta - 1.0));
  KernelFn k = custom([beta](double x, double y) { return x >= y ? std::pow(x - y, beta) : 0.0; }, D,
                      "difference_power", beta);
  k.kind_ = "difference_power";
  if (beta == std::round(beta) && beta <= 8.0) {
    // binomial expansion (x - y)^m = sum_j C(m,j) x^(m-j) (-y)^j
    const int m = static_cast<int>(beta);
    double binom = 1.0;
    for (int j = 0; j <= m; ++j) {
      const double c = (j % 2 == 0 ? 1.0 : -1.0) * binom;
      const int px = m - j;
      k.channels_.push_back({[c, px](double x) { return c * std::pow(x, px); }, [j](double y) { return std::pow(y, j); }});
      binom = binom * (m - j) / (j + 1);
    }
  }
  k.spec_ = json{{"kind", "difference_power"}, {"beta", beta}};
  return k;
}

KernelFn KernelFn::log_ratio() {
  KernelFn k = custom(
      [](double x, double y) {
        if (x < y) return 0.0;
        if (y == 0.0) return kInf;
        return std::log(x / y);
      },
      1.0, "log_ratio", 0.0);
  k.kind_ = "log_ratio";
  k.channels_ = {{[](double x) { return std::log(x); }, [](double) { return 1.0; }},
                 {[](double) { return 1.0; }, [](double y) { return -std::log(y); }}};
  k.spec_ = json{{"kind", "log_ratio"}};
  return k;
}

KernelFn KernelFn::custom(std::function<double(double, double)> fn, double D, std::string name,
                          std::optional<double> homogeneity) {
  if (!(D >= 1.0)) throw PreconditionError("kernel constant D must be at least 1");
  KernelFn k{Blank{}};
  k.kind_ = "custom";
  k.fn_ = std::make_shared<const std::function<double(double, double)>>(std::move(fn));
  k.D_ = D;
  k.homogeneity_ = homogeneity;
  k.spec_ = json{{"kind", "custom"}, {"name", std::move(name)}, {"D", D}};
  return k;
}

KernelFn KernelFn::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "indicator") return indicator();
  if (kind == "difference_power") return difference_power(j.value("beta", 1.0));
  if (kind == "log_ratio") return log_ratio();
  throw PreconditionError("unknown kernel kind '" + kind + "'");
}

double KernelFn::operator()(double x, double y) const {
  if (x < y) return 0.0;
  return (*fn_)(x, y);
}

ExtReal kernel_eval(const KernelFn& k, double x, double y) {
  if (!(x >= 0.0) || !(y >= 0.0)) throw PreconditionError("kernel arguments must be nonnegative");
  return k(x, y);
}

double oinarov_defect(const KernelFn& k, int samples, double x_min, double x_max) {
  if (samples < 1) throw PreconditionError("oinarov_defect needs at least one sample");
  // m points give m(m+1)(m+2)/6 ordered triples with repetition
  int m = 1;
  while (static_cast<long long>(m + 1) * (m + 2) * (m + 3) / 6 <= samples) ++m;
  const auto g = log_grid(x_min, x_max, m);
  double D = 1.0;
  bool any = false;
  for (int ix = 0; ix < m; ++ix) {
    for (int iz = 0; iz <= ix; ++iz) {
      const double kxz = k(g[ix], g[iz]);
      for (int iy = 0; iy <= iz; ++iy) {
        const double kxy = k(g[ix], g[iy]);
        const double kzy = k(g[iz], g[iy]);
        if (std::isinf(kxy) || std::isinf(kxz) || std::isinf(kzy)) {
          throw DiagnosticError("kernel is infinite on a sampled triple");
        }
        const double sum = kxz + kzy;
        if (sum == 0.0 && kxy == 0.0) continue;
        any = true;
        if (sum == 0.0 || kxy == 0.0) return kInf;
        D = std::max({D, kxy / sum, sum / kxy});
      }
    }
  }
  return any ? D : 1.0;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int i = 1; i <= 10; ++i) a.push_back(i / 10.0);
  return a;
}

ChainResult chain_alpha(const KernelFn& k, const std::vector<double>& points, const std::vector<double>& alphas,
                        double cap) {
  if (points.size() < 3) throw PreconditionError("chain_alpha needs at least 3 finite level points");
  const int L = static_cast<int>(points.size());
  std::vector<double> step(L - 1);
  for (int j = 0; j + 1 < L; ++j) step[j] = k(points[j + 1], points[j]);
  ChainResult res;
  bool found = false;
  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  for (double alpha : sorted) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw PreconditionError("chain exponents must lie in (0, 1]");
    ChainCandidate c{alpha, 0.0, 0, 0};
    for (int n = 0; n + 1 < L; ++n) {
      double acc = 0.0;
      for (int i = n; i + 1 < L; ++i) {
        acc += std::pow(step[i], alpha);
        const double lhs = k(points[i + 1], points[n]);
        const double ratio = div0(lhs, std::pow(acc, 1.0 / alpha));
        if (ratio > c.constant) c = {alpha, ratio, n, i};
      }
    }
    res.candidates.push_back(c);
    if (!found && c.constant < cap) {
      res.best = c;
      found = true;
    }
  }
  if (!found) throw DiagnosticError("no chain exponent gives a constant below the cap; try a larger cap");
  return res;
}

ChainResult chain_alpha(const KernelFn& k, const Discretization& d, const std::vector<double>& alphas, double cap) {
  return chain_alpha(k, d.finite_points(), alphas, cap);
}

}  // namespace hol
