#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hol/discretize.hpp"
#include "hol/extreal.hpp"
#include "json.hpp"

namespace hol {

/// One separable piece of a kernel: k(x, y) contains phi(x) * psi(y) for x >= y.
struct KernelChannel {
  std::function<double(double)> phi;
  std::function<double(double)> psi;
};

/// Kernel k(x, y) >= 0 vanishing for x < y, with a declared constant D of the
/// quasi-additivity condition (1/D)(k(x,z)+k(z,y)) <= k(x,y) <= D(k(x,z)+k(z,y)).
class KernelFn {
 public:
  KernelFn();  // indicator of x >= y

  static KernelFn indicator();
  /// (x - y)^beta for x >= y.
  static KernelFn difference_power(double beta);
  /// log(x / y) for x >= y > 0.
  static KernelFn log_ratio();
  static KernelFn custom(std::function<double(double, double)> fn, double D, std::string name,
                         std::optional<double> homogeneity = std::nullopt);
  static KernelFn from_json(const nlohmann::json& j);

  [[nodiscard]] double operator()(double x, double y) const;
  [[nodiscard]] double D_declared() const { return D_; }
  [[nodiscard]] std::optional<double> homogeneity_degree() const { return homogeneity_; }
  [[nodiscard]] bool is_indicator() const { return kind_ == "indicator"; }
  [[nodiscard]] const std::string& kind() const { return kind_; }
  /// Separable expansion of k on x >= y, empty when none is known.
  [[nodiscard]] const std::vector<KernelChannel>& channels() const { return channels_; }
  [[nodiscard]] nlohmann::json to_json() const { return spec_; }

 private:
  struct Blank {};
  explicit KernelFn(Blank) {}

  std::string kind_;
  std::shared_ptr<const std::function<double(double, double)>> fn_;
  double D_ = 1.0;
  std::optional<double> homogeneity_;
  std::vector<KernelChannel> channels_;
  nlohmann::json spec_;
};

/// k(x, y) with the checks of the public evaluation (x, y >= 0).
ExtReal kernel_eval(const KernelFn& k, double x, double y);

/// Smallest D satisfying the quasi-additivity condition over a log-spaced
/// sample of about `samples` triples x >= z >= y in [x_min, x_max].
double oinarov_defect(const KernelFn& k, int samples = 100000, double x_min = 1e-6, double x_max = 1e6);

struct ChainCandidate {
  double alpha = 0.0;
  double constant = kInf;
  int n = 0;  // witness pair attaining the constant
  int i = 0;
};

struct ChainResult {
  ChainCandidate best;
  std::vector<ChainCandidate> candidates;
};

/// For each alpha computes the least c with
///   k(a_{i+1}, a_n) <= c (sum_{j=n..i} k(a_{j+1}, a_j)^alpha)^(1/alpha)
/// over all finite level pairs n <= i, and returns the smallest alpha whose
/// c stays below cap.
ChainResult chain_alpha(const KernelFn& k, const std::vector<double>& points, const std::vector<double>& alphas,
                        double cap = 1e3);
ChainResult chain_alpha(const KernelFn& k, const Discretization& d, const std::vector<double>& alphas,
                        double cap = 1e3);
/// The default grid {0.1, 0.2, ..., 1.0}.
std::vector<double> default_alpha_grid();

}  // namespace hol
