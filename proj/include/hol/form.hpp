#pragma once

// Discretized quasilinear forms
//
//   N(f) = ( int U(x) O(x)^r dx )^(1/r),
//   O(x) = ( int_{lo2(x)}^{hi2(x)} W(x,y) I(y)^q dy )^(1/q)   (or O = I),
//   I(x) = int_{lo1(x)}^{hi1(x)} K(x,z) f(z) dz,
//
// for step functions f, together with D(f) = ||f||_{L^p_v} and exact
// gradients of both in the cell values. Every ratio the oracle maximizes is
// of this shape.

#include <optional>
#include <string>
#include <vector>

#include "hol/grid_function.hpp"
#include "hol/kernels.hpp"
#include "hol/weight.hpp"

namespace hol {

/// Cells [b_i, b_{i+1}) with b_0 = 0 and a final tail cell [b_last, inf).
/// Finite cells carry Gauss nodes in x, the tail cell in tau = b_last / x.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<double> breaks, int nodes_per_cell = 3, int edge_nodes = 8);

  [[nodiscard]] int cells() const { return static_cast<int>(breaks_.size()); }
  [[nodiscard]] double lo(int c) const { return breaks_[c]; }
  [[nodiscard]] double hi(int c) const { return c + 1 < cells() ? breaks_[c + 1] : kInf; }
  [[nodiscard]] bool is_tail(int c) const { return c + 1 == cells(); }
  [[nodiscard]] int nodes() const { return static_cast<int>(x_.size()); }
  [[nodiscard]] double x(int b) const { return x_[b]; }
  [[nodiscard]] int cell_of_node(int b) const { return node_cell_[b]; }
  [[nodiscard]] int first_node(int c) const { return first_[c]; }
  [[nodiscard]] int node_count(int c) const { return first_[c + 1] - first_[c]; }
  /// Cell containing x (half-open cells).
  [[nodiscard]] int locate(double x) const;
  /// Lagrange basis of cell c evaluated at x.
  void basis(int c, double x, double* out) const;
  /// out[l * G + k] = int_a^b h_l(y) ell_k(y) dy over [a, b] inside cell c,
  /// for m functions filled by h(y, vals).
  std::vector<double> product_weights(int c, double a, double b, int m,
                                      const std::function<void(double, double*)>& h) const;
  /// Piecewise-constant weights: int of h over the node's share of [a, b].
  std::vector<double> share_weights(int c, double a, double b, const RealFn& h) const;
  [[nodiscard]] const std::vector<double>& breaks() const { return breaks_; }

 private:
  [[nodiscard]] const GaussRule& rule(int c) const { return (c == 0 || is_tail(c)) ? edge_ : inner_; }
  [[nodiscard]] double coord(int c, double x) const;
  [[nodiscard]] double from_coord(int c, double t) const;

  std::vector<double> breaks_;
  GaussRule inner_;
  GaussRule edge_;
  std::vector<double> x_;
  std::vector<int> node_cell_;
  std::vector<int> first_;
};

/// Sparse-plus-separable linear map y = M x. Row a is
///   sum_l alpha[a,l] * sum_{c0[a] <= j < c1[a]} beta[j,l] x_j  +  explicit entries.
class RowMap {
 public:
  RowMap() = default;
  RowMap(int rows, int cols, int channels);

  void set_range(int row, int c0, int c1, const double* alpha);
  void add_entry(int row, int col, double value);
  std::vector<double>& beta() { return beta_; }
  void finalize();

  void apply(const double* x, double* y) const;
  /// out += M^T g.
  void apply_transpose(const double* g, double* out) const;
  [[nodiscard]] int rows() const { return rows_; }

 private:
  int rows_ = 0, cols_ = 0, L_ = 0;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  std::vector<int> c0_, c1_;
  std::vector<std::vector<std::pair<int, double>>> pending_;
  std::vector<int> ptr_;
  std::vector<int> idx_;
  std::vector<double> val_;
};

/// Kernel factor of one level: k(arg(x), z) when x_first, k(z, arg(x)) otherwise,
/// where x is the level's outer variable and z its integration variable.
struct LevelKernel {
  KernelFn k;
  bool x_first = true;
  RealFn arg;  // identity when empty
};

struct InnerSpec {
  RealFn lo;
  RealFn hi;
  std::optional<LevelKernel> kernel;
};

struct OuterSpec {
  RealFn lo;
  RealFn hi;
  RealFn w;
  std::vector<double> w_breaks;
  std::optional<LevelKernel> kernel;
  double q = 1.0;  // inf for ess sup
};

struct FormSpec {
  InnerSpec inner;
  std::optional<OuterSpec> outer;
  RealFn U;
  std::vector<double> U_breaks;
  double r = 1.0;  // inf for ess sup
  double p = 2.0;
  WeightFn v;
  double x_min = 1e-6;
  double x_max = 1e6;
  int cells = 512;
  std::vector<double> extra_breaks;
  /// Let f live on [0, x_max) instead of [x_min, x_max).
  bool f_from_origin = false;
};

class Form {
 public:
  explicit Form(FormSpec spec);

  [[nodiscard]] const Mesh& mesh() const { return mesh_; }
  [[nodiscard]] int dim() const { return mesh_.cells(); }
  [[nodiscard]] bool active(int c) const { return active_[c] != 0; }
  /// Integral of v over each cell (p finite) or its ess sup (p = inf).
  [[nodiscard]] const std::vector<double>& source_weights() const { return V_; }
  [[nodiscard]] double p() const { return spec_.p; }
  [[nodiscard]] const FormSpec& spec() const { return spec_; }

  double numerator(const std::vector<double>& f, std::vector<double>* grad = nullptr) const;
  double denominator(const std::vector<double>& f, std::vector<double>* grad = nullptr) const;
  /// Inner values I at the mesh nodes.
  [[nodiscard]] std::vector<double> inner_values(const std::vector<double>& f) const;

  [[nodiscard]] GridFunction to_grid(const std::vector<double>& f) const;
  /// Cell averages of a grid function on the active cells.
  [[nodiscard]] std::vector<double> from_grid(const GridFunction& g) const;
  /// Values of a callable at the cell midpoints of active cells.
  [[nodiscard]] std::vector<double> sample(const RealFn& fn) const;

 private:
  void build_inner();
  void build_outer();
  void build_final();

  FormSpec spec_;
  Mesh mesh_;
  std::vector<char> active_;
  std::vector<double> V_;
  RowMap inner_;
  RowMap outer_;
  bool has_outer_ = false;
  bool outer_sup_ = false;
  // q = inf outer level: per row either a node range (kernel-free) or explicit list
  std::vector<int> sup_b0_, sup_b1_;
  std::vector<double> sup_w_;  // per node weight in the kernel-free case
  std::vector<std::vector<std::pair<int, double>>> sup_rows_;
  std::vector<double> Wfinal_;  // product weights of U (r finite) or node values (r = inf)
};

}  // namespace hol
