#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evoeq/linop.hpp"

namespace evoeq {

struct LaurentTerm {
  int power;
  Matrix coeff;
};

/// Holomorphic operator-valued function on a right half-plane Re z > nu0.
/// Represented as a finite Laurent family sum_k z^k M_k, optionally combined
/// through sums, products and inverses; derivatives are closed-form.
class MaterialLaw {
 public:
  static MaterialLaw laurent(double nu0, std::vector<LaurentTerm> terms,
                             std::string label = "");
  static MaterialLaw constant(Matrix m0, double nu0 = 0.0,
                              std::string label = "");
  static MaterialLaw sum(std::vector<MaterialLaw> parts);
  static MaterialLaw product(std::vector<MaterialLaw> factors);
  static MaterialLaw inverse(MaterialLaw inner);

  /// z -> z * M(z).
  MaterialLaw premultiply_z() const;

  Matrix eval(Complex z) const;
  Matrix derivative(Complex z) const;
  Matrix operator()(Complex z) const { return eval(z); }

  double nu0() const;
  Index dim() const;
  const std::string& label() const;

  /// True when every Laurent leaf uses only powers k <= 0, the structural
  /// admissibility condition for a bounded material law.
  bool nonpositive_powers_only() const;

  struct Node;
  const Node& root() const { return *node_; }
  static MaterialLaw from_node(std::shared_ptr<const Node> node);

 private:
  explicit MaterialLaw(std::shared_ptr<const Node> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct MaterialLaw::Node {
  enum class Kind { kLaurent, kSum, kProduct, kInverse };
  Kind kind = Kind::kLaurent;
  double nu0 = 0.0;
  std::vector<LaurentTerm> terms;  // kLaurent only
  std::string label;
  std::vector<std::shared_ptr<const Node>> args;  // combinators only
  Index dim = 0;
};

/// Finite sampling of the half-plane Re z > nu0: the Cartesian product of
/// re_points and im_points.
struct HalfPlaneGrid {
  double nu = 1.0;
  std::vector<double> re_points;
  std::vector<double> im_points;

  std::vector<Complex> points() const;

  /// Default certification grid: Re in {base*(1+2^-j)}_{j=0..6} + {10*base},
  /// Im in {0, +-1, +-10, +-100}*base with base = nu0 when nu0 > 0, else nu.
  static HalfPlaneGrid standard(double nu0, double nu);
};

/// min over grid z of lambda_min Re(z M(z)); a grid lower-bound estimate of
/// the Picard constant.
double picard_coercivity(const MaterialLaw& law, const HalfPlaneGrid& grid);

/// For Laurent laws with powers {0, -1} and self-adjoint PSD constant term,
/// lambda_min(nu * M_0 + Re M_-1) bounds Re zM(z) from below on Re z >= nu.
std::optional<double> picard_coercivity_analytic(const MaterialLaw& law,
                                                 double nu);

/// For pure Laurent laws with powers k <= 0: sum_k ||M_k|| base^k bounds
/// ||M(z)|| on Re z >= base > 0.
std::optional<double> laurent_sup_bound(const MaterialLaw& law, double base);

struct SupNormEstimate {
  double grid_value;                    // max over grid of ||M(z)||
  std::optional<double> laurent_bound;  // sum_k ||M_k|| nu0^k for pure k <= 0
};

SupNormEstimate sup_norm_estimate(const MaterialLaw& law,
                                  const HalfPlaneGrid& grid);

/// True iff lambda_min Re M(z)^-1 >= 1/d at every grid point. Equivalent to
/// Re<M(z)phi, phi> >= (1/d) ||M(z)phi||^2 for all phi.
bool alt_boundedness_check(const MaterialLaw& law, double d,
                           const HalfPlaneGrid& grid);

/// Pointwise Schur components of M(z) (or z M(z)) along the grid.
std::vector<std::pair<Complex, SchurQuadruple>> schur_trajectory(
    const MaterialLaw& law, const Decomposition& dec, const HalfPlaneGrid& grid,
    bool premultiply_z = false);

/// Finite-difference Wirtinger d-bar residual of a matrix family at z;
/// approximately zero for holomorphic families.
template <typename F>
double wirtinger_residual(F&& f, Complex z, double h) {
  const Matrix dx = (f(z + h) - f(z - h)) / (2.0 * h);
  const Matrix dy = (f(z + Complex(0, h)) - f(z - Complex(0, h))) / (2.0 * h);
  return 0.5 * operator_norm(dx + Complex(0, 1) * dy);
}

double holomorphy_residual(const MaterialLaw& law, Complex z, double h);

}  // namespace evoeq
