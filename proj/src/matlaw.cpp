#include "evoeq/matlaw.hpp"

#include <cmath>
#include <sstream>

namespace evoeq {

namespace {

using Node = MaterialLaw::Node;
using Kind = Node::Kind;

Complex int_pow(Complex z, int k) {
  if (k == 0) return Complex(1, 0);
  if (k < 0) return 1.0 / int_pow(z, -k);
  Complex acc(1, 0);
  Complex base = z;
  int e = k;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

Matrix eval_node(const Node& node, Complex z);

Matrix derivative_node(const Node& node, Complex z) {
  switch (node.kind) {
    case Kind::kLaurent: {
      Matrix acc = Matrix::Zero(node.dim, node.dim);
      for (const LaurentTerm& term : node.terms) {
        if (term.power == 0) continue;
        acc += static_cast<double>(term.power) * int_pow(z, term.power - 1) *
               term.coeff;
      }
      return acc;
    }
    case Kind::kSum: {
      Matrix acc = Matrix::Zero(node.dim, node.dim);
      for (const auto& arg : node.args) acc += derivative_node(*arg, z);
      return acc;
    }
    case Kind::kProduct: {
      // Product rule (MN)' = M N' + M' N folded over the factor list.
      Matrix value = eval_node(*node.args.front(), z);
      Matrix deriv = derivative_node(*node.args.front(), z);
      for (std::size_t i = 1; i < node.args.size(); ++i) {
        const Matrix next = eval_node(*node.args[i], z);
        deriv = value * derivative_node(*node.args[i], z) + deriv * next;
        value = value * next;
      }
      return deriv;
    }
    case Kind::kInverse: {
      // (M^-1)' = -M^-1 M' M^-1.
      const Matrix inv = eval_node(node, z);
      return -inv * derivative_node(*node.args.front(), z) * inv;
    }
  }
  throw Error("derivative: unknown node kind");
}

Matrix eval_node(const Node& node, Complex z) {
  switch (node.kind) {
    case Kind::kLaurent: {
      Matrix acc = Matrix::Zero(node.dim, node.dim);
      for (const LaurentTerm& term : node.terms) {
        acc += int_pow(z, term.power) * term.coeff;
      }
      return acc;
    }
    case Kind::kSum: {
      Matrix acc = Matrix::Zero(node.dim, node.dim);
      for (const auto& arg : node.args) acc += eval_node(*arg, z);
      return acc;
    }
    case Kind::kProduct: {
      Matrix acc = eval_node(*node.args.front(), z);
      for (std::size_t i = 1; i < node.args.size(); ++i) {
        acc = acc * eval_node(*node.args[i], z);
      }
      return acc;
    }
    case Kind::kInverse: {
      std::ostringstream who;
      who << "MaterialLaw inverse at z = " << z;
      return guarded_inverse(eval_node(*node.args.front(), z),
                             who.str().c_str());
    }
  }
  throw Error("eval: unknown node kind");
}

bool nonpositive_powers(const Node& node) {
  if (node.kind == Kind::kLaurent) {
    for (const LaurentTerm& term : node.terms) {
      if (term.power > 0) return false;
    }
    return true;
  }
  for (const auto& arg : node.args) {
    if (!nonpositive_powers(*arg)) return false;
  }
  return true;
}

void require_in_domain(const Node& node, Complex z, const char* who) {
  if (!(z.real() > node.nu0)) {
    std::ostringstream os;
    os << who << ": z = " << z << " outside the half-plane Re z > "
       << node.nu0;
    throw HalfPlaneDomainError(os.str());
  }
}

}  // namespace

MaterialLaw MaterialLaw::laurent(double nu0, std::vector<LaurentTerm> terms,
                                 std::string label) {
  if (terms.empty()) throw ShapeError("MaterialLaw: no Laurent terms");
  if (nu0 < 0.0) throw ConfigError("MaterialLaw: nu0 must be nonnegative");
  const Index dim = terms.front().coeff.rows();
  for (const LaurentTerm& term : terms) {
    if (term.coeff.rows() != dim || term.coeff.cols() != dim) {
      throw ShapeError(
          "MaterialLaw: coefficients must be square and share one dimension");
    }
    if (!all_finite(term.coeff)) {
      throw ConfigError("MaterialLaw: coefficient entries must be finite");
    }
  }
  auto node = std::make_shared<Node>();
  node->kind = Kind::kLaurent;
  node->nu0 = nu0;
  node->terms = std::move(terms);
  node->label = std::move(label);
  node->dim = dim;
  return MaterialLaw(std::move(node));
}

MaterialLaw MaterialLaw::constant(Matrix m0, double nu0, std::string label) {
  return laurent(nu0, {{0, std::move(m0)}}, std::move(label));
}

MaterialLaw MaterialLaw::sum(std::vector<MaterialLaw> parts) {
  if (parts.empty()) throw ShapeError("MaterialLaw::sum: no arguments");
  auto node = std::make_shared<Node>();
  node->kind = Kind::kSum;
  node->dim = parts.front().dim();
  for (MaterialLaw& part : parts) {
    if (part.dim() != node->dim) {
      throw ShapeError("MaterialLaw::sum: dimension mismatch");
    }
    node->nu0 = std::max(node->nu0, part.nu0());
    node->args.push_back(part.node_);
  }
  return MaterialLaw(std::move(node));
}

MaterialLaw MaterialLaw::product(std::vector<MaterialLaw> factors) {
  if (factors.empty()) throw ShapeError("MaterialLaw::product: no arguments");
  auto node = std::make_shared<Node>();
  node->kind = Kind::kProduct;
  node->dim = factors.front().dim();
  for (MaterialLaw& factor : factors) {
    if (factor.dim() != node->dim) {
      throw ShapeError("MaterialLaw::product: dimension mismatch");
    }
    node->nu0 = std::max(node->nu0, factor.nu0());
    node->args.push_back(factor.node_);
  }
  return MaterialLaw(std::move(node));
}

MaterialLaw MaterialLaw::inverse(MaterialLaw inner) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kInverse;
  node->dim = inner.dim();
  node->nu0 = inner.nu0();
  node->args.push_back(inner.node_);
  return MaterialLaw(std::move(node));
}

MaterialLaw MaterialLaw::premultiply_z() const {
  if (node_->kind == Kind::kLaurent) {
    std::vector<LaurentTerm> shifted = node_->terms;
    for (LaurentTerm& term : shifted) ++term.power;
    return laurent(node_->nu0, std::move(shifted),
                   node_->label.empty() ? "" : "z*" + node_->label);
  }
  MaterialLaw z_factor =
      laurent(node_->nu0, {{1, Matrix::Identity(dim(), dim())}}, "z");
  return product({z_factor, *this});
}

MaterialLaw MaterialLaw::from_node(std::shared_ptr<const Node> node) {
  return MaterialLaw(std::move(node));
}

Matrix MaterialLaw::eval(Complex z) const {
  require_in_domain(*node_, z, "MaterialLaw::eval");
  return eval_node(*node_, z);
}

Matrix MaterialLaw::derivative(Complex z) const {
  require_in_domain(*node_, z, "MaterialLaw::derivative");
  return derivative_node(*node_, z);
}

double MaterialLaw::nu0() const { return node_->nu0; }
Index MaterialLaw::dim() const { return node_->dim; }
const std::string& MaterialLaw::label() const { return node_->label; }

bool MaterialLaw::nonpositive_powers_only() const {
  return nonpositive_powers(*node_);
}

std::vector<Complex> HalfPlaneGrid::points() const {
  if (re_points.empty() || im_points.empty()) {
    throw ConfigError("HalfPlaneGrid: grid must be nonempty");
  }
  std::vector<Complex> pts;
  pts.reserve(re_points.size() * im_points.size());
  for (double re : re_points) {
    for (double im : im_points) pts.emplace_back(re, im);
  }
  return pts;
}

HalfPlaneGrid HalfPlaneGrid::standard(double nu0, double nu) {
  const double base = nu0 > 0.0 ? nu0 : nu;
  HalfPlaneGrid grid;
  grid.nu = nu;
  for (int j = 0; j <= 6; ++j) {
    grid.re_points.push_back(base * (1.0 + std::ldexp(1.0, -j)));
  }
  grid.re_points.push_back(10.0 * base);
  for (double m : {0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0}) {
    grid.im_points.push_back(m * base);
  }
  return grid;
}

double picard_coercivity(const MaterialLaw& law, const HalfPlaneGrid& grid) {
  double worst = std::numeric_limits<double>::infinity();
  for (Complex z : grid.points()) {
    worst = std::min(worst, hermitian_lower_bound(z * law.eval(z)));
  }
  return worst;
}

std::optional<double> picard_coercivity_analytic(const MaterialLaw& law,
                                                 double nu) {
  const Node& node = law.root();
  if (node.kind != Node::Kind::kLaurent) return std::nullopt;
  Matrix m0 = Matrix::Zero(node.dim, node.dim);
  Matrix m1 = Matrix::Zero(node.dim, node.dim);
  for (const LaurentTerm& term : node.terms) {
    if (term.power == 0) {
      m0 += term.coeff;
    } else if (term.power == -1) {
      m1 += term.coeff;
    } else {
      return std::nullopt;
    }
  }
  // Requires the constant term self-adjoint and PSD so that
  // Re(z M0) = Re(z) M0 >= nu M0.
  if (operator_norm(m0 - m0.adjoint()) > 1e-12 * std::max(1.0, operator_norm(m0)))
    return std::nullopt;
  if (hermitian_lower_bound(m0) < -1e-12) return std::nullopt;
  return hermitian_lower_bound(nu * m0 + hermitian_part(m1));
}

std::optional<double> laurent_sup_bound(const MaterialLaw& law, double base) {
  const Node& node = law.root();
  if (node.kind != Node::Kind::kLaurent || !law.nonpositive_powers_only() ||
      !(base > 0.0)) {
    return std::nullopt;
  }
  double bound = 0.0;
  for (const LaurentTerm& term : node.terms) {
    bound += operator_norm(term.coeff) * std::pow(base, term.power);
  }
  return bound;
}

SupNormEstimate sup_norm_estimate(const MaterialLaw& law,
                                  const HalfPlaneGrid& grid) {
  SupNormEstimate out{0.0, std::nullopt};
  for (Complex z : grid.points()) {
    out.grid_value = std::max(out.grid_value, operator_norm(law.eval(z)));
  }
  const Node& node = law.root();
  if (node.kind == Node::Kind::kLaurent && law.nonpositive_powers_only() &&
      node.nu0 > 0.0) {
    double bound = 0.0;
    for (const LaurentTerm& term : node.terms) {
      bound += operator_norm(term.coeff) * std::pow(node.nu0, term.power);
    }
    out.laurent_bound = bound;
  }
  return out;
}

bool alt_boundedness_check(const MaterialLaw& law, double d,
                           const HalfPlaneGrid& grid) {
  if (!(d > 0.0)) throw ConfigError("alt_boundedness_check: d must be > 0");
  for (Complex z : grid.points()) {
    Matrix inv;
    try {
      inv = guarded_inverse(law.eval(z), "alt_boundedness_check");
    } catch (const SingularBlockError& e) {
      std::ostringstream os;
      os << "alt_boundedness_check: M(z) singular at z = " << z;
      throw SingularBlockError(os.str(), e.rcond);
    }
    if (hermitian_lower_bound(inv) < 1.0 / d) return false;
  }
  return true;
}

std::vector<std::pair<Complex, SchurQuadruple>> schur_trajectory(
    const MaterialLaw& law, const Decomposition& dec, const HalfPlaneGrid& grid,
    bool premultiply_z) {
  std::vector<std::pair<Complex, SchurQuadruple>> out;
  for (Complex z : grid.points()) {
    Matrix value = law.eval(z);
    if (premultiply_z) value = z * value;
    try {
      out.emplace_back(z, schur_components(value, dec));
    } catch (const SingularBlockError& e) {
      std::ostringstream os;
      os << "schur_trajectory: membership fails at z = " << z << " ("
         << e.what() << ")";
      throw MembershipError(os.str(), "M00^-1 bounded");
    }
  }
  return out;
}

double holomorphy_residual(const MaterialLaw& law, Complex z, double h) {
  if (!(h > 0.0)) throw ConfigError("holomorphy_residual: h must be > 0");
  if (!(z.real() - h > law.nu0())) {
    std::ostringstream os;
    os << "holomorphy_residual: stencil of radius " << h << " around z = " << z
       << " leaves Re z > " << law.nu0();
    throw HalfPlaneDomainError(os.str());
  }
  return wirtinger_residual([&law](Complex w) { return law.eval(w); }, z, h);
}

}  // namespace evoeq
