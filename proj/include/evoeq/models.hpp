#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evoeq/convergence.hpp"

namespace evoeq {

/// Rectangular cell grid over a 1-D interval or 2-D box.
struct DomainGrid {
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<Index, 2> n_cells{8, 1};
  Index unknown_cap = 4096;

  void validate() const;
  double spacing(int axis) const {
    return extent[static_cast<std::size_t>(axis)] /
           static_cast<double>(n_cells[static_cast<std::size_t>(axis)]);
  }
  Index cells() const {
    return dim == 1 ? n_cells[0] : n_cells[0] * n_cells[1];
  }
  /// Flux unknowns: interior faces (homogeneous Neumann on the flux).
  Index flux_dim() const;
};

/// Per-cell dim x dim coefficient matrices with certified uniform bounds
/// alpha <= lambda_min Re a(x) and lambda_min Re a(x)^-1 >= 1/beta.
struct CoefficientField {
  DomainGrid grid;
  std::vector<Matrix> values;  // one per cell, row-major over the grid
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const;
  static CoefficientField constant(const DomainGrid& grid, Complex value);
};

/// Multiplication operator of a per-cell field on the staggered flux space.
/// Faces sample the harmonic mean of the two adjacent cells in the face
/// direction, which reproduces the exact series resistance in 1-D.
Matrix face_multiplication(const CoefficientField& field);

/// Nonlocal spherical-shell average: in n dimensions
///   (S_r q)(x) = n * int_0^1 (1/|S_1|) int_{S_1} <q(x + r s y), y> y ds(y) ds,
/// with q extended by zero outside the domain, realised as a dense operator
/// on the flux space (Gauss-Legendre in s, trapezoid on the circle,
/// multilinear interpolation).
struct SrOperator {
  double r = 0.0;
  DomainGrid grid;
  std::vector<double> s_nodes, s_weights;          // on [0,1], weights sum 1
  std::vector<std::array<double, 2>> sphere_nodes;  // unit directions
  std::vector<double> sphere_weights;               // sum |S_1|
  Matrix dense;  // flux_dim x flux_dim
};

SrOperator make_sr_operator(const DomainGrid& grid, double r, int n_s = 16,
                            int n_angle = 64);

/// Apply to a flux-space field (column per field).
Matrix sr_apply(const SrOperator& op, const Matrix& q);

struct UnityDefect {
  double r = 0.0;
  double defect = 0.0;         // max over fields ||S_r q - q|| / ||q||
  double operator_norm = 0.0;  // ||S_r||
};

/// Approximation-of-unity diagnostics over a family of radii.
std::vector<UnityDefect> approx_unity_defect(const std::vector<SrOperator>& ops,
                                             const Matrix& test_fields);

enum class BoundaryCondition { kNeumann, kDirichlet };

/// Staggered-grid realisation of A = [[0, div], [grad, 0]] with div = -grad^T
/// so the block operator is exactly skew-selfadjoint, plus the induced
/// ker A (+) ran A decomposition.
struct DiffusionSystem {
  DomainGrid grid;
  BoundaryCondition bc = BoundaryCondition::kNeumann;
  Matrix grad;    // flux_dim x cells
  Matrix a_skew;  // (cells + flux_dim)^2
  Decomposition dec;
  Matrix flux_coeff;  // face multiplication of the assembly coefficient

  Index scalar_dim() const { return grid.cells(); }
  Index flux_dim_() const { return a_skew.rows() - grid.cells(); }

  /// Material law z -> diag(1, 0) + z^-1 diag(0, inv(flux_op)) for an
  /// accretive operator on the flux space.
  MaterialLaw law_for(const Matrix& flux_op, const std::string& label = "") const;
  /// Law built from the assembly coefficient itself.
  MaterialLaw law() const { return law_for(flux_coeff, "diffusion"); }
};

DiffusionSystem assemble_diffusion(const DomainGrid& grid,
                                   const CoefficientField& a,
                                   BoundaryCondition bc);

/// Piecewise-constant alternating pattern with n blocks across the axis;
/// the 1-D homogenised limit of the alternating pair is the harmonic mean
/// 2 alpha beta / (alpha + beta).
CoefficientField oscillating_coefficient(Index n, double alpha, double beta,
                                         const DomainGrid& grid);

struct CellMigConfig {
  DomainGrid grid;
  double a1 = 2.0, a2 = 0.5, a3 = 0.5;
  std::vector<double> r_values;
  TimeGrid time_grid;
  HalfPlaneGrid hp_grid;
  ExperimentOptions opts;
  int n_s = 16, n_angle = 64;
};

/// Continuous-dependence experiment for the nonlocal cell-migration model:
/// material laws M_r built from A_r = a1 - a2 S_r a3 against the r = 0 limit
/// A_0 = a1 - a2 a3. Extras carry the approximation-of-unity defects, the
/// measured ||S_r|| bounds and the strong-operator gaps of A_r^-1.
ConvergenceReport cellmig_experiment(const CellMigConfig& config);

struct PiezoBlocks {
  Matrix C, e, eps, mu, sigma;
};

struct Certificate {
  std::string name;       // the inequality it encodes
  double measured = 0.0;
  double required = 0.0;
  bool pass = false;
};

struct PiezoParams {
  Index dim0 = 1;  // size of the leading scalar slot
  double nu0 = 0.0;
  double c = 0.0;  // lower positivity constant
  double d = 0.0;  // upper bound constant
};

struct PiezoSystem {
  Matrix m0, m1;
  MaterialLaw law;
  Matrix a_skew;
  Decomposition dec;
  std::vector<Certificate> certificates;
};

/// Random skew-selfadjoint operator with a prescribed kernel dimension.
Matrix prescribed_kernel_skew(Index dim, Index kernel_dim, std::uint64_t seed);

/// Assemble the coupled first-order block system
///   M0 = [[1,0,0,0],[0,C^-1,C^-1 e,0],[0,e* C^-1,eps+e* C^-1 e,0],[0,0,0,mu]],
///   M1 = diag(0,0,sigma,0), law = M0 + z^-1 M1,
/// after certifying C >= 1/d, mu >= c, nu eps + Re sigma >= c, C^-1 >= c,
/// mu^-1 >= 1/d and Re (eps + sigma/z)^-1 >= 1/d on the grid.
PiezoSystem assemble_piezo(const PiezoBlocks& blocks, const PiezoParams& params,
                           const HalfPlaneGrid& grid, const Matrix& a_skew,
                           const Decomposition& dec);
PiezoSystem assemble_piezo(const PiezoBlocks& blocks, const PiezoParams& params,
                           const HalfPlaneGrid& grid, std::uint64_t skew_seed,
                           Index kernel_dim);

struct PiezoConvergenceConfig {
  PiezoBlocks base;   // limit blocks
  PiezoBlocks delta;  // 1/n perturbation directions
  bool alternate_sigma = true;
  std::vector<double> n_values;
  PiezoParams params;
  std::uint64_t skew_seed = 7;
  Index kernel_dim = 0;
  HalfPlaneGrid hp_grid;
  TimeGrid time_grid;
  ExperimentOptions opts;
};

/// Entrywise-convergent block sequences C_n, e_n, eps_n, mu_n, sigma_n fed
/// through the solution-convergence experiment with shared constants.
ConvergenceReport piezo_convergence(const PiezoConvergenceConfig& config);

/// Gauss-Legendre nodes and weights on [0, 1]; weights sum to one.
void gauss_legendre_01(int n, std::vector<double>& nodes,
                       std::vector<double>& weights);

}  // namespace evoeq
