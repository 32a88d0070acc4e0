#include "evoeq/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "evoeq/rng.hpp"

namespace evoeq {

namespace {

constexpr double kSkewTol = 1e-12;

struct FluxLayout {
  // Neumann layout: interior faces only, flux vanishes on the boundary.
  Index nx = 0, ny = 0;
  int dim = 1;
  double hx = 0.0, hy = 0.0;

  Index qx_count() const { return dim == 1 ? nx - 1 : (nx - 1) * ny; }
  Index qy_count() const { return dim == 1 ? 0 : nx * (ny - 1); }
  Index total() const { return qx_count() + qy_count(); }

  Index qx_index(Index i, Index j) const { return (i - 1) + (nx - 1) * j; }
  Index qy_index(Index i, Index j) const {
    return qx_count() + i + nx * (j - 1);
  }
  double qx_x(Index i) const { return hx * static_cast<double>(i); }
  double qx_y(Index j) const { return hy * (static_cast<double>(j) + 0.5); }
  double qy_x(Index i) const { return hx * (static_cast<double>(i) + 0.5); }
  double qy_y(Index j) const { return hy * static_cast<double>(j); }
};

FluxLayout layout_of(const DomainGrid& grid) {
  FluxLayout l;
  l.dim = grid.dim;
  l.nx = grid.n_cells[0];
  l.ny = grid.dim == 2 ? grid.n_cells[1] : 1;
  l.hx = grid.spacing(0);
  l.hy = grid.dim == 2 ? grid.spacing(1) : 1.0;
  return l;
}

// Scatter the multilinear interpolation of one flux component at a physical
// point into a dense row; lookups outside the lattice contribute zero.
void scatter_component(const FluxLayout& l, bool x_component, double px,
                       double py, double coeff, Matrix& mat, Index row) {
  if (l.dim == 1) {
    const double u = px / l.hx;
    const Index i0 = static_cast<Index>(std::floor(u));
    const double fu = u - static_cast<double>(i0);
    for (int di = 0; di <= 1; ++di) {
      const Index i = i0 + di;
      const double w = di == 0 ? 1.0 - fu : fu;
      if (i >= 1 && i <= l.nx - 1 && w != 0.0) {
        mat(row, i - 1) += coeff * w;
      }
    }
    return;
  }
  // Lattice coordinates of the staggered component.
  const double u = x_component ? px / l.hx : px / l.hx - 0.5;
  const double v = x_component ? py / l.hy - 0.5 : py / l.hy;
  const Index i0 = static_cast<Index>(std::floor(u));
  const Index j0 = static_cast<Index>(std::floor(v));
  const double fu = u - static_cast<double>(i0);
  const double fv = v - static_cast<double>(j0);
  for (int di = 0; di <= 1; ++di) {
    for (int dj = 0; dj <= 1; ++dj) {
      const Index i = i0 + di;
      const Index j = j0 + dj;
      const double w = (di == 0 ? 1.0 - fu : fu) * (dj == 0 ? 1.0 - fv : fv);
      if (w == 0.0) continue;
      if (x_component) {
        if (i >= 1 && i <= l.nx - 1 && j >= 0 && j <= l.ny - 1) {
          mat(row, l.qx_index(i, j)) += coeff * w;
        }
      } else {
        if (i >= 0 && i <= l.nx - 1 && j >= 1 && j <= l.ny - 1) {
          mat(row, l.qy_index(i, j)) += coeff * w;
        }
      }
    }
  }
}

double direction_component(const Matrix& cell_matrix, int axis) {
  return cell_matrix(axis, axis).real();
}

void require_axis_aligned(const Matrix& cell_matrix, Index cell) {
  if (cell_matrix.rows() == 1) return;
  double off = 0.0;
  for (Index i = 0; i < cell_matrix.rows(); ++i) {
    for (Index j = 0; j < cell_matrix.cols(); ++j) {
      if (i != j) off = std::max(off, std::abs(cell_matrix(i, j)));
      else off = std::max(off, std::abs(cell_matrix(i, j).imag()));
    }
  }
  if (off > 1e-14) {
    std::ostringstream os;
    os << "face_multiplication: cell " << cell
       << " carries cross-coupling entries; the staggered flux grid only "
          "represents axis-aligned real coefficients";
    throw ConfigError(os.str());
  }
}

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

void DomainGrid::validate() const {
  if (dim != 1 && dim != 2) throw ConfigError("DomainGrid: dim must be 1 or 2");
  for (int axis = 0; axis < dim; ++axis) {
    if (n_cells[static_cast<std::size_t>(axis)] < 2) {
      throw ConfigError("DomainGrid: need at least 2 cells per axis");
    }
    if (!(extent[static_cast<std::size_t>(axis)] > 0.0)) {
      throw ConfigError("DomainGrid: extent must be positive");
    }
  }
  const Index unknowns = cells() + flux_dim();
  if (unknowns > unknown_cap) {
    std::ostringstream os;
    os << "DomainGrid: " << unknowns << " unknowns exceed the cap "
       << unknown_cap;
    throw ConfigError(os.str());
  }
}

Index DomainGrid::flux_dim() const {
  const FluxLayout l = layout_of(*this);
  return l.total();
}

void CoefficientField::validate() const {
  grid.validate();
  if (static_cast<Index>(values.size()) != grid.cells()) {
    throw ShapeError("CoefficientField: one value per cell required");
  }
  if (!(alpha > 0.0) || !(beta > 0.0) || alpha > beta) {
    throw ConfigError("CoefficientField: requires 0 < alpha <= beta");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Matrix& a = values[i];
    if (a.rows() != grid.dim || a.cols() != grid.dim) {
      throw ShapeError("CoefficientField: values must be dim x dim");
    }
    const double lb = hermitian_lower_bound(a);
    if (lb < alpha - 1e-12) {
      std::ostringstream os;
      os << "CoefficientField: cell " << i << " violates Re a(x) >= alpha ("
         << lb << " < " << alpha << ")";
      throw ConditionError(os.str(), "Re a(x) >= alpha");
    }
    const double inv_lb =
        hermitian_lower_bound(guarded_inverse(a, "CoefficientField"));
    if (inv_lb < 1.0 / beta - 1e-12) {
      std::ostringstream os;
      os << "CoefficientField: cell " << i
         << " violates Re a(x)^-1 >= 1/beta (" << inv_lb << " < " << 1.0 / beta
         << ")";
      throw ConditionError(os.str(), "Re a(x)^-1 >= 1/beta");
    }
  }
}

CoefficientField CoefficientField::constant(const DomainGrid& grid,
                                            Complex value) {
  CoefficientField field;
  field.grid = grid;
  const Matrix cell = value * Matrix::Identity(grid.dim, grid.dim);
  field.values.assign(static_cast<std::size_t>(grid.cells()), cell);
  const double re = hermitian_lower_bound(cell);
  if (!(re > 0.0)) {
    throw ConditionError("CoefficientField: constant value not accretive",
                         "Re a(x) >= alpha");
  }
  field.alpha = re;
  field.beta = std::norm(value) / re;
  return field;
}

Matrix face_multiplication(const CoefficientField& field) {
  field.validate();
  const FluxLayout l = layout_of(field.grid);
  Vector diag(l.total());
  const auto cell_value = [&](Index i, Index j, int axis) {
    const Index cell = i + l.nx * j;
    const Matrix& m = field.values[static_cast<std::size_t>(cell)];
    require_axis_aligned(m, cell);
    return direction_component(m, axis);
  };
  if (l.dim == 1) {
    for (Index i = 1; i <= l.nx - 1; ++i) {
      diag(i - 1) = harmonic_mean(cell_value(i - 1, 0, 0), cell_value(i, 0, 0));
    }
  } else {
    for (Index j = 0; j < l.ny; ++j) {
      for (Index i = 1; i <= l.nx - 1; ++i) {
        diag(l.qx_index(i, j)) =
            harmonic_mean(cell_value(i - 1, j, 0), cell_value(i, j, 0));
      }
    }
    for (Index j = 1; j <= l.ny - 1; ++j) {
      for (Index i = 0; i < l.nx; ++i) {
        diag(l.qy_index(i, j)) =
            harmonic_mean(cell_value(i, j - 1, 1), cell_value(i, j, 1));
      }
    }
  }
  return diag.asDiagonal();
}

void gauss_legendre_01(int n, std::vector<double>& nodes,
                       std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton iteration for the i-th root of P_n on [-1, 1].
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 =
            ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 + x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

SrOperator make_sr_operator(const DomainGrid& grid, double r, int n_s,
                            int n_angle) {
  grid.validate();
  if (r < 0.0) throw ConfigError("make_sr_operator: r must be nonnegative");
  SrOperator op;
  op.r = r;
  op.grid = grid;
  gauss_legendre_01(n_s, op.s_nodes, op.s_weights);
  if (grid.dim == 1) {
    op.sphere_nodes = {{1.0, 0.0}, {-1.0, 0.0}};
    op.sphere_weights = {1.0, 1.0};  // counting measure, |S_1| = 2
  } else {
    op.sphere_nodes.reserve(static_cast<std::size_t>(n_angle));
    op.sphere_weights.assign(static_cast<std::size_t>(n_angle),
                             2.0 * std::numbers::pi / n_angle);
    for (int a = 0; a < n_angle; ++a) {
      const double theta = 2.0 * std::numbers::pi * a / n_angle;
      op.sphere_nodes.push_back({std::cos(theta), std::sin(theta)});
    }
  }
  const FluxLayout l = layout_of(grid);
  const double sphere_measure = grid.dim == 1 ? 2.0 : 2.0 * std::numbers::pi;
  const double n_dim = static_cast<double>(grid.dim);
  Matrix dense = Matrix::Zero(l.total(), l.total());
  const auto add_target = [&](Index row, double px, double py, double yx,
                              double yy, double angle_weight,
                              double out_component) {
    for (std::size_t si = 0; si < op.s_nodes.size(); ++si) {
      const double base =
          n_dim * op.s_weights[si] * angle_weight / sphere_measure;
      const double qpx = px + r * op.s_nodes[si] * yx;
      const double qpy = py + r * op.s_nodes[si] * yy;
      const double coeff = base * out_component;
      if (yx != 0.0) {
        scatter_component(l, true, qpx, qpy, coeff * yx, dense, row);
      }
      if (l.dim == 2 && yy != 0.0) {
        scatter_component(l, false, qpx, qpy, coeff * yy, dense, row);
      }
    }
  };
  if (grid.dim == 1) {
    for (Index i = 1; i <= l.nx - 1; ++i) {
      const Index row = i - 1;
      for (std::size_t a = 0; a < op.sphere_nodes.size(); ++a) {
        const double yx = op.sphere_nodes[a][0];
        add_target(row, l.qx_x(i), 0.0, yx, 0.0, op.sphere_weights[a], yx);
      }
    }
  } else {
    for (Index j = 0; j < l.ny; ++j) {
      for (Index i = 1; i <= l.nx - 1; ++i) {
        const Index row = l.qx_index(i, j);
        for (std::size_t a = 0; a < op.sphere_nodes.size(); ++a) {
          const auto& y = op.sphere_nodes[a];
          add_target(row, l.qx_x(i), l.qx_y(j), y[0], y[1],
                     op.sphere_weights[a], y[0]);
        }
      }
    }
    for (Index j = 1; j <= l.ny - 1; ++j) {
      for (Index i = 0; i < l.nx; ++i) {
        const Index row = l.qy_index(i, j);
        for (std::size_t a = 0; a < op.sphere_nodes.size(); ++a) {
          const auto& y = op.sphere_nodes[a];
          add_target(row, l.qy_x(i), l.qy_y(j), y[0], y[1],
                     op.sphere_weights[a], y[1]);
        }
      }
    }
  }
  op.dense = std::move(dense);
  return op;
}

Matrix sr_apply(const SrOperator& op, const Matrix& q) {
  if (q.rows() != op.dense.cols()) {
    throw ShapeError("sr_apply: field shape does not match the flux space");
  }
  return op.dense * q;
}

std::vector<UnityDefect> approx_unity_defect(const std::vector<SrOperator>& ops,
                                             const Matrix& test_fields) {
  std::vector<UnityDefect> out;
  out.reserve(ops.size());
  for (const SrOperator& op : ops) {
    UnityDefect d;
    d.r = op.r;
    d.operator_norm = evoeq::operator_norm(op.dense);
    const Matrix diff = sr_apply(op, test_fields) - test_fields;
    for (Index c = 0; c < test_fields.cols(); ++c) {
      const double qn = test_fields.col(c).norm();
      if (qn == 0.0) continue;
      d.defect = std::max(d.defect, diff.col(c).norm() / qn);
    }
    out.push_back(d);
  }
  return out;
}

DiffusionSystem assemble_diffusion(const DomainGrid& grid,
                                   const CoefficientField& a,
                                   BoundaryCondition bc) {
  grid.validate();
  a.validate();
  if (bc == BoundaryCondition::kDirichlet && grid.dim != 1) {
    throw ConfigError("assemble_diffusion: Dirichlet flux layout is 1-D only");
  }
  const FluxLayout l = layout_of(grid);
  const Index cells = grid.cells();
  Index flux;
  Matrix grad;
  if (bc == BoundaryCondition::kNeumann) {
    flux = l.total();
    grad = Matrix::Zero(flux, cells);
    if (grid.dim == 1) {
      for (Index i = 1; i <= l.nx - 1; ++i) {
        grad(i - 1, i) = 1.0 / l.hx;
        grad(i - 1, i - 1) = -1.0 / l.hx;
      }
    } else {
      for (Index j = 0; j < l.ny; ++j) {
        for (Index i = 1; i <= l.nx - 1; ++i) {
          grad(l.qx_index(i, j), i + l.nx * j) = 1.0 / l.hx;
          grad(l.qx_index(i, j), (i - 1) + l.nx * j) = -1.0 / l.hx;
        }
      }
      for (Index j = 1; j <= l.ny - 1; ++j) {
        for (Index i = 0; i < l.nx; ++i) {
          grad(l.qy_index(i, j), i + l.nx * j) = 1.0 / l.hy;
          grad(l.qy_index(i, j), i + l.nx * (j - 1)) = -1.0 / l.hy;
        }
      }
    }
  } else {
    // Dirichlet on the scalar side: the gradient carries the boundary faces.
    flux = l.nx + 1;
    grad = Matrix::Zero(flux, cells);
    grad(0, 0) = 1.0 / l.hx;
    for (Index i = 1; i <= l.nx - 1; ++i) {
      grad(i, i) = 1.0 / l.hx;
      grad(i, i - 1) = -1.0 / l.hx;
    }
    grad(l.nx, l.nx - 1) = -1.0 / l.hx;
  }

  const Index total = cells + flux;
  Matrix a_skew = Matrix::Zero(total, total);
  a_skew.topRightCorner(cells, flux) = -grad.transpose();  // div
  a_skew.bottomLeftCorner(flux, cells) = grad;

  const double skewness = operator_norm(a_skew + a_skew.adjoint());
  if (skewness > kSkewTol) {
    std::ostringstream os;
    os << "assemble_diffusion: skewness residual " << skewness;
    throw StructureError(os.str());
  }

  DiffusionSystem system{grid,
                         bc,
                         std::move(grad),
                         a_skew,
                         Decomposition::from_skew_kernel(a_skew, 1e-10),
                         Matrix()};
  if (bc == BoundaryCondition::kNeumann) {
    system.flux_coeff = face_multiplication(a);
  } else {
    // Dirichlet faces: interior faces take the harmonic mean, boundary faces
    // the adjacent cell value.
    Vector diag(flux);
    const auto value = [&](Index cell) {
      return direction_component(a.values[static_cast<std::size_t>(cell)], 0);
    };
    diag(0) = value(0);
    for (Index i = 1; i <= l.nx - 1; ++i) {
      diag(i) = harmonic_mean(value(i - 1), value(i));
    }
    diag(l.nx) = value(l.nx - 1);
    system.flux_coeff = diag.asDiagonal();
  }
  return system;
}

MaterialLaw DiffusionSystem::law_for(const Matrix& flux_op,
                                     const std::string& label) const {
  const Index cells = scalar_dim();
  const Index flux = flux_dim_();
  if (flux_op.rows() != flux || flux_op.cols() != flux) {
    throw ShapeError("DiffusionSystem::law_for: operator must act on the flux "
                     "space");
  }
  const double lb = hermitian_lower_bound(flux_op);
  if (!(lb > 0.0)) {
    std::ostringstream os;
    os << "DiffusionSystem::law_for: certificate 'Re A_r >= c' failed, "
          "measured "
       << lb;
    throw ConditionError(os.str(), "Re(a1 - a2 S_r a3) >= c");
  }
  const Matrix inv = invert_accretive(flux_op, lb);
  const Index total = cells + flux;
  Matrix m0 = Matrix::Zero(total, total);
  m0.topLeftCorner(cells, cells) = Matrix::Identity(cells, cells);
  Matrix m1 = Matrix::Zero(total, total);
  m1.bottomRightCorner(flux, flux) = inv;
  return MaterialLaw::laurent(0.0, {{0, std::move(m0)}, {-1, std::move(m1)}},
                              label);
}

CoefficientField oscillating_coefficient(Index n, double alpha, double beta,
                                         const DomainGrid& grid) {
  grid.validate();
  if (grid.dim != 1) {
    throw ConfigError("oscillating_coefficient: 1-D grids only");
  }
  if (!(0.0 < alpha) || alpha > beta) {
    throw ConfigError("oscillating_coefficient: requires 0 < alpha <= beta");
  }
  const Index cells = grid.n_cells[0];
  if (n < 1 || cells % n != 0) {
    std::ostringstream os;
    os << "oscillating_coefficient: " << n
       << " blocks do not align with " << cells << " cells";
    throw ResolutionError(os.str());
  }
  const Index block = cells / n;
  CoefficientField field;
  field.grid = grid;
  field.alpha = alpha;
  field.beta = beta;
  field.values.reserve(static_cast<std::size_t>(cells));
  for (Index i = 0; i < cells; ++i) {
    const double v = ((i / block) % 2 == 0) ? alpha : beta;
    field.values.push_back(v * Matrix::Identity(1, 1));
  }
  return field;
}

ConvergenceReport cellmig_experiment(const CellMigConfig& config) {
  const DomainGrid& grid = config.grid;
  const CoefficientField unit = CoefficientField::constant(grid, 1.0);
  const DiffusionSystem system =
      assemble_diffusion(grid, unit, BoundaryCondition::kNeumann);
  const Index flux = system.flux_dim_();
  const Matrix identity = Matrix::Identity(flux, flux);

  std::vector<MaterialLaw> laws;
  std::vector<SrOperator> ops;
  laws.reserve(config.r_values.size());
  ops.reserve(config.r_values.size());
  for (double r : config.r_values) {
    SrOperator op = make_sr_operator(grid, r, config.n_s, config.n_angle);
    const Matrix a_r =
        config.a1 * identity - config.a2 * config.a3 * op.dense;
    const double lb = hermitian_lower_bound(a_r);
    if (!(lb > 0.0)) {
      std::ostringstream os;
      os << "cellmig: certificate 'Re(a1 - a2 S_r a3) >= c' failed at r = "
         << r << ", measured " << lb;
      throw ConditionError(os.str(), "Re(a1 - a2 S_r a3) >= c");
    }
    std::ostringstream label;
    label << "cellmig r=" << r;
    laws.push_back(system.law_for(a_r, label.str()));
    ops.push_back(std::move(op));
  }
  const Matrix a_limit = (config.a1 - config.a2 * config.a3) * identity;
  const MaterialLaw limit_law = system.law_for(a_limit, "cellmig r=0");

  ExperimentOptions opts = config.opts;
  if (opts.n_values.empty()) opts.n_values = config.r_values;
  if (opts.trend.empty()) {
    for (double r : config.r_values) opts.trend.push_back(1.0 / r);
  }
  ConvergenceReport report = solution_convergence_experiment(
      laws, limit_law, system.a_skew, system.dec, config.hp_grid,
      config.time_grid, opts);

  // Approximation-of-unity diagnostics on smooth interior bumps.
  const FluxLayout l = layout_of(grid);
  const int n_fields = 4;
  Matrix test_fields = Matrix::Zero(flux, n_fields);
  const double lx = grid.extent[0];
  for (int c = 0; c < n_fields; ++c) {
    const double center = lx * (0.35 + 0.1 * c);
    const double width = lx * 0.08;
    if (grid.dim == 1) {
      for (Index i = 1; i <= l.nx - 1; ++i) {
        test_fields(i - 1, c) = gaussian_bump(l.qx_x(i), center, width);
      }
    } else {
      const double ly = grid.extent[1];
      for (Index j = 0; j < l.ny; ++j) {
        for (Index i = 1; i <= l.nx - 1; ++i) {
          test_fields(l.qx_index(i, j), c) =
              gaussian_bump(l.qx_x(i), center, width) *
              gaussian_bump(l.qx_y(j), 0.5 * ly, 0.1 * ly);
        }
      }
    }
  }
  const auto defects = approx_unity_defect(ops, test_fields);
  report.extras["sr_defect"] = {};
  report.extras["sr_norm"] = {};
  for (const UnityDefect& d : defects) {
    report.extras["sr_defect"].push_back(d.defect);
    report.extras["sr_norm"].push_back(d.operator_norm);
  }

  // Strong-operator gaps of A_r^-1 against A_0^-1 on the smooth test fields
  // (fixed vectors resolved by the grid).
  const Matrix a0_inv = invert_accretive(a_limit, hermitian_lower_bound(a_limit));
  report.extras["sot_gap_inverse"] = {};
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const Matrix a_r =
        config.a1 * identity - config.a2 * config.a3 * ops[i].dense;
    const Matrix diff =
        (invert_accretive(a_r, hermitian_lower_bound(a_r)) - a0_inv) *
        test_fields;
    double worst = 0.0;
    for (Index c = 0; c < test_fields.cols(); ++c) {
      worst = std::max(worst, diff.col(c).norm() / test_fields.col(c).norm());
    }
    report.extras["sot_gap_inverse"].push_back(worst);
  }
  return report;
}

Matrix prescribed_kernel_skew(Index dim, Index kernel_dim, std::uint64_t seed) {
  if (kernel_dim < 0 || kernel_dim > dim) {
    throw ConfigError("prescribed_kernel_skew: kernel dimension out of range");
  }
  GaussianSource rng(seed);
  const Matrix s = rng.skew_matrix(dim);
  // iS is hermitian; zero out the kernel_dim eigenvalues of smallest modulus.
  Eigen::SelfAdjointEigenSolver<Matrix> es(Complex(0, -1) * s);
  Eigen::VectorXd lambda = es.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(lambda(a)) < std::abs(lambda(b));
  });
  for (Index k = 0; k < kernel_dim; ++k) lambda(order[static_cast<std::size_t>(k)]) = 0.0;
  const Matrix rebuilt = es.eigenvectors() *
                         lambda.cast<Complex>().asDiagonal() *
                         es.eigenvectors().adjoint();
  return Complex(0, 1) * rebuilt;
}

namespace {

void push_certificate(std::vector<Certificate>& certs, const std::string& name,
                      double measured, double required) {
  certs.push_back({name, measured, required, measured >= required - 1e-12});
}

void require_selfadjoint(const Matrix& m, const char* name) {
  const double defect = operator_norm(m - m.adjoint());
  if (defect > 1e-12 * std::max(1.0, operator_norm(m))) {
    std::ostringstream os;
    os << "assemble_piezo: " << name << " must be self-adjoint, defect "
       << defect;
    throw ConditionError(os.str(), std::string(name) + " self-adjoint");
  }
}

}  // namespace

PiezoSystem assemble_piezo(const PiezoBlocks& blocks, const PiezoParams& params,
                           const HalfPlaneGrid& grid, const Matrix& a_skew,
                           const Decomposition& dec) {
  if (!(params.c > 0.0) || !(params.d > 0.0)) {
    throw ConfigError("assemble_piezo: c and d must be positive");
  }
  const Index m1_dim = blocks.C.rows();
  const Index m2_dim = blocks.eps.rows();
  const Index m3_dim = blocks.mu.rows();
  if (blocks.e.rows() != m1_dim || blocks.e.cols() != m2_dim) {
    throw ShapeError("assemble_piezo: e must map the eps slot into the C slot");
  }
  if (blocks.sigma.rows() != m2_dim || blocks.sigma.cols() != m2_dim) {
    throw ShapeError("assemble_piezo: sigma must act on the eps slot");
  }
  require_selfadjoint(blocks.C, "C");
  require_selfadjoint(blocks.eps, "eps");
  require_selfadjoint(blocks.mu, "mu");

  std::vector<Certificate> certs;
  push_certificate(certs, "C >= 1/d", hermitian_lower_bound(blocks.C),
                   1.0 / params.d);
  push_certificate(certs, "mu >= c", hermitian_lower_bound(blocks.mu),
                   params.c);
  push_certificate(certs, "eps >= 0", hermitian_lower_bound(blocks.eps), 0.0);
  push_certificate(
      certs, "nu0 eps + Re sigma >= c",
      hermitian_lower_bound(params.nu0 * blocks.eps + blocks.sigma), params.c);
  const Matrix c_inv = guarded_inverse(blocks.C, "assemble_piezo[C]");
  const Matrix mu_inv = guarded_inverse(blocks.mu, "assemble_piezo[mu]");
  push_certificate(certs, "C^-1 >= c", hermitian_lower_bound(c_inv), params.c);
  push_certificate(certs, "mu^-1 >= 1/d", hermitian_lower_bound(mu_inv),
                   1.0 / params.d);
  double worst_inv = std::numeric_limits<double>::infinity();
  for (Complex z : grid.points()) {
    const Matrix m = blocks.eps + blocks.sigma / z;
    worst_inv = std::min(
        worst_inv,
        hermitian_lower_bound(guarded_inverse(m, "assemble_piezo[eps+sigma/z]")));
  }
  push_certificate(certs, "Re (eps + sigma/z)^-1 >= 1/d", worst_inv,
                   1.0 / params.d);
  for (const Certificate& cert : certs) {
    if (!cert.pass) {
      std::ostringstream os;
      os << "assemble_piezo: certificate '" << cert.name << "' failed ("
         << cert.measured << " < " << cert.required << ")";
      throw ConditionError(os.str(), cert.name);
    }
  }

  const Index total = params.dim0 + m1_dim + m2_dim + m3_dim;
  if (a_skew.rows() != total || dec.total_dim() != total) {
    throw ShapeError("assemble_piezo: skew operator size mismatch");
  }
  Matrix m0 = Matrix::Zero(total, total);
  Matrix m1 = Matrix::Zero(total, total);
  const Index o1 = params.dim0;
  const Index o2 = o1 + m1_dim;
  const Index o3 = o2 + m2_dim;
  m0.topLeftCorner(params.dim0, params.dim0) =
      Matrix::Identity(params.dim0, params.dim0);
  m0.block(o1, o1, m1_dim, m1_dim) = c_inv;
  m0.block(o1, o2, m1_dim, m2_dim) = c_inv * blocks.e;
  m0.block(o2, o1, m2_dim, m1_dim) = blocks.e.adjoint() * c_inv;
  m0.block(o2, o2, m2_dim, m2_dim) =
      blocks.eps + blocks.e.adjoint() * c_inv * blocks.e;
  m0.block(o3, o3, m3_dim, m3_dim) = blocks.mu;
  m1.block(o2, o2, m2_dim, m2_dim) = blocks.sigma;

  PiezoSystem system{m0,
                     m1,
                     MaterialLaw::laurent(params.nu0, {{0, m0}, {-1, m1}},
                                          "piezo"),
                     a_skew,
                     dec,
                     std::move(certs)};
  return system;
}

PiezoSystem assemble_piezo(const PiezoBlocks& blocks, const PiezoParams& params,
                           const HalfPlaneGrid& grid, std::uint64_t skew_seed,
                           Index kernel_dim) {
  const Index total = params.dim0 + blocks.C.rows() + blocks.eps.rows() +
                      blocks.mu.rows();
  const Matrix a_skew = prescribed_kernel_skew(total, kernel_dim, skew_seed);
  return assemble_piezo(blocks, params, grid, a_skew,
                        Decomposition::from_skew_kernel(a_skew));
}

ConvergenceReport piezo_convergence(const PiezoConvergenceConfig& config) {
  if (config.n_values.empty()) {
    throw ConfigError("piezo_convergence: no sequence values");
  }
  const Index total = config.params.dim0 + config.base.C.rows() +
                      config.base.eps.rows() + config.base.mu.rows();
  const Matrix a_skew =
      prescribed_kernel_skew(total, config.kernel_dim, config.skew_seed);
  const Decomposition dec = Decomposition::from_skew_kernel(a_skew);

  const PiezoSystem limit = assemble_piezo(config.base, config.params,
                                           config.hp_grid, a_skew, dec);
  std::vector<MaterialLaw> laws;
  laws.reserve(config.n_values.size());
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    const double n = config.n_values[i];
    const double sigma_sign =
        config.alternate_sigma && (static_cast<long>(n) % 2 == 1) ? -1.0 : 1.0;
    PiezoBlocks b;
    b.C = config.base.C + config.delta.C / n;
    b.e = config.base.e + config.delta.e / n;
    b.eps = config.base.eps + config.delta.eps / n;
    b.mu = config.base.mu + config.delta.mu / n;
    b.sigma = config.base.sigma + sigma_sign * config.delta.sigma / n;
    laws.push_back(
        assemble_piezo(b, config.params, config.hp_grid, a_skew, dec).law);
  }

  ExperimentOptions opts = config.opts;
  if (opts.n_values.empty()) opts.n_values = config.n_values;
  if (opts.trend.empty()) opts.trend = config.n_values;
  return solution_convergence_experiment(laws, limit.law, a_skew, dec,
                                         config.hp_grid, config.time_grid,
                                         opts);
}

}  // namespace evoeq
