#include "evoeq/models.hpp"

#include <cmath>

#include "doctest.h"
#include "evoeq/rng.hpp"
#include "oracles.hpp"

using namespace evoeq;

namespace {

DomainGrid grid_1d(Index cells) {
  DomainGrid grid;
  grid.dim = 1;
  grid.n_cells = {cells, 1};
  return grid;
}

DomainGrid grid_2d(Index nx, Index ny) {
  DomainGrid grid;
  grid.dim = 2;
  grid.n_cells = {nx, ny};
  return grid;
}

HalfPlaneGrid piezo_grid() { return HalfPlaneGrid::standard(1.0, 2.0); }

}  // namespace

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  std::vector<double> nodes, weights;
  gauss_legendre_01(16, nodes, weights);
  double total = 0.0, cubic = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    total += weights[i];
    cubic += weights[i] * std::pow(nodes[i], 3);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cubic == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("S_r at r = 0 is the identity") {
  SUBCASE("1-D exactly") {
    const SrOperator op = make_sr_operator(grid_1d(32), 0.0);
    CHECK((op.dense - Matrix::Identity(31, 31)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("2-D up to circle-quadrature round-off") {
    const DomainGrid grid = grid_2d(8, 8);
    const SrOperator op = make_sr_operator(grid, 0.0);
    const Index flux = grid.flux_dim();
    CHECK((op.dense - Matrix::Identity(flux, flux)).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("S_r quadrature weights are positive with the stated sums") {
  const SrOperator op1 = make_sr_operator(grid_1d(16), 0.25);
  double s_total = 0.0;
  for (double w : op1.s_weights) {
    CHECK(w > 0.0);
    s_total += w;
  }
  CHECK(s_total == doctest::Approx(1.0));
  double sphere_total = 0.0;
  for (double w : op1.sphere_weights) sphere_total += w;
  CHECK(sphere_total == doctest::Approx(2.0));  // two-point sphere in 1-D

  const SrOperator op2 = make_sr_operator(grid_2d(6, 6), 0.1);
  sphere_total = 0.0;
  for (double w : op2.sphere_weights) sphere_total += w;
  CHECK(sphere_total == doctest::Approx(2.0 * 3.14159265358979323846));
}

TEST_CASE("S_r reproduces affine fields away from the boundary") {
  const DomainGrid grid = grid_1d(64);
  const double r = 0.125;
  const SrOperator op = make_sr_operator(grid, r);
  Matrix q(63, 1);
  const double h = grid.spacing(0);
  for (Index i = 1; i <= 63; ++i) q(i - 1, 0) = 2.0 * (i * h) - 0.3;
  const Matrix sq = sr_apply(op, q);
  for (Index i = 1; i <= 63; ++i) {
    const double x = i * h;
    if (x > r + h && x < 1.0 - r - h) {
      CHECK(std::abs(sq(i - 1, 0) - q(i - 1, 0)) < 1e-12);
    }
  }
  SUBCASE("constants are reproduced in the interior") {
    Matrix c = Matrix::Ones(63, 1);
    const Matrix sc = sr_apply(op, c);
    for (Index i = 1; i <= 63; ++i) {
      const double x = i * h;
      if (x > r + h && x < 1.0 - r - h) {
        CHECK(std::abs(sc(i - 1, 0) - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("approximation-of-unity defects shrink with r") {
  const DomainGrid grid = grid_1d(128);
  std::vector<SrOperator> ops;
  for (double r : {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}) {
    ops.push_back(make_sr_operator(grid, r));
  }
  Matrix fields(127, 2);
  for (Index i = 1; i <= 127; ++i) {
    const double x = i * grid.spacing(0);
    fields(i - 1, 0) = gaussian_bump(x, 0.5, 0.08);
    fields(i - 1, 1) = gaussian_bump(x, 0.4, 0.05);
  }
  const auto defects = approx_unity_defect(ops, fields);
  for (std::size_t i = 1; i < defects.size(); ++i) {
    CHECK(defects[i].defect < defects[i - 1].defect);
  }
  CHECK(defects.back().defect < 0.05);
  for (const UnityDefect& d : defects) CHECK(d.operator_norm < 1.5);

  const SrOperator id_op = make_sr_operator(grid, 0.0);
  const auto zero_defect = approx_unity_defect({id_op}, fields);
  CHECK(zero_defect.front().defect < 1e-12);
}

TEST_CASE("diffusion assembly produces an exactly skew block operator") {
  const DomainGrid grid = grid_1d(8);
  const DiffusionSystem system = assemble_diffusion(
      grid, CoefficientField::constant(grid, 1.0), BoundaryCondition::kNeumann);
  CHECK(operator_norm(system.a_skew + system.a_skew.adjoint()) == 0.0);
  // Neumann kernel: constants on the scalar side.
  CHECK(system.dec.dim0() == 1);
  const Vector kernel = system.dec.basis0().col(0);
  const auto first = kernel(0);
  for (Index i = 0; i < 8; ++i) CHECK(std::abs(kernel(i) - first) < 1e-10);
  for (Index i = 8; i < kernel.size(); ++i) CHECK(std::abs(kernel(i)) < 1e-10);
  CHECK((system.a_skew * system.dec.basis0()).norm() < 1e-10);
  const Matrix p1 = system.dec.projector1();
  CHECK(((Matrix::Identity(15, 15) - p1) * system.a_skew).norm() < 1e-10);

  SUBCASE("picard coercivity of the assembled law") {
    const MaterialLaw law = system.law();
    const HalfPlaneGrid hp = HalfPlaneGrid::standard(0.0, 1.0);
    const double c = picard_coercivity(law.premultiply_z().dim() ? law : law, hp);
    // Re z M(z) >= min(Re z, lambda_min Re A^-1) = min(grid min, 1).
    double min_re = hp.re_points.front();
    for (double re : hp.re_points) min_re = std::min(min_re, re);
    CHECK(picard_coercivity(law, hp) ==
          doctest::Approx(std::min(min_re, 1.0)));
    CHECK(c > 0.0);
  }

  SUBCASE("Dirichlet layout moves the kernel to the flux side") {
    const DiffusionSystem dirichlet =
        assemble_diffusion(grid, CoefficientField::constant(grid, 1.0),
                           BoundaryCondition::kDirichlet);
    CHECK(operator_norm(dirichlet.a_skew + dirichlet.a_skew.adjoint()) == 0.0);
    CHECK(dirichlet.dec.dim0() == 1);
    const Vector kernel_d = dirichlet.dec.basis0().col(0);
    for (Index i = 0; i < 8; ++i) CHECK(std::abs(kernel_d(i)) < 1e-10);
  }

  SUBCASE("2-D assembly is skew with the right kernel count") {
    const DomainGrid g2 = grid_2d(6, 5);
    const DiffusionSystem sys2 = assemble_diffusion(
        g2, CoefficientField::constant(g2, 1.0), BoundaryCondition::kNeumann);
    CHECK(operator_norm(sys2.a_skew + sys2.a_skew.adjoint()) == 0.0);
    // Scalar constants plus the discrete divergence-free fields.
    const Index cells = 30, flux = sys2.flux_dim_();
    const Index expected_kernel = 1 + (flux - (cells - 1));
    CHECK(sys2.dec.dim0() == expected_kernel);
  }
}

TEST_CASE("oscillating coefficients and the harmonic-mean limit") {
  const DomainGrid grid = grid_1d(64);
  SUBCASE("degenerate pattern is constant") {
    const CoefficientField field = oscillating_coefficient(4, 2.0, 2.0, grid);
    for (const Matrix& v : field.values) {
      CHECK(v(0, 0).real() == doctest::Approx(2.0));
    }
  }
  SUBCASE("alternating pattern with the closed-form limit") {
    const CoefficientField field = oscillating_coefficient(8, 1.0, 3.0, grid);
    CHECK(field.values.front()(0, 0).real() == doctest::Approx(1.0));
    CHECK(field.values[8](0, 0).real() == doctest::Approx(3.0));
    CHECK(oracle::harmonic_mean(1.0, 3.0) == doctest::Approx(1.5));
    // The discrete series resistance of the face-sampled pattern equals the
    // harmonic mean exactly.
    const Matrix face = face_multiplication(field);
    double inverse_sum = 0.0;
    for (Index i = 0; i < face.rows(); ++i) {
      inverse_sum += 1.0 / face(i, i).real();
    }
    const double effective =
        static_cast<double>(face.rows()) / inverse_sum;
    CHECK(effective == doctest::Approx(1.5).epsilon(1e-3));
  }
  SUBCASE("unresolvable periods are rejected") {
    CHECK_THROWS_AS(oscillating_coefficient(48, 1.0, 3.0, grid),
                    ResolutionError);
  }
  SUBCASE("arithmetic mean differs from the harmonic mean") {
    CHECK(0.5 * (1.0 + 3.0) == doctest::Approx(2.0));
    CHECK(oracle::harmonic_mean(1.0, 3.0) != doctest::Approx(2.0));
  }
}

TEST_CASE("static oscillating solves approach the harmonic-mean operator") {
  // Frequency-domain gaps at a single z for increasing n, against both
  // candidate limits: the harmonic mean wins, the arithmetic mean does not.
  const DomainGrid grid = grid_1d(64);
  const DiffusionSystem system = assemble_diffusion(
      grid, CoefficientField::constant(grid, 1.0), BoundaryCondition::kNeumann);
  const Complex z(1.0, 1.0);
  const ProbeSet probes = ProbeSet::make(127, 127, ProbeSettings{42, 8, 4});
  const auto resolvent = [&](const MaterialLaw& law) {
    return Matrix(Eigen::PartialPivLU<Matrix>(z * law.eval(z) + system.a_skew)
                      .inverse());
  };
  const Matrix harmonic = resolvent(system.law_for(
      face_multiplication(CoefficientField::constant(grid, 1.5))));
  const Matrix arithmetic = resolvent(system.law_for(
      face_multiplication(CoefficientField::constant(grid, 2.0))));
  double previous = 1e9;
  double arithmetic_gap = 0.0;
  for (Index n : {2, 4, 8, 16, 32}) {
    const MaterialLaw law_n = system.law_for(
        face_multiplication(oscillating_coefficient(n, 1.0, 3.0, grid)));
    const Matrix rn = resolvent(law_n);
    const double gap = wot_gap(rn, harmonic, probes).sup_gap;
    CHECK(gap < previous);
    previous = gap;
    arithmetic_gap = wot_gap(rn, arithmetic, probes).sup_gap;
  }
  CHECK(previous < 1e-3);
  CHECK(arithmetic_gap > 10.0 * previous);
}

TEST_CASE("cellmig experiment with a vanishing nonlocal part is exact") {
  CellMigConfig config;
  config.grid = grid_1d(32);
  config.a1 = 2.0;
  config.a2 = 0.0;
  config.a3 = 0.5;
  config.r_values = {0.5, 0.25};
  config.time_grid = TimeGrid{0.0, 0.25, 128, 1.0};
  config.hp_grid = HalfPlaneGrid::standard(0.0, 1.0);
  config.opts.label = "cellmig-zero";
  config.opts.probes = ProbeSettings{42, 4, 2};
  const ConvergenceReport report = cellmig_experiment(config);
  for (double g : report.freq_worst) CHECK(g < 1e-12);
  for (double g : report.time_gaps) CHECK(g < 1e-12);
  CHECK(report.pass);
}

TEST_CASE("cellmig experiment converges as r shrinks") {
  CellMigConfig config;
  config.grid = grid_1d(48);
  config.r_values = {0.5, 0.25, 0.125};
  config.time_grid = TimeGrid{0.0, 0.25, 128, 1.0};
  config.hp_grid = HalfPlaneGrid::standard(0.0, 1.0);
  config.opts.label = "cellmig-unit";
  config.opts.probes = ProbeSettings{42, 4, 2};
  config.opts.thresholds = {5e-3, 5e-4};
  const ConvergenceReport report = cellmig_experiment(config);
  CHECK(report.freq_slope < 0.0);
  CHECK(report.pass);
  const auto& defects = report.extras.at("sr_defect");
  for (std::size_t i = 1; i < defects.size(); ++i) {
    CHECK(defects[i] < defects[i - 1]);
  }
  const auto& sot = report.extras.at("sot_gap_inverse");
  for (std::size_t i = 1; i < sot.size(); ++i) CHECK(sot[i] < sot[i - 1]);
  SUBCASE("standing assumption violations are named") {
    config.a2 = 3.0;
    config.a3 = 3.0;  // a1 - a2 S_r a3 loses accretivity
    CHECK_THROWS_AS(cellmig_experiment(config), ConditionError);
  }
}

TEST_CASE("cellmig pipeline runs on 2-D grids") {
  CellMigConfig config;
  config.grid = grid_2d(8, 8);
  config.a1 = 2.0;
  config.a2 = 0.4;
  config.a3 = 0.4;
  config.r_values = {0.25, 0.125};
  config.time_grid = TimeGrid{0.0, 0.25, 128, 1.0};
  config.hp_grid = HalfPlaneGrid::standard(0.0, 1.0);
  config.opts.label = "cellmig-2d";
  config.opts.probes = ProbeSettings{42, 2, 1};
  config.opts.thresholds = {0.05, 0.05};
  config.opts.n_time_probes = 2;
  const ConvergenceReport report = cellmig_experiment(config);
  CHECK(report.freq_worst.back() < report.freq_worst.front());
  CHECK(report.pass);
  // The 2-D averaging stays uniformly bounded as well.
  for (double n : report.extras.at("sr_norm")) CHECK(n < 2.0);
}

TEST_CASE("prescribed-kernel skew operators") {
  const Matrix a = prescribed_kernel_skew(10, 4, 3);
  CHECK(operator_norm(a + a.adjoint()) < 1e-12);
  const Decomposition dec = Decomposition::from_skew_kernel(a);
  CHECK(dec.dim0() == 4);
  CHECK((a * dec.basis0()).norm() < 1e-10);
}

TEST_CASE("piezo assembly on the stated instances") {
  const Index d = 3;
  const Matrix id = Matrix::Identity(d, d);
  PiezoParams params;
  params.dim0 = 2;
  params.nu0 = 1.0;
  params.c = 0.5;
  params.d = 10.0;
  SUBCASE("decoupled unit blocks give M0 = I and M1 = 0") {
    const PiezoBlocks blocks{id, Matrix::Zero(d, d), id, id,
                             Matrix::Zero(d, d)};
    const PiezoSystem system =
        assemble_piezo(blocks, params, piezo_grid(), 5, 3);
    CHECK((system.m0 - Matrix::Identity(11, 11)).norm() < 1e-12);
    CHECK(system.m1.norm() == 0.0);
    for (const Certificate& cert : system.certificates) CHECK(cert.pass);
  }
  SUBCASE("coupling keeps the self-adjoint block structure") {
    GaussianSource rng(33);
    const Matrix coupling = 0.3 * rng.complex_normal_matrix(d, d);
    const PiezoBlocks blocks{2.0 * id, coupling, id, id, 0.6 * id};
    const PiezoSystem system =
        assemble_piezo(blocks, params, piezo_grid(), 5, 3);
    const Index o1 = 2, o2 = 2 + d;
    const Matrix b12 = system.m0.block(o1, o2, d, d);
    const Matrix b21 = system.m0.block(o2, o1, d, d);
    CHECK((b12 - b21.adjoint()).norm() < 1e-12);
    CHECK((system.m0 - system.m0.adjoint()).norm() < 1e-12);
  }
  SUBCASE("alternative boundedness route certifies shipped parameters") {
    const PiezoBlocks blocks{2.0 * id, Matrix::Zero(d, d), id, id, 0.6 * id};
    const PiezoSystem system =
        assemble_piezo(blocks, params, piezo_grid(), 5, 3);
    CHECK(alt_boundedness_check(system.law, params.d, piezo_grid()));
  }
  SUBCASE("the assembled law evaluates to M0 + M1 at z = 1 + 2 nu0") {
    // At real z the Laurent sum collapses to M0 + z^-1 M1; z = 1 sits inside
    // the half-plane only when nu0 < 1, so shift the abscissa here.
    PiezoParams low = params;
    low.nu0 = 0.4;
    GaussianSource rng(34);
    const PiezoBlocks blocks{2.0 * id, 0.2 * rng.complex_normal_matrix(d, d),
                             id, id, 0.6 * id};
    const PiezoSystem system = assemble_piezo(
        blocks, low, HalfPlaneGrid::standard(0.4, 1.0), 5, 3);
    CHECK((system.law.eval(Complex(1.0, 0.0)) - (system.m0 + system.m1))
              .norm() < 1e-14);
  }
  SUBCASE("violated conditions name the inequality") {
    const PiezoBlocks blocks{0.05 * id, Matrix::Zero(d, d), id, id,
                             Matrix::Zero(d, d)};
    CHECK_THROWS_WITH_AS(assemble_piezo(blocks, params, piezo_grid(), 5, 3),
                         doctest::Contains("C >= 1/d"), ConditionError);
  }
}

TEST_CASE("piezo convergence with constant sequences is exact") {
  const Index d = 3;
  const Matrix id = Matrix::Identity(d, d);
  PiezoConvergenceConfig config;
  config.base = PiezoBlocks{2.0 * id, 0.1 * id, id, id, 0.6 * id};
  config.delta = PiezoBlocks{Matrix::Zero(d, d), Matrix::Zero(d, d),
                             Matrix::Zero(d, d), Matrix::Zero(d, d),
                             Matrix::Zero(d, d)};
  config.n_values = {2, 4, 8};
  config.params.dim0 = 2;
  config.params.nu0 = 1.0;
  config.params.c = 0.5;
  config.params.d = 10.0;
  config.kernel_dim = 4;
  config.hp_grid = piezo_grid();
  config.time_grid = TimeGrid{0.0, 0.25, 128, 2.0};
  config.opts.probes = ProbeSettings{42, 4, 2};
  const ConvergenceReport report = piezo_convergence(config);
  for (double g : report.freq_worst) CHECK(g < 1e-12);
  CHECK(report.pass);
}
