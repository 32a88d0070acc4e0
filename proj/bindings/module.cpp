#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "evoeq/convergence.hpp"
#include "evoeq/models.hpp"
#include "evoeq/serialize.hpp"
#include "evoeq/suites.hpp"

namespace py = pybind11;
using namespace evoeq;

namespace {

HalfPlaneGrid grid_from_args(double nu, std::vector<double> re,
                             std::vector<double> im) {
  HalfPlaneGrid grid;
  grid.nu = nu;
  grid.re_points = std::move(re);
  grid.im_points = std::move(im);
  return grid;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Schur-complement calculus, material laws and spectral solvers "
            "for evolutionary equations on finite-dimensional Hilbert spaces";

  py::register_exception<ShapeError>(m, "ShapeError");
  py::register_exception<AccretivityError>(m, "AccretivityError");
  py::register_exception<SingularBlockError>(m, "SingularBlockError");
  py::register_exception<MembershipError>(m, "MembershipError");
  py::register_exception<StructureError>(m, "StructureError");
  py::register_exception<HalfPlaneDomainError>(m, "HalfPlaneDomainError");
  py::register_exception<AliasingError>(m, "AliasingError");
  py::register_exception<WellPosednessError>(m, "WellPosednessError");
  py::register_exception<ConditionError>(m, "ConditionError");
  py::register_exception<ConfigError>(m, "ConfigError");

  // linop ---------------------------------------------------------------
  py::class_<Decomposition>(m, "Decomposition")
      .def(py::init<Matrix, Matrix>(), py::arg("basis0"), py::arg("basis1"))
      .def_static("coordinate_split", &Decomposition::coordinate_split)
      .def_static("from_skew_kernel", &Decomposition::from_skew_kernel,
                  py::arg("a_skew"), py::arg("sv_threshold") = 1e-10)
      .def_property_readonly("basis0", &Decomposition::basis0)
      .def_property_readonly("basis1", &Decomposition::basis1)
      .def_property_readonly("dim0", &Decomposition::dim0)
      .def_property_readonly("dim1", &Decomposition::dim1)
      .def_property_readonly("total_dim", &Decomposition::total_dim);

  py::class_<SchurQuadruple>(m, "SchurQuadruple")
      .def_readonly("a", &SchurQuadruple::a)
      .def_readonly("b", &SchurQuadruple::b)
      .def_readonly("c", &SchurQuadruple::c)
      .def_readonly("d", &SchurQuadruple::d);

  py::class_<AlphaBounds>(m, "AlphaBounds")
      .def_readonly("a00", &AlphaBounds::a00)
      .def_readonly("a01", &AlphaBounds::a01)
      .def_readonly("a10", &AlphaBounds::a10)
      .def_readonly("a11", &AlphaBounds::a11)
      .def("__repr__", [](const AlphaBounds& a) {
        return "AlphaBounds(a00=" + std::to_string(a.a00) +
               ", a01=" + std::to_string(a.a01) +
               ", a10=" + std::to_string(a.a10) +
               ", a11=" + std::to_string(a.a11) + ")";
      });

  m.def("operator_norm", &operator_norm);
  m.def("hermitian_lower_bound", &hermitian_lower_bound);
  m.def("reciprocal_condition", &reciprocal_condition);
  m.def("invert_accretive", &invert_accretive, py::arg("t"), py::arg("c"));
  m.def(
      "block_split",
      [](const Matrix& op, const Decomposition& dec) {
        const BlockSplit b = block_split(op, dec);
        return py::make_tuple(b.m00, b.m01, b.m10, b.m11);
      },
      py::arg("operator"), py::arg("decomposition"));
  m.def("schur_components", &schur_components, py::arg("operator"),
        py::arg("decomposition"));
  m.def("schur_reconstruct", &schur_reconstruct, py::arg("quadruple"),
        py::arg("decomposition"));
  m.def("alpha_fit", &alpha_fit, py::arg("operator"), py::arg("decomposition"));
  m.def("schur_positivity_inherit", &schur_positivity_inherit, py::arg("t"),
        py::arg("decomposition"), py::arg("d"));
  m.def("perturbed_block_inverse", &perturbed_block_inverse, py::arg("t"),
        py::arg("a_skew"), py::arg("decomposition"));

  // matlaw --------------------------------------------------------------
  py::class_<MaterialLaw>(m, "MaterialLaw")
      .def_static(
          "laurent",
          [](double nu0, const std::vector<std::pair<int, Matrix>>& terms,
             const std::string& label) {
            std::vector<LaurentTerm> converted;
            converted.reserve(terms.size());
            for (const auto& [power, coeff] : terms) {
              converted.push_back({power, coeff});
            }
            return MaterialLaw::laurent(nu0, std::move(converted), label);
          },
          py::arg("nu0"), py::arg("terms"), py::arg("label") = "")
      .def_static("constant", &MaterialLaw::constant, py::arg("m0"),
                  py::arg("nu0") = 0.0, py::arg("label") = "")
      .def_static("sum", &MaterialLaw::sum)
      .def_static("product", &MaterialLaw::product)
      .def_static("inverse", &MaterialLaw::inverse)
      .def("premultiply_z", &MaterialLaw::premultiply_z)
      .def("eval", &MaterialLaw::eval)
      .def("derivative", &MaterialLaw::derivative)
      .def("__call__", &MaterialLaw::eval)
      .def_property_readonly("nu0", &MaterialLaw::nu0)
      .def_property_readonly("dim", &MaterialLaw::dim)
      .def_property_readonly("label", &MaterialLaw::label)
      .def_property_readonly("nonpositive_powers_only",
                             &MaterialLaw::nonpositive_powers_only);

  py::class_<HalfPlaneGrid>(m, "HalfPlaneGrid")
      .def(py::init(&grid_from_args), py::arg("nu"), py::arg("re_points"),
           py::arg("im_points"))
      .def_static("standard", &HalfPlaneGrid::standard, py::arg("nu0"),
                  py::arg("nu"))
      .def_readonly("nu", &HalfPlaneGrid::nu)
      .def_readonly("re_points", &HalfPlaneGrid::re_points)
      .def_readonly("im_points", &HalfPlaneGrid::im_points)
      .def("points", &HalfPlaneGrid::points);

  m.def("picard_coercivity", &picard_coercivity);
  m.def("picard_coercivity_analytic", &picard_coercivity_analytic);
  m.def("sup_norm_estimate", [](const MaterialLaw& law,
                                const HalfPlaneGrid& grid) {
    const SupNormEstimate est = sup_norm_estimate(law, grid);
    return py::make_tuple(est.grid_value, est.laurent_bound);
  });
  m.def("alt_boundedness_check", &alt_boundedness_check, py::arg("law"),
        py::arg("d"), py::arg("grid"));
  m.def("schur_trajectory", &schur_trajectory, py::arg("law"), py::arg("dec"),
        py::arg("grid"), py::arg("premultiply_z") = false);
  m.def("holomorphy_residual", &holomorphy_residual, py::arg("law"),
        py::arg("z"), py::arg("h"));

  // spectral ------------------------------------------------------------
  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init([](double t0, double dt, Index n_steps, double nu) {
             TimeGrid grid{t0, dt, n_steps, nu};
             grid.validate();
             return grid;
           }),
           py::arg("t0") = 0.0, py::arg("dt") = 1.0 / 32.0,
           py::arg("n_steps") = 1024, py::arg("nu") = 1.0)
      .def_readonly("t0", &TimeGrid::t0)
      .def_readonly("dt", &TimeGrid::dt)
      .def_readonly("n_steps", &TimeGrid::n_steps)
      .def_readonly("nu", &TimeGrid::nu)
      .def("time", &TimeGrid::time)
      .def("xi", &TimeGrid::xi)
      .def("window", &TimeGrid::window);

  py::class_<WeightedSignal>(m, "WeightedSignal")
      .def(py::init([](const TimeGrid& grid, const Matrix& values) {
             WeightedSignal f{grid, values};
             f.validate();
             return f;
           }),
           py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &WeightedSignal::grid)
      .def_readonly("values", &WeightedSignal::values);

  py::class_<SpectralSignal>(m, "SpectralSignal")
      .def_readonly("grid", &SpectralSignal::grid)
      .def_readonly("values", &SpectralSignal::values);

  m.def("weighted_norm", &weighted_norm);
  m.def("weighted_inner", &weighted_inner);
  m.def("spectral_norm", &spectral_norm);
  m.def("fourier_laplace", &fourier_laplace);
  m.def("fourier_laplace_inverse", &fourier_laplace_inverse);
  m.def("band_limit_fraction", &band_limit_fraction);
  m.def("td_apply", &td_apply);
  m.def("td_inverse", &td_inverse);
  m.def("cumulative_integral", &cumulative_integral);
  m.def("matlaw_apply", &matlaw_apply);
  m.def("causality_defect", &causality_defect);
  m.def("evo_solve", &evo_solve, py::arg("law"), py::arg("a_skew"),
        py::arg("grid"), py::arg("f"));

  py::class_<EvoSolver>(m, "EvoSolver")
      .def(py::init<MaterialLaw, Matrix, TimeGrid>(), py::arg("law"),
           py::arg("a_skew"), py::arg("grid"))
      .def_property_readonly("coercivity", &EvoSolver::coercivity)
      .def("solve",
           py::overload_cast<const WeightedSignal&>(&EvoSolver::solve,
                                                    py::const_));

  // convergence ---------------------------------------------------------
  py::class_<ProbeSettings>(m, "ProbeSettings")
      .def(py::init([](std::uint64_t seed, int n_gauss, int basis_cap) {
             return ProbeSettings{seed, n_gauss, basis_cap};
           }),
           py::arg("seed") = 42, py::arg("n_gauss") = 32,
           py::arg("basis_cap") = 16)
      .def_readwrite("seed", &ProbeSettings::seed)
      .def_readwrite("n_gauss", &ProbeSettings::n_gauss)
      .def_readwrite("basis_cap", &ProbeSettings::basis_cap);

  py::class_<ProbeSet>(m, "ProbeSet")
      .def_static("make", &ProbeSet::make, py::arg("dim_in"),
                  py::arg("dim_out"), py::arg("settings") = ProbeSettings{})
      .def_readonly("phis", &ProbeSet::phis)
      .def_readonly("psis", &ProbeSet::psis)
      .def_readonly("pairs", &ProbeSet::pairs);

  py::class_<WotReport>(m, "WotReport")
      .def_readonly("per_probe_gaps", &WotReport::per_probe_gaps)
      .def_readonly("sup_gap", &WotReport::sup_gap)
      .def_readonly("label", &WotReport::label);

  py::class_<NlhPointReport>(m, "NlhPointReport")
      .def_readonly("z", &NlhPointReport::z)
      .def_readonly("components", &NlhPointReport::components)
      .def_readonly("worst", &NlhPointReport::worst);

  py::class_<NlhReport>(m, "NlhReport")
      .def_readonly("points", &NlhReport::points)
      .def_readonly("worst_gap", &NlhReport::worst_gap);

  m.def("wot_gap", &wot_gap, py::arg("t1"), py::arg("t2"), py::arg("probes"),
        py::arg("label") = "");
  m.def("nlh_gap", &nlh_gap, py::arg("m1"), py::arg("m2"), py::arg("dec"),
        py::arg("settings") = ProbeSettings{});
  m.def("parameterised_nlh_gap", &parameterised_nlh_gap, py::arg("law1"),
        py::arg("law2"), py::arg("dec"), py::arg("grid"),
        py::arg("settings") = ProbeSettings{}, py::arg("premultiply_z") = false);
  m.def("limit_coercivity_audit", &limit_coercivity_audit);
  m.def("loglog_slope", &loglog_slope);

  // models ----------------------------------------------------------------
  py::class_<DomainGrid>(m, "DomainGrid")
      .def(py::init([](int dim, std::array<double, 2> extent,
                       std::array<Index, 2> n_cells) {
             DomainGrid grid{dim, extent, n_cells};
             grid.validate();
             return grid;
           }),
           py::arg("dim") = 1,
           py::arg("extent") = std::array<double, 2>{1.0, 1.0},
           py::arg("n_cells") = std::array<Index, 2>{8, 1})
      .def_readonly("dim", &DomainGrid::dim)
      .def_readonly("extent", &DomainGrid::extent)
      .def_readonly("n_cells", &DomainGrid::n_cells)
      .def_property_readonly("cells", &DomainGrid::cells)
      .def_property_readonly("flux_dim", &DomainGrid::flux_dim);

  py::class_<CoefficientField>(m, "CoefficientField")
      .def_static("constant", &CoefficientField::constant)
      .def_readonly("values", &CoefficientField::values)
      .def_readonly("alpha", &CoefficientField::alpha)
      .def_readonly("beta", &CoefficientField::beta);

  py::class_<SrOperator>(m, "SrOperator")
      .def_readonly("r", &SrOperator::r)
      .def_readonly("dense", &SrOperator::dense)
      .def_readonly("s_nodes", &SrOperator::s_nodes)
      .def_readonly("s_weights", &SrOperator::s_weights)
      .def_readonly("sphere_weights", &SrOperator::sphere_weights);

  m.def("make_sr_operator", &make_sr_operator, py::arg("grid"), py::arg("r"),
        py::arg("n_s") = 16, py::arg("n_angle") = 64);
  m.def("sr_apply", &sr_apply);
  m.def("face_multiplication", &face_multiplication);
  m.def("oscillating_coefficient", &oscillating_coefficient, py::arg("n"),
        py::arg("alpha"), py::arg("beta"), py::arg("grid"));

  py::enum_<BoundaryCondition>(m, "BoundaryCondition")
      .value("Neumann", BoundaryCondition::kNeumann)
      .value("Dirichlet", BoundaryCondition::kDirichlet);

  py::class_<DiffusionSystem>(m, "DiffusionSystem")
      .def_readonly("a_skew", &DiffusionSystem::a_skew)
      .def_readonly("dec", &DiffusionSystem::dec)
      .def_readonly("flux_coeff", &DiffusionSystem::flux_coeff)
      .def("law_for", &DiffusionSystem::law_for, py::arg("flux_op"),
           py::arg("label") = "")
      .def("law", &DiffusionSystem::law);

  m.def("assemble_diffusion", &assemble_diffusion, py::arg("grid"),
        py::arg("a"), py::arg("bc") = BoundaryCondition::kNeumann);
  m.def("prescribed_kernel_skew", &prescribed_kernel_skew, py::arg("dim"),
        py::arg("kernel_dim"), py::arg("seed"));

  py::class_<PiezoBlocks>(m, "PiezoBlocks")
      .def(py::init([](Matrix C, Matrix e, Matrix eps, Matrix mu,
                       Matrix sigma) {
             return PiezoBlocks{std::move(C), std::move(e), std::move(eps),
                                std::move(mu), std::move(sigma)};
           }),
           py::arg("C"), py::arg("e"), py::arg("eps"), py::arg("mu"),
           py::arg("sigma"))
      .def_readwrite("C", &PiezoBlocks::C)
      .def_readwrite("e", &PiezoBlocks::e)
      .def_readwrite("eps", &PiezoBlocks::eps)
      .def_readwrite("mu", &PiezoBlocks::mu)
      .def_readwrite("sigma", &PiezoBlocks::sigma);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("name", &Certificate::name)
      .def_readonly("measured", &Certificate::measured)
      .def_readonly("required", &Certificate::required)
      .def_readonly("passed", &Certificate::pass);

  py::class_<PiezoParams>(m, "PiezoParams")
      .def(py::init([](Index dim0, double nu0, double c, double d) {
             return PiezoParams{dim0, nu0, c, d};
           }),
           py::arg("dim0") = 1, py::arg("nu0") = 0.0, py::arg("c") = 0.1,
           py::arg("d") = 10.0);

  py::class_<PiezoSystem>(m, "PiezoSystem")
      .def_readonly("m0", &PiezoSystem::m0)
      .def_readonly("m1", &PiezoSystem::m1)
      .def_readonly("law", &PiezoSystem::law)
      .def_readonly("a_skew", &PiezoSystem::a_skew)
      .def_readonly("dec", &PiezoSystem::dec)
      .def_readonly("certificates", &PiezoSystem::certificates);

  m.def("assemble_piezo",
        py::overload_cast<const PiezoBlocks&, const PiezoParams&,
                          const HalfPlaneGrid&, std::uint64_t, Index>(
            &assemble_piezo),
        py::arg("blocks"), py::arg("params"), py::arg("grid"),
        py::arg("skew_seed"), py::arg("kernel_dim"));

  // suites ----------------------------------------------------------------
  py::class_<SuiteResult>(m, "SuiteResult")
      .def_readonly("name", &SuiteResult::name)
      .def_readonly("instances", &SuiteResult::instances)
      .def_readonly("failures", &SuiteResult::failures)
      .def_readonly("worst", &SuiteResult::worst)
      .def_readonly("tolerance", &SuiteResult::tolerance)
      .def_property_readonly("passed", &SuiteResult::pass);

  m.def(
      "run_all_suites",
      [](std::uint64_t seed, int instances, Index max_dim, int workers) {
        return run_all_suites(SuiteConfig{seed, instances, max_dim, workers});
      },
      py::arg("seed") = 42, py::arg("instances") = 200, py::arg("max_dim") = 16,
      py::arg("workers") = 1);
}
