#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "config_schema.hpp"
#include "evoeq/models.hpp"
#include "evoeq/parallel.hpp"
#include "evoeq/rng.hpp"
#include "evoeq/suites.hpp"

namespace evoeq::cli {

namespace {

// ---------------------------------------------------------------------------
// Schema validation: a small interpreter for the subset of JSON Schema the
// published schema uses (type, enum, const, required, properties, items,
// bounds, $ref into definitions, oneOf dispatched on the "kind" constant).

const Json& schema_root() {
  static const Json root = Json::parse(kConfigSchemaJson);
  return root;
}

const Json& resolve_ref(const Json& root, const std::string& ref) {
  const std::string prefix = "#/definitions/";
  if (ref.rfind(prefix, 0) != 0) {
    throw ConfigError("schema: unsupported $ref '" + ref + "'");
  }
  return root.at("definitions").at(ref.substr(prefix.size()));
}

std::string type_name(const Json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  return "null";
}

void validate_node(const Json& value, const Json& schema, const Json& root,
                   const std::string& path);

void validate_one_of(const Json& value, const Json& branches, const Json& root,
                     const std::string& path) {
  // Branches discriminate on the "kind" constant.
  std::string kind;
  if (value.is_object() && value.contains("kind") &&
      value.at("kind").is_string()) {
    kind = value.at("kind").get<std::string>();
  }
  for (const Json& branch : branches) {
    if (branch.contains("properties") &&
        branch.at("properties").contains("kind") &&
        branch.at("properties").at("kind").contains("const") &&
        branch.at("properties").at("kind").at("const") == kind) {
      validate_node(value, branch, root, path);
      // Reject keys the schema does not describe; silent fallbacks to
      // defaults would hide config typos.
      for (const auto& [key, sub] : value.items()) {
        (void)sub;
        const bool known =
            (root.contains("properties") &&
             root.at("properties").contains(key)) ||
            branch.at("properties").contains(key);
        if (!known) {
          throw ConfigError(path + "." + key + ": unknown key for kind '" +
                            kind + "'");
        }
      }
      return;
    }
  }
  throw ConfigError(path + ".kind: no schema branch matches kind '" + kind +
                    "'");
}

void validate_node(const Json& value, const Json& schema, const Json& root,
                   const std::string& path) {
  if (schema.contains("$ref")) {
    validate_node(value, resolve_ref(root, schema.at("$ref").get<std::string>()),
                  root, path);
    return;
  }
  if (schema.contains("const")) {
    if (value != schema.at("const")) {
      throw ConfigError(path + ": must equal " + schema.at("const").dump());
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const Json& option : schema.at("enum")) {
      if (value == option) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError(path + ": value " + value.dump() + " not one of " +
                        schema.at("enum").dump());
    }
  }
  if (schema.contains("type")) {
    const std::string want = schema.at("type").get<std::string>();
    const std::string have = type_name(value);
    const bool ok =
        want == have || (want == "number" && have == "integer");
    if (!ok) {
      throw ConfigError(path + ": expected " + want + ", got " + have);
    }
  }
  if (value.is_number()) {
    const double x = value.get<double>();
    if (schema.contains("minimum") &&
        x < schema.at("minimum").get<double>()) {
      throw ConfigError(path + ": must be >= " +
                        schema.at("minimum").dump());
    }
    if (schema.contains("exclusiveMinimum") &&
        x <= schema.at("exclusiveMinimum").get<double>()) {
      throw ConfigError(path + ": must be > " +
                        schema.at("exclusiveMinimum").dump());
    }
    if (schema.contains("maximum") &&
        x > schema.at("maximum").get<double>()) {
      throw ConfigError(path + ": must be <= " +
                        schema.at("maximum").dump());
    }
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const Json& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>())) {
          throw ConfigError(path + ": missing required key '" +
                            key.get<std::string>() + "'");
        }
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema.at("properties").items()) {
        if (value.contains(key)) {
          validate_node(value.at(key), sub, root, path + "." + key);
        }
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    Index i = 0;
    for (const Json& item : value) {
      validate_node(item, schema.at("items"), root,
                    path + "[" + std::to_string(i) + "]");
      ++i;
    }
  }
  if (schema.contains("oneOf")) {
    validate_one_of(value, schema.at("oneOf"), root, path);
  }
}

// ---------------------------------------------------------------------------
// Artifact plumbing.

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::uint64_t effective_seed(const Json& config, const Options& options,
                             std::uint64_t fallback) {
  if (options.seed_override >= 0) {
    return static_cast<std::uint64_t>(options.seed_override);
  }
  if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
  return fallback;
}

TimeGrid time_grid_or(const Json& config, const TimeGrid& fallback) {
  if (!config.contains("time_grid")) {
    fallback.validate();
    return fallback;
  }
  Json merged = time_grid_to_json(fallback);
  merged.update(config.at("time_grid"));
  return time_grid_from_json(merged);
}

ProbeSettings probes_or(const Json& config, const ProbeSettings& fallback) {
  ProbeSettings probes = fallback;
  if (config.contains("probes")) {
    const Json& p = config.at("probes");
    if (p.contains("seed")) probes.seed = p.at("seed").get<std::uint64_t>();
    if (p.contains("n_gauss")) probes.n_gauss = p.at("n_gauss").get<int>();
    if (p.contains("basis_cap")) {
      probes.basis_cap = p.at("basis_cap").get<int>();
    }
  }
  return probes;
}

ExperimentThresholds thresholds_or(const Json& config,
                                   const ExperimentThresholds& fallback) {
  ExperimentThresholds t = fallback;
  if (config.contains("thresholds")) {
    const Json& j = config.at("thresholds");
    if (j.contains("final_freq_gap")) {
      t.final_freq_gap = j.at("final_freq_gap").get<double>();
    }
    if (j.contains("final_time_gap")) {
      t.final_time_gap = j.at("final_time_gap").get<double>();
    }
  }
  return t;
}

Json probes_to_json(const ProbeSettings& p) {
  return Json{{"seed", p.seed}, {"n_gauss", p.n_gauss},
              {"basis_cap", p.basis_cap}};
}

Json thresholds_to_json(const ExperimentThresholds& t) {
  return Json{{"final_freq_gap", t.final_freq_gap},
              {"final_time_gap", t.final_time_gap}};
}

// 1-D domain grid from "grid" (dominant) or params.cells.
DomainGrid domain_grid_or(const Json& config, Index default_cells) {
  DomainGrid grid;
  grid.dim = 1;
  grid.n_cells = {default_cells, 1};
  if (config.contains("params") && config.at("params").contains("cells")) {
    grid.n_cells[0] = config.at("params").at("cells").get<Index>();
  }
  if (config.contains("grid")) {
    const Json& g = config.at("grid");
    if (g.contains("dim")) grid.dim = g.at("dim").get<int>();
    if (g.contains("cells")) {
      const Json& cells = g.at("cells");
      for (std::size_t axis = 0; axis < cells.size() && axis < 2; ++axis) {
        grid.n_cells[axis] = cells.at(axis).get<Index>();
      }
    }
    if (g.contains("extent")) {
      const Json& extent = g.at("extent");
      for (std::size_t axis = 0; axis < extent.size() && axis < 2; ++axis) {
        grid.extent[axis] = extent.at(axis).get<double>();
      }
    }
  }
  grid.validate();
  return grid;
}

Json domain_grid_to_json(const DomainGrid& grid) {
  return Json{{"dim", grid.dim},
              {"cells", Json::array({grid.n_cells[0], grid.n_cells[1]})},
              {"extent", Json::array({grid.extent[0], grid.extent[1]})}};
}

Json suites_to_json(const std::vector<SuiteResult>& suites) {
  Json arr = Json::array();
  for (const SuiteResult& s : suites) {
    arr.push_back(Json{{"name", s.name},
                       {"instances", s.instances},
                       {"failures", s.failures},
                       {"worst", s.worst},
                       {"tolerance", s.tolerance},
                       {"pass", s.pass()}});
  }
  return arr;
}

int finish_experiment(const ConvergenceReport& report, const Json& effective,
                      const HalfPlaneGrid& grid, const Options& options,
                      const std::string& stem) {
  Json artifact;
  artifact["effective_config"] = effective;
  artifact["half_plane_grid"] = half_plane_grid_to_json(grid);
  artifact["report"] = convergence_report_to_json(report);
  write_json(options.out_dir / (stem + "_report.json"), artifact);
  if (options.format == "csv") {
    write_text(options.out_dir / (stem + "_gaps.csv"),
               convergence_report_to_csv(report, grid));
  }
  if (!report.pass) {
    std::cerr << stem << ": convergence thresholds not met (final freq gap "
              << report.freq_final << ", final time gap " << report.time_final
              << ", slopes " << report.freq_slope << "/" << report.time_slope
              << ")\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Subcommand runners.

int run_check(const Json& config, const Options& options) {
  SuiteConfig suite_config;
  suite_config.seed = effective_seed(config, options, 42);
  suite_config.instances =
      config.contains("instances") ? config.at("instances").get<int>() : 200;
  suite_config.max_dim =
      config.contains("max_dim") ? config.at("max_dim").get<Index>() : 16;
  suite_config.workers = resolve_workers(options.workers);

  const std::vector<SuiteResult> suites = run_all_suites(suite_config);
  Json effective = config;
  effective["seed"] = suite_config.seed;
  effective["instances"] = suite_config.instances;
  effective["max_dim"] = suite_config.max_dim;

  bool pass = true;
  for (const SuiteResult& s : suites) pass = pass && s.pass();
  Json artifact;
  artifact["effective_config"] = effective;
  artifact["suites"] = suites_to_json(suites);
  artifact["pass"] = pass;
  write_json(options.out_dir / "check_report.json", artifact);
  for (const SuiteResult& s : suites) {
    std::cout << (s.pass() ? "[PASS] " : "[FAIL] ") << s.name << " ("
              << s.instances << " instances, worst " << s.worst << ")\n";
  }
  return pass ? 0 : 1;
}

int run_schur(const Json& config, const Options& options) {
  const Matrix m = operator_from_json(config.at("operator"));
  const Json& split = config.at("split");
  if (split.size() != 2) {
    throw ConfigError("$.split: expected [dim0, dim1]");
  }
  const Index d0 = split.at(0).get<Index>();
  const Index d1 = split.at(1).get<Index>();
  if (d0 + d1 != m.rows()) {
    throw ConfigError("$.split: dim0 + dim1 must equal the operator size");
  }
  const Decomposition dec = Decomposition::coordinate_split(d0, d1);
  const SchurQuadruple q = schur_components(m, dec);
  const AlphaBounds alpha = alpha_fit(m, dec);
  const Matrix back = schur_reconstruct(q, dec);
  Json artifact;
  artifact["effective_config"] = config;
  artifact["quadruple"] = schur_quadruple_to_json(q);
  artifact["alpha"] = alpha_to_json(alpha);
  artifact["roundtrip_residual"] = (back - m).norm() / m.norm();
  write_json(options.out_dir / "schur_report.json", artifact);
  return 0;
}

struct SolveModel {
  MaterialLaw law;
  Matrix a_skew;
  double support_start = 0.0;
};

int run_solve(const Json& config, const Options& options) {
  const std::string model = config.at("model").get<std::string>();
  const Json params = config.contains("params") ? config.at("params") : Json::object();
  TimeGrid grid = time_grid_or(config, TimeGrid{0.0, 1.0 / 32.0, 1024, 1.0});

  Json effective = config;
  effective["time_grid"] = time_grid_to_json(grid);

  MaterialLaw law = MaterialLaw::constant(Matrix::Identity(1, 1));
  Matrix a_skew;
  if (model == "heat") {
    const Index cells =
        params.contains("cells") ? params.at("cells").get<Index>() : 16;
    const double coefficient =
        params.contains("coefficient") ? params.at("coefficient").get<double>()
                                       : 1.0;
    DomainGrid domain;
    domain.dim = 1;
    domain.n_cells = {cells, 1};
    const DiffusionSystem system = assemble_diffusion(
        domain, CoefficientField::constant(domain, coefficient),
        BoundaryCondition::kNeumann);
    law = system.law();
    a_skew = system.a_skew;
    effective["params"] =
        Json{{"cells", cells}, {"coefficient", coefficient}};
  } else {  // skew2
    law = MaterialLaw::constant(Matrix::Identity(2, 2));
    a_skew = Matrix::Zero(2, 2);
    a_skew(0, 1) = -1.0;
    a_skew(1, 0) = 1.0;
    effective["params"] = Json::object();
  }

  const Index dim = law.dim();
  const double window = grid.window();
  Json input = config.contains("input") ? config.at("input") : Json::object();
  const std::string input_type =
      input.contains("type") ? input.at("type").get<std::string>() : "bump";
  const double center = input.contains("center")
                            ? input.at("center").get<double>()
                            : grid.t0 + 0.4 * window;
  const double width = input.contains("width") ? input.at("width").get<double>()
                                               : window / 24.0;
  const double a = input.contains("a") ? input.at("a").get<double>()
                                       : center - width;
  const double b = input.contains("b") ? input.at("b").get<double>()
                                       : center + width;
  const Index coord =
      input.contains("coord") ? input.at("coord").get<Index>() : 0;
  if (coord < 0 || coord >= dim) {
    throw ConfigError("$.input.coord: out of range for model dimension " +
                      std::to_string(dim));
  }
  effective["input"] = Json{{"type", input_type}, {"center", center},
                            {"width", width},     {"a", a},
                            {"b", b},             {"coord", coord}};

  WeightedSignal f{grid, Matrix::Zero(grid.n_steps, dim)};
  double support_start = grid.t0;
  for (Index j = 0; j < grid.n_steps; ++j) {
    const double t = grid.time(j);
    double env = 0.0;
    if (input_type == "bump") {
      env = gaussian_bump(t, center, width);
    } else {
      env = mollified_indicator(t, a, b, 32.0 * grid.dt);
    }
    f.values(j, coord) = env;
  }
  if (input_type == "bump") {
    // Cut the far tail so the causality metric has an exact support start.
    support_start = center - 8.0 * width;
    for (Index j = 0; j < grid.n_steps; ++j) {
      if (grid.time(j) < support_start) f.values.row(j).setZero();
    }
  } else {
    support_start = a;
  }

  const EvoSolver solver(law, a_skew, grid);
  const WeightedSignal u = solver.solve(f);

  WeightedSignal residual = td_apply(matlaw_apply(law, u));
  residual.values += u.values * a_skew.transpose();
  residual.values -= f.values;
  const double f_norm = weighted_norm(f);
  const double u_norm = weighted_norm(u);
  const double residual_rel = weighted_norm(residual) / f_norm;
  const double defect = causality_defect(u, support_start);

  Json metrics;
  metrics["coercivity"] = solver.coercivity();
  metrics["input_norm"] = f_norm;
  metrics["solution_norm"] = u_norm;
  metrics["norm_ratio"] = u_norm / f_norm;
  metrics["norm_bound"] = 1.0 / solver.coercivity();
  metrics["residual_rel"] = residual_rel;
  metrics["causality_defect"] = defect;
  metrics["band_fraction"] = band_limit_fraction(f);

  Json artifact;
  artifact["effective_config"] = effective;
  artifact["metrics"] = metrics;
  write_json(options.out_dir / "solve_report.json", artifact);
  write_text(options.out_dir / "solution.csv", signal_to_csv(u));

  const bool pass = residual_rel <= 1e-6 && defect <= 1e-6 &&
                    u_norm <= f_norm / solver.coercivity() + 1e-6;
  if (!pass) {
    std::cerr << "solve: certificate 'picard_solution' failed; requires "
                 "residual <= 1e-6, causality defect <= 1e-6 and "
                 "||U||_nu <= ||f||_nu / c\n";
    return 1;
  }
  return 0;
}

int run_homogenize(const Json& config, const Options& options) {
  const Json params = config.contains("params") ? config.at("params") : Json::object();
  const double alpha =
      params.contains("alpha") ? params.at("alpha").get<double>() : 1.0;
  const double beta =
      params.contains("beta") ? params.at("beta").get<double>() : 3.0;
  const DomainGrid domain = domain_grid_or(config, 128);
  if (domain.dim != 1) {
    throw ConfigError("$.grid.dim: homogenize runs on 1-D grids");
  }
  std::vector<double> n_values;
  for (const Json& n : config.at("n_values")) {
    n_values.push_back(n.get<double>());
  }
  const std::string compare =
      config.contains("compare") ? config.at("compare").get<std::string>()
                                 : "harmonic";
  const TimeGrid tgrid =
      time_grid_or(config, TimeGrid{0.0, 1.0 / 8.0, 256, 1.0});
  const ProbeSettings probes = probes_or(
      config, ProbeSettings{effective_seed(config, options, 42), 8, 4});
  const ExperimentThresholds thresholds =
      thresholds_or(config, ExperimentThresholds{5e-4, 1e-5});

  const DiffusionSystem system =
      assemble_diffusion(domain, CoefficientField::constant(domain, 1.0),
                         BoundaryCondition::kNeumann);

  std::vector<MaterialLaw> laws;
  laws.reserve(n_values.size());
  for (double n : n_values) {
    const CoefficientField field =
        oscillating_coefficient(static_cast<Index>(n), alpha, beta, domain);
    std::ostringstream label;
    label << "oscillating n=" << n;
    laws.push_back(system.law_for(face_multiplication(field), label.str()));
  }
  const double limit_value = compare == "harmonic"
                                 ? 2.0 * alpha * beta / (alpha + beta)
                                 : 0.5 * (alpha + beta);
  const MaterialLaw limit_law = system.law_for(
      face_multiplication(CoefficientField::constant(domain, limit_value)),
      compare + " mean");

  const HalfPlaneGrid grid = HalfPlaneGrid::standard(0.0, tgrid.nu);
  ExperimentOptions opts;
  opts.label = "homogenize-" + compare;
  opts.n_values = n_values;
  opts.trend = n_values;
  opts.probes = probes;
  opts.thresholds = thresholds;
  opts.workers = resolve_workers(options.workers);
  const ConvergenceReport report = solution_convergence_experiment(
      laws, limit_law, system.a_skew, system.dec, grid, tgrid, opts);

  Json effective = config;
  effective["params"] = Json{{"alpha", alpha}, {"beta", beta}};
  effective["grid"] = domain_grid_to_json(domain);
  effective["compare"] = compare;
  effective["limit_value"] = limit_value;
  effective["time_grid"] = time_grid_to_json(tgrid);
  effective["probes"] = probes_to_json(probes);
  effective["thresholds"] = thresholds_to_json(thresholds);
  return finish_experiment(report, effective, grid, options, "homogenize");
}

int run_cellmig(const Json& config, const Options& options) {
  const Json params = config.contains("params") ? config.at("params") : Json::object();
  CellMigConfig cm;
  cm.grid = domain_grid_or(config, 256);
  cm.a1 = params.contains("a1") ? params.at("a1").get<double>() : 2.0;
  cm.a2 = params.contains("a2") ? params.at("a2").get<double>() : 0.5;
  cm.a3 = params.contains("a3") ? params.at("a3").get<double>() : 0.5;
  for (const Json& r : config.at("r_values")) {
    cm.r_values.push_back(r.get<double>());
  }
  cm.time_grid = time_grid_or(config, TimeGrid{0.0, 0.25, 128, 1.0});
  cm.hp_grid = HalfPlaneGrid::standard(0.0, cm.time_grid.nu);
  cm.opts.label = "cellmig";
  cm.opts.probes = probes_or(
      config, ProbeSettings{effective_seed(config, options, 42), 8, 4});
  cm.opts.thresholds =
      thresholds_or(config, ExperimentThresholds{5e-4, 5e-6});
  cm.opts.workers = resolve_workers(options.workers);

  const ConvergenceReport report = cellmig_experiment(cm);

  Json effective = config;
  effective["params"] = Json{{"a1", cm.a1}, {"a2", cm.a2}, {"a3", cm.a3}};
  effective["grid"] = domain_grid_to_json(cm.grid);
  effective["time_grid"] = time_grid_to_json(cm.time_grid);
  effective["probes"] = probes_to_json(cm.opts.probes);
  effective["thresholds"] = thresholds_to_json(cm.opts.thresholds);
  return finish_experiment(report, effective, cm.hp_grid, options, "cellmig");
}

PiezoBlocks deterministic_piezo_blocks(GaussianSource& rng, Index d1, Index d2,
                                       Index d3, double scale) {
  const auto psd = [&](Index dim) {
    const Matrix g = rng.complex_normal_matrix(dim, dim);
    return Matrix(Matrix::Identity(dim, dim) +
                  scale * (g * g.adjoint()) / static_cast<double>(dim));
  };
  PiezoBlocks blocks;
  blocks.C = psd(d1);
  blocks.e = scale * rng.complex_normal_matrix(d1, d2);
  blocks.eps = psd(d2);
  blocks.mu = psd(d3);
  blocks.sigma = 0.5 * Matrix::Identity(d2, d2) +
                 0.5 * scale * rng.complex_normal_matrix(d2, d2);
  return blocks;
}

int run_piezo(const Json& config, const Options& options) {
  const Json params = config.contains("params") ? config.at("params") : Json::object();
  std::array<Index, 4> dims{2, 3, 3, 2};
  if (params.contains("dims")) {
    const Json& d = params.at("dims");
    if (d.size() != 4) throw ConfigError("$.params.dims: expected 4 entries");
    for (std::size_t i = 0; i < 4; ++i) dims[i] = d.at(i).get<Index>();
  }
  PiezoConvergenceConfig pc;
  pc.params.dim0 = dims[0];
  pc.params.nu0 =
      params.contains("nu0") ? params.at("nu0").get<double>() : 0.5;
  pc.params.c = params.contains("c") ? params.at("c").get<double>() : 0.05;
  pc.params.d = params.contains("d") ? params.at("d").get<double>() : 50.0;
  pc.kernel_dim = params.contains("kernel_dim")
                      ? params.at("kernel_dim").get<Index>()
                      : 4;
  pc.skew_seed = effective_seed(config, options, 7);
  for (const Json& n : config.at("n_values")) {
    pc.n_values.push_back(n.get<double>());
  }
  pc.time_grid = time_grid_or(config, TimeGrid{0.0, 1.0 / 8.0, 256, 2.0});
  if (!(pc.time_grid.nu > pc.params.nu0)) {
    throw ConfigError("$.time_grid.nu: must exceed params.nu0");
  }
  pc.hp_grid = HalfPlaneGrid::standard(pc.params.nu0, pc.time_grid.nu);

  GaussianSource rng(pc.skew_seed + 1);
  pc.base = deterministic_piezo_blocks(rng, dims[1], dims[2], dims[3], 0.3);
  pc.delta = deterministic_piezo_blocks(rng, dims[1], dims[2], dims[3], 0.3);
  pc.delta.C -= Matrix::Identity(dims[1], dims[1]);
  pc.delta.eps -= Matrix::Identity(dims[2], dims[2]);
  pc.delta.mu -= Matrix::Identity(dims[3], dims[3]);
  pc.delta.sigma -= 0.5 * Matrix::Identity(dims[2], dims[2]);

  pc.opts.label = "piezo";
  pc.opts.probes = probes_or(
      config, ProbeSettings{effective_seed(config, options, 42), 8, 4});
  pc.opts.thresholds =
      thresholds_or(config, ExperimentThresholds{0.05, 0.003});
  pc.opts.workers = resolve_workers(options.workers);

  const ConvergenceReport report = piezo_convergence(pc);

  // Re-assemble the limit once more to expose its certificate table.
  const Index total = dims[0] + dims[1] + dims[2] + dims[3];
  const Matrix a_skew =
      prescribed_kernel_skew(total, pc.kernel_dim, pc.skew_seed);
  const PiezoSystem limit =
      assemble_piezo(pc.base, pc.params, pc.hp_grid, a_skew,
                     Decomposition::from_skew_kernel(a_skew));
  Json certs = Json::array();
  for (const Certificate& cert : limit.certificates) {
    certs.push_back(Json{{"name", cert.name},
                         {"measured", cert.measured},
                         {"required", cert.required},
                         {"pass", cert.pass}});
  }

  Json effective = config;
  effective["params"] = Json{{"dims", dims},
                             {"kernel_dim", pc.kernel_dim},
                             {"nu0", pc.params.nu0},
                             {"c", pc.params.c},
                             {"d", pc.params.d}};
  effective["seed"] = pc.skew_seed;
  effective["time_grid"] = time_grid_to_json(pc.time_grid);
  effective["probes"] = probes_to_json(pc.opts.probes);
  effective["thresholds"] = thresholds_to_json(pc.opts.thresholds);

  Json artifact;
  artifact["effective_config"] = effective;
  artifact["certificates"] = certs;
  artifact["half_plane_grid"] = half_plane_grid_to_json(pc.hp_grid);
  artifact["report"] = convergence_report_to_json(report);
  write_json(options.out_dir / "piezo_report.json", artifact);
  if (options.format == "csv") {
    write_text(options.out_dir / "piezo_gaps.csv",
               convergence_report_to_csv(report, pc.hp_grid));
  }
  if (!report.pass) {
    std::cerr << "piezo: convergence thresholds not met\n";
    return 1;
  }
  return 0;
}

}  // namespace

const std::string& config_schema_text() {
  static const std::string text = kConfigSchemaJson;
  return text;
}

void validate_config(const Json& config) {
  validate_node(config, schema_root(), schema_root(), "$");
}

int run_config(const Json& config, const Options& options) {
  validate_config(config);
  std::filesystem::create_directories(options.out_dir);
  const std::string kind = config.at("kind").get<std::string>();
  try {
    if (kind == "check") return run_check(config, options);
    if (kind == "schur") return run_schur(config, options);
    if (kind == "solve") return run_solve(config, options);
    if (kind == "homogenize") return run_homogenize(config, options);
    if (kind == "cellmig") return run_cellmig(config, options);
    if (kind == "piezo") return run_piezo(config, options);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    Json failure;
    failure["kind"] = kind;
    failure["error"] = e.what();
    write_json(options.out_dir / "failure_report.json", failure);
    std::cerr << e.what() << "\n";
    return 1;
  }
  throw ConfigError("$.kind: unknown kind '" + kind + "'");
}

namespace {

Json builtin_default_config(const std::string& kind) {
  if (kind == "check") {
    return Json{{"kind", "check"}, {"seed", 42}, {"instances", 200},
                {"max_dim", 16}};
  }
  if (kind == "schur") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    Json config{{"kind", "schur"}};
    config["operator"] = operator_to_json(m);
    config["split"] = Json::array({1, 1});
    return config;
  }
  if (kind == "solve") {
    return Json{{"kind", "solve"}, {"model", "heat"}};
  }
  if (kind == "homogenize") {
    return Json{{"kind", "homogenize"},
                {"n_values", Json::array({2, 4, 8, 16, 32, 64})}};
  }
  if (kind == "cellmig") {
    return Json{{"kind", "cellmig"},
                {"r_values", Json::array({0.5, 0.25, 0.125})}};
  }
  return Json{{"kind", "piezo"},
              {"n_values", Json::array({2, 4, 8, 16, 32, 64})}};
}

}  // namespace

}  // namespace evoeq::cli

#include "CLI11.hpp"

namespace evoeq::cli {

int run_cli(int argc, char** argv) {
  CLI::App app{
      "evoeq: operator certificates, spectral evolution solves and "
      "convergence experiments on finite-dimensional Hilbert spaces"};
  app.require_subcommand(1);

  Options options;
  std::string config_path;
  long long seed_override = -1;
  std::vector<double> n_override, r_override;

  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"check", "run the randomized operator-identity property suites"},
      {"schur", "Schur components and tightest alpha certificate"},
      {"solve", "spectral evolutionary solve with residual and causality "
                "metrics"},
      {"homogenize", "1-D oscillating-coefficient convergence experiment"},
      {"cellmig", "nonlocal cell-migration convergence experiment"},
      {"piezo", "coupled-block convergence experiment with certificates"}};
  for (const auto& [kind, description] : kinds) {
    CLI::App* cmd = app.add_subcommand(kind, description);
    cmd->add_option("--config", config_path, "experiment config (JSON)");
    cmd->add_option("--out", options.out_dir, "artifact directory");
    cmd->add_option("--seed", seed_override, "seed override");
    cmd->add_option("--workers", options.workers,
                    "worker count (or EVOEQ_WORKERS)");
    cmd->add_option("--format", options.format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    if (kind == "homogenize") {
      cmd->add_option("--n", n_override, "override n_values")->delimiter(',');
    }
    if (kind == "cellmig") {
      cmd->add_option("--r", r_override, "override r_values")->delimiter(',');
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string kind = app.get_subcommands().front()->get_name();
  options.seed_override = seed_override;
  try {
    Json config;
    if (config_path.empty()) {
      config = builtin_default_config(kind);
    } else {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "cannot open config " << config_path << "\n";
        return 2;
      }
      config = Json::parse(in, nullptr, /*allow_exceptions=*/true);
    }
    if (!config.contains("kind")) config["kind"] = kind;
    if (config.at("kind") != kind) {
      std::cerr << "$.kind: config kind '" << config.at("kind").dump()
                << "' does not match subcommand '" << kind << "'\n";
      return 2;
    }
    if (!n_override.empty()) {
      Json values = Json::array();
      for (double n : n_override) values.push_back(static_cast<long long>(n));
      config["n_values"] = std::move(values);
    }
    if (!r_override.empty()) config["r_values"] = r_override;
    return run_config(config, options);
  } catch (const Json::parse_error& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}

}  // namespace evoeq::cli
