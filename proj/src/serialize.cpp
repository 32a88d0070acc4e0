#include "evoeq/serialize.hpp"

#include <cstdio>
#include <sstream>

namespace evoeq {

namespace {

Json double_vector_to_json(const std::vector<double>& v) {
  return Json(v);
}

std::vector<double> doubles_from_json(const Json& j, const char* where) {
  if (!j.is_array()) {
    throw ConfigError(std::string(where) + ": expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& item : j) {
    if (!item.is_number()) {
      throw ConfigError(std::string(where) + ": expected numbers");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

Json operator_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> re, im;
  re.reserve(static_cast<std::size_t>(m.size()));
  im.reserve(static_cast<std::size_t>(m.size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  j["re"] = double_vector_to_json(re);
  j["im"] = double_vector_to_json(im);
  return j;
}

Matrix operator_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("re") || !j.contains("im")) {
    throw ConfigError("operator: expected {rows, cols, re, im}");
  }
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("operator: rows and cols must be positive");
  }
  const std::vector<double> re = doubles_from_json(j.at("re"), "operator.re");
  const std::vector<double> im = doubles_from_json(j.at("im"), "operator.im");
  if (static_cast<Index>(re.size()) != rows * cols ||
      static_cast<Index>(im.size()) != rows * cols) {
    throw ConfigError("operator: entry count does not match rows * cols");
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const std::size_t k = static_cast<std::size_t>(r * cols + c);
      m(r, c) = Complex(re[k], im[k]);
    }
  }
  if (!all_finite(m)) throw ConfigError("operator: entries must be finite");
  return m;
}

Json decomposition_to_json(const Decomposition& dec) {
  Json j;
  j["total_dim"] = dec.total_dim();
  j["basis0"] = operator_to_json(dec.basis0());
  j["basis1"] = operator_to_json(dec.basis1());
  return j;
}

Decomposition decomposition_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("basis0") || !j.contains("basis1")) {
    throw ConfigError("decomposition: expected {basis0, basis1}");
  }
  return Decomposition(operator_from_json(j.at("basis0")),
                       operator_from_json(j.at("basis1")));
}

namespace {

Json law_node_to_json(const MaterialLaw::Node& node) {
  using Kind = MaterialLaw::Node::Kind;
  if (node.kind == Kind::kLaurent) {
    Json j;
    j["nu0"] = node.nu0;
    Json terms = Json::array();
    for (const LaurentTerm& term : node.terms) {
      Json t;
      t["power"] = term.power;
      t["coeff"] = operator_to_json(term.coeff);
      terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
    j["label"] = node.label;
    return j;
  }
  Json j;
  switch (node.kind) {
    case Kind::kSum: j["op"] = "sum"; break;
    case Kind::kProduct: j["op"] = "mul"; break;
    case Kind::kInverse: j["op"] = "inv"; break;
    case Kind::kLaurent: break;
  }
  Json args = Json::array();
  for (const auto& arg : node.args) args.push_back(law_node_to_json(*arg));
  j["args"] = std::move(args);
  return j;
}

}  // namespace

Json material_law_to_json(const MaterialLaw& law) {
  return law_node_to_json(law.root());
}

MaterialLaw material_law_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("material law: expected an object");
  if (j.contains("op")) {
    const std::string op = j.at("op").get<std::string>();
    if (!j.contains("args") || !j.at("args").is_array() ||
        j.at("args").empty()) {
      throw ConfigError("material law: combinator needs a nonempty args list");
    }
    std::vector<MaterialLaw> args;
    for (const auto& arg : j.at("args")) {
      args.push_back(material_law_from_json(arg));
    }
    if (op == "sum") return MaterialLaw::sum(std::move(args));
    if (op == "mul") return MaterialLaw::product(std::move(args));
    if (op == "inv") {
      if (args.size() != 1) {
        throw ConfigError("material law: inv takes exactly one argument");
      }
      return MaterialLaw::inverse(std::move(args.front()));
    }
    throw ConfigError("material law: unknown combinator '" + op + "'");
  }
  if (!j.contains("nu0") || !j.contains("terms")) {
    throw ConfigError("material law: expected {nu0, terms, label}");
  }
  std::vector<LaurentTerm> terms;
  for (const auto& t : j.at("terms")) {
    if (!t.contains("power") || !t.contains("coeff")) {
      throw ConfigError("material law: term needs {power, coeff}");
    }
    terms.push_back({t.at("power").get<int>(),
                     operator_from_json(t.at("coeff"))});
  }
  std::string label;
  if (j.contains("label")) label = j.at("label").get<std::string>();
  return MaterialLaw::laurent(j.at("nu0").get<double>(), std::move(terms),
                              std::move(label));
}

Json time_grid_to_json(const TimeGrid& grid) {
  Json j;
  j["t0"] = grid.t0;
  j["dt"] = grid.dt;
  j["n_steps"] = grid.n_steps;
  j["nu"] = grid.nu;
  return j;
}

TimeGrid time_grid_from_json(const Json& j) {
  TimeGrid grid;
  if (j.contains("t0")) grid.t0 = j.at("t0").get<double>();
  if (j.contains("dt")) grid.dt = j.at("dt").get<double>();
  if (j.contains("n_steps")) grid.n_steps = j.at("n_steps").get<Index>();
  if (j.contains("nu")) grid.nu = j.at("nu").get<double>();
  grid.validate();
  return grid;
}

Json signal_to_json(const WeightedSignal& f) {
  Json j;
  j["grid"] = time_grid_to_json(f.grid);
  j["values"] = operator_to_json(f.values);
  return j;
}

WeightedSignal signal_from_json(const Json& j) {
  if (!j.contains("grid") || !j.contains("values")) {
    throw ConfigError("signal: expected {grid, values}");
  }
  WeightedSignal f{time_grid_from_json(j.at("grid")),
                   operator_from_json(j.at("values"))};
  f.validate();
  return f;
}

std::string signal_to_csv(const WeightedSignal& f) {
  std::ostringstream os;
  os << "t";
  for (Index c = 0; c < f.dim(); ++c) {
    os << ",re" << c << ",im" << c;
  }
  os << "\n";
  for (Index j = 0; j < f.values.rows(); ++j) {
    os << format_double(f.grid.time(j));
    for (Index c = 0; c < f.dim(); ++c) {
      os << "," << format_double(f.values(j, c).real()) << ","
         << format_double(f.values(j, c).imag());
    }
    os << "\n";
  }
  return os.str();
}

Json half_plane_grid_to_json(const HalfPlaneGrid& grid) {
  Json j;
  j["nu"] = grid.nu;
  j["re_points"] = double_vector_to_json(grid.re_points);
  j["im_points"] = double_vector_to_json(grid.im_points);
  return j;
}

HalfPlaneGrid half_plane_grid_from_json(const Json& j) {
  HalfPlaneGrid grid;
  if (j.contains("nu")) grid.nu = j.at("nu").get<double>();
  grid.re_points = doubles_from_json(j.at("re_points"), "grid.re_points");
  grid.im_points = doubles_from_json(j.at("im_points"), "grid.im_points");
  if (grid.re_points.empty() || grid.im_points.empty()) {
    throw ConfigError("half-plane grid: re_points and im_points required");
  }
  return grid;
}

Json alpha_to_json(const AlphaBounds& alpha) {
  Json j;
  j["a00"] = alpha.a00;
  j["a01"] = alpha.a01;
  j["a10"] = alpha.a10;
  j["a11"] = alpha.a11;
  return j;
}

Json schur_quadruple_to_json(const SchurQuadruple& q) {
  Json j;
  j["a"] = operator_to_json(q.a);
  j["b"] = operator_to_json(q.b);
  j["c"] = operator_to_json(q.c);
  j["d"] = operator_to_json(q.d);
  return j;
}

Json convergence_report_to_json(const ConvergenceReport& report) {
  Json j;
  j["experiment"] = report.experiment;
  j["n_values"] = double_vector_to_json(report.n_values);
  Json freq = Json::array();
  for (const auto& row : report.freq_gaps) {
    freq.push_back(double_vector_to_json(row));
  }
  j["freq_gaps"] = std::move(freq);
  j["freq_worst"] = double_vector_to_json(report.freq_worst);
  j["time_gaps"] = double_vector_to_json(report.time_gaps);
  j["slopes"] = Json{{"freq", report.freq_slope}, {"time", report.time_slope}};
  j["final_gaps"] =
      Json{{"freq", report.freq_final}, {"time", report.time_final}};
  j["hypotheses"] = Json{{"coercivity", report.shared_coercivity},
                         {"sup_norm", report.shared_sup_norm},
                         {"inverse_bound", report.shared_inverse_bound}};
  j["audit"] = Json{{"limit_coercivity", report.audit_limit_coercivity},
                    {"limit_inverse_bound", report.audit_limit_inverse_bound},
                    {"pass", report.audit_pass}};
  j["thresholds"] = Json{{"final_freq_gap", report.thresholds.final_freq_gap},
                         {"final_time_gap", report.thresholds.final_time_gap}};
  j["pass"] = report.pass;
  if (!report.extras.empty()) {
    Json extras;
    for (const auto& [key, values] : report.extras) {
      extras[key] = double_vector_to_json(values);
    }
    j["extras"] = std::move(extras);
  }
  return j;
}

std::string convergence_report_to_csv(const ConvergenceReport& report,
                                      const HalfPlaneGrid& grid) {
  std::ostringstream os;
  os << "kind,n,z_re,z_im,gap\n";
  const std::vector<Complex> zs = grid.points();
  for (std::size_t i = 0; i < report.freq_gaps.size(); ++i) {
    for (std::size_t k = 0; k < report.freq_gaps[i].size(); ++k) {
      os << "freq," << format_double(report.n_values[i]) << ","
         << format_double(zs[k].real()) << "," << format_double(zs[k].imag())
         << "," << format_double(report.freq_gaps[i][k]) << "\n";
    }
  }
  for (std::size_t i = 0; i < report.time_gaps.size(); ++i) {
    os << "time," << format_double(report.n_values[i]) << ",,,"
       << format_double(report.time_gaps[i]) << "\n";
  }
  return os.str();
}

}  // namespace evoeq
