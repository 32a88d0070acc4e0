#pragma once

#include <string>

#include "evoeq/convergence.hpp"
#include "evoeq/matlaw.hpp"
#include "evoeq/spectral.hpp"

#include "json.hpp"

namespace evoeq {

using Json = nlohmann::ordered_json;

// Dense operators serialize as {"rows", "cols", "re", "im"} row-major with
// full round-trip precision.
Json operator_to_json(const Matrix& m);
Matrix operator_from_json(const Json& j);

Json decomposition_to_json(const Decomposition& dec);
Decomposition decomposition_from_json(const Json& j);

// Laurent laws: {"nu0", "terms": [{"power", "coeff"}], "label"};
// combinators: {"op": "sum"|"mul"|"inv", "args": [...]}.
Json material_law_to_json(const MaterialLaw& law);
MaterialLaw material_law_from_json(const Json& j);

Json time_grid_to_json(const TimeGrid& grid);
TimeGrid time_grid_from_json(const Json& j);

Json signal_to_json(const WeightedSignal& f);
WeightedSignal signal_from_json(const Json& j);

/// CSV columns: t, then re/im interleaved per coordinate.
std::string signal_to_csv(const WeightedSignal& f);

Json half_plane_grid_to_json(const HalfPlaneGrid& grid);
HalfPlaneGrid half_plane_grid_from_json(const Json& j);

Json alpha_to_json(const AlphaBounds& alpha);
Json schur_quadruple_to_json(const SchurQuadruple& q);

Json convergence_report_to_json(const ConvergenceReport& report);
/// Flat rows (kind, n, z_re, z_im, gap) for plotting.
std::string convergence_report_to_csv(const ConvergenceReport& report,
                                      const HalfPlaneGrid& grid);

/// Fixed 17-significant-digit decimal formatting used by CSV artifacts.
std::string format_double(double v);

}  // namespace evoeq
