#include "evoeq/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "evoeq/parallel.hpp"
#include "evoeq/rng.hpp"

namespace evoeq {

namespace {

constexpr double kZeroGap = 1e-12;

std::vector<Vector> probe_pool(GaussianSource& rng, Index dim, int n_basis,
                               int n_gauss) {
  std::vector<Vector> pool;
  pool.reserve(static_cast<std::size_t>(n_basis + n_gauss));
  for (int i = 0; i < n_basis; ++i) {
    Vector e = Vector::Zero(dim);
    e(i) = 1.0;
    pool.push_back(std::move(e));
  }
  for (int i = 0; i < n_gauss; ++i) {
    Vector v = rng.complex_normal_vector(dim);
    pool.push_back(v / v.norm());
  }
  return pool;
}

}  // namespace

ProbeSet ProbeSet::make(Index dim_in, Index dim_out,
                        const ProbeSettings& settings) {
  if (dim_in <= 0 || dim_out <= 0) {
    throw ShapeError("ProbeSet: dimensions must be positive");
  }
  GaussianSource rng(settings.seed);
  const int b_in = static_cast<int>(std::min<Index>(dim_in, settings.basis_cap));
  const int b_out =
      static_cast<int>(std::min<Index>(dim_out, settings.basis_cap));
  ProbeSet set;
  set.seed = settings.seed;
  set.phis = probe_pool(rng, dim_in, b_in, settings.n_gauss);
  set.psis = probe_pool(rng, dim_out, b_out, settings.n_gauss);
  for (int i = 0; i < b_in; ++i) {
    for (int j = 0; j < b_out; ++j) set.pairs.emplace_back(i, j);
  }
  for (int g = 0; g < settings.n_gauss; ++g) {
    set.pairs.emplace_back(b_in + g, b_out + g);
  }
  return set;
}

WotReport wot_gap(const Matrix& t1, const Matrix& t2, const ProbeSet& probes,
                  std::string label) {
  if (t1.rows() != t2.rows() || t1.cols() != t2.cols()) {
    throw ShapeError("wot_gap: operator shapes differ");
  }
  WotReport report;
  report.label = std::move(label);
  const Matrix diff = t1 - t2;
  std::vector<Vector> images(probes.phis.size());
  std::vector<bool> have(probes.phis.size(), false);
  report.per_probe_gaps.reserve(probes.pairs.size());
  for (const auto& [pi, qi] : probes.pairs) {
    if (!have[static_cast<std::size_t>(pi)]) {
      images[static_cast<std::size_t>(pi)] =
          diff * probes.phis[static_cast<std::size_t>(pi)];
      have[static_cast<std::size_t>(pi)] = true;
    }
    // <x, psi> with the convention linear in the first slot.
    const Complex pairing = probes.psis[static_cast<std::size_t>(qi)].dot(
        images[static_cast<std::size_t>(pi)]);
    const double gap = std::abs(pairing);
    report.per_probe_gaps.push_back(gap);
    report.sup_gap = std::max(report.sup_gap, gap);
  }
  return report;
}

namespace {

NlhPointReport nlh_point(const SchurQuadruple& q1, const SchurQuadruple& q2,
                         const ProbeSet& on0, const ProbeSet& from1to0,
                         const ProbeSet& from0to1, const ProbeSet& on1,
                         Complex z) {
  NlhPointReport point;
  point.z = z;
  point.components[0] = wot_gap(q1.a, q2.a, on0, "M00^-1");
  point.components[1] = wot_gap(q1.b, q2.b, from1to0, "M00^-1 M01");
  point.components[2] = wot_gap(q1.c, q2.c, from0to1, "M10 M00^-1");
  point.components[3] = wot_gap(q1.d, q2.d, on1, "Schur complement");
  for (const WotReport& component : point.components) {
    point.worst = std::max(point.worst, component.sup_gap);
  }
  return point;
}

struct NlhProbes {
  ProbeSet on0, from1to0, from0to1, on1;
};

NlhProbes make_nlh_probes(const Decomposition& dec,
                          const ProbeSettings& settings) {
  return NlhProbes{ProbeSet::make(dec.dim0(), dec.dim0(), settings),
                   ProbeSet::make(dec.dim1(), dec.dim0(), settings),
                   ProbeSet::make(dec.dim0(), dec.dim1(), settings),
                   ProbeSet::make(dec.dim1(), dec.dim1(), settings)};
}

}  // namespace

NlhReport nlh_gap(const Matrix& m1, const Matrix& m2, const Decomposition& dec,
                  const ProbeSettings& settings) {
  const NlhProbes probes = make_nlh_probes(dec, settings);
  NlhReport report;
  report.points.push_back(nlh_point(schur_components(m1, dec),
                                    schur_components(m2, dec), probes.on0,
                                    probes.from1to0, probes.from0to1,
                                    probes.on1, Complex(0, 0)));
  report.worst_gap = report.points.front().worst;
  return report;
}

NlhReport parameterised_nlh_gap(const MaterialLaw& law1,
                                const MaterialLaw& law2,
                                const Decomposition& dec,
                                const HalfPlaneGrid& grid,
                                const ProbeSettings& settings,
                                bool premultiply_z) {
  const NlhProbes probes = make_nlh_probes(dec, settings);
  const auto traj1 = schur_trajectory(law1, dec, grid, premultiply_z);
  const auto traj2 = schur_trajectory(law2, dec, grid, premultiply_z);
  NlhReport report;
  report.points.reserve(traj1.size());
  for (std::size_t i = 0; i < traj1.size(); ++i) {
    report.points.push_back(nlh_point(traj1[i].second, traj2[i].second,
                                      probes.on0, probes.from1to0,
                                      probes.from0to1, probes.on1,
                                      traj1[i].first));
    report.worst_gap = std::max(report.worst_gap, report.points.back().worst);
  }
  return report;
}

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ShapeError("loglog_slope: need matching abscissas, at least two");
  }
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

std::vector<std::pair<WeightedSignal, WeightedSignal>> time_probe_signals(
    const TimeGrid& grid, Index dim, std::uint64_t seed, int count) {
  grid.validate();
  GaussianSource rng(seed);
  const double window = grid.window();
  const double lead = 8.0 / grid.nu;  // margin before any support
  const double span = window - 2.0 * lead;
  std::vector<std::pair<WeightedSignal, WeightedSignal>> probes;
  probes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector phi = rng.complex_normal_vector(dim);
    phi /= phi.norm();
    Vector psi = rng.complex_normal_vector(dim);
    psi /= psi.norm();
    const bool bump = (i % 2 == 0);
    const double c1 = grid.t0 + lead + span * (0.25 + 0.5 * rng.uniform());
    const double c2 = grid.t0 + lead + span * (0.25 + 0.5 * rng.uniform());
    const double w1 = span * (0.05 + 0.05 * rng.uniform());
    const double w2 = span * (0.05 + 0.05 * rng.uniform());
    Matrix fv(grid.n_steps, dim), gv(grid.n_steps, dim);
    for (Index j = 0; j < grid.n_steps; ++j) {
      const double t = grid.time(j);
      const double ef =
          bump ? gaussian_bump(t, c1, w1)
               : mollified_indicator(t, c1 - w1, c1 + w1, 4.0 * grid.dt);
      const double eg =
          bump ? gaussian_bump(t, c2, w2)
               : mollified_indicator(t, c2 - w2, c2 + w2, 4.0 * grid.dt);
      fv.row(j) = ef * phi.transpose();
      gv.row(j) = eg * psi.transpose();
    }
    probes.emplace_back(WeightedSignal{grid, std::move(fv)},
                        WeightedSignal{grid, std::move(gv)});
  }
  return probes;
}

std::pair<double, double> limit_coercivity_audit(const MaterialLaw& limit_law,
                                                 const HalfPlaneGrid& grid) {
  double coercivity = std::numeric_limits<double>::infinity();
  double inverse_bound = std::numeric_limits<double>::infinity();
  for (Complex z : grid.points()) {
    const Matrix value = limit_law.eval(z);
    coercivity = std::min(coercivity, hermitian_lower_bound(z * value));
    inverse_bound = std::min(
        inverse_bound,
        hermitian_lower_bound(guarded_inverse(value, "limit_coercivity_audit")));
  }
  return {coercivity, inverse_bound};
}

ConvergenceReport solution_convergence_experiment(
    const std::vector<MaterialLaw>& laws, const MaterialLaw& limit_law,
    const Matrix& a_skew, const Decomposition& dec, const HalfPlaneGrid& grid,
    const TimeGrid& time_grid, const ExperimentOptions& opts) {
  if (laws.empty()) throw ConfigError("experiment: no laws supplied");
  const Index dim = limit_law.dim();
  for (const MaterialLaw& law : laws) {
    if (law.dim() != dim) throw ShapeError("experiment: law dimension mismatch");
  }
  ConvergenceReport report;
  report.experiment = opts.label;
  report.thresholds = opts.thresholds;
  report.n_values = opts.n_values;
  if (report.n_values.empty()) {
    for (std::size_t i = 0; i < laws.size(); ++i) {
      report.n_values.push_back(static_cast<double>(i + 1));
    }
  }
  std::vector<double> trend = opts.trend.empty() ? report.n_values : opts.trend;
  if (trend.size() != laws.size() || report.n_values.size() != laws.size()) {
    throw ConfigError("experiment: sequence labels do not match the laws");
  }

  // Shared hypotheses: Re z Mn(z) >= c > 0 and ||Mn(z)|| <= d, with the limit
  // obeying the same norm bound. Analytic Laurent bounds cover the whole
  // half-plane when available; otherwise the grid estimate is used. The
  // inverse-bound sweep runs on the extremal subgrid to stay affordable.
  const HalfPlaneGrid audit_grid = [&grid]() {
    HalfPlaneGrid sub;
    sub.nu = grid.nu;
    const auto [re_min, re_max] = std::minmax_element(grid.re_points.begin(),
                                                      grid.re_points.end());
    sub.re_points = {*re_min, *re_max};
    const auto [im_min, im_max] = std::minmax_element(grid.im_points.begin(),
                                                      grid.im_points.end());
    sub.im_points = {*im_min, 0.0, *im_max};
    std::sort(sub.re_points.begin(), sub.re_points.end());
    sub.re_points.erase(std::unique(sub.re_points.begin(), sub.re_points.end()),
                        sub.re_points.end());
    std::sort(sub.im_points.begin(), sub.im_points.end());
    sub.im_points.erase(std::unique(sub.im_points.begin(), sub.im_points.end()),
                        sub.im_points.end());
    return sub;
  }();
  const double base_re =
      std::min(grid.nu, *std::min_element(grid.re_points.begin(),
                                          grid.re_points.end()));
  report.shared_coercivity = std::numeric_limits<double>::infinity();
  report.shared_sup_norm = 0.0;
  report.shared_inverse_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < laws.size(); ++i) {
    const auto analytic_c = picard_coercivity_analytic(laws[i], base_re);
    const double c_i =
        analytic_c ? *analytic_c : picard_coercivity(laws[i], grid);
    if (!(c_i > 0.0)) {
      std::ostringstream os;
      os << "experiment '" << opts.label << "': certificate "
         << "'picard_coercivity' failed for sequence element " << i
         << "; requires Re zM(z) >= c > 0, measured " << c_i;
      throw WellPosednessError(os.str(), c_i);
    }
    report.shared_coercivity = std::min(report.shared_coercivity, c_i);
    const auto analytic_d = laurent_sup_bound(laws[i], base_re);
    report.shared_sup_norm =
        std::max(report.shared_sup_norm,
                 analytic_d ? *analytic_d
                            : sup_norm_estimate(laws[i], grid).grid_value);
    for (Complex z : audit_grid.points()) {
      report.shared_inverse_bound = std::min(
          report.shared_inverse_bound,
          hermitian_lower_bound(
              guarded_inverse(laws[i].eval(z), "experiment[Mn(z)]")));
    }
  }
  const auto analytic_limit_d = laurent_sup_bound(limit_law, base_re);
  report.shared_sup_norm = std::max(
      report.shared_sup_norm,
      analytic_limit_d ? *analytic_limit_d
                       : sup_norm_estimate(limit_law, grid).grid_value);

  const std::vector<Complex> zs = grid.points();
  const std::size_t n_laws = laws.size();

  // Frequency-domain gaps of (z Mn(z) + A)^-1 against the limit.
  const ProbeSet probes = ProbeSet::make(dim, dim, opts.probes);
  report.freq_gaps.assign(n_laws, std::vector<double>(zs.size(), 0.0));
  parallel_for(static_cast<Index>(zs.size()), opts.workers, [&](Index zi) {
    const Complex z = zs[static_cast<std::size_t>(zi)];
    const Eigen::PartialPivLU<Matrix> lu_limit(z * limit_law.eval(z) + a_skew);
    std::vector<Vector> limit_sols(probes.phis.size());
    for (std::size_t p = 0; p < probes.phis.size(); ++p) {
      limit_sols[p] = lu_limit.solve(probes.phis[p]);
    }
    for (std::size_t i = 0; i < n_laws; ++i) {
      const Eigen::PartialPivLU<Matrix> lu_n(z * laws[i].eval(z) + a_skew);
      std::vector<Vector> diff(probes.phis.size());
      for (std::size_t p = 0; p < probes.phis.size(); ++p) {
        diff[p] = lu_n.solve(probes.phis[p]) - limit_sols[p];
      }
      double worst = 0.0;
      for (const auto& [pi, qi] : probes.pairs) {
        const double gap = std::abs(
            probes.psis[static_cast<std::size_t>(qi)].dot(diff[static_cast<std::size_t>(pi)]));
        worst = std::max(worst, gap);
      }
      report.freq_gaps[i][static_cast<std::size_t>(zi)] = worst;
    }
  });
  report.freq_worst.assign(n_laws, 0.0);
  for (std::size_t i = 0; i < n_laws; ++i) {
    for (double g : report.freq_gaps[i]) {
      report.freq_worst[i] = std::max(report.freq_worst[i], g);
    }
  }

  // Time-domain pairing gaps <(Sn - S) f, g>_nu over probe signals.
  const auto signal_probes =
      time_probe_signals(time_grid, dim, opts.probes.seed, opts.n_time_probes);
  std::vector<WeightedSignal> inputs;
  inputs.reserve(signal_probes.size());
  for (const auto& [f, g] : signal_probes) inputs.push_back(f);
  const EvoSolver limit_solver(limit_law, a_skew, time_grid);
  const std::vector<WeightedSignal> limit_solutions = limit_solver.solve(inputs);
  report.time_gaps.assign(n_laws, 0.0);
  parallel_for(static_cast<Index>(n_laws), opts.workers, [&](Index li) {
    const std::size_t i = static_cast<std::size_t>(li);
    const EvoSolver solver(laws[i], a_skew, time_grid);
    const std::vector<WeightedSignal> solutions = solver.solve(inputs);
    double worst = 0.0;
    for (std::size_t p = 0; p < signal_probes.size(); ++p) {
      WeightedSignal diff = solutions[p];
      diff.values -= limit_solutions[p].values;
      const double fn = weighted_norm(signal_probes[p].first);
      const double gn = weighted_norm(signal_probes[p].second);
      const double gap =
          std::abs(weighted_inner(diff, signal_probes[p].second)) / (fn * gn);
      worst = std::max(worst, gap);
    }
    report.time_gaps[i] = worst;
  });

  report.freq_final = report.freq_worst.back();
  report.time_final = report.time_gaps.back();
  report.freq_slope = loglog_slope(trend, report.freq_worst);
  report.time_slope = loglog_slope(trend, report.time_gaps);

  const auto audit = limit_coercivity_audit(limit_law, audit_grid);
  report.audit_limit_coercivity = audit.first;
  report.audit_limit_inverse_bound = audit.second;
  report.audit_pass =
      audit.first >= report.shared_coercivity - 1e-8 &&
      audit.second >= report.shared_inverse_bound - 1e-8;

  const double freq_max =
      *std::max_element(report.freq_worst.begin(), report.freq_worst.end());
  const double time_max =
      *std::max_element(report.time_gaps.begin(), report.time_gaps.end());
  const bool freq_trend_ok = report.freq_slope < 0.0 || freq_max <= kZeroGap;
  const bool time_trend_ok = report.time_slope < 0.0 || time_max <= kZeroGap;
  report.pass = freq_trend_ok && time_trend_ok &&
                report.freq_final <= opts.thresholds.final_freq_gap &&
                report.time_final <= opts.thresholds.final_time_gap &&
                report.audit_pass;
  return report;
}

}  // namespace evoeq
