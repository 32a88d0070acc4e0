#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evoeq/matlaw.hpp"
#include "evoeq/spectral.hpp"

namespace evoeq {

struct ProbeSettings {
  std::uint64_t seed = 42;
  int n_gauss = 32;
  int basis_cap = 16;
};

/// Deterministic probe family for weak-operator gaps: all canonical basis
/// pairs up to basis_cap plus unit-normalised complex Gaussian pairs.
struct ProbeSet {
  std::uint64_t seed = 0;
  std::vector<Vector> phis;  // domain-side pool, unit vectors
  std::vector<Vector> psis;  // codomain-side pool, unit vectors
  std::vector<std::pair<int, int>> pairs;

  static ProbeSet make(Index dim_in, Index dim_out,
                       const ProbeSettings& settings = {});
};

struct WotReport {
  std::vector<double> per_probe_gaps;
  double sup_gap = 0.0;
  std::string label;
};

/// Pairing gaps |<(T1 - T2) phi, psi>| over the probe set.
WotReport wot_gap(const Matrix& t1, const Matrix& t2, const ProbeSet& probes,
                  std::string label = "");

struct NlhPointReport {
  Complex z;
  std::array<WotReport, 4> components;  // a, b, c, d Schur components
  double worst = 0.0;
};

struct NlhReport {
  std::vector<NlhPointReport> points;
  double worst_gap = 0.0;
};

/// Weak-operator gaps of the four Schur components of m1 vs m2.
NlhReport nlh_gap(const Matrix& m1, const Matrix& m2, const Decomposition& dec,
                  const ProbeSettings& settings = {});

/// nlh_gap of law1(z) vs law2(z) (optionally z-premultiplied) at every grid
/// point; the worst gap realises pointwise parameterised convergence.
NlhReport parameterised_nlh_gap(const MaterialLaw& law1,
                                const MaterialLaw& law2,
                                const Decomposition& dec,
                                const HalfPlaneGrid& grid,
                                const ProbeSettings& settings = {},
                                bool premultiply_z = false);

/// Least-squares slope of log(y) against log(x); y values are floored at
/// 1e-300 to keep identically-zero curves finite.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExperimentThresholds {
  double final_freq_gap = 1e-3;
  double final_time_gap = 1e-3;
};

struct ExperimentOptions {
  std::string label = "experiment";
  /// Display labels of the sequence elements (n or r values).
  std::vector<double> n_values;
  /// Trend abscissas for the slope fit (n, or 1/r for r-indexed families).
  std::vector<double> trend;
  ProbeSettings probes;
  ExperimentThresholds thresholds;
  int workers = 1;
  int n_time_probes = 8;
};

struct ConvergenceReport {
  std::string experiment;
  std::vector<double> n_values;
  std::vector<std::vector<double>> freq_gaps;  // per n, per grid point
  std::vector<double> freq_worst;              // per n
  std::vector<double> time_gaps;               // per n
  double freq_slope = 0.0;
  double time_slope = 0.0;
  double freq_final = 0.0;
  double time_final = 0.0;
  double shared_coercivity = 0.0;   // min_n min_z lambda_min Re z Mn(z)
  double shared_sup_norm = 0.0;     // max_n max_z ||Mn(z)|| (and the limit)
  double shared_inverse_bound = 0.0;  // min_n min_z lambda_min Re Mn(z)^-1
  double audit_limit_coercivity = 0.0;
  double audit_limit_inverse_bound = 0.0;
  bool audit_pass = false;
  ExperimentThresholds thresholds;
  bool pass = false;
  std::map<std::string, std::vector<double>> extras;
};

/// End-to-end convergence experiment: verifies the shared coercivity and
/// boundedness hypotheses, then reports per-n frequency-domain gaps of
/// (z Mn(z) + A)^-1 against the limit and time-domain solution pairing gaps,
/// with log-log trend fits against the stated thresholds.
ConvergenceReport solution_convergence_experiment(
    const std::vector<MaterialLaw>& laws, const MaterialLaw& limit_law,
    const Matrix& a_skew, const Decomposition& dec, const HalfPlaneGrid& grid,
    const TimeGrid& time_grid, const ExperimentOptions& opts);

/// (min_z lambda_min Re(z M(z)), min_z lambda_min Re M(z)^-1) of a limit law,
/// the two quantities a weak-operator limit must inherit from its sequence.
std::pair<double, double> limit_coercivity_audit(const MaterialLaw& limit_law,
                                                 const HalfPlaneGrid& grid);

/// Deterministic time-domain probe signals: Gaussian bumps and mollified
/// indicators tensored with unit spatial vectors.
std::vector<std::pair<WeightedSignal, WeightedSignal>> time_probe_signals(
    const TimeGrid& grid, Index dim, std::uint64_t seed, int count);

}  // namespace evoeq
