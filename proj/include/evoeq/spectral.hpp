#pragma once

#include <optional>
#include <vector>

#include "evoeq/matlaw.hpp"

namespace evoeq {

/// Uniform grid modelling the exponentially weighted space L^2_nu(R; H).
/// The window [t0, t0 + n_steps*dt] must satisfy nu * window >= 16 so that
/// circular wraparound stays below the causality tolerances.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0 / 32.0;
  Index n_steps = 1024;
  double nu = 1.0;

  void validate() const;
  double time(Index j) const { return t0 + dt * static_cast<double>(j); }
  double window() const { return dt * static_cast<double>(n_steps); }
  /// Signed frequency index of FFT bin j.
  Index freq_index(Index j) const { return j < n_steps / 2 ? j : j - n_steps; }
  /// xi_k = 2 pi k / (n dt) for the signed index of bin j.
  double xi(Index j) const;
  bool operator==(const TimeGrid&) const = default;
};

/// H-valued samples on a TimeGrid; row j holds the value at time t_j.
struct WeightedSignal {
  TimeGrid grid;
  Matrix values;  // n_steps x dim

  Index dim() const { return values.cols(); }
  void validate() const;
};

/// Frequency-domain samples; row j corresponds to FFT bin j (signed index
/// grid.freq_index(j)).
struct SpectralSignal {
  TimeGrid grid;
  Matrix values;  // n_steps x dim

  Index dim() const { return values.cols(); }
};

double weighted_norm(const WeightedSignal& f);
Complex weighted_inner(const WeightedSignal& f, const WeightedSignal& g);
double spectral_norm(const SpectralSignal& f);

/// Unitary Fourier-Laplace transform: damp by exp(-nu t), apply the
/// normalised DFT with the 1/sqrt(2 pi) continuum weights absorbed into the
/// grid measure. Preserves the weighted norm.
SpectralSignal fourier_laplace(const WeightedSignal& f);
WeightedSignal fourier_laplace_inverse(const SpectralSignal& f);

/// Energy fraction carried by the top frequency octave |xi| >= xi_max / 2.
double band_limit_fraction(const WeightedSignal& f);

/// Threshold for the aliasing precondition of td_apply.
inline constexpr double kBandLimitTolerance = 1e-6;

/// Time derivative: multiplication by (i xi_k + nu) in the transformed
/// domain. Requires the band-limit check to pass.
WeightedSignal td_apply(const WeightedSignal& f);

/// Exact inverse of td_apply: division by (i xi_k + nu). The weighted
/// operator norm of this map is at most 1/nu.
WeightedSignal td_inverse(const WeightedSignal& f);

/// Running trapezoidal integral from the grid start; time-domain oracle for
/// td_inverse, O(dt^2) accurate on smooth signals vanishing near t0.
WeightedSignal cumulative_integral(const WeightedSignal& f);

/// Functional calculus M(d/dt): multiply frequency slice k by
/// M(i xi_k + nu). Requires grid.nu > law.nu0.
WeightedSignal matlaw_apply(const MaterialLaw& law, const WeightedSignal& f);

/// ||U restricted to t < a||_nu / ||U||_nu; 0 when U vanishes.
double causality_defect(const WeightedSignal& u, double a);

/// Picard solution operator (d/dt M(d/dt) + A)^-1 realised per frequency:
/// solve (z_k M(z_k) + A) u_k = f_k with z_k = i xi_k + nu.
class EvoSolver {
 public:
  enum class Path {
    kLu,            // dense LU with partial pivoting per frequency
    kBlockFormula,  // Schur-block inverse for A vanishing on H0
  };

  EvoSolver(MaterialLaw law, Matrix a_skew, TimeGrid grid,
            Path path = Path::kLu,
            std::optional<Decomposition> dec = std::nullopt);

  /// min over solve frequencies of lambda_min Re(z_k M(z_k)).
  double coercivity() const { return coercivity_; }
  const TimeGrid& grid() const { return grid_; }

  WeightedSignal solve(const WeightedSignal& f) const;
  /// Shares the per-frequency factorisations across all right-hand sides.
  std::vector<WeightedSignal> solve(const std::vector<WeightedSignal>& fs) const;

 private:
  MaterialLaw law_;
  Matrix a_skew_;
  TimeGrid grid_;
  Path path_;
  std::optional<Decomposition> dec_;
  double coercivity_ = 0.0;
  bool real_structure_ = false;  // M(conj z) = conj(M(z)) and A real
};

/// One-shot convenience wrapper around EvoSolver.
WeightedSignal evo_solve(const MaterialLaw& law, const Matrix& a_skew,
                         const TimeGrid& grid, const WeightedSignal& f);

/// Smooth test-signal envelopes used throughout the experiments.
double gaussian_bump(double t, double center, double width);
/// Indicator of [a, b] mollified at scale `ramp` (C^1 smoothstep edges).
double mollified_indicator(double t, double a, double b, double ramp);

}  // namespace evoeq
