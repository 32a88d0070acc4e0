#pragma once

// Test-only oracles, independent of the library code paths they check.

#include <Eigen/Dense>
#include <complex>

#include "evoeq/spectral.hpp"

namespace evoeq::oracle {

/// Dense inverse through partial-pivot LU (the library uses full pivoting).
inline Matrix lu_inverse(const Matrix& t) {
  return Eigen::PartialPivLU<Matrix>(t).inverse();
}

/// Central finite difference of a matrix family.
template <typename F>
Matrix central_difference(F&& f, Complex z, double h) {
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

/// Crank-Nicolson march for du/dt + A u = f with u(t0) = 0, `refine` steps
/// per grid step, sampled back onto the grid.
inline WeightedSignal crank_nicolson(const Matrix& a_skew,
                                     const WeightedSignal& f, int refine) {
  const TimeGrid& grid = f.grid;
  const Index dim = f.dim();
  const double dt = grid.dt / refine;
  const Matrix id = Matrix::Identity(dim, dim);
  const Eigen::PartialPivLU<Matrix> lhs(id + 0.5 * dt * a_skew);
  const Matrix rhs = id - 0.5 * dt * a_skew;

  // Linear interpolation of f between grid samples.
  const auto f_at = [&](double t) -> Vector {
    const double s = (t - grid.t0) / grid.dt;
    const Index j0 = std::max<Index>(
        0, std::min<Index>(grid.n_steps - 2, static_cast<Index>(s)));
    const double w = s - static_cast<double>(j0);
    return ((1.0 - w) * f.values.row(j0) + w * f.values.row(j0 + 1))
        .transpose();
  };

  WeightedSignal u{grid, Matrix::Zero(grid.n_steps, dim)};
  Vector state = Vector::Zero(dim);
  double t = grid.t0;
  for (Index j = 1; j < grid.n_steps; ++j) {
    for (int k = 0; k < refine; ++k) {
      const Vector mid = 0.5 * (f_at(t) + f_at(t + dt));
      state = lhs.solve(rhs * state + dt * mid);
      t += dt;
    }
    u.values.row(j) = state.transpose();
  }
  return u;
}

/// Harmonic mean, the 1-D homogenised limit of an alternating pair.
inline double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace evoeq::oracle
