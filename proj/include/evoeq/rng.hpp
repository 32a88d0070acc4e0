#pragma once

#include <cstdint>
#include <random>

#include "evoeq/linop.hpp"

namespace evoeq {

/// Deterministic Gaussian source. Box-Muller over mt19937_64 keeps the
/// stream identical across platforms and standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53-bit mantissa in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Complex complex_normal() { return Complex(normal(), normal()); }

  Vector complex_normal_vector(Index dim) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = complex_normal();
    return v;
  }

  Matrix complex_normal_matrix(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) m(i, j) = complex_normal();
    }
    return m;
  }

  /// Random operator with hermitian part shifted so that
  /// hermitian_lower_bound(result) == c exactly (to rounding).
  Matrix accretive_matrix(Index dim, double c) {
    Matrix t = complex_normal_matrix(dim, dim);
    const double lb = hermitian_lower_bound(t);
    t += (c - lb) * Matrix::Identity(dim, dim);
    return t;
  }

  /// Random skew-selfadjoint operator.
  Matrix skew_matrix(Index dim) {
    const Matrix g = complex_normal_matrix(dim, dim);
    return 0.5 * (g - g.adjoint());
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace evoeq
