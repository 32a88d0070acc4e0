#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "evoeq/errors.hpp"

namespace evoeq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Reciprocal-condition-number threshold below which a block counts as
/// numerically singular.
inline constexpr double kRcondThreshold = 1e-12;

/// Tolerance used when asserting the bounds an accretive inverse must obey.
inline constexpr double kBoundSlack = 1e-9;

bool all_finite(const Matrix& m);

/// Largest singular value.
double operator_norm(const Matrix& t);

/// sigma_min / sigma_max; 0 for the zero matrix.
double reciprocal_condition(const Matrix& t);

Matrix hermitian_part(const Matrix& t);

/// Largest c with Re<T phi, phi> >= c ||phi||^2, i.e. lambda_min of the
/// hermitian part. Throws ShapeError for non-square input.
double hermitian_lower_bound(const Matrix& t);

/// Dense inverse guarded by the reciprocal-condition threshold.
Matrix guarded_inverse(const Matrix& t, const char* who,
                       double rcond_threshold = kRcondThreshold);

/// Inverse of an operator with Re T >= c > 0. Verifies ||T^-1|| <= 1/c and
/// Re T^-1 >= c ||T||^-2 before returning.
Matrix invert_accretive(const Matrix& t, double c);

/// Orthogonal split H = H0 (+) H1 carried as explicit orthonormal bases.
class Decomposition {
 public:
  Decomposition(Matrix basis0, Matrix basis1);

  const Matrix& basis0() const { return basis0_; }
  const Matrix& basis1() const { return basis1_; }
  Index total_dim() const { return basis0_.rows(); }
  Index dim0() const { return basis0_.cols(); }
  Index dim1() const { return basis1_.cols(); }

  Matrix projector0() const { return basis0_ * basis0_.adjoint(); }
  Matrix projector1() const { return basis1_ * basis1_.adjoint(); }

  /// First d0 coordinates against the rest.
  static Decomposition coordinate_split(Index d0, Index d1);

  /// ker A (+) ran A of a skew-selfadjoint operator, split by singular
  /// values at sv_threshold * sigma_max.
  static Decomposition from_skew_kernel(const Matrix& a_skew,
                                        double sv_threshold = 1e-10);

 private:
  Matrix basis0_, basis1_;
};

struct BlockSplit {
  Matrix m00, m01, m10, m11;
};

/// m_ij = basis_i^H m basis_j.
BlockSplit block_split(const Matrix& m, const Decomposition& dec);

/// Inverse of block_split.
Matrix block_assemble(const BlockSplit& blocks, const Decomposition& dec);

/// The four Schur components of an operator in M(H0, H1):
///   a = M00^-1, b = M00^-1 M01, c = M10 M00^-1, d = M11 - M10 M00^-1 M01.
struct SchurQuadruple {
  Matrix a;  // on H0
  Matrix b;  // H1 -> H0
  Matrix c;  // H0 -> H1
  Matrix d;  // on H1
};

SchurQuadruple schur_components(const Matrix& m, const Decomposition& dec);

/// Unique M with schur_components(M) = q, assembled from the block formula
///   [ a^-1        a^-1 b          ]
///   [ c a^-1      d + c a^-1 b    ].
Matrix schur_reconstruct(const SchurQuadruple& q, const Decomposition& dec);

/// Componentwise bounds certifying membership in the alpha-class:
///   Re M00 >= a00, Re Schur >= a00, Re M00^-1 >= 1/a11, Re Schur^-1 >= 1/a11,
///   ||M10 M00^-1|| <= a10, ||M00^-1 M01|| <= a01.
struct AlphaBounds {
  double a00, a01, a10, a11;

  /// True if these bounds also certify `other` up to `slack`.
  bool covers(const AlphaBounds& other, double slack) const {
    return other.a00 >= a00 - slack && other.a11 <= a11 + slack &&
           other.a01 <= a01 + slack && other.a10 <= a10 + slack;
  }
};

/// Tightest alpha certifying m; throws MembershipError when any of the
/// accretivity conditions fails.
AlphaBounds alpha_fit(const Matrix& m, const Decomposition& dec);

/// For Re T >= d > 0 returns (lambda_min Re T11,
/// lambda_min Re (T00 - T01 T11^-1 T10)); both inherit the bound d.
std::pair<double, double> schur_positivity_inherit(const Matrix& t,
                                                   const Decomposition& dec,
                                                   double d);

/// (T + A)^-1 assembled blockwise for skew-selfadjoint A vanishing on H0:
///   [ T00^-1 + T00^-1 T01 TA^-1 T10 T00^-1   -T00^-1 T01 TA^-1 ]
///   [ -TA^-1 T10 T00^-1                       TA^-1            ]
/// with TA = T11 - T10 T00^-1 T01 + A~. Verifies ||TA^-1|| <= 1/c and
/// ||A~ TA^-1|| <= 1 + ||T11 - T10 T00^-1 T01|| / c.
Matrix perturbed_block_inverse(const Matrix& t, const Matrix& a_skew,
                               const Decomposition& dec);

}  // namespace evoeq
