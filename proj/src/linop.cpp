#include "evoeq/linop.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace evoeq {

namespace {

Eigen::VectorXd singular_values(const Matrix& t) {
  if (t.rows() == 0 || t.cols() == 0) return Eigen::VectorXd();
  if (std::max(t.rows(), t.cols()) > 64) {
    return Eigen::BDCSVD<Matrix>(t).singularValues();
  }
  return Eigen::JacobiSVD<Matrix>(t).singularValues();
}

void require_square(const Matrix& t, const char* who) {
  if (t.rows() != t.cols()) {
    std::ostringstream os;
    os << who << ": expected a square operator, got " << t.rows() << "x"
       << t.cols();
    throw ShapeError(os.str());
  }
}

void require_size(const Matrix& m, Index rows, Index cols, const char* who) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << who << ": expected " << rows << "x" << cols << ", got " << m.rows()
       << "x" << m.cols();
    throw ShapeError(os.str());
  }
}

}  // namespace

bool all_finite(const Matrix& m) {
  return m.array().isFinite().all();
}

double operator_norm(const Matrix& t) {
  if (t.size() == 0) return 0.0;
  if (std::max(t.rows(), t.cols()) > 64) {
    // sqrt(lambda_max(T^H T)) keeps full relative accuracy for the largest
    // singular value and beats a full SVD at these sizes.
    const Matrix gram = t.adjoint() * t;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return singular_values(t)(0);
}

double reciprocal_condition(const Matrix& t) {
  if (t.size() == 0) return 1.0;
  const Eigen::VectorXd sv = singular_values(t);
  const double smax = sv(0);
  if (smax == 0.0) return 0.0;
  return sv(sv.size() - 1) / smax;
}

Matrix hermitian_part(const Matrix& t) {
  require_square(t, "hermitian_part");
  return 0.5 * (t + t.adjoint());
}

double hermitian_lower_bound(const Matrix& t) {
  require_square(t, "hermitian_lower_bound");
  if (t.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(t),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix guarded_inverse(const Matrix& t, const char* who,
                       double rcond_threshold) {
  require_square(t, who);
  if (t.rows() == 0) return t;
  const Eigen::FullPivLU<Matrix> lu(t);
  const double rcond = lu.rcond();
  if (!(rcond >= rcond_threshold)) {
    std::ostringstream os;
    os << who << ": block numerically singular, rcond = " << rcond;
    throw SingularBlockError(os.str(), rcond);
  }
  return lu.inverse();
}

Matrix invert_accretive(const Matrix& t, double c) {
  require_square(t, "invert_accretive");
  const double measured = hermitian_lower_bound(t);
  if (!(c > 0.0) || measured < c - kBoundSlack) {
    std::ostringstream os;
    os << "invert_accretive: requires Re T >= c with c = " << c
       << " > 0, measured lower bound " << measured;
    throw AccretivityError(os.str(), measured);
  }
  const Matrix inv = Eigen::FullPivLU<Matrix>(t).inverse();
  const double inv_norm = operator_norm(inv);
  if (inv_norm > 1.0 / c + kBoundSlack) {
    std::ostringstream os;
    os << "invert_accretive: ||T^-1|| = " << inv_norm
       << " exceeds 1/c = " << 1.0 / c;
    throw InternalConsistencyError(os.str());
  }
  const double norm_t = operator_norm(t);
  const double inv_lb = hermitian_lower_bound(inv);
  if (inv_lb < c / (norm_t * norm_t) - kBoundSlack) {
    std::ostringstream os;
    os << "invert_accretive: Re T^-1 lower bound " << inv_lb
       << " is below c ||T||^-2 = " << c / (norm_t * norm_t);
    throw InternalConsistencyError(os.str());
  }
  return inv;
}

Decomposition::Decomposition(Matrix basis0, Matrix basis1)
    : basis0_(std::move(basis0)), basis1_(std::move(basis1)) {
  if (basis0_.rows() != basis1_.rows()) {
    throw ShapeError("Decomposition: bases live in different spaces");
  }
  if (basis0_.cols() + basis1_.cols() != basis0_.rows()) {
    std::ostringstream os;
    os << "Decomposition: split not exhaustive, " << basis0_.cols() << " + "
       << basis1_.cols() << " != " << basis0_.rows();
    throw ShapeError(os.str());
  }
  constexpr double tol = 1e-12;
  const auto gram_defect = [](const Matrix& b) {
    return (b.adjoint() * b - Matrix::Identity(b.cols(), b.cols()))
        .cwiseAbs()
        .maxCoeff();
  };
  const double d0 = basis0_.cols() ? gram_defect(basis0_) : 0.0;
  const double d1 = basis1_.cols() ? gram_defect(basis1_) : 0.0;
  const double cross = (basis0_.cols() && basis1_.cols())
                           ? (basis0_.adjoint() * basis1_).cwiseAbs().maxCoeff()
                           : 0.0;
  if (d0 > tol || d1 > tol || cross > tol) {
    std::ostringstream os;
    os << "Decomposition: bases not orthonormal (defects " << d0 << ", " << d1
       << ", cross " << cross << ")";
    throw StructureError(os.str());
  }
}

Decomposition Decomposition::coordinate_split(Index d0, Index d1) {
  Matrix id = Matrix::Identity(d0 + d1, d0 + d1);
  return Decomposition(id.leftCols(d0), id.rightCols(d1));
}

Decomposition Decomposition::from_skew_kernel(const Matrix& a_skew,
                                              double sv_threshold) {
  require_square(a_skew, "Decomposition::from_skew_kernel");
  const double skewness = operator_norm(a_skew + a_skew.adjoint());
  if (skewness > 1e-12 * std::max(1.0, operator_norm(a_skew))) {
    std::ostringstream os;
    os << "from_skew_kernel: operator not skew-selfadjoint, ||A + A^H|| = "
       << skewness;
    throw StructureError(os.str());
  }
  // For a normal operator the right singular subspaces per singular value
  // coincide with the left ones, so splitting V alone yields ker (+) ran.
  Eigen::VectorXd sv;
  Matrix v;
  if (a_skew.rows() > 64) {
    Eigen::BDCSVD<Matrix> svd(a_skew, Eigen::ComputeFullV);
    sv = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Matrix> svd(a_skew, Eigen::ComputeFullV);
    sv = svd.singularValues();
    v = svd.matrixV();
  }
  const double cutoff = sv.size() ? sv(0) * sv_threshold : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return Decomposition(v.rightCols(v.cols() - rank), v.leftCols(rank));
}

BlockSplit block_split(const Matrix& m, const Decomposition& dec) {
  require_size(m, dec.total_dim(), dec.total_dim(), "block_split");
  const Matrix& b0 = dec.basis0();
  const Matrix& b1 = dec.basis1();
  return BlockSplit{b0.adjoint() * m * b0, b0.adjoint() * m * b1,
                    b1.adjoint() * m * b0, b1.adjoint() * m * b1};
}

Matrix block_assemble(const BlockSplit& blocks, const Decomposition& dec) {
  require_size(blocks.m00, dec.dim0(), dec.dim0(), "block_assemble[00]");
  require_size(blocks.m01, dec.dim0(), dec.dim1(), "block_assemble[01]");
  require_size(blocks.m10, dec.dim1(), dec.dim0(), "block_assemble[10]");
  require_size(blocks.m11, dec.dim1(), dec.dim1(), "block_assemble[11]");
  const Matrix& b0 = dec.basis0();
  const Matrix& b1 = dec.basis1();
  return b0 * blocks.m00 * b0.adjoint() + b0 * blocks.m01 * b1.adjoint() +
         b1 * blocks.m10 * b0.adjoint() + b1 * blocks.m11 * b1.adjoint();
}

SchurQuadruple schur_components(const Matrix& m, const Decomposition& dec) {
  const BlockSplit blocks = block_split(m, dec);
  const Matrix m00_inv = guarded_inverse(blocks.m00, "schur_components[M00]");
  return SchurQuadruple{m00_inv, m00_inv * blocks.m01, blocks.m10 * m00_inv,
                        blocks.m11 - blocks.m10 * m00_inv * blocks.m01};
}

Matrix schur_reconstruct(const SchurQuadruple& q, const Decomposition& dec) {
  const Matrix a_inv = guarded_inverse(q.a, "schur_reconstruct[a]");
  BlockSplit blocks;
  blocks.m00 = a_inv;
  blocks.m01 = a_inv * q.b;
  blocks.m10 = q.c * a_inv;
  blocks.m11 = q.d + q.c * a_inv * q.b;
  return block_assemble(blocks, dec);
}

AlphaBounds alpha_fit(const Matrix& m, const Decomposition& dec) {
  const BlockSplit blocks = block_split(m, dec);
  const double rcond_m = reciprocal_condition(m);
  if (rcond_m < kRcondThreshold) {
    throw MembershipError("alpha_fit: M itself is numerically singular",
                          "M^-1 bounded");
  }
  Matrix m00_inv;
  try {
    m00_inv = guarded_inverse(blocks.m00, "alpha_fit[M00]");
  } catch (const SingularBlockError&) {
    throw MembershipError("alpha_fit: M00 is numerically singular",
                          "M00^-1 bounded");
  }
  const Matrix schur = blocks.m11 - blocks.m10 * m00_inv * blocks.m01;

  const double lb_m00 = hermitian_lower_bound(blocks.m00);
  if (lb_m00 <= 0.0) {
    throw MembershipError("alpha_fit: Re M00 has no positive lower bound",
                          "Re M00 >= a00");
  }
  const double lb_schur = hermitian_lower_bound(schur);
  if (lb_schur <= 0.0) {
    throw MembershipError(
        "alpha_fit: Re (M11 - M10 M00^-1 M01) has no positive lower bound",
        "Re Schur >= a00");
  }
  const double lb_m00_inv = hermitian_lower_bound(m00_inv);
  if (lb_m00_inv <= 0.0) {
    throw MembershipError("alpha_fit: Re M00^-1 has no positive lower bound",
                          "Re M00^-1 >= 1/a11");
  }
  Matrix schur_inv;
  try {
    schur_inv = guarded_inverse(schur, "alpha_fit[Schur]");
  } catch (const SingularBlockError&) {
    throw MembershipError("alpha_fit: Schur complement numerically singular",
                          "Re Schur^-1 >= 1/a11");
  }
  const double lb_schur_inv = hermitian_lower_bound(schur_inv);
  if (lb_schur_inv <= 0.0) {
    throw MembershipError(
        "alpha_fit: Re (M11 - M10 M00^-1 M01)^-1 has no positive lower bound",
        "Re Schur^-1 >= 1/a11");
  }

  AlphaBounds alpha;
  alpha.a00 = std::min(lb_m00, lb_schur);
  alpha.a11 = 1.0 / std::min(lb_m00_inv, lb_schur_inv);
  alpha.a10 = operator_norm(blocks.m10 * m00_inv);
  alpha.a01 = operator_norm(m00_inv * blocks.m01);
  return alpha;
}

std::pair<double, double> schur_positivity_inherit(const Matrix& t,
                                                   const Decomposition& dec,
                                                   double d) {
  const double measured = hermitian_lower_bound(t);
  if (!(d > 0.0) || measured < d - kBoundSlack) {
    std::ostringstream os;
    os << "schur_positivity_inherit: requires Re T >= d = " << d
       << " > 0, measured " << measured;
    throw AccretivityError(os.str(), measured);
  }
  const BlockSplit blocks = block_split(t, dec);
  const double lb_t11 = hermitian_lower_bound(blocks.m11);
  const Matrix t11_inv = invert_accretive(blocks.m11, lb_t11);
  const Matrix corner = blocks.m00 - blocks.m01 * t11_inv * blocks.m10;
  return {lb_t11, hermitian_lower_bound(corner)};
}

Matrix perturbed_block_inverse(const Matrix& t, const Matrix& a_skew,
                               const Decomposition& dec) {
  require_size(t, dec.total_dim(), dec.total_dim(), "perturbed_block_inverse");
  require_size(a_skew, dec.total_dim(), dec.total_dim(),
               "perturbed_block_inverse[A]");
  const double scale = std::max(1.0, operator_norm(a_skew));
  const double skewness = operator_norm(a_skew + a_skew.adjoint());
  if (skewness > 1e-12 * scale) {
    std::ostringstream os;
    os << "perturbed_block_inverse: A not skew-selfadjoint, ||A + A^H|| = "
       << skewness;
    throw StructureError(os.str());
  }
  const Matrix p0 = dec.projector0();
  const double kernel_defect = std::max(operator_norm(p0 * a_skew),
                                        operator_norm(a_skew * p0));
  if (kernel_defect > 1e-12 * scale) {
    std::ostringstream os;
    os << "perturbed_block_inverse: A does not vanish on H0, defect = "
       << kernel_defect;
    throw StructureError(os.str());
  }

  const BlockSplit blocks = block_split(t, dec);
  const Matrix t00_inv =
      guarded_inverse(blocks.m00, "perturbed_block_inverse[T00]");
  const Matrix schur = blocks.m11 - blocks.m10 * t00_inv * blocks.m01;
  const double c = hermitian_lower_bound(schur);
  if (c <= 0.0) {
    std::ostringstream os;
    os << "perturbed_block_inverse: requires Re (T11 - T10 T00^-1 T01) = c > "
          "0, measured "
       << c;
    throw AccretivityError(os.str(), c);
  }
  const Matrix a_tilde = dec.basis1().adjoint() * a_skew * dec.basis1();
  const Matrix ta = schur + a_tilde;
  const Matrix ta_inv = Eigen::FullPivLU<Matrix>(ta).inverse();

  const double ta_inv_norm = operator_norm(ta_inv);
  if (ta_inv_norm > 1.0 / c + kBoundSlack) {
    std::ostringstream os;
    os << "perturbed_block_inverse: ||TA^-1|| = " << ta_inv_norm
       << " exceeds 1/c = " << 1.0 / c;
    throw InternalConsistencyError(os.str());
  }
  const double graph_norm = operator_norm(a_tilde * ta_inv);
  const double graph_bound = 1.0 + operator_norm(schur) / c;
  if (graph_norm > graph_bound + kBoundSlack) {
    std::ostringstream os;
    os << "perturbed_block_inverse: ||A~ TA^-1|| = " << graph_norm
       << " exceeds 1 + ||Schur||/c = " << graph_bound;
    throw InternalConsistencyError(os.str());
  }

  BlockSplit inv;
  const Matrix t01_ta_inv = t00_inv * blocks.m01 * ta_inv;
  const Matrix ta_inv_t10 = ta_inv * blocks.m10 * t00_inv;
  inv.m00 = t00_inv + t01_ta_inv * blocks.m10 * t00_inv;
  inv.m01 = -t01_ta_inv;
  inv.m10 = -ta_inv_t10;
  inv.m11 = ta_inv;
  return block_assemble(inv, dec);
}

}  // namespace evoeq
