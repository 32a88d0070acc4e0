#include "evoeq/linop.hpp"

#include "doctest.h"
#include "evoeq/rng.hpp"
#include "oracles.hpp"

using namespace evoeq;

namespace {

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("hermitian_lower_bound on the stated instances") {
  Matrix one(1, 1);
  one << 2.0;
  CHECK(hermitian_lower_bound(one) == doctest::Approx(2.0));
  CHECK(hermitian_lower_bound(Matrix::Identity(5, 5)) == doctest::Approx(1.0));
  // Hermitian part of [[2,1],[0,2]] is [[2,.5],[.5,2]] with eigenvalues 2 +- .5.
  CHECK(hermitian_lower_bound(mat2(2, 1, 0, 2)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(hermitian_lower_bound(Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("invert_accretive obeys both inverse bounds") {
  Matrix one(1, 1);
  one << 2.0;
  CHECK(invert_accretive(one, 2.0)(0, 0).real() == doctest::Approx(0.5));
  CHECK((invert_accretive(Matrix::Identity(3, 3), 1.0) -
         Matrix::Identity(3, 3))
            .norm() < 1e-14);

  GaussianSource rng(11);
  const Matrix t = rng.accretive_matrix(8, 0.7);
  const Matrix inv = invert_accretive(t, 0.7);
  CHECK((inv - oracle::lu_inverse(t)).norm() / oracle::lu_inverse(t).norm() <
        1e-10);
  CHECK(operator_norm(inv) <= 1.0 / 0.7 + 1e-9);
  const double nt = operator_norm(t);
  CHECK(hermitian_lower_bound(inv) >= 0.7 / (nt * nt) - 1e-9);

  const Matrix bad = mat2(0, 0, 0, -1);
  CHECK_THROWS_AS(invert_accretive(bad, 0.5), AccretivityError);
}

TEST_CASE("block_split and reassembly") {
  const Decomposition dec = Decomposition::coordinate_split(1, 1);
  SUBCASE("identity splits into identities") {
    const BlockSplit b = block_split(Matrix::Identity(2, 2), dec);
    CHECK(b.m00(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(b.m01(0, 0)) == doctest::Approx(0.0));
    CHECK(std::abs(b.m10(0, 0)) == doctest::Approx(0.0));
    CHECK(b.m11(0, 0).real() == doctest::Approx(1.0));
  }
  SUBCASE("coordinate split reads off the entries") {
    const BlockSplit b = block_split(mat2(2, 1, 1, 2), dec);
    CHECK(b.m00(0, 0).real() == doctest::Approx(2.0));
    CHECK(b.m01(0, 0).real() == doctest::Approx(1.0));
    CHECK(b.m10(0, 0).real() == doctest::Approx(1.0));
    CHECK(b.m11(0, 0).real() == doctest::Approx(2.0));
  }
  SUBCASE("projector onto H0 splits to (I, 0, 0, 0)") {
    GaussianSource rng(3);
    const Matrix g = rng.complex_normal_matrix(5, 5);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    const Decomposition rdec(q.leftCols(2), q.rightCols(3));
    const BlockSplit b = block_split(rdec.projector0(), rdec);
    CHECK((b.m00 - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK(b.m01.norm() < 1e-12);
    CHECK(b.m10.norm() < 1e-12);
    CHECK(b.m11.norm() < 1e-12);
  }
  SUBCASE("roundtrip is exact") {
    GaussianSource rng(4);
    const Matrix m = rng.complex_normal_matrix(7, 7);
    const Matrix g = rng.complex_normal_matrix(7, 7);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    const Decomposition rdec(q.leftCols(3), q.rightCols(4));
    CHECK((block_assemble(block_split(m, rdec), rdec) - m).cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("schur_components on the stated instances") {
  const Decomposition dec = Decomposition::coordinate_split(1, 1);
  SUBCASE("identity") {
    const SchurQuadruple q = schur_components(Matrix::Identity(2, 2), dec);
    CHECK(q.a(0, 0).real() == doctest::Approx(1.0));
    CHECK(std::abs(q.b(0, 0)) < 1e-15);
    CHECK(std::abs(q.c(0, 0)) < 1e-15);
    CHECK(q.d(0, 0).real() == doctest::Approx(1.0));
  }
  SUBCASE("coupled 2x2") {
    const SchurQuadruple q = schur_components(mat2(2, 1, 1, 2), dec);
    CHECK(q.a(0, 0).real() == doctest::Approx(0.5));
    CHECK(q.b(0, 0).real() == doctest::Approx(0.5));
    CHECK(q.c(0, 0).real() == doctest::Approx(0.5));
    CHECK(q.d(0, 0).real() == doctest::Approx(1.5));
  }
  SUBCASE("diagonal") {
    const SchurQuadruple q = schur_components(mat2(2, 0, 0, 3), dec);
    CHECK(q.a(0, 0).real() == doctest::Approx(0.5));
    CHECK(std::abs(q.b(0, 0)) < 1e-15);
    CHECK(std::abs(q.c(0, 0)) < 1e-15);
    CHECK(q.d(0, 0).real() == doctest::Approx(3.0));
  }
  SUBCASE("singular M00 is rejected with the condition estimate") {
    CHECK_THROWS_AS(schur_components(mat2(0, 1, 1, 0), dec),
                    SingularBlockError);
  }
}

TEST_CASE("schur_reconstruct inverts schur_components") {
  const Decomposition dec = Decomposition::coordinate_split(1, 1);
  CHECK((schur_reconstruct(schur_components(Matrix::Identity(2, 2), dec), dec) -
         Matrix::Identity(2, 2))
            .norm() < 1e-12);
  Matrix half(1, 1), oneandhalf(1, 1);
  half << 0.5;
  oneandhalf << 1.5;
  const SchurQuadruple q{half, half, half, oneandhalf};
  CHECK((schur_reconstruct(q, dec) - mat2(2, 1, 1, 2)).norm() < 1e-12);

  GaussianSource rng(5);
  const Decomposition big = Decomposition::coordinate_split(3, 5);
  SchurQuadruple rq;
  rq.a = rng.accretive_matrix(3, 0.5);
  rq.b = rng.complex_normal_matrix(3, 5);
  rq.c = rng.complex_normal_matrix(5, 3);
  rq.d = rng.accretive_matrix(5, 0.5);
  const Matrix m = schur_reconstruct(rq, big);
  const SchurQuadruple round = schur_components(m, big);
  CHECK((round.a - rq.a).norm() / rq.a.norm() < 1e-10);
  CHECK((round.b - rq.b).norm() / rq.b.norm() < 1e-10);
  CHECK((round.c - rq.c).norm() / rq.c.norm() < 1e-10);
  CHECK((round.d - rq.d).norm() / rq.d.norm() < 1e-10);
}

TEST_CASE("alpha_fit returns the tightest certificate") {
  const Decomposition dec = Decomposition::coordinate_split(1, 1);
  SUBCASE("identity") {
    const AlphaBounds alpha = alpha_fit(Matrix::Identity(2, 2), dec);
    CHECK(alpha.a00 == doctest::Approx(1.0));
    CHECK(alpha.a11 == doctest::Approx(1.0));
    CHECK(alpha.a01 == doctest::Approx(0.0));
    CHECK(alpha.a10 == doctest::Approx(0.0));
  }
  SUBCASE("coupled 2x2") {
    const AlphaBounds alpha = alpha_fit(mat2(2, 1, 1, 2), dec);
    CHECK(alpha.a00 == doctest::Approx(1.5));
    CHECK(alpha.a11 == doctest::Approx(2.0));
    CHECK(alpha.a01 == doctest::Approx(0.5));
    CHECK(alpha.a10 == doctest::Approx(0.5));
  }
  SUBCASE("indefinite operator fails membership") {
    CHECK_THROWS_AS(alpha_fit(mat2(1, 0, 0, -1), dec), MembershipError);
  }
}

TEST_CASE("schur positivity inheritance") {
  SUBCASE("scaled identity") {
    const Decomposition dec = Decomposition::coordinate_split(2, 2);
    const auto [t11, corner] =
        schur_positivity_inherit(2.0 * Matrix::Identity(4, 4), dec, 2.0);
    CHECK(t11 == doctest::Approx(2.0));
    CHECK(corner == doctest::Approx(2.0));
  }
  SUBCASE("worked 2x2 instance") {
    const Decomposition dec = Decomposition::coordinate_split(1, 1);
    const auto [t11, corner] =
        schur_positivity_inherit(mat2(3, 1, -1, 3), dec, 3.0);
    CHECK(t11 == doctest::Approx(3.0));
    CHECK(corner == doctest::Approx(10.0 / 3.0));
  }
  SUBCASE("random instances inherit the bound") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      GaussianSource rng(900 + seed);
      const Matrix t = rng.accretive_matrix(6, 1.0);
      const Matrix g = rng.complex_normal_matrix(6, 6);
      const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
      const Decomposition dec(q.leftCols(2), q.rightCols(4));
      const auto [t11, corner] = schur_positivity_inherit(t, dec, 1.0);
      CHECK(t11 >= 1.0 - 1e-10);
      CHECK(corner >= 1.0 - 1e-10);
    }
  }
}

TEST_CASE("perturbed block inverse matches the stated instance") {
  const Decomposition dec = Decomposition::coordinate_split(1, 2);
  Matrix a_skew = Matrix::Zero(3, 3);
  a_skew(1, 2) = -1.0;
  a_skew(2, 1) = 1.0;
  const Matrix inv = perturbed_block_inverse(Matrix::Identity(3, 3), a_skew, dec);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 1.0;
  expected(1, 1) = 0.5;
  expected(1, 2) = 0.5;
  expected(2, 1) = -0.5;
  expected(2, 2) = 0.5;
  CHECK((inv - expected).norm() < 1e-12);

  SUBCASE("zero perturbation gives the plain inverse") {
    const Matrix id_inv = perturbed_block_inverse(
        Matrix::Identity(3, 3), Matrix::Zero(3, 3), dec);
    CHECK((id_inv - Matrix::Identity(3, 3)).norm() < 1e-12);
  }
  SUBCASE("random instances agree with the dense oracle") {
    const Decomposition split = Decomposition::coordinate_split(3, 5);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      GaussianSource rng(1700 + seed);
      const Matrix t = rng.accretive_matrix(8, 0.5);
      Matrix a = Matrix::Zero(8, 8);
      a.bottomRightCorner(5, 5) = rng.skew_matrix(5);
      const Matrix block = perturbed_block_inverse(t, a, split);
      const Matrix dense = oracle::lu_inverse(t + a);
      CHECK((block - dense).norm() / dense.norm() < 1e-10);
    }
  }
  SUBCASE("structure violations are rejected") {
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 1) = -1.0;
    bad(1, 0) = 1.0;  // acts on H0
    CHECK_THROWS_AS(
        perturbed_block_inverse(Matrix::Identity(3, 3), bad, dec),
        StructureError);
    Matrix not_skew = Matrix::Zero(3, 3);
    not_skew(1, 2) = 1.0;
    not_skew(2, 1) = 1.0;
    CHECK_THROWS_AS(
        perturbed_block_inverse(Matrix::Identity(3, 3), not_skew, dec),
        StructureError);
  }
}

TEST_CASE("block-norm sandwich over random operators") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GaussianSource rng(2500 + seed);
    const Index dim = 2 + static_cast<Index>(rng.uniform() * 11);
    const Matrix m = rng.complex_normal_matrix(dim, dim);
    const Matrix g = rng.complex_normal_matrix(dim, dim);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    const Index d0 = 1 + static_cast<Index>(rng.uniform() * (dim - 1));
    const Decomposition dec(q.leftCols(d0), q.rightCols(dim - d0));
    const BlockSplit b = block_split(m, dec);
    const double full = operator_norm(m);
    const double lower = std::max({operator_norm(b.m00), operator_norm(b.m01),
                                   operator_norm(b.m10), operator_norm(b.m11)});
    const double upper = operator_norm(b.m00) + operator_norm(b.m01) +
                         operator_norm(b.m10) + operator_norm(b.m11);
    CHECK(lower <= full + 1e-10);
    CHECK(full <= upper + 1e-10);
  }
}

TEST_CASE("alpha class is closed under entrywise limits") {
  // Entrywise-convergent sequences certified with one alpha keep it in the
  // limit, up to 1e-8 slack.
  GaussianSource rng(31);
  const Index dim = 6;
  const Decomposition dec = Decomposition::coordinate_split(2, 4);
  const Matrix limit = rng.accretive_matrix(dim, 1.0);
  const Matrix direction = rng.complex_normal_matrix(dim, dim);
  const AlphaBounds alpha_limit = alpha_fit(limit, dec);

  AlphaBounds shared{0.0, 0.0, 0.0, 1e9};
  bool first = true;
  for (int n = 1; n <= 64; n *= 2) {
    const Matrix mn = limit + direction / (10.0 * n);
    const AlphaBounds alpha_n = alpha_fit(mn, dec);
    if (first) {
      shared = alpha_n;
      first = false;
    } else {
      shared.a00 = std::min(shared.a00, alpha_n.a00);
      shared.a11 = std::max(shared.a11, alpha_n.a11);
      shared.a01 = std::max(shared.a01, alpha_n.a01);
      shared.a10 = std::max(shared.a10, alpha_n.a10);
    }
  }
  // The shared certificate of the sequence covers the limit's tight one.
  CHECK(alpha_limit.a00 >= shared.a00 - 1e-2);
  CHECK(alpha_limit.a11 <= shared.a11 + 1e-2);
  // And with vanishing perturbations the limit inherits the alpha exactly.
  const AlphaBounds tail = alpha_fit(limit + direction / 1e9, dec);
  CHECK(tail.a00 == doctest::Approx(alpha_limit.a00).epsilon(1e-8));
  CHECK(tail.a11 == doctest::Approx(alpha_limit.a11).epsilon(1e-8));
  CHECK(tail.a01 == doctest::Approx(alpha_limit.a01).epsilon(1e-8));
  CHECK(tail.a10 == doctest::Approx(alpha_limit.a10).epsilon(1e-8));
}

TEST_CASE("decomposition invariants are enforced") {
  GaussianSource rng(71);
  const Matrix g = rng.complex_normal_matrix(4, 4);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  // Non-orthonormal basis.
  CHECK_THROWS_AS(Decomposition(2.0 * q.leftCols(2), q.rightCols(2)),
                  StructureError);
  // Overlapping (non-orthogonal) split.
  CHECK_THROWS_AS(Decomposition(q.leftCols(2), q.leftCols(2)), StructureError);
  // Non-exhaustive split.
  CHECK_THROWS_AS(Decomposition(q.leftCols(1), q.rightCols(2)), ShapeError);
}

TEST_CASE("decomposition from a skew kernel") {
  GaussianSource rng(77);
  Matrix a = Matrix::Zero(6, 6);
  a.bottomRightCorner(4, 4) = rng.skew_matrix(4);
  const Decomposition dec = Decomposition::from_skew_kernel(a);
  CHECK(dec.dim0() == 2);
  CHECK(dec.dim1() == 4);
  CHECK((a * dec.basis0()).norm() < 1e-10);
  // ran(A) lies inside span(basis1).
  const Matrix p1 = dec.projector1();
  CHECK(((Matrix::Identity(6, 6) - p1) * a).norm() < 1e-10);
}
