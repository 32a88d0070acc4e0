#include "evoeq/suites.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "evoeq/parallel.hpp"
#include "evoeq/rng.hpp"

namespace evoeq {

namespace {

// Random orthonormal split with 1 <= d0 < dim.
Decomposition random_decomposition(GaussianSource& rng, Index dim) {
  const Index d0 = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(dim - 1));
  const Matrix g = rng.complex_normal_matrix(dim, dim);
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  return Decomposition(q.leftCols(d0), q.rightCols(dim - d0));
}

Index random_dim(GaussianSource& rng, Index max_dim) {
  return 2 + static_cast<Index>(rng.uniform() * static_cast<double>(max_dim - 1));
}

// Runs `body` per instance with a per-instance RNG (stable under any worker
// count) and reduces the violations sequentially.
template <typename Body>
SuiteResult run_suite(const SuiteConfig& config, std::string name,
                      double tolerance, Body&& body) {
  SuiteResult result;
  result.name = std::move(name);
  result.instances = config.instances;
  result.tolerance = tolerance;
  std::vector<double> violations(static_cast<std::size_t>(config.instances),
                                 0.0);
  parallel_for(config.instances, config.workers, [&](Index i) {
    GaussianSource rng(config.seed + 0x9e3779b97f4a7c15ULL *
                                         static_cast<std::uint64_t>(i + 1));
    violations[static_cast<std::size_t>(i)] = body(rng);
  });
  for (double v : violations) {
    result.worst = std::max(result.worst, v);
    if (v > tolerance) ++result.failures;
  }
  return result;
}

}  // namespace

SuiteResult block_norm_suite(const SuiteConfig& config) {
  return run_suite(
      config, "max_ij ||M_ij|| <= ||M|| <= sum_ij ||M_ij||", 1e-10,
      [&](GaussianSource& rng) {
        const Index dim = random_dim(rng, config.max_dim);
        const Matrix m = rng.complex_normal_matrix(dim, dim);
        const Decomposition dec = random_decomposition(rng, dim);
        const BlockSplit blocks = block_split(m, dec);
        const double full = operator_norm(m);
        const double n00 = operator_norm(blocks.m00);
        const double n01 = operator_norm(blocks.m01);
        const double n10 = operator_norm(blocks.m10);
        const double n11 = operator_norm(blocks.m11);
        const double lower = std::max({n00, n01, n10, n11});
        const double upper = n00 + n01 + n10 + n11;
        return std::max(lower - full, full - upper);
      });
}

SuiteResult accretive_inverse_suite(const SuiteConfig& config) {
  return run_suite(
      config, "||T^-1|| <= 1/c and Re T^-1 >= c ||T||^-2", 1e-9,
      [&](GaussianSource& rng) {
        const Index dim = random_dim(rng, config.max_dim);
        const double c = 0.1 + 2.0 * rng.uniform();
        const Matrix t = rng.accretive_matrix(dim, c);
        const Matrix inv = invert_accretive(t, c);
        const double norm_t = operator_norm(t);
        double violation = operator_norm(inv) - 1.0 / c;
        violation = std::max(violation, c / (norm_t * norm_t) -
                                            hermitian_lower_bound(inv));
        // LU oracle for the inverse itself.
        const Matrix oracle = Eigen::PartialPivLU<Matrix>(t).inverse();
        violation = std::max(violation, (inv - oracle).norm() / oracle.norm() -
                                            1e-10);
        return violation;
      });
}

SuiteResult positivity_inherit_suite(const SuiteConfig& config) {
  return run_suite(
      config, "Re T >= d => Re T11 >= d and Re (T00 - T01 T11^-1 T10) >= d",
      1e-9, [&](GaussianSource& rng) {
        const Index dim = random_dim(rng, config.max_dim);
        const double d = 0.1 + 2.0 * rng.uniform();
        const Matrix t = rng.accretive_matrix(dim, d);
        const Decomposition dec = random_decomposition(rng, dim);
        const auto [lb_t11, lb_corner] = schur_positivity_inherit(t, dec, d);
        return std::max(d - lb_t11, d - lb_corner);
      });
}

SuiteResult schur_bijection_suite(const SuiteConfig& config) {
  return run_suite(
      config, "schur_reconstruct inverts schur_components", 1e-10,
      [&](GaussianSource& rng) {
        const Index dim = random_dim(rng, config.max_dim);
        const Decomposition dec = random_decomposition(rng, dim);
        // Accretive operators have uniformly well-conditioned M00 blocks.
        const Matrix m = rng.accretive_matrix(dim, 0.5);
        const SchurQuadruple q = schur_components(m, dec);
        const Matrix back = schur_reconstruct(q, dec);
        double violation = (back - m).norm() / m.norm();

        // Opposite direction from a random well-conditioned quadruple.
        SchurQuadruple random_q;
        random_q.a = rng.accretive_matrix(dec.dim0(), 0.5);
        random_q.b = rng.complex_normal_matrix(dec.dim0(), dec.dim1());
        random_q.c = rng.complex_normal_matrix(dec.dim1(), dec.dim0());
        random_q.d = rng.accretive_matrix(dec.dim1(), 0.5);
        const Matrix assembled = schur_reconstruct(random_q, dec);
        const SchurQuadruple round = schur_components(assembled, dec);
        const auto rel = [](const Matrix& x, const Matrix& y) {
          const double scale = std::max(1.0, y.norm());
          return (x - y).norm() / scale;
        };
        violation = std::max({violation, rel(round.a, random_q.a),
                              rel(round.b, random_q.b), rel(round.c, random_q.c),
                              rel(round.d, random_q.d)});
        return violation;
      });
}

SuiteResult perturbed_inverse_suite(const SuiteConfig& config) {
  return run_suite(
      config, "(T + A)^-1 block formula matches the dense inverse", 1e-10,
      [&](GaussianSource& rng) {
        const Index dim = std::max<Index>(random_dim(rng, config.max_dim), 3);
        const double c = 0.3 + rng.uniform();
        const Matrix t = rng.accretive_matrix(dim, c);
        const Decomposition dec = random_decomposition(rng, dim);
        const Matrix skew1 = rng.skew_matrix(dec.dim1());
        const Matrix a_skew =
            dec.basis1() * skew1 * dec.basis1().adjoint();
        const Matrix inv = perturbed_block_inverse(t, a_skew, dec);
        const Matrix oracle = Eigen::PartialPivLU<Matrix>(t + a_skew).inverse();
        return (inv - oracle).norm() / oracle.norm();
      });
}

std::vector<SuiteResult> run_all_suites(const SuiteConfig& config) {
  return {block_norm_suite(config), accretive_inverse_suite(config),
          positivity_inherit_suite(config), schur_bijection_suite(config),
          perturbed_inverse_suite(config)};
}

}  // namespace evoeq
