#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evoeq/linop.hpp"

namespace evoeq {

/// Outcome of one randomized property suite.
struct SuiteResult {
  std::string name;        // the inequality or identity the suite encodes
  int instances = 0;
  int failures = 0;
  double worst = 0.0;      // largest violation beyond round-off
  double tolerance = 0.0;

  bool pass() const { return failures == 0; }
};

struct SuiteConfig {
  std::uint64_t seed = 42;
  int instances = 1000;
  Index max_dim = 32;
  int workers = 1;
};

/// max_ij ||M_ij|| <= ||M|| <= sum_ij ||M_ij|| over random operators and
/// decompositions, tolerance 1e-10.
SuiteResult block_norm_suite(const SuiteConfig& config);

/// ||T^-1|| <= 1/c and Re T^-1 >= c ||T||^-2 for random T with
/// lambda_min Re T = c, plus agreement with an LU inverse, tolerance 1e-9.
SuiteResult accretive_inverse_suite(const SuiteConfig& config);

/// Re T >= d implies Re T11 >= d and Re (T00 - T01 T11^-1 T10) >= d,
/// tolerance 1e-9.
SuiteResult positivity_inherit_suite(const SuiteConfig& config);

/// schur_reconstruct and schur_components invert each other, residual 1e-10.
SuiteResult schur_bijection_suite(const SuiteConfig& config);

/// The blockwise (T + A)^-1 formula agrees with a dense LU inverse to 1e-10
/// relative and obeys its norm bounds.
SuiteResult perturbed_inverse_suite(const SuiteConfig& config);

/// All of the above in order.
std::vector<SuiteResult> run_all_suites(const SuiteConfig& config);

}  // namespace evoeq
