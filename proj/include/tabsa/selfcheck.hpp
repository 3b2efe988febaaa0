#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tabsa {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string details;
};

// Invariant suites behind the `selfcheck` subcommand and the acceptance
// tests. All suites are seeded and self-contained.

// 1000 random vectors: zeroed set is exactly {i : u_i < mean(u)}, retained
// entries bit-equal to their inputs.
CheckResult run_step_function_suite(std::size_t n_vectors = 1000, std::uint64_t seed = 11);

// Analytic vs central-difference gradients of both objectives w.r.t. W and b
// on seeded instances over m in {5, 50}, n in {3, 20}; relative error < 1e-4.
CheckResult run_gradient_suite(std::size_t n_instances = 100, std::uint64_t seed = 12);

// Seeded refinements: terminate within max_iters = 200, per-step masked loss
// non-increasing within 1e-12 at learning rate 0.01, converged => k <= 4.
CheckResult run_descent_suite(std::size_t n_refinements = 100, std::uint64_t seed = 13);

// AUC vs brute-force pair counting and macro-F1 vs explicit confusion-matrix
// counting on random small instances, exact to 1e-12.
CheckResult run_metrics_oracle_suite(std::size_t n_instances = 200, std::uint64_t seed = 14);

std::vector<CheckResult> run_all_selfchecks();

}  // namespace tabsa
