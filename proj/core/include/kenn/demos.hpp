#pragma once

// Small self-checking demonstrations of the method's properties. The CLI
// prints these; the acceptance suite asserts on them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "kenn/logic.hpp"

namespace kenn {

/// Logistic regression with zero weights plus the four XOR clauses at fixed
/// weight 10, with x1 and x2 injected as input atoms.
Knowledge xor_knowledge();

struct XorDemoResult {
  std::array<std::array<double, 2>, 4> inputs{};
  std::array<double, 4> targets{};
  std::array<double, 4> kenn_outputs{};
  std::array<double, 4> lr_outputs{};  // plain LR after training
  int kenn_correct = 0;                // |output - target| < 0.1
  int lr_correct = 0;                  // thresholded at 0.5
  bool pass = false;                   // kenn 4/4 and LR <= 3/4
};

XorDemoResult run_xor_demo(std::size_t lr_epochs = 5000, std::uint64_t seed = 0);

struct CollisionRow {
  int n = 0;
  int m = 0;
  double reported = 0.0;  // reference value the estimate must match
  double closed_form = 0.0;
  double estimate = 0.0;
  bool pass = false;  // |estimate - reported| <= tolerance
};

inline constexpr double kCollisionTolerance = 0.005;

std::vector<CollisionRow> run_collision_table(std::size_t samples, std::uint64_t seed,
                                              double tolerance = kCollisionTolerance);

struct MinimalityReport {
  std::size_t instances = 0;
  std::size_t cases = 0;  // instances x norms; counterexamples count cases
  std::size_t hard_counterexamples = 0;
  std::size_t control_counterexamples = 0;
  bool pass() const { return hard_counterexamples == 0 && control_counterexamples > 0; }
};

/// Random truth vectors with 2..6 literals, each probed under p = 1, 2, 3 for
/// boost_hard and for the uniform control boost.
MinimalityReport run_minimality_check(std::size_t instances, std::size_t trials, std::uint64_t seed);

/// Finite-difference check of a relational KENN (MLP base, random 8-node
/// graph, two unary clauses and one binary clause). Returns the max relative
/// error over base parameters, clause weights and binary preactivations.
double relational_gradcheck(std::uint64_t seed);

inline constexpr double kGradcheckTolerance = 1e-5;

}  // namespace kenn
