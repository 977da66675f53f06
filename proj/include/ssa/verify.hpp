#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ssa/constraints.hpp"

namespace ssa::verify {

/// Tally of one self-check suite.
struct SuiteResult {
  std::string name;
  long long checks = 0;
  long long failures = 0;
  std::string first_failure;
  double seconds = 0;

  bool ok() const { return failures == 0; }
  void fail(const std::string& what) {
    if (failures++ == 0) first_failure = what;
  }
};

/// Labels each root child whose yield is exactly an expression segment, then
/// checks that recovery returns the gold expressions.
bool stage1_consistent(const DepTree& tree, const std::vector<SentimentTuple>& tuples);

/// Same idea for holder and target segments hanging from the expression.
bool stage2_consistent(const DepTree& tree, const SpanList& expression,
                       const SentimentTuple& tuple);

/// Every single-tuple annotation over n tokens whose segments have length at
/// most max_len (expression non-empty, roles possibly empty).
std::vector<SentimentTuple> enumerate_annotations(int n, int max_len);

/// Exhaustive mask soundness and completeness in both stages.
SuiteResult round_trip_suite(int n_max, int max_len);

/// Inside and Viterbi against brute force, unmasked and under random masks.
SuiteResult inside_suite(int n_max, int trials, std::uint64_t seed, int masks_per_n);
SuiteResult viterbi_suite(int n_max, int trials, std::uint64_t seed, int masks_per_n);

/// Marginals against central differences of inside.
SuiteResult marginal_suite(int n_max, int trials, std::uint64_t seed);

/// example_gradient against central differences of example_loss on a
/// three-token example, for the sparse, window and recurrent scorers.
SuiteResult gradient_suite(int trials, std::uint64_t seed);

/// Loss non-negativity over random parameter draws, and zero loss when every
/// tree is gold and no arc carries a label.
SuiteResult loss_suite(int draws, std::uint64_t seed);

/// Random stage-one / stage-two mask from a random single tuple.
ConstraintMask random_mask(int n, std::uint64_t seed);

}  // namespace ssa::verify
