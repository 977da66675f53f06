#pragma once

#include <utility>
#include <vector>

#include "ssa/common.hpp"

namespace ssa {

/// Dependency tree over positions 0..n, position 0 being the artificial root.
/// heads[0] and labels[0] are placeholders; token t (0-based) lives at t + 1.
struct DepTree {
  std::vector<int> heads;
  std::vector<ArcLabel> labels;

  DepTree() = default;
  explicit DepTree(std::vector<int> heads_in)
      : heads(std::move(heads_in)), labels(heads.size(), ArcLabel::none) {
    if (!heads.empty()) heads[0] = -1;
  }

  int size() const { return static_cast<int>(heads.size()) - 1; }
  friend bool operator==(const DepTree&, const DepTree&) = default;
};

/// Inclusive yield interval [left, right] of every position.
struct Yield {
  int left;
  int right;
};

/// True when heads form a single tree rooted at 0 with contiguous yields.
bool is_projective_tree(const DepTree& tree);

/// Throws ContractViolation unless is_projective_tree(tree).
void require_projective_tree(const DepTree& tree);

/// Yield of every position (index 0 covers the whole sentence).
std::vector<Yield> yields(const DepTree& tree);

/// Dependents of every position in increasing order.
std::vector<std::vector<int>> children(const DepTree& tree);

}  // namespace ssa
