#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <vector>

#include "ssa/common.hpp"
#include "ssa/tree.hpp"

namespace ssa {

/// Yields and adjacent same-side sibling triples (h, inner, outer) of a
/// projective tree, computed once for repeated mask checks.
struct TreeParts {
  std::vector<Yield> yields;
  std::vector<std::array<int, 3>> siblings;

  static TreeParts of(const DepTree& tree);
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Legality of tree parts under a partial annotation.
///
///  - arc_allowed(h, m): the arc h -> m may appear.
///  - finish_allowed(h, i): position h may close its yield at boundary i
///    (i < h: left boundary, i > h: right boundary, i == h: either side
///    without dependents).
///  - sibling_group: positions sharing a group id >= 0 may not appear as
///    adjacent modifiers of a head from another group. This keeps a span
///    single-rooted when its words may attach outside it.
struct ConstraintMask {
  int n = 0;
  BoolMatrix arc_allowed;
  BoolMatrix finish_allowed;
  std::vector<int> sibling_group;

  ConstraintMask() = default;

  /// Everything allowed.
  static ConstraintMask permissive(int n);

  bool arc(int h, int m) const { return arc_allowed(h, m); }
  bool finish(int h, int i) const { return finish_allowed(h, i); }
  bool sibling(int h, int s, int m) const {
    const int g = sibling_group[s];
    return g < 0 || g != sibling_group[m] || sibling_group[h] == g;
  }

  /// Forbids root arcs 0 -> m for m outside [first, last] (positions).
  ConstraintMask& restrict_root(int first, int last);

  /// Whether the (projective) tree uses only allowed parts.
  bool admits(const DepTree& tree) const;
  /// Same, for a tree already known to be projective.
  bool admits(const DepTree& tree, const TreeParts& parts) const;

};

/// Inclusive position window [first, last] for the root's modifiers.
struct RootWindow {
  int first;
  int last;
};

/// Combines an optional mask and optional root window into one mask of size n.
ConstraintMask effective_mask(int n, const ConstraintMask* mask,
                              std::optional<RootWindow> root_window);

}  // namespace ssa
