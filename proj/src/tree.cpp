#include "ssa/tree.hpp"

#include <algorithm>

namespace ssa {

std::vector<std::vector<int>> children(const DepTree& tree) {
  std::vector<std::vector<int>> out(tree.heads.size());
  for (int m = 1; m <= tree.size(); ++m) {
    const int h = tree.heads[m];
    if (h >= 0 && h <= tree.size()) out[h].push_back(m);
  }
  return out;
}

bool is_projective_tree(const DepTree& tree) {
  const int n = tree.size();
  if (n < 1) return false;
  if (!tree.labels.empty() && tree.labels.size() != tree.heads.size()) return false;
  for (int m = 1; m <= n; ++m) {
    const int h = tree.heads[m];
    if (h < 0 || h > n || h == m) return false;
  }
  // Every token must reach the root without revisiting a node.
  for (int m = 1; m <= n; ++m) {
    int x = m;
    for (int steps = 0; x != 0; ++steps) {
      if (steps > n) return false;
      x = tree.heads[x];
    }
  }
  // No two arcs cross, and the root arc region is covered by the root.
  for (int a = 1; a <= n; ++a) {
    const int l1 = std::min(a, tree.heads[a]), r1 = std::max(a, tree.heads[a]);
    for (int b = 1; b <= n; ++b) {
      const int l2 = std::min(b, tree.heads[b]), r2 = std::max(b, tree.heads[b]);
      if (l1 < l2 && l2 < r1 && r1 < r2) return false;
    }
  }
  return true;
}

void require_projective_tree(const DepTree& tree) {
  if (!is_projective_tree(tree))
    throw ContractViolation("heads do not form a projective tree rooted at 0");
}

std::vector<Yield> yields(const DepTree& tree) {
  const int n = tree.size();
  std::vector<Yield> out(n + 1);
  for (int k = 0; k <= n; ++k) out[k] = {k, k};
  out[0] = {0, n};
  for (int m = 1; m <= n; ++m) {
    int x = tree.heads[m];
    for (int steps = 0; x > 0 && steps <= n; ++steps) {
      out[x].left = std::min(out[x].left, m);
      out[x].right = std::max(out[x].right, m);
      x = tree.heads[x];
    }
  }
  return out;
}

}  // namespace ssa
