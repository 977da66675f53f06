#include "ssa/mask.hpp"

#include <algorithm>

namespace ssa {

ConstraintMask ConstraintMask::permissive(int n) {
  expects(n >= 1, "mask must cover at least one token");
  ConstraintMask m;
  m.n = n;
  m.arc_allowed = BoolMatrix::Constant(n + 1, n + 1, true);
  m.finish_allowed = BoolMatrix::Constant(n + 1, n + 1, true);
  m.sibling_group.assign(n + 1, -1);
  return m;
}

ConstraintMask& ConstraintMask::restrict_root(int first, int last) {
  for (int m = 1; m <= n; ++m)
    if (m < first || m > last) arc_allowed(0, m) = false;
  return *this;
}

TreeParts TreeParts::of(const DepTree& tree) {
  TreeParts p;
  p.yields = ssa::yields(tree);
  const auto kids = children(tree);
  for (int h = 0; h <= tree.size(); ++h) {
    std::vector<int> left, right;
    for (int m : kids[h]) (m < h ? left : right).push_back(m);
    std::reverse(left.begin(), left.end());
    for (const auto* side : {&left, &right})
      for (std::size_t k = 1; k < side->size(); ++k)
        p.siblings.push_back({h, (*side)[k - 1], (*side)[k]});
  }
  return p;
}

bool ConstraintMask::admits(const DepTree& tree) const {
  if (tree.size() != n || !is_projective_tree(tree)) return false;
  return admits(tree, TreeParts::of(tree));
}

bool ConstraintMask::admits(const DepTree& tree, const TreeParts& parts) const {
  for (int m = 1; m <= n; ++m)
    if (!arc(tree.heads[m], m)) return false;
  for (int k = 1; k <= n; ++k)
    if (!finish(k, parts.yields[k].left) || !finish(k, parts.yields[k].right)) return false;
  for (const auto& [h, s, m] : parts.siblings)
    if (!sibling(h, s, m)) return false;
  return true;
}

ConstraintMask effective_mask(int n, const ConstraintMask* mask,
                              std::optional<RootWindow> root_window) {
  ConstraintMask out = mask ? *mask : ConstraintMask::permissive(n);
  if (root_window) {
    expects(root_window->first >= 1 && root_window->first <= root_window->last &&
                root_window->last <= n,
            "root window must lie within 1..n");
    out.restrict_root(root_window->first, root_window->last);
  }
  return out;
}

}  // namespace ssa
