#include "ssa/charts.hpp"

#include <array>
#include <mutex>

namespace ssa {

namespace {

// Assigns heads inside [l, r] as a row of consecutive blocks hanging from p,
// then calls `next`.
void forest(int l, int r, int p, std::vector<int>& heads, const std::function<void()>& next) {
  if (l > r) {
    next();
    return;
  }
  for (int b = l; b <= r; ++b)
    for (int c = l; c <= b; ++c) {
      heads[c] = p;
      forest(l, c - 1, c, heads, [&] {
        forest(c + 1, b, c, heads, [&] { forest(b + 1, r, p, heads, next); });
      });
    }
}

}  // namespace

void for_each_projective_tree(int n, const std::function<void(const DepTree&)>& visit) {
  expects(n >= 1, "need at least one token");
  std::vector<int> heads(n + 1, 0);
  heads[0] = -1;
  forest(1, n, 0, heads, [&] { visit(DepTree(heads)); });
}

const std::vector<EnumeratedTree>& projective_trees(int n) {
  expects(n >= 1 && n <= 8, "tree enumeration is limited to 1..8 tokens");
  static std::array<std::once_flag, 9> once;
  static std::array<std::vector<EnumeratedTree>, 9> cache;
  std::call_once(once[n], [n] {
    for_each_projective_tree(n, [&](const DepTree& t) { cache[n].push_back({t, TreeParts::of(t)}); });
  });
  return cache[n];
}

}  // namespace ssa
