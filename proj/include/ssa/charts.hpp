#pragma once

// Second-order, headed-span Eisner charts in the log and max semirings.
//
// Items over positions 0..n (0 = root), all stored as (head, other end):
//   IR(h, m), IL(h, m)  incomplete: arc h -> m with the modifiers of h up to m
//   S(s, m)             adjacent siblings s < m with their facing halves
//   CR(h, j), CL(h, i)  complete half of h reaching j / i
//   FR(h, j), FL(h, i)  finished half: complete plus the headed-span score
//
//   IR(i,j) = arc(i,j) + lse( FL(j,i+1),  IR(i,r) + S(r,j) + sib(i,r,j) )
//   IL(j,i) = arc(j,i) + lse( FR(i,j-1),  IL(j,r) + S(i,r) + sib(j,r,i) )
//   S(i,j)  = lse_{i<=r<j}  FR(i,r) + FL(j,r+1)
//   CR(i,j) = lse_{i<r<=j}  IR(i,r) + FR(r,j)
//   CL(j,i) = lse_{i<=r<j}  IL(j,r) + FL(r,i)
//   FR(i,j) = CR(i,j) + span_right(i,j),  FL(j,i) = CL(j,i) + span_left(j,i)
//
// The root only takes right dependents and has no span score, so the
// partition is CR(0, n). Masks veto arcs (IR/IL), sibling pairs (the S
// branch of IR/IL) and finishes (FR/FL).

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <vector>

#include "ssa/mask.hpp"
#include "ssa/score_set.hpp"
#include "ssa/tree.hpp"

namespace ssa {

template <typename Scalar>
struct ChartSet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::MatrixXi;

  int n = 0;
  Matrix IR, IL, S, CR, CL, FR, FL;
  // Split decisions of the max semiring; -1 marks the first-modifier branch.
  Index bp_IR, bp_IL, bp_S, bp_CR, bp_CL;
  // Adjoints for the marginal pass.
  Matrix dIR, dIL, dS, dCR, dCL, dFR, dFL;

  /// Resizes every table to (n+1)^2 and fills it with negative infinity.
  /// Storage is reused when the size does not grow.
  void reset(int token_count) {
    n = token_count;
    const int N = n + 1;
    for (Matrix* m : {&IR, &IL, &S, &CR, &CL, &FR, &FL}) {
      m->resize(N, N);
      m->fill(neg_inf<Scalar>());
    }
    for (Index* b : {&bp_IR, &bp_IL, &bp_S, &bp_CR, &bp_CL}) {
      b->resize(N, N);
      b->fill(-2);
    }
  }

  void reset_adjoints() {
    const int N = n + 1;
    for (Matrix* m : {&dIR, &dIL, &dS, &dCR, &dCL, &dFR, &dFL}) m->setZero(N, N);
  }

  /// Line-oriented dump: "<table> <head> <other> <value>", finite cells only,
  /// values with 9 decimals.
  void dump(std::ostream& out) const {
    const auto emit = [&](const char* name, const Matrix& t, int h, int o) {
      const Scalar v = t(h, o);
      if (v == neg_inf<Scalar>()) return;
      out << name << ' ' << h << ' ' << o << ' ' << std::fixed << std::setprecision(9)
          << static_cast<double>(v) << '\n';
    };
    for (int w = 0; w <= n; ++w)
      for (int i = 0; i + w <= n; ++i) {
        const int j = i + w;
        if (w > 0) {
          emit("IR", IR, i, j);
          emit("IL", IL, j, i);
          emit("S", S, i, j);
        }
        emit("CR", CR, i, j);
        emit("CL", CL, j, i);
        emit("FR", FR, i, j);
        emit("FL", FL, j, i);
      }
  }
};

namespace detail {

constexpr int kFirstModifier = -1;

template <typename Scalar, bool kMax>
struct Accumulator {
  Scalar best = neg_inf<Scalar>();
  Scalar sum = 0;
  int arg = -2;

  void add(Scalar v, int index) {
    if (v == neg_inf<Scalar>()) return;
    if constexpr (kMax) {
      if (v > best) {
        best = v;
        arg = index;
      }
    } else {
      if (v > best) {
        sum = sum * std::exp(best - v) + Scalar(1);
        best = v;
      } else {
        sum += std::exp(v - best);
      }
    }
  }

  Scalar value() const {
    if (best == neg_inf<Scalar>()) return best;
    if constexpr (kMax) {
      return best;
    } else {
      return best + std::log(sum);
    }
  }
};

template <typename Scalar>
void check_shapes(const ScoreSet<Scalar>& scores, const ConstraintMask& mask) {
  const int N = scores.n + 1;
  expects(scores.n >= 1, "score set must cover at least one token");
  expects(scores.arc.rows() == N && scores.arc.cols() == N, "arc table has wrong shape");
  expects(scores.span_left.rows() == N && scores.span_left.cols() == N,
          "span_left table has wrong shape");
  expects(scores.span_right.rows() == N && scores.span_right.cols() == N,
          "span_right table has wrong shape");
  expects(scores.sib_values.size() == static_cast<Eigen::Index>(N) * N * N,
          "sibling table has wrong shape");
  expects(mask.n == scores.n, "mask and scores disagree on sentence length");
  expects(mask.arc_allowed.rows() == N && mask.arc_allowed.cols() == N &&
              mask.finish_allowed.rows() == N && mask.finish_allowed.cols() == N &&
              static_cast<int>(mask.sibling_group.size()) == N,
          "mask has wrong shape");
}

template <typename Scalar, bool kMax>
void fill_charts(const ScoreSet<Scalar>& sc, const ConstraintMask& mask, ChartSet<Scalar>& c) {
  using Acc = Accumulator<Scalar, kMax>;
  const int n = sc.n;
  c.reset(n);
  for (int k = 0; k <= n; ++k) {
    c.CR(k, k) = 0;
    c.CL(k, k) = 0;
  }
  for (int k = 1; k <= n; ++k) {
    if (mask.finish(k, k)) {
      c.FR(k, k) = sc.span_right(k, k);
      c.FL(k, k) = sc.span_left(k, k);
    }
  }
  for (int w = 1; w <= n; ++w) {
    for (int i = 0; i + w <= n; ++i) {
      const int j = i + w;

      if (mask.arc(i, j)) {
        Acc a;
        a.add(c.FL(j, i + 1), kFirstModifier);
        for (int r = i + 1; r < j; ++r)
          if (mask.sibling(i, r, j)) a.add(c.IR(i, r) + c.S(r, j) + sc.sib(i, r, j), r);
        const Scalar v = a.value();
        if (v != neg_inf<Scalar>()) c.IR(i, j) = v + sc.arc(i, j);
        c.bp_IR(i, j) = a.arg;
      }

      if (i >= 1 && mask.arc(j, i)) {
        Acc a;
        a.add(c.FR(i, j - 1), kFirstModifier);
        for (int r = i + 1; r < j; ++r)
          if (mask.sibling(j, r, i)) a.add(c.IL(j, r) + c.S(i, r) + sc.sib(j, r, i), r);
        const Scalar v = a.value();
        if (v != neg_inf<Scalar>()) c.IL(j, i) = v + sc.arc(j, i);
        c.bp_IL(j, i) = a.arg;
      }

      if (i >= 1) {
        Acc a;
        for (int r = i; r < j; ++r) a.add(c.FR(i, r) + c.FL(j, r + 1), r);
        c.S(i, j) = a.value();
        c.bp_S(i, j) = a.arg;
      }

      {
        Acc a;
        for (int r = i + 1; r <= j; ++r) a.add(c.IR(i, r) + c.FR(r, j), r);
        c.CR(i, j) = a.value();
        c.bp_CR(i, j) = a.arg;
      }

      if (i >= 1) {
        Acc a;
        for (int r = i; r < j; ++r) a.add(c.IL(j, r) + c.FL(r, i), r);
        c.CL(j, i) = a.value();
        c.bp_CL(j, i) = a.arg;
      }

      if (i >= 1) {
        if (mask.finish(i, j) && c.CR(i, j) != neg_inf<Scalar>())
          c.FR(i, j) = c.CR(i, j) + sc.span_right(i, j);
        if (mask.finish(j, i) && c.CL(j, i) != neg_inf<Scalar>())
          c.FL(j, i) = c.CL(j, i) + sc.span_left(j, i);
      }
    }
  }
}

// Gradient of `total` with respect to one summand `term` of a log-sum-exp.
template <typename Scalar>
Scalar share(Scalar term, Scalar total) {
  if (term == neg_inf<Scalar>()) return 0;
  return std::exp(term - total);
}

template <typename Scalar>
void backprop_charts(const ScoreSet<Scalar>& sc, const ConstraintMask& mask, ChartSet<Scalar>& c,
                     ScoreSet<Scalar>& grad) {
  const int n = sc.n;
  c.reset_adjoints();
  c.dCR(0, n) = 1;
  for (int w = n; w >= 1; --w) {
    for (int i = n - w; i >= 0; --i) {
      const int j = i + w;

      if (i >= 1) {
        if (const Scalar g = c.dFR(i, j); g != 0) {
          c.dCR(i, j) += g;
          grad.span_right(i, j) += g;
        }
        if (const Scalar g = c.dFL(j, i); g != 0) {
          c.dCL(j, i) += g;
          grad.span_left(j, i) += g;
        }
      }

      if (const Scalar g = c.dCR(i, j); g != 0 && c.CR(i, j) != neg_inf<Scalar>()) {
        for (int r = i + 1; r <= j; ++r) {
          const Scalar p = g * share(c.IR(i, r) + c.FR(r, j), c.CR(i, j));
          c.dIR(i, r) += p;
          c.dFR(r, j) += p;
        }
      }

      if (i >= 1) {
        if (const Scalar g = c.dCL(j, i); g != 0 && c.CL(j, i) != neg_inf<Scalar>()) {
          for (int r = i; r < j; ++r) {
            const Scalar p = g * share(c.IL(j, r) + c.FL(r, i), c.CL(j, i));
            c.dIL(j, r) += p;
            c.dFL(r, i) += p;
          }
        }
        if (const Scalar g = c.dS(i, j); g != 0 && c.S(i, j) != neg_inf<Scalar>()) {
          for (int r = i; r < j; ++r) {
            const Scalar p = g * share(c.FR(i, r) + c.FL(j, r + 1), c.S(i, j));
            c.dFR(i, r) += p;
            c.dFL(j, r + 1) += p;
          }
        }
      }

      if (const Scalar g = c.dIR(i, j); g != 0 && c.IR(i, j) != neg_inf<Scalar>()) {
        grad.arc(i, j) += g;
        const Scalar inner = c.IR(i, j) - sc.arc(i, j);
        c.dFL(j, i + 1) += g * share(c.FL(j, i + 1), inner);
        for (int r = i + 1; r < j; ++r) {
          if (!mask.sibling(i, r, j)) continue;
          const Scalar p = g * share(c.IR(i, r) + c.S(r, j) + sc.sib(i, r, j), inner);
          c.dIR(i, r) += p;
          c.dS(r, j) += p;
          grad.sib(i, r, j) += p;
        }
      }

      if (i >= 1) {
        if (const Scalar g = c.dIL(j, i); g != 0 && c.IL(j, i) != neg_inf<Scalar>()) {
          grad.arc(j, i) += g;
          const Scalar inner = c.IL(j, i) - sc.arc(j, i);
          c.dFR(i, j - 1) += g * share(c.FR(i, j - 1), inner);
          for (int r = i + 1; r < j; ++r) {
            if (!mask.sibling(j, r, i)) continue;
            const Scalar p = g * share(c.IL(j, r) + c.S(i, r) + sc.sib(j, r, i), inner);
            c.dIL(j, r) += p;
            c.dS(i, r) += p;
            grad.sib(j, r, i) += p;
          }
        }
      }
    }
  }
  for (int k = 1; k <= n; ++k) {
    grad.span_right(k, k) += c.dFR(k, k);
    grad.span_left(k, k) += c.dFL(k, k);
  }
}

template <typename Scalar>
DepTree backtrack(const ChartSet<Scalar>& c) {
  const int n = c.n;
  DepTree tree(std::vector<int>(n + 1, 0));
  enum class Item { IR, IL, S, CR, CL, FR, FL };
  struct Task {
    Item item;
    int a, b;
  };
  std::vector<Task> stack{{Item::CR, 0, n}};
  while (!stack.empty()) {
    const Task t = stack.back();
    stack.pop_back();
    switch (t.item) {
      case Item::CR:
        if (t.a != t.b) {
          const int r = c.bp_CR(t.a, t.b);
          stack.push_back({Item::IR, t.a, r});
          stack.push_back({Item::FR, r, t.b});
        }
        break;
      case Item::CL:
        if (t.a != t.b) {
          const int r = c.bp_CL(t.a, t.b);
          stack.push_back({Item::IL, t.a, r});
          stack.push_back({Item::FL, r, t.b});
        }
        break;
      case Item::FR:
        stack.push_back({Item::CR, t.a, t.b});
        break;
      case Item::FL:
        stack.push_back({Item::CL, t.a, t.b});
        break;
      case Item::IR: {
        tree.heads[t.b] = t.a;
        const int r = c.bp_IR(t.a, t.b);
        if (r == kFirstModifier) {
          stack.push_back({Item::FL, t.b, t.a + 1});
        } else {
          stack.push_back({Item::IR, t.a, r});
          stack.push_back({Item::S, r, t.b});
        }
        break;
      }
      case Item::IL: {
        tree.heads[t.b] = t.a;
        const int r = c.bp_IL(t.a, t.b);
        if (r == kFirstModifier) {
          stack.push_back({Item::FR, t.b, t.a - 1});
        } else {
          stack.push_back({Item::IL, t.a, r});
          stack.push_back({Item::S, t.b, r});
        }
        break;
      }
      case Item::S: {
        const int q = c.bp_S(t.a, t.b);
        stack.push_back({Item::FR, t.a, q});
        stack.push_back({Item::FL, t.b, q + 1});
        break;
      }
    }
  }
  tree.heads[0] = -1;
  return tree;
}

}  // namespace detail

/// log Z: log-sum-exp of tree scores over every projective tree the mask
/// admits (all trees without a mask). Negative infinity when none exists.
template <typename Scalar>
Scalar inside(const ScoreSet<Scalar>& scores, const ConstraintMask* mask, ChartSet<Scalar>& charts) {
  const ConstraintMask m = effective_mask(scores.n, mask, std::nullopt);
  detail::check_shapes(scores, m);
  detail::fill_charts<Scalar, false>(scores, m, charts);
  return charts.CR(0, scores.n);
}

template <typename Scalar>
Scalar inside(const ScoreSet<Scalar>& scores, const ConstraintMask* mask = nullptr) {
  ChartSet<Scalar> charts;
  return inside(scores, mask, charts);
}

template <typename Scalar>
struct ViterbiResult {
  DepTree tree;
  Scalar score;
};

/// Highest-scoring admissible tree. Ties go to the smaller split point, the
/// first-modifier branch counting as the smallest.
template <typename Scalar>
ViterbiResult<Scalar> viterbi(const ScoreSet<Scalar>& scores, const ConstraintMask* mask,
                              std::optional<RootWindow> root_window, ChartSet<Scalar>& charts) {
  const ConstraintMask m = effective_mask(scores.n, mask, root_window);
  detail::check_shapes(scores, m);
  detail::fill_charts<Scalar, true>(scores, m, charts);
  const Scalar best = charts.CR(0, scores.n);
  if (best == neg_inf<Scalar>()) throw NoLegalTree("no legal tree under the given constraints");
  return {detail::backtrack(charts), best};
}

template <typename Scalar>
ViterbiResult<Scalar> viterbi(const ScoreSet<Scalar>& scores, const ConstraintMask* mask = nullptr,
                              std::optional<RootWindow> root_window = std::nullopt) {
  ChartSet<Scalar> charts;
  return viterbi(scores, mask, root_window, charts);
}

template <typename Scalar>
struct Marginals {
  Scalar log_partition;
  /// Probability of each part, laid out like the scores.
  ScoreSet<Scalar> parts;
};

/// Part marginals, i.e. the derivative of inside() with respect to every
/// score cell, obtained by running the inside recursion backwards.
template <typename Scalar>
Marginals<Scalar> marginals(const ScoreSet<Scalar>& scores, const ConstraintMask* mask,
                            ChartSet<Scalar>& charts) {
  const ConstraintMask m = effective_mask(scores.n, mask, std::nullopt);
  detail::check_shapes(scores, m);
  detail::fill_charts<Scalar, false>(scores, m, charts);
  const Scalar log_z = charts.CR(0, scores.n);
  if (log_z == neg_inf<Scalar>()) throw NoLegalTree("empty support: partition is zero");
  Marginals<Scalar> out{log_z, ScoreSet<Scalar>(scores.n)};
  detail::backprop_charts(scores, m, charts, out.parts);
  return out;
}

template <typename Scalar>
Marginals<Scalar> marginals(const ScoreSet<Scalar>& scores, const ConstraintMask* mask = nullptr) {
  ChartSet<Scalar> charts;
  return marginals(scores, mask, charts);
}

/// s(x, y) for a tree whose parts are already known.
template <typename Scalar>
Scalar tree_score(const ScoreSet<Scalar>& scores, const DepTree& tree, const TreeParts& parts) {
  Scalar total = 0;
  for (int m = 1; m <= scores.n; ++m) total += scores.arc(tree.heads[m], m);
  for (const auto& [h, s, m] : parts.siblings) total += scores.sib(h, s, m);
  for (int k = 1; k <= scores.n; ++k)
    total += scores.span_left(k, parts.yields[k].left) + scores.span_right(k, parts.yields[k].right);
  return total;
}

/// s(x, y): arcs, adjacent siblings (ordered outward from the head) and the
/// headed-span scores at every token's yield boundaries.
template <typename Scalar>
Scalar tree_score(const ScoreSet<Scalar>& scores, const DepTree& tree) {
  expects(tree.size() == scores.n, "tree and scores disagree on sentence length");
  require_projective_tree(tree);
  return tree_score(scores, tree, TreeParts::of(tree));
}

/// Calls visit(tree) for every projective tree over n tokens, built by
/// recursively splitting each span into consecutive headed blocks.
void for_each_projective_tree(int n, const std::function<void(const DepTree&)>& visit);

struct EnumeratedTree {
  DepTree tree;
  TreeParts parts;
};

/// Every projective tree over n <= 8 tokens with its parts; built once per n
/// and shared read-only afterwards.
const std::vector<EnumeratedTree>& projective_trees(int n);

enum class Semiring { sum, max };

template <typename Scalar>
struct BruteForceResult {
  Scalar value;
  std::optional<DepTree> argmax;
  long long tree_count = 0;
};

/// Exhaustive reference for inside() / viterbi(); refuses n > 8.
template <typename Scalar>
BruteForceResult<Scalar> brute_force(const ScoreSet<Scalar>& scores, const ConstraintMask* mask,
                                     Semiring mode) {
  if (scores.n > 8) throw ContractViolation("brute force enumeration refused for n > 8");
  expects(scores.n >= 1, "score set must cover at least one token");
  BruteForceResult<Scalar> out{neg_inf<Scalar>(), std::nullopt, 0};
  detail::Accumulator<Scalar, false> sum;
  if (mask) detail::check_shapes(scores, *mask);
  const EnumeratedTree* best = nullptr;
  for (const EnumeratedTree& e : projective_trees(scores.n)) {
    if (mask && !mask->admits(e.tree, e.parts)) continue;
    ++out.tree_count;
    const Scalar s = tree_score(scores, e.tree, e.parts);
    if (mode == Semiring::sum) {
      sum.add(s, 0);
    } else if (!best || s > out.value) {
      out.value = s;
      best = &e;
    }
  }
  if (best) out.argmax = best->tree;
  if (mode == Semiring::sum) out.value = sum.value();
  return out;
}

}  // namespace ssa
