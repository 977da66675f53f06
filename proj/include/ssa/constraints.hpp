#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssa/common.hpp"
#include "ssa/mask.hpp"
#include "ssa/tree.hpp"

namespace ssa {

/// Arcs that carry a label factor, with the label each one must take in the
/// gold annotation (`none` for arcs that exist only as latent structure).
struct LabeledArcs {
  Stage stage = Stage::expression;
  std::vector<std::pair<int, int>> arcs;
  std::vector<ArcLabel> gold;

  /// Index of arc (h, m) in `arcs`, or -1.
  int find(int h, int m) const;
};

struct StageTarget {
  ConstraintMask mask;
  LabeledArcs labels;
};

/// Tuples sharing one expression, folded into a single stage-two instance.
struct ExpressionGroup {
  SpanList expression;
  Polarity polarity = Polarity::neutral;
  SpanList holder;
  SpanList target;
  std::vector<std::size_t> tuples;
};

/// Checks bounds and ordering of every span, rejects expression segments that
/// overlap without being identical, and groups tuples by expression. Role
/// spans that collide with the expression or with the other role are dropped
/// and reported through `warnings`.
std::vector<ExpressionGroup> group_tuples(int n, const std::vector<SentimentTuple>& tuples,
                                          std::vector<std::string>* warnings = nullptr);

/// Index of the segment acting as the complete part of a discontinuous
/// expression: the longest one, the rightmost among equals.
std::size_t complete_segment(const SpanList& expression);

/// Distinct expression segments with the root-arc label each one carries.
std::vector<std::pair<Span, ArcLabel>> stage1_regions(const std::vector<ExpressionGroup>& groups);

/// Every expression segment becomes a root child covering exactly that
/// segment; everything else hangs off the root or other free words.
StageTarget build_stage1_mask(int n, const std::vector<SentimentTuple>& tuples);

/// One expression (possibly discontinuous) heads the sentence; each holder
/// and target segment is a subtree covering exactly that segment, attached to
/// an expression word.
StageTarget build_stage2_mask(int n, const SpanList& expression, const SentimentTuple& tuple);

/// Labeled-arc classes with every gold label `none`, for decoding.
LabeledArcs stage1_label_arcs(int n);
LabeledArcs stage2_label_arcs(int n, const SpanList& expression);

struct RecoveredExpression {
  SpanList spans;
  Polarity polarity = Polarity::neutral;

  friend bool operator==(const RecoveredExpression&, const RecoveredExpression&) = default;
};

/// Expression-labeled root children, left to right. Incomplete segments join
/// the nearest complete expression (the right one on ties) and are dropped
/// when there is none.
std::vector<RecoveredExpression> recover_stage1(const DepTree& tree);

struct RecoveredRoles {
  SpanList holder;
  SpanList target;

  friend bool operator==(const RecoveredRoles&, const RecoveredRoles&) = default;
};

/// Holder and target spans hanging from the expression. Requires a single
/// root child inside the expression and every expression word headed inside
/// the expression.
RecoveredRoles recover_stage2(const DepTree& tree, const SpanList& expression);

/// Sorted token spans covering `tokens` (0-based), one per maximal run.
SpanList runs_of(const std::vector<int>& tokens);

}  // namespace ssa
