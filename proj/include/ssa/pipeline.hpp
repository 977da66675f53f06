#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssa/constraints.hpp"
#include "ssa/scorer.hpp"
#include "ssa/tree.hpp"

namespace ssa {

/// Highest-scoring labeled tree when every arc in `labeled` also picks its
/// best label. Labels of other arcs stay `none`.
DepTree decode_labeled(const Scorer& scorer, const Representations& reps, const ArcList& labeled,
                       const ConstraintMask* mask);

/// Stage one: unconstrained expression tree.
DepTree decode_expressions(const Scorer& scorer, const Sentence& sentence);
/// Stage two for one expression: the root may only attach inside it.
DepTree decode_roles(const Scorer& scorer, const Sentence& sentence, const SpanList& expression);

/// Tuples for the given expressions, sorted by expression start.
std::vector<SentimentTuple> predict_roles(const Scorer& scorer, const Sentence& sentence,
                                          const std::vector<RecoveredExpression>& expressions);

std::vector<SentimentTuple> predict(const Scorer& scorer, const Sentence& sentence);

/// Gold expressions of an annotated sentence, one per distinct expression.
std::vector<RecoveredExpression> gold_expressions(const AnnotatedSentence& example);

struct PredictionRecord {
  std::vector<SentimentTuple> tuples;
  std::optional<std::string> error;
};

struct DatasetPrediction {
  std::vector<PredictionRecord> records;
  double seconds = 0;
  std::optional<double> sentences_per_second;  // empty for an empty dataset

  /// The input sentences with predicted tuples (failed sentences get none).
  Dataset as_dataset(const Dataset& input) const;
  std::size_t error_count() const;
};

/// Order-preserving parallel map of predict(). With `gold_mode` stage one is
/// replaced by the gold expressions.
DatasetPrediction predict_dataset(const Scorer& scorer, const Dataset& data, int workers,
                                  bool gold_mode = false);

}  // namespace ssa
