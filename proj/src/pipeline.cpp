#include "ssa/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "ssa/charts.hpp"
#include "ssa/parallel.hpp"

namespace ssa {

DepTree decode_labeled(const Scorer& scorer, const Representations& reps, const ArcList& labeled,
                       const ConstraintMask* mask) {
  ScoreSet<double> scores = scorer.score_structure(reps);
  const Eigen::MatrixXd logp = scorer.score_labels(reps, labeled);
  std::vector<int> best(labeled.size(), 0);
  for (std::size_t k = 0; k < labeled.size(); ++k) {
    Eigen::Index arg = 0;
    scores.arc(labeled[k].first, labeled[k].second) += logp.row(k).maxCoeff(&arg);
    best[k] = static_cast<int>(arg);
  }
  DepTree tree = viterbi(scores, mask).tree;
  const auto& labels = stage_labels(reps.stage);
  for (std::size_t k = 0; k < labeled.size(); ++k) {
    const auto [h, m] = labeled[k];
    if (tree.heads[m] == h) tree.labels[m] = labels[best[k]];
  }
  return tree;
}

DepTree decode_expressions(const Scorer& scorer, const Sentence& sentence) {
  auto reps = scorer.encode(sentence, Stage::expression, {});
  return decode_labeled(scorer, *reps, stage1_label_arcs(sentence.size()).arcs, nullptr);
}

DepTree decode_roles(const Scorer& scorer, const Sentence& sentence, const SpanList& expression) {
  const int n = sentence.size();
  SentimentTuple bare;
  bare.expression = expression;
  const ConstraintMask mask = build_stage2_mask(n, expression, bare).mask;
  auto reps = scorer.encode(sentence, Stage::role, expression);
  DepTree tree = decode_labeled(scorer, *reps, stage2_label_arcs(n, expression).arcs, &mask);
  int root_children = 0;
  for (int m = 1; m <= n; ++m)
    if (tree.heads[m] == 0) {
      ++root_children;
      bool inside = false;
      for (const Span& s : expression) inside = inside || s.contains(m - 1);
      expects(inside, "stage-two root left its expression");
    }
  expects(root_children == 1, "stage-two tree must have one root child");
  return tree;
}

std::vector<SentimentTuple> predict_roles(const Scorer& scorer, const Sentence& sentence,
                                          const std::vector<RecoveredExpression>& expressions) {
  std::vector<SentimentTuple> out;
  for (const auto& e : expressions) {
    const RecoveredRoles roles = recover_stage2(decode_roles(scorer, sentence, e.spans), e.spans);
    out.push_back({roles.holder, roles.target, e.spans, e.polarity});
  }
  std::stable_sort(out.begin(), out.end(), [](const SentimentTuple& a, const SentimentTuple& b) {
    return a.expression.front().start < b.expression.front().start;
  });
  return out;
}

std::vector<SentimentTuple> predict(const Scorer& scorer, const Sentence& sentence) {
  if (sentence.size() == 0) return {};
  return predict_roles(scorer, sentence, recover_stage1(decode_expressions(scorer, sentence)));
}

std::vector<RecoveredExpression> gold_expressions(const AnnotatedSentence& example) {
  std::vector<RecoveredExpression> out;
  for (const auto& g : group_tuples(example.sentence.size(), example.tuples))
    out.push_back({g.expression, g.polarity});
  return out;
}

Dataset DatasetPrediction::as_dataset(const Dataset& input) const {
  expects(input.size() == records.size(), "prediction does not match the dataset");
  Dataset out;
  out.reserve(input.size());
  for (std::size_t k = 0; k < input.size(); ++k) out.push_back({input[k].sentence, records[k].tuples});
  return out;
}

std::size_t DatasetPrediction::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.error.has_value(); }));
}

DatasetPrediction predict_dataset(const Scorer& scorer, const Dataset& data, int workers,
                                  bool gold_mode) {
  DatasetPrediction out;
  out.records.resize(data.size());
  const auto start = std::chrono::steady_clock::now();
  parallel_for(data.size(), workers, [&](std::size_t i, int) {
    PredictionRecord& rec = out.records[i];
    try {
      rec.tuples = gold_mode ? predict_roles(scorer, data[i].sentence, gold_expressions(data[i]))
                             : predict(scorer, data[i].sentence);
    } catch (const std::exception& e) {
      rec.tuples.clear();
      rec.error = data[i].sentence.id + ": " + e.what();
    }
  });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!data.empty()) out.sentences_per_second = data.size() / std::max(out.seconds, 1e-9);
  return out;
}

}  // namespace ssa
