#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ssa/common.hpp"
#include "ssa/config.hpp"
#include "ssa/parameters.hpp"
#include "ssa/score_set.hpp"

namespace ssa {

/// Lowercased word forms to ids; 0 = unknown, 1 = sentence start, 2 = end.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;
  static constexpr int kBegin = 1;
  static constexpr int kEnd = 2;

  Vocabulary();
  static Vocabulary build(const Dataset& data);

  int id(const std::string& word) const;
  int size() const { return static_cast<int>(words_.size()); }
  const std::string& word(int id) const { return words_.at(id); }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  void insert(const std::string& word);
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

std::string lowercase(const std::string& word);

using ArcList = std::vector<std::pair<int, int>>;

/// Whatever a scorer computed for one sentence and stage; opaque outside the
/// scorer that produced it.
struct Representations {
  virtual ~Representations() = default;
  int n = 0;
  Stage stage = Stage::expression;
};

/// Turns a sentence into part scores and per-arc label distributions, and
/// maps weights on those outputs back to parameter gradients.
class Scorer {
 public:
  virtual ~Scorer() = default;

  /// Stage two also sees which words form the expression.
  virtual std::unique_ptr<Representations> encode(const Sentence& sentence, Stage stage,
                                                  const SpanList& expression) const = 0;
  virtual ScoreSet<double> score_structure(const Representations& reps) const = 0;
  /// Row k: normalised log-probabilities over stage_labels(stage) for arcs[k].
  virtual Eigen::MatrixXd score_labels(const Representations& reps, const ArcList& arcs) const = 0;
  /// Adds to `grad` the gradient of
  ///   sum(part_weights .* scores) + sum(label_weights .* label log-probs).
  virtual void backward(const Representations& reps, const ScoreSet<double>& part_weights,
                        const ArcList& arcs, const Eigen::MatrixXd& label_weights,
                        ParameterSet& grad) const = 0;

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const Config& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }

 protected:
  Scorer(Config config, Vocabulary vocab) : config_(std::move(config)), vocab_(std::move(vocab)) {}
  Config config_;
  Vocabulary vocab_;
  ParameterSet params_;
};

/// Builds the scorer named by config.encoder with zero parameters.
std::unique_ptr<Scorer> make_scorer(const Config& config, const Vocabulary& vocab);

}  // namespace ssa
