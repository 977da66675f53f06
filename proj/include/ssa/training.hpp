#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssa/constraints.hpp"
#include "ssa/metrics.hpp"
#include "ssa/model.hpp"

namespace ssa {

/// One tree to be explained: its stage, the expression it belongs to (stage
/// two), the legal trees and the gold labels.
struct StageInstance {
  Stage stage = Stage::expression;
  SpanList expression;
  StageTarget target;
};

/// A sentence with its stage-one instance first, then one stage-two
/// instance per distinct expression.
struct TrainingExample {
  std::string id;
  Sentence sentence;
  std::vector<StageInstance> instances;
};

/// Throws DataError naming the sentence when the annotation cannot be turned
/// into constraints or a mask admits no tree.
TrainingExample build_training_example(const AnnotatedSentence& example,
                                       std::vector<std::string>* warnings = nullptr);

/// Sum over instances of log Z(all trees) - log Z(gold-consistent trees, with
/// the gold label log-probabilities added on labeled arcs).
double example_loss(const Scorer& scorer, const TrainingExample& example);

/// Adds the gradient of example_loss to `grad` and returns the loss.
double example_gradient(const Scorer& scorer, const TrainingExample& example, ParameterSet& grad);

class Adam {
 public:
  Adam(const Config& config, const ParameterSet& like);
  /// Clips `grad` to the configured global norm, then updates `params` and
  /// rounds them to float precision. Returns the norm before clipping.
  double step(ParameterSet& params, ParameterSet& grad);

 private:
  Config config_;
  ParameterSet m_, v_;
  long long t_ = 0;
};

/// Deterministic split; dev gets round(fraction * size) sentences and both
/// parts keep corpus order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double dev_fraction,
                                          std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  double loss = 0;
  Evaluation dev;

  nlohmann::json to_json() const;
};

struct TrainResult {
  Model best;
  int best_epoch = 0;
  double best_sf1 = 0;
  std::vector<EpochRecord> epochs;
};

struct TrainOptions {
  /// Checkpoints (best.ckpt, last.ckpt) and metrics.jsonl go here when set.
  std::optional<std::string> out_dir;
  /// Called after every epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Adam over mini-batches of summed stage losses; model selection on dev SF1
/// (the training set when `dev` is empty).
TrainResult train(const Dataset& train_data, const Dataset& dev, const Config& config,
                  const TrainOptions& options = {});

}  // namespace ssa
