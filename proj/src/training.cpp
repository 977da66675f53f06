#include "ssa/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "ssa/charts.hpp"
#include "ssa/parallel.hpp"
#include "ssa/pipeline.hpp"

namespace ssa {

TrainingExample build_training_example(const AnnotatedSentence& example,
                                       std::vector<std::string>* warnings) {
  TrainingExample out;
  out.id = example.sentence.id;
  out.sentence = example.sentence;
  const int n = example.sentence.size();
  if (n == 0) throw DataError("sentence " + out.id + ": no tokens");
  try {
    std::vector<std::string> local;
    const auto groups = group_tuples(n, example.tuples, &local);
    if (warnings)
      for (const auto& w : local) warnings->push_back("sentence " + out.id + ": " + w);
    out.instances.push_back({Stage::expression, {}, build_stage1_mask(n, example.tuples)});
    for (const auto& g : groups) {
      SentimentTuple t;
      t.expression = g.expression;
      t.holder = g.holder;
      t.target = g.target;
      t.polarity = g.polarity;
      out.instances.push_back({Stage::role, g.expression, build_stage2_mask(n, g.expression, t)});
    }
  } catch (const DataError& e) {
    throw DataError("sentence " + out.id + ": " + e.what());
  }
  for (const auto& inst : out.instances)
    if (inside(ScoreSet<double>(n), &inst.target.mask) == neg_inf<double>())
      throw DataError("sentence " + out.id + ": annotation admits no tree");
  return out;
}

namespace {

struct InstanceForward {
  std::unique_ptr<Representations> reps;
  ScoreSet<double> scores;
  ScoreSet<double> gold_scores;
  Eigen::MatrixXd logp;
  double log_z = 0;
  double log_gold = 0;
};

InstanceForward forward(const Scorer& scorer, const TrainingExample& ex, const StageInstance& inst) {
  InstanceForward f;
  f.reps = scorer.encode(ex.sentence, inst.stage, inst.expression);
  f.scores = scorer.score_structure(*f.reps);
  const LabeledArcs& la = inst.target.labels;
  f.logp = scorer.score_labels(*f.reps, la.arcs);
  f.gold_scores = f.scores;
  for (std::size_t k = 0; k < la.arcs.size(); ++k)
    f.gold_scores.arc(la.arcs[k].first, la.arcs[k].second) +=
        f.logp(k, label_index(inst.stage, la.gold[k]));
  f.log_z = inside(f.scores);
  f.log_gold = inside(f.gold_scores, &inst.target.mask);
  if (!std::isfinite(f.log_z) || !std::isfinite(f.log_gold))
    throw DataError("non-finite loss on sentence " + ex.id);
  // gold log-probabilities are <= 0 and the gold trees are a subset
  const double slack = 1e-9 * std::max(1.0, std::abs(f.log_z));
  if (f.log_gold > f.log_z + slack)
    throw ContractViolation("numerator exceeds partition function on sentence " + ex.id);
  return f;
}

}  // namespace

double example_loss(const Scorer& scorer, const TrainingExample& example) {
  double loss = 0;
  for (const auto& inst : example.instances) {
    const InstanceForward f = forward(scorer, example, inst);
    loss += f.log_z - f.log_gold;
  }
  return loss;
}

double example_gradient(const Scorer& scorer, const TrainingExample& example, ParameterSet& grad) {
  double loss = 0;
  for (const auto& inst : example.instances) {
    const InstanceForward f = forward(scorer, example, inst);
    loss += f.log_z - f.log_gold;
    const Marginals<double> all = marginals(f.scores);
    const Marginals<double> gold = marginals(f.gold_scores, &inst.target.mask);
    ScoreSet<double> weights = all.parts;
    weights.arc -= gold.parts.arc;
    weights.sib_values -= gold.parts.sib_values;
    weights.span_left -= gold.parts.span_left;
    weights.span_right -= gold.parts.span_right;
    const LabeledArcs& la = inst.target.labels;
    Eigen::MatrixXd label_weights = Eigen::MatrixXd::Zero(la.arcs.size(), f.logp.cols());
    for (std::size_t k = 0; k < la.arcs.size(); ++k)
      label_weights(k, label_index(inst.stage, la.gold[k])) =
          -gold.parts.arc(la.arcs[k].first, la.arcs[k].second);
    scorer.backward(*f.reps, weights, la.arcs, label_weights, grad);
  }
  return loss;
}

Adam::Adam(const Config& config, const ParameterSet& like)
    : config_(config), m_(like.zeros_like()), v_(like.zeros_like()) {}

double Adam::step(ParameterSet& params, ParameterSet& grad) {
  expects(params.same_layout(grad) && params.same_layout(m_), "optimizer layout mismatch");
  const double norm = std::sqrt(grad.squared_norm());
  if (norm > config_.clip) grad.scale(config_.clip / norm);
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto g = grad.block(k).array();
    auto m = m_.block(k).array();
    auto v = v_.block(k).array();
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.square();
    params.block(k).array() -= config_.lr * (m / c1) / ((v / c2).sqrt() + config_.eps);
  }
  params.quantize();
  return norm;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double dev_fraction,
                                          std::uint64_t seed) {
  expects(dev_fraction >= 0 && dev_fraction < 1, "dev fraction must lie in [0, 1)");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ 0x5eedd0e5ull);
  std::shuffle(order.begin(), order.end(), rng);
  const auto dev_count = static_cast<std::size_t>(std::llround(dev_fraction * data.size()));
  std::vector<bool> in_dev(data.size(), false);
  for (std::size_t k = 0; k < dev_count; ++k) in_dev[order[k]] = true;
  std::pair<Dataset, Dataset> out;
  for (std::size_t k = 0; k < data.size(); ++k) (in_dev[k] ? out.second : out.first).push_back(data[k]);
  return out;
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"loss", loss},
          {"holder_f1", dev.holder.f1},
          {"target_f1", dev.target.f1},
          {"expression_f1", dev.expression.f1},
          {"nsf1", dev.nsf1.f1},
          {"sf1", dev.sf1.f1}};
}

TrainResult train(const Dataset& train_data, const Dataset& dev, const Config& config,
                  const TrainOptions& options) {
  config.validate();
  if (train_data.empty()) throw DataError("training split is empty");

  std::vector<TrainingExample> examples;
  examples.reserve(train_data.size());
  for (const auto& ex : train_data) examples.push_back(build_training_example(ex));

  Model model(config, Vocabulary::build(train_data));
  std::mt19937_64 rng(config.seed);
  initialize(model.params(), rng);
  Adam adam(config, model.params());

  const Dataset& select_on = dev.empty() ? train_data : dev;
  std::ofstream log;
  std::string best_path, last_path;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    const std::filesystem::path dir(*options.out_dir);
    const std::string log_path = (dir / "metrics.jsonl").string();
    log.open(log_path, std::ios::trunc);
    if (!log) throw DataError("cannot write " + log_path);
    best_path = (dir / "best.ckpt").string();
    last_path = (dir / "last.ckpt").string();
  }

  TrainResult result{model, 0, -1.0, {}};
  const int batch = config.batch_size;
  std::vector<ParameterSet> buffers(std::min<std::size_t>(batch, examples.size()),
                                    model.params().zeros_like());
  std::vector<double> losses(buffers.size());
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  ParameterSet total = model.params().zeros_like();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t count = std::min<std::size_t>(batch, order.size() - start);
      parallel_for(count, config.workers, [&](std::size_t i, int) {
        buffers[i].set_zero();
        const TrainingExample& ex = examples[order[start + i]];
        losses[i] = example_gradient(model.scorer(), ex, buffers[i]);
        if (!std::isfinite(losses[i]) || !buffers[i].all_finite())
          throw DataError("training diverged on sentence " + ex.id);
      });
      total.set_zero();
      for (std::size_t i = 0; i < count; ++i) {
        total.add_scaled(buffers[i], 1.0 / static_cast<double>(count));
        epoch_loss += losses[i];
      }
      adam.step(model.params(), total);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_loss / static_cast<double>(examples.size());
    const DatasetPrediction pred = predict_dataset(model.scorer(), select_on, config.workers);
    rec.dev = evaluate(select_on, pred.as_dataset(select_on));
    result.epochs.push_back(rec);

    const nlohmann::json extra = {{"epoch", epoch}, {"dev_sf1", rec.dev.sf1.f1}};
    if (rec.dev.sf1.f1 > result.best_sf1) {
      result.best_sf1 = rec.dev.sf1.f1;
      result.best_epoch = epoch;
      result.best = model;
      if (options.out_dir) model.save(best_path, extra);
    }
    if (options.out_dir) {
      model.save(last_path, extra);
      log << rec.to_json().dump() << "\n" << std::flush;
    }
    if (options.on_epoch) options.on_epoch(rec);
  }
  if (result.best_sf1 < 0) {  // zero epochs
    result.best_sf1 = 0;
    if (options.out_dir) model.save(best_path, {{"epoch", 0}});
  }
  return result;
}

}  // namespace ssa
