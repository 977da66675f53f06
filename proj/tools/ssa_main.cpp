// Command-line front end: train, predict, eval, verify, stats, synth.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssa/data.hpp"
#include "ssa/metrics.hpp"
#include "ssa/pipeline.hpp"
#include "ssa/training.hpp"
#include "ssa/verify.hpp"

namespace {

using namespace ssa;

constexpr int kUsage = 2;
constexpr int kFailure = 1;

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

Dataset read(const std::string& path, bool strict) {
  std::vector<std::string> warnings;
  LoadOptions opt;
  opt.strict = strict;
  Dataset d = load_dataset(path, opt, &warnings);
  report_warnings(warnings);
  return d;
}

std::vector<int> parse_edges(const std::string& text) {
  std::vector<int> edges;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      edges.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--buckets", "expected comma-separated integers, got '" + text + "'");
    }
  }
  return edges;
}

struct TrainArgs {
  std::string data, dev, config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs, workers;
  bool strict = false;
};

int run_train(const TrainArgs& a) {
  Config config = a.config.empty() ? Config{} : load_config(a.config);
  if (a.seed) config.seed = *a.seed;
  if (a.epochs) config.epochs = *a.epochs;
  if (a.workers) config.workers = *a.workers;
  config.validate();
  Dataset train_data = read(a.data, a.strict), dev;
  if (!a.dev.empty())
    dev = read(a.dev, a.strict);
  else
    std::tie(train_data, dev) = split_dataset(train_data, config.dev_fraction, config.seed);
  std::cerr << "training on " << train_data.size() << " sentences, selecting on "
            << (dev.empty() ? train_data.size() : dev.size()) << "\n";
  TrainOptions opt;
  opt.out_dir = a.out;
  opt.on_epoch = [](const EpochRecord& r) { std::cerr << r.to_json().dump() << "\n"; };
  const TrainResult r = train(train_data, dev, config, opt);
  std::cout << "best dev SF1 " << r.best_sf1 << " at epoch " << r.best_epoch << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data, const std::string& out,
                int workers, bool gold, const std::string& report, bool strict) {
  const Model model = Model::load(model_path);
  const Dataset input = read(data, strict);
  const DatasetPrediction pred = predict_dataset(model.scorer(), input, workers, gold);
  for (const auto& r : pred.records)
    if (r.error) std::cerr << "error: " << *r.error << "\n";
  write_dataset(out, pred.as_dataset(input));
  const nlohmann::json summary = {
      {"sentences", input.size()},
      {"errors", pred.error_count()},
      {"seconds", pred.seconds},
      {"sentences_per_second",
       pred.sentences_per_second ? nlohmann::json(*pred.sentences_per_second) : nlohmann::json(nullptr)}};
  std::cout << summary.dump() << "\n";
  if (!report.empty()) {
    std::ofstream f(report);
    if (!f) throw DataError("cannot write " + report);
    f << summary.dump(2) << "\n";
  }
  return pred.error_count() == 0 ? 0 : kFailure;
}

int run_eval(const std::string& gold_path, const std::string& pred_path, const std::string& buckets,
             std::optional<double> min_sf1, const std::string& json_out) {
  const Dataset gold = read(gold_path, false), pred = read(pred_path, false);
  const Evaluation e = evaluate(gold, pred);
  nlohmann::json j = e.to_json();
  std::cout << e.to_text();
  if (!buckets.empty()) {
    const Breakdown b = breakdown(tuples_of(gold), tuples_of(pred), parse_edges(buckets));
    std::cout << b.to_text();
    j["breakdown"] = b.to_json();
  }
  std::cout << j.dump() << "\n";
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    if (!f) throw DataError("cannot write " + json_out);
    f << j.dump(2) << "\n";
  }
  if (min_sf1 && e.sf1.f1 < *min_sf1) {
    std::cerr << "SF1 " << e.sf1.f1 << " is below the required " << *min_sf1 << "\n";
    return kFailure;
  }
  return 0;
}

int run_verify(int n_max, int trials, std::uint64_t seed, int masks) {
  if (n_max < 1 || n_max > 8) throw CLI::ValidationError("--n-max", "must lie in 1..8");
  std::vector<verify::SuiteResult> results;
  const auto show = [&](verify::SuiteResult r) {
    std::cout << (r.ok() ? "ok   " : "FAIL ") << r.name << ": " << r.checks << " checks, "
              << r.failures << " failures, " << r.seconds << " s\n";
    if (!r.ok()) std::cerr << "  first failure: " << r.first_failure << "\n";
    results.push_back(std::move(r));
  };
  show(verify::inside_suite(n_max, trials, seed, masks));
  show(verify::viterbi_suite(n_max, trials, seed + 1, masks));
  show(verify::marginal_suite(std::min(n_max, 5), std::max(1, trials / 10), seed + 2));
  show(verify::gradient_suite(std::max(1, trials / 20), seed + 3));
  show(verify::loss_suite(std::max(1, trials / 2), seed + 4));
  show(verify::round_trip_suite(std::min(n_max, 6), 3));
  for (const auto& r : results)
    if (!r.ok()) return kFailure;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured sentiment tuples via two-stage latent-tree parsing"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoints");
  train_cmd->add_option("--data", ta.data, "training data (JSON)")->required();
  train_cmd->add_option("--dev", ta.dev, "development data; default: split off dev_fraction");
  train_cmd->add_option("--config", ta.config, "key = value config file");
  train_cmd->add_option("--out", ta.out, "output directory")->required();
  train_cmd->add_option("--seed", ta.seed, "override the config seed");
  train_cmd->add_option("--epochs", ta.epochs, "override the config epochs");
  train_cmd->add_option("--workers", ta.workers, "override the config workers");
  train_cmd->add_flag("--strict", ta.strict, "misaligned offsets are errors");

  std::string model, data, out, report;
  int workers = 1;
  bool gold = false, strict = false;
  auto* predict_cmd = app.add_subcommand("predict", "predict tuples for a dataset");
  predict_cmd->add_option("--model", model, "checkpoint")->required();
  predict_cmd->add_option("--data", data, "input data (JSON)")->required();
  predict_cmd->add_option("--out", out, "where to write predictions")->required();
  predict_cmd->add_option("--workers", workers, "threads")->check(CLI::Range(1, 256));
  predict_cmd->add_flag("--gold-expressions", gold, "take expressions from the input annotation");
  predict_cmd->add_option("--report", report, "write the throughput summary here");
  predict_cmd->add_flag("--strict", strict, "misaligned offsets are errors");

  std::string gold_path, pred_path, buckets, json_out;
  std::optional<double> min_sf1;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
  eval_cmd->add_option("--gold", gold_path, "gold data")->required();
  eval_cmd->add_option("--pred", pred_path, "predicted data")->required();
  eval_cmd->add_option("--buckets", buckets, "length bucket lower edges, e.g. 1,2,4,8");
  eval_cmd->add_option("--min-sf1", min_sf1, "exit 1 when SF1 is lower");
  eval_cmd->add_option("--json", json_out, "also write the metrics here");

  int n_max = 7, trials = 200, masks = 50;
  std::uint64_t seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in oracle checks");
  verify_cmd->add_option("--n-max", n_max, "largest sentence length for brute force");
  verify_cmd->add_option("--trials", trials, "random instances per length")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", seed, "random seed");
  verify_cmd->add_option("--masks", masks, "random masks per length")->check(CLI::NonNegativeNumber);

  std::string stats_data;
  bool stats_json = false;
  auto* stats_cmd = app.add_subcommand("stats", "span length statistics");
  stats_cmd->add_option("--data", stats_data, "dataset")->required();
  stats_cmd->add_flag("--json", stats_json, "print JSON only");

  SynthOptions so;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "write a templated synthetic corpus");
  synth_cmd->add_option("--out", synth_out, "output file")->required();
  synth_cmd->add_option("--sentences", so.sentences, "sentence count")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", so.seed, "random seed");
  synth_cmd->add_option("--mean-tokens", so.mean_tokens, "pad sentences to about this length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train_cmd) return run_train(ta);
    if (*predict_cmd) return run_predict(model, data, out, workers, gold, report, strict);
    if (*eval_cmd) return run_eval(gold_path, pred_path, buckets, min_sf1, json_out);
    if (*verify_cmd) return run_verify(n_max, trials, seed, masks);
    if (*stats_cmd) {
      const DatasetStats s = dataset_stats(read(stats_data, false));
      if (stats_json)
        std::cout << s.to_json().dump(2) << "\n";
      else
        std::cout << s.to_text();
      return 0;
    }
    if (*synth_cmd) {
      write_dataset(synth_out, synthesize(so));
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
