// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ssa/data.hpp"
#include "ssa/metrics.hpp"
#include "ssa/pipeline.hpp"
#include "ssa/training.hpp"
#include "ssa/verify.hpp"

using namespace ssa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome from_suites(std::initializer_list<verify::SuiteResult> suites, double limit = 0) {
  Outcome o{true, ""};
  double total = 0;
  for (const auto& s : suites) {
    total += s.seconds;
    o.detail += (o.detail.empty() ? "" : "; ") + s.name + " " + std::to_string(s.checks) +
                " checks, " + std::to_string(s.failures) + " failures";
    if (!s.ok()) {
      o.pass = false;
      o.detail += " (" + s.first_failure + ")";
    }
  }
  if (limit > 0 && total >= limit) {
    o.pass = false;
    o.detail += "; too slow";
  }
  char t[32];
  std::snprintf(t, sizeof t, "; %.2f s", total);
  o.detail += t;
  return o;
}

Config synthetic_config() {
  Config c;
  c.encoder = EncoderKind::sparse;
  c.lr = 0.02;
  c.batch_size = 1;
  c.epochs = 50;
  c.seed = 1;
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome learnability(Model* trained) {
  const auto t0 = Clock::now();
  const Dataset train_data = synthesize({50, 1, 0});
  const Dataset dev = synthesize({25, 1001, 0});
  const TrainResult r = train(train_data, dev, synthetic_config());
  const double secs = seconds_since(t0);
  if (trained) *trained = r.best;
  int first = 0;
  for (const auto& e : r.epochs)
    if (e.dev.sf1.f1 >= 0.95) {
      first = e.epoch;
      break;
    }
  char buf[160];
  std::snprintf(buf, sizeof buf, "best dev SF1 %.4f at epoch %d, first >= 0.95 at epoch %d, %.1f s",
                r.best_sf1, r.best_epoch, first, secs);
  return {r.best_sf1 >= 0.95 && first >= 1 && first <= 50 && secs < 300, buf};
}

Outcome metric_fixtures() {
  const auto tup = [](SpanList h, SpanList t, SpanList e, Polarity p) {
    return SentimentTuple{std::move(h), std::move(t), std::move(e), p};
  };
  bool ok = true;
  std::string why;
  const auto expect = [&](bool cond, const char* what) {
    if (!cond && ok) why = what;
    ok = ok && cond;
  };
  const auto is = [](const Score& s, double p, double r, double f) {
    return s.precision == p && s.recall == r && s.f1 == f;
  };
  const TupleCorpus g = {{tup({{0, 1}}, {{6, 9}}, {{2, 4}}, Polarity::neutral)}};
  const Evaluation same = evaluate(g, g);
  expect(is(same.holder, 1, 1, 1) && is(same.target, 1, 1, 1) && is(same.expression, 1, 1, 1),
         "identical spans");
  expect(is(same.sf1, 1, 1, 1) && is(same.nsf1, 1, 1, 1), "identical tuples");
  expect(is(span_f1(g, {{}}, Role::expression), 0, 0, 0), "empty prediction");
  const Score overlap = span_f1({{tup({}, {}, {{2, 4}}, Polarity::positive)}},
                                {{tup({}, {}, {{3, 5}}, Polarity::positive)}}, Role::expression);
  expect(is(overlap, 2.0 / 3, 2.0 / 3, 2.0 / 3), "token overlap 2/3");
  const TupleCorpus flipped = {{tup({{0, 1}}, {{6, 9}}, {{2, 4}}, Polarity::positive)}};
  expect(is(graph_f1(g, flipped, false), 1, 1, 1) && is(graph_f1(g, flipped, true), 0, 0, 0),
         "polarity only affects SF1");
  const TupleCorpus two = {{tup({{0, 0}}, {{3, 3}}, {{1, 2}}, Polarity::positive),
                            tup({}, {{5, 5}}, {{6, 6}}, Polarity::negative)}};
  const TupleCorpus half = {{tup({{0, 0}}, {{3, 3}}, {{1, 2}}, Polarity::positive),
                             tup({{4, 4}}, {{5, 5}}, {{6, 6}}, Polarity::negative)}};
  expect(is(graph_f1(two, half, true), 0.5, 0.5, 0.5), "one match one spurious");

  // NSF1 >= SF1 on random corpus pairs
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pos(0, 6), pol(0, 2);
  int pairs = 0;
  for (int trial = 0; trial < 500; ++trial) {
    TupleCorpus a(4), b(4);
    for (int s = 0; s < 4; ++s)
      for (int k = pos(rng) % 3; k > 0; --k) {
        const int x = pos(rng), y = pos(rng);
        const auto t = tup({}, {{pos(rng), 6}}, {{std::min(x, y), std::max(x, y)}},
                           static_cast<Polarity>(pol(rng)));
        a[s].push_back(t);
        auto u = t;
        if (pol(rng) == 0) u.polarity = static_cast<Polarity>(pol(rng));
        if (pol(rng) == 0) u.target.clear();
        b[s].push_back(u);
      }
    const Evaluation e = evaluate(a, b);
    expect(e.nsf1.f1 >= e.sf1.f1 && e.nsf1.matched >= e.sf1.matched, "NSF1 below SF1");
    ++pairs;
  }
  return {ok, ok ? "6 fixtures exact, NSF1 >= SF1 on " + std::to_string(pairs) + " corpus pairs" : why};
}

Outcome determinism(const Model& model) {
  const fs::path dir = fs::temp_directory_path() / "ssa_acceptance_determinism";
  fs::remove_all(dir);
  Config c = synthetic_config();
  c.epochs = 10;
  const Dataset train_data = synthesize({50, 1, 0});
  const Dataset dev = synthesize({25, 1001, 0});
  std::string logs[2];
  for (int run = 0; run < 2; ++run) {
    TrainOptions opt;
    opt.out_dir = (dir / std::to_string(run)).string();
    train(train_data, dev, c, opt);
    logs[run] = read_file(dir / std::to_string(run) / "metrics.jsonl");
  }
  fs::remove_all(dir);
  const bool same_logs = !logs[0].empty() && logs[0] == logs[1];

  const Dataset corpus = synthesize({200, 77, 24});
  const auto one = predict_dataset(model.scorer(), corpus, 1);
  bool same_pred = true;
  for (int workers : {2, 4, 8}) {
    const auto many = predict_dataset(model.scorer(), corpus, workers);
    for (std::size_t k = 0; k < corpus.size(); ++k)
      same_pred = same_pred && one.records[k].tuples == many.records[k].tuples &&
                  one.records[k].error == many.records[k].error;
  }
  return {same_logs && same_pred,
          std::string("metrics logs ") + (same_logs ? "identical" : "DIFFER") + " (" +
              std::to_string(logs[0].size()) + " bytes); predictions for 1/2/4/8 workers " +
              (same_pred ? "identical" : "DIFFER")};
}

Outcome throughput(const Model& model) {
  const Dataset corpus = synthesize({1000, 2024, 24});
  const DatasetStats s = dataset_stats(corpus);
  const auto pred = predict_dataset(model.scorer(), corpus, 1);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%lld sentences, mean %.1f tokens, %.2f s, %.1f sentences/s (sparse scorer, 1 worker), "
                "%zu errors",
                s.sentences, static_cast<double>(s.tokens) / s.sentences, pred.seconds,
                pred.sentences_per_second.value_or(0), pred.error_count());
  return {pred.records.size() == 1000 && pred.sentences_per_second.has_value() &&
              pred.error_count() == 0,
          buf};
}

}  // namespace

int main() {
  const std::uint64_t seed = 20240601;
  Model trained(synthetic_config(), Vocabulary{});
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"inside-oracle equivalence",
       [&] { return from_suites({verify::inside_suite(7, 200, seed, 50)}, 120); }},
      {"viterbi optimality", [&] { return from_suites({verify::viterbi_suite(7, 200, seed, 50)}); }},
      {"marginal-gradient identity",
       [&] { return from_suites({verify::marginal_suite(5, 20, seed + 1)}); }},
      {"loss gradient correctness",
       [&] { return from_suites({verify::gradient_suite(10, seed + 2)}); }},
      {"conversion round-trip", [&] { return from_suites({verify::round_trip_suite(6, 3)}); }},
      {"loss sanity", [&] { return from_suites({verify::loss_suite(100, seed + 3)}); }},
      {"synthetic learnability", [&] { return learnability(&trained); }},
      {"metrics fixtures", [&] { return metric_fixtures(); }},
      {"determinism", [&] { return determinism(trained); }},
      {"throughput report", [&] { return throughput(trained); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
