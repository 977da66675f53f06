#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "ssa/charts.hpp"
#include "ssa/training.hpp"
#include "ssa/pipeline.hpp"
#include "ssa/verify.hpp"

using namespace ssa;

namespace {

Config small(EncoderKind kind) {
  Config c;
  c.encoder = kind;
  c.emb_dim = 4;
  c.hidden_dim = 3;
  c.arc_dim = 3;
  c.sib_dim = 2;
  c.span_dim = 2;
  c.label_dim = 3;
  c.hash_bits = 10;
  return c;
}

AnnotatedSentence john() {
  AnnotatedSentence ex{make_sentence("john", "John loves pizza"), {}};
  ex.tuples.push_back({{{0, 0}}, {{2, 2}}, {{1, 1}}, Polarity::positive});
  return ex;
}

Dataset tiny_corpus() {
  Dataset d;
  d.push_back(john());
  AnnotatedSentence b{make_sentence("mary", "Mary hates the slow service"), {}};
  b.tuples.push_back({{{0, 0}}, {{3, 4}}, {{1, 1}}, Polarity::negative});
  d.push_back(b);
  d.push_back({make_sentence("rain", "it rained today"), {}});
  AnnotatedSentence c{make_sentence("food", "the food was great"), {}};
  c.tuples.push_back({{}, {{0, 1}}, {{3, 3}}, Polarity::positive});
  d.push_back(c);
  return d;
}

void randomize(ParameterSet& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  initialize(p, rng);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t k = 0; k < p.size(); ++k)
    for (Eigen::Index i = 0; i < p.block(k).size(); ++i) p.block(k).data()[i] += u(rng);
}

// Independent oracle: enumerate every projective tree, keep the admitted
// ones, add the gold label log-probability of each labeled arc they use.
double brute_force_loss(const Scorer& scorer, const TrainingExample& ex) {
  double loss = 0;
  const int n = ex.sentence.size();
  for (const auto& inst : ex.instances) {
    auto reps = scorer.encode(ex.sentence, inst.stage, inst.expression);
    const ScoreSet<double> s = scorer.score_structure(*reps);
    const auto& la = inst.target.labels;
    const Eigen::MatrixXd logp = scorer.score_labels(*reps, la.arcs);
    double z = 0, num = 0;
    for (const auto& et : projective_trees(n)) {
      const double base = tree_score(s, et.tree);
      z += std::exp(base);
      if (!inst.target.mask.admits(et.tree)) continue;
      double extra = 0;
      for (std::size_t k = 0; k < la.arcs.size(); ++k)
        if (et.tree.heads[la.arcs[k].second] == la.arcs[k].first)
          extra += logp(k, label_index(inst.stage, la.gold[k]));
      num += std::exp(base + extra);
    }
    loss += -std::log(num / z);
  }
  return loss;
}

}  // namespace

TEST_CASE("training example layout") {
  const TrainingExample ex = build_training_example(tiny_corpus()[1]);
  REQUIRE(ex.instances.size() == 2);
  CHECK(ex.instances[0].stage == Stage::expression);
  CHECK(ex.instances[1].stage == Stage::role);
  CHECK(ex.instances[1].expression == SpanList{{1, 1}});
  CHECK(build_training_example(tiny_corpus()[2]).instances.size() == 1);
}

TEST_CASE("bad annotations name the sentence") {
  AnnotatedSentence bad{make_sentence("broken-7", "a b c"), {}};
  bad.tuples.push_back({{}, {}, {{1, 5}}, Polarity::positive});
  try {
    build_training_example(bad);
    FAIL("accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("broken-7") != std::string::npos);
  }
}

TEST_CASE("loss equals the enumerated negative log-likelihood") {
  const TrainingExample ex = build_training_example(john());
  for (EncoderKind kind : {EncoderKind::sparse, EncoderKind::window, EncoderKind::bilstm})
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Model m(small(kind), Vocabulary::build({john()}));
      randomize(m.params(), seed);
      const double fast = example_loss(m.scorer(), ex);
      const double slow = brute_force_loss(m.scorer(), ex);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
      CHECK(fast > 0);
    }
}

TEST_CASE("gradient and loss suites") {
  const auto g = verify::gradient_suite(2, 5);
  CHECK_MESSAGE(g.ok(), g.first_failure);
  CHECK(g.checks > 1000);
  const auto l = verify::loss_suite(20, 6);
  CHECK_MESSAGE(l.ok(), l.first_failure);
}

TEST_CASE("words absent from the example get no gradient") {
  Dataset vocab_source = tiny_corpus();
  Model m(small(EncoderKind::bilstm), Vocabulary::build(vocab_source));
  randomize(m.params(), 3);
  ParameterSet grad = m.params().zeros_like();
  example_gradient(m.scorer(), build_training_example(john()), grad);
  const Vocabulary& v = m.vocabulary();
  CHECK(grad["emb"].col(v.id("pizza")).squaredNorm() > 0);
  CHECK(grad["emb"].col(v.id("service")).squaredNorm() == 0.0);
  CHECK(grad["emb"].col(v.id("rained")).squaredNorm() == 0.0);
}

TEST_CASE("adam clips to the global norm") {
  Config c;
  c.clip = 1.0;
  c.lr = 0.1;
  ParameterSet p;
  p.add("a", 2, 1);
  ParameterSet g = p.zeros_like();
  g["a"] << 3.0, 4.0;
  Adam adam(c, p);
  CHECK(adam.step(p, g) == doctest::Approx(5.0));
  CHECK(std::sqrt(g.squared_norm()) == doctest::Approx(1.0));
  // first bias-corrected step moves each coordinate by about lr
  CHECK(p["a"](0) == doctest::Approx(-0.1).epsilon(1e-4));
}

TEST_CASE("zero learning rate leaves parameters alone") {
  Config c = small(EncoderKind::window);
  c.lr = 0;
  c.epochs = 3;
  c.batch_size = 2;
  const Dataset d = tiny_corpus();
  Model init(c, Vocabulary::build(d));
  std::mt19937_64 rng(c.seed);
  initialize(init.params(), rng);
  const TrainResult r = train(d, {}, c);
  CHECK(r.best.params() == init.params());
}

TEST_CASE("seeded training is reproducible and independent of workers") {
  const Dataset d = tiny_corpus();
  const auto dir = std::filesystem::temp_directory_path() / "ssa_train_det";
  std::filesystem::remove_all(dir);
  std::string logs[3];
  for (int run = 0; run < 3; ++run) {
    Config c = small(EncoderKind::bilstm);
    c.epochs = 3;
    c.batch_size = 2;
    c.lr = 0.01;
    c.workers = run == 2 ? 3 : 1;
    TrainOptions opt;
    opt.out_dir = (dir / std::to_string(run)).string();
    train(d, {d[0], d[3]}, c, opt);
    logs[run] = testing::read_file(*opt.out_dir + "/metrics.jsonl");
    CHECK(std::filesystem::exists(*opt.out_dir + "/best.ckpt"));
    CHECK(std::filesystem::exists(*opt.out_dir + "/last.ckpt"));
  }
  CHECK(!logs[0].empty());
  CHECK(logs[0] == logs[1]);
  CHECK(logs[0] == logs[2]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a reloaded best checkpoint reproduces its dev score") {
  const Dataset d = tiny_corpus();
  Config c = small(EncoderKind::sparse);
  c.epochs = 8;
  c.batch_size = 1;
  c.lr = 0.1;
  const auto dir = std::filesystem::temp_directory_path() / "ssa_train_ckpt";
  TrainOptions opt;
  opt.out_dir = dir.string();
  const TrainResult r = train(d, {}, c, opt);
  nlohmann::json meta;
  const Model back = Model::load((dir / "best.ckpt").string(), &meta);
  CHECK(meta["dev_sf1"].get<double>() == r.best_sf1);
  CHECK(meta["epoch"].get<int>() == r.best_epoch);
  const auto pred = predict_dataset(back.scorer(), d, 1);
  CHECK(evaluate(d, pred.as_dataset(d)).sf1.f1 == r.best_sf1);
  std::filesystem::remove_all(dir);
}
