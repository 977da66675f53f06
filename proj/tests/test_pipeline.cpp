#include <doctest.h>

#include "ssa/charts.hpp"
#include "ssa/model.hpp"
#include "ssa/pipeline.hpp"

using namespace ssa;

namespace {

// Scores one fixed labeled tree per stage strictly highest: +10 on its arcs,
// a confident label distribution on its labeled arcs, 0 elsewhere.
class FixedScorer final : public Scorer {
 public:
  FixedScorer(DepTree stage1, DepTree stage2)
      : Scorer(Config{}, Vocabulary{}), trees_{std::move(stage1), std::move(stage2)} {}

  std::unique_ptr<Representations> encode(const Sentence& s, Stage stage,
                                          const SpanList&) const override {
    auto r = std::make_unique<Representations>();
    r->n = s.size();
    r->stage = stage;
    return r;
  }
  ScoreSet<double> score_structure(const Representations& r) const override {
    const DepTree& t = tree(r.stage);
    ScoreSet<double> s(r.n);
    for (int m = 1; m <= r.n; ++m) s.arc(t.heads[m], m) = 10.0;
    return s;
  }
  Eigen::MatrixXd score_labels(const Representations& r, const ArcList& arcs) const override {
    const auto& labels = stage_labels(r.stage);
    const DepTree& t = tree(r.stage);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(arcs.size(), labels.size());
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto [h, m] = arcs[k];
      const ArcLabel want = t.heads[m] == h ? t.labels[m] : ArcLabel::none;
      out(k, label_index(r.stage, want)) = 5.0;
      const double lse = std::log(out.row(k).array().exp().sum());
      out.row(k).array() -= lse;
    }
    return out;
  }
  void backward(const Representations&, const ScoreSet<double>&, const ArcList&,
                const Eigen::MatrixXd&, ParameterSet&) const override {}

 private:
  const DepTree& tree(Stage s) const { return s == Stage::expression ? trees_[0] : trees_[1]; }
  DepTree trees_[2];
};

DepTree tree_of(std::vector<int> modifier_heads) {
  modifier_heads.insert(modifier_heads.begin(), -1);
  return DepTree(modifier_heads);
}

const char* kMoscowText = "Moscow Government expressed the wish to import the Mongolian meat";

}  // namespace

TEST_CASE("hand-built scores recover the Moscow sentence") {
  DepTree first = tree_of({0, 0, 5, 5, 0, 0, 0, 0, 0, 0});
  first.labels[5] = ArcLabel::exp_neutral;
  DepTree second = tree_of({2, 3, 0, 5, 3, 5, 5, 10, 10, 7});
  second.labels[2] = ArcLabel::holder;
  second.labels[7] = ArcLabel::target;
  const FixedScorer scorer(first, second);
  const Sentence s = make_sentence("moscow", kMoscowText);

  // the constructed trees are the decoded ones
  CHECK(decode_expressions(scorer, s) == first);
  CHECK(decode_roles(scorer, s, {{2, 4}}) == second);

  const auto tuples = predict(scorer, s);
  REQUIRE(tuples.size() == 1);
  CHECK(tuples[0] == SentimentTuple{{{0, 1}}, {{6, 9}}, {{2, 4}}, Polarity::neutral});
  CHECK(predict(scorer, s) == tuples);
}

TEST_CASE("stage two keeps its root inside the expression") {
  // the preferred stage-two tree roots at "Moscow", which the mask forbids
  DepTree first = tree_of({0, 0, 5, 5, 0, 0, 0, 0, 0, 0});
  first.labels[5] = ArcLabel::exp_neutral;
  const DepTree second = tree_of({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const FixedScorer scorer(first, second);
  const Sentence s = make_sentence("moscow", kMoscowText);
  const DepTree t = decode_roles(scorer, s, {{2, 4}});
  for (int m = 1; m <= 10; ++m)
    if (t.heads[m] == 0) CHECK((m >= 3 && m <= 5));
  CHECK(predict(scorer, s).size() == 1);
}

TEST_CASE("no expression-labeled root child predicts nothing") {
  const Model zero(Config{}, Vocabulary{});
  CHECK(predict(zero.scorer(), make_sentence("z", "nothing to see here")).empty());
  CHECK(predict(zero.scorer(), make_sentence("e", "")).empty());
}

TEST_CASE("tuples come sorted by expression start") {
  // two expressions: "likes" (position 6) and "hates" (position 2)
  DepTree first = tree_of({0, 0, 0, 0, 0, 0, 0});
  first.labels[6] = ArcLabel::exp_positive;
  first.labels[2] = ArcLabel::exp_negative;
  DepTree second = tree_of({0, 1, 2, 3, 4, 5, 6});
  const FixedScorer scorer(first, second);
  const auto tuples = predict(scorer, make_sentence("two", "a hates b c d likes e"));
  REQUIRE(tuples.size() == 2);
  CHECK(tuples[0].expression == SpanList{{1, 1}});
  CHECK(tuples[0].polarity == Polarity::negative);
  CHECK(tuples[1].expression == SpanList{{5, 5}});
}

TEST_CASE("predict_dataset is order-preserving and worker-independent") {
  Dataset d;
  for (int k = 0; k < 25; ++k)
    d.push_back({make_sentence(std::to_string(k), "the food was great but the service slow"), {}});
  Config c;
  c.encoder = EncoderKind::window;
  c.emb_dim = c.hidden_dim = 8;
  Model m(c, Vocabulary::build(d));
  std::mt19937_64 rng(3);
  initialize(m.params(), rng);
  const auto one = predict_dataset(m.scorer(), d, 1);
  const auto many = predict_dataset(m.scorer(), d, 8);
  REQUIRE(one.records.size() == d.size());
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(one.records[k].tuples == many.records[k].tuples);
  CHECK(one.sentences_per_second.has_value());
  CHECK(one.error_count() == 0);

  const auto none = predict_dataset(m.scorer(), {}, 4);
  CHECK(none.records.empty());
  CHECK_FALSE(none.sentences_per_second.has_value());
}

TEST_CASE("gold-expression mode uses the annotated expressions") {
  DepTree first = tree_of({0, 0, 0});
  DepTree second = tree_of({2, 0, 2});
  second.labels[1] = ArcLabel::holder;
  second.labels[3] = ArcLabel::target;
  const FixedScorer scorer(first, second);
  Dataset d = {{make_sentence("g", "John loves pizza"),
                {{{{0, 0}}, {{2, 2}}, {{1, 1}}, Polarity::positive}}}};
  CHECK(predict_dataset(scorer, d, 1).records[0].tuples.empty());
  const auto gold = predict_dataset(scorer, d, 1, true);
  CHECK(gold.records[0].tuples == d[0].tuples);
}
