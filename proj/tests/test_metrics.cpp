#include <doctest.h>

#include <random>

#include "ssa/metrics.hpp"

using namespace ssa;

namespace {

SentimentTuple tup(SpanList h, SpanList t, SpanList e, Polarity p = Polarity::positive) {
  return {std::move(h), std::move(t), std::move(e), p};
}

bool exact(const Score& s, double p, double r, double f) {
  return std::abs(s.precision - p) < 1e-15 && std::abs(s.recall - r) < 1e-15 &&
         std::abs(s.f1 - f) < 1e-15;
}

}  // namespace

TEST_CASE("identical corpora score 1") {
  const TupleCorpus g = {{tup({{0, 1}}, {{6, 9}}, {{2, 4}}, Polarity::neutral)},
                         {tup({}, {{0, 0}}, {{1, 1}, {3, 3}})}};
  const Evaluation e = evaluate(g, g);
  CHECK(exact(e.holder, 1, 1, 1));
  CHECK(exact(e.target, 1, 1, 1));
  CHECK(exact(e.expression, 1, 1, 1));
  CHECK(exact(e.sf1, 1, 1, 1));
  CHECK(exact(e.nsf1, 1, 1, 1));
}

TEST_CASE("empty prediction scores 0") {
  const TupleCorpus g = {{tup({{0, 1}}, {{6, 9}}, {{2, 4}})}};
  const TupleCorpus p = {{}};
  CHECK(exact(span_f1(g, p, Role::expression), 0, 0, 0));
  CHECK(exact(graph_f1(g, p, true), 0, 0, 0));
}

TEST_CASE("token overlap fixture") {
  const TupleCorpus g = {{tup({}, {}, {{2, 4}})}};
  const TupleCorpus p = {{tup({}, {}, {{3, 5}})}};
  const Score s = span_f1(g, p, Role::expression);
  CHECK(s.matched == 2);
  CHECK(exact(s, 2.0 / 3, 2.0 / 3, 2.0 / 3));
}

TEST_CASE("wrong polarity only costs SF1") {
  const TupleCorpus g = {{tup({{0, 0}}, {{3, 3}}, {{1, 2}}, Polarity::positive)}};
  const TupleCorpus p = {{tup({{0, 0}}, {{3, 3}}, {{1, 2}}, Polarity::negative)}};
  CHECK(exact(graph_f1(g, p, false), 1, 1, 1));
  CHECK(exact(graph_f1(g, p, true), 0, 0, 0));
}

TEST_CASE("one exact match and one spurious prediction") {
  const TupleCorpus g = {{tup({{0, 0}}, {{3, 3}}, {{1, 2}}), tup({}, {{5, 5}}, {{6, 6}})}};
  const TupleCorpus p = {{tup({{0, 0}}, {{3, 3}}, {{1, 2}}), tup({{4, 4}}, {{5, 5}}, {{6, 6}})}};
  CHECK(exact(graph_f1(g, p, true), 0.5, 0.5, 0.5));
}

TEST_CASE("segments compare as token sets and matching is one-to-one") {
  const TupleCorpus g = {{tup({}, {}, {{1, 3}}), tup({}, {}, {{1, 3}})}};
  const TupleCorpus p = {{tup({}, {}, {{1, 1}, {2, 3}}), tup({}, {}, {{1, 3}}), tup({}, {}, {{1, 3}})}};
  const Score s = graph_f1(g, p, true);
  CHECK(s.matched == 2);
  CHECK(s.predicted == 3);
}

TEST_CASE("misaligned corpora are rejected") {
  CHECK_THROWS_AS(span_f1({{}}, {}, Role::holder), ContractViolation);
  Dataset a = {{make_sentence("1", "a b"), {}}};
  Dataset b = {{make_sentence("2", "a b"), {}}};
  CHECK_THROWS_AS(evaluate(a, b), ContractViolation);
}

TEST_CASE("NSF1 is never below SF1") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pos(0, 5), pol(0, 2), count(0, 3);
  const auto random_tuple = [&] {
    const int a = pos(rng), b = pos(rng);
    const Span e{std::min(a, b), std::max(a, b)};
    SpanList h;
    if (pos(rng) < 3) h.push_back({pos(rng), pos(rng)});
    if (!h.empty() && h[0].start > h[0].end) std::swap(h[0].start, h[0].end);
    return tup(h, {}, {e}, static_cast<Polarity>(pol(rng)));
  };
  for (int trial = 0; trial < 200; ++trial) {
    TupleCorpus g(3), p(3);
    for (int s = 0; s < 3; ++s) {
      for (int k = count(rng); k > 0; --k) g[s].push_back(random_tuple());
      p[s] = g[s];
      for (auto& t : p[s])
        if (pol(rng) == 0) t.polarity = static_cast<Polarity>(pol(rng));
      if (pol(rng) == 0) p[s].push_back(random_tuple());
    }
    const Evaluation e = evaluate(g, p);
    CHECK(e.nsf1.matched >= e.sf1.matched);
    CHECK(e.nsf1.f1 >= e.sf1.f1);
  }
}

TEST_CASE("length breakdown") {
  // expressions of length 1, 3 and 5; tuple lengths 2, 5 and 5
  const TupleCorpus g = {{tup({{0, 0}}, {}, {{2, 2}}), tup({}, {{8, 9}}, {{3, 5}})},
                         {tup({}, {}, {{0, 4}})}};
  const TupleCorpus p = {{tup({{0, 0}}, {}, {{2, 2}}), tup({}, {{8, 9}}, {{3, 4}})}, {}};

  SUBCASE("one bucket equals the global numbers") {
    const Breakdown b = breakdown(g, p, {1});
    REQUIRE(b.expression[0].score.has_value());
    CHECK(b.expression[0].score->f1 == span_f1(g, p, Role::expression).f1);
    CHECK(b.tuple[0].score->f1 == graph_f1(g, p, true).f1);
  }
  SUBCASE("hand-assigned buckets") {
    const Breakdown b = breakdown(g, p, {1, 2, 4, 8});
    REQUIRE(b.expression.size() == 4);
    // [1,2): gold {2}, pred {2}
    CHECK(exact(*b.expression[0].score, 1, 1, 1));
    // [2,4): gold {3,4,5}; pred {3,4} has length 2 -> 2 of 2 predicted, 2 of 3 gold
    CHECK(b.expression[1].score->matched == 2);
    CHECK(b.expression[1].score->gold == 3);
    CHECK(b.expression[1].score->predicted == 2);
    // [4,8): gold {0..4} in sentence 2, nothing predicted
    CHECK(exact(*b.expression[2].score, 0, 0, 0));
    CHECK_FALSE(b.expression[3].score.has_value());
    // tuples: lengths 2 | 5,5 gold vs 4 predicted
    CHECK(exact(*b.tuple[1].score, 1, 1, 1));
    CHECK(b.tuple[2].score->gold == 2);
    CHECK(b.tuple[2].score->predicted == 1);
    CHECK(b.tuple[2].score->matched == 0);
    CHECK_FALSE(b.tuple[3].score.has_value());
    CHECK(b.to_json()["expression_f1_by_length"][3]["score"].is_null());
  }
  CHECK_THROWS_AS(breakdown(g, p, {3, 3}), ContractViolation);
}
