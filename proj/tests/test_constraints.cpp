#include <doctest.h>

#include <cmath>

#include "ssa/charts.hpp"
#include "ssa/constraints.hpp"
#include "ssa/verify.hpp"

using namespace ssa;

namespace {

DepTree tree_of(std::vector<int> modifier_heads) {
  modifier_heads.insert(modifier_heads.begin(), -1);
  return DepTree(modifier_heads);
}

long long count_admitted(const ConstraintMask& mask) {
  return brute_force(ScoreSet<double>(mask.n), &mask, Semiring::sum).tree_count;
}

// "Moscow Government expressed the wish to import the Mongolian meat."
constexpr int kMoscowLength = 10;

SentimentTuple moscow_tuple() {
  return {{{0, 1}}, {{6, 9}}, {{2, 4}}, Polarity::neutral};
}

// Holder and target hang from "expressed" and "wish"; "to" is irrelevant.
DepTree moscow_full_tree() {
  DepTree t = tree_of({2, 3, 0, 5, 3, 5, 5, 10, 10, 7});
  t.labels[3] = ArcLabel::exp_neutral;
  t.labels[2] = ArcLabel::holder;
  t.labels[7] = ArcLabel::target;
  return t;
}

}  // namespace

TEST_CASE("stage 1: no tuples gives a permissive mask") {
  const StageTarget st = build_stage1_mask(5, {});
  const ConstraintMask all = ConstraintMask::permissive(5);
  CHECK(st.mask.finish_allowed == all.finish_allowed);
  for (int h = 0; h <= 5; ++h)
    for (int m = 1; m <= 5; ++m)
      if (h != m) CHECK(st.mask.arc(h, m));
  CHECK(count_admitted(st.mask) == 273);
  for (ArcLabel l : st.labels.gold) CHECK(l == ArcLabel::none);
}

TEST_CASE("stage 1 on the Moscow sentence") {
  const StageTarget st = build_stage1_mask(kMoscowLength, {moscow_tuple()});
  // Token 1 -> token 3 and token 5 -> token 3 cross the expression boundary.
  CHECK_FALSE(st.mask.arc(2, 4));
  CHECK_FALSE(st.mask.arc(6, 4));
  CHECK_FALSE(st.mask.arc(4, 6));
  CHECK(st.mask.arc(5, 4));
  CHECK(st.mask.arc(0, 4));
  // Free words on each side form root-attached forests (3 and 273 ways); the
  // expression is one of the 7 single-rooted trees over three words.
  const double log_count = inside(ScoreSet<double>(kMoscowLength), &st.mask);
  CHECK(std::exp(log_count) == doctest::Approx(3.0 * 7.0 * 273.0));

  CHECK(st.labels.gold[4] == ArcLabel::exp_neutral);
  CHECK(st.labels.gold[0] == ArcLabel::none);
  CHECK(st.labels.gold[9] == ArcLabel::none);

  // Root picks "wish", which takes "expressed" and "the".
  const DepTree latent = tree_of({0, 0, 5, 5, 0, 0, 0, 0, 0, 0});
  CHECK(st.mask.admits(latent));
  CHECK_FALSE(st.mask.admits(tree_of({0, 0, 0, 5, 0, 0, 0, 0, 0, 0})));  // two roots
  CHECK_FALSE(st.mask.admits(tree_of({0, 0, 5, 5, 0, 5, 0, 0, 0, 0})));  // grabs "to"
}

TEST_CASE("stage 1 tree counts on four tokens") {
  // Head in {1, 2}, the other word under it, tokens 0 and 3 on the root.
  const StageTarget st = build_stage1_mask(4, {{{}, {}, {{1, 2}}, Polarity::positive}});
  CHECK(count_admitted(st.mask) == 2);
}

TEST_CASE("stage 2 on the Moscow sentence") {
  const SentimentTuple t = moscow_tuple();
  const StageTarget st = build_stage2_mask(kMoscowLength, t.expression, t);
  CHECK(st.mask.admits(moscow_full_tree()));
  for (int m = 1; m <= kMoscowLength; ++m) CHECK(st.mask.arc(0, m) == (m >= 3 && m <= 5));
  // Holder words cannot reach into the target, nor hang from "to".
  CHECK_FALSE(st.mask.arc(7, 2));
  CHECK_FALSE(st.mask.arc(6, 2));
  CHECK(st.mask.arc(4, 2));
  // Holder split across two expression heads.
  DepTree split = moscow_full_tree();
  split.heads[1] = 3;
  CHECK_FALSE(st.mask.admits(split));

  const int holder_arc = st.labels.find(3, 2);
  REQUIRE(holder_arc >= 0);
  CHECK(st.labels.gold[holder_arc] == ArcLabel::holder);
  CHECK(st.labels.gold[st.labels.find(5, 7)] == ArcLabel::target);
  CHECK(st.labels.gold[st.labels.find(5, 6)] == ArcLabel::none);
  // Target words other than the head never meet an expression head in a
  // legal tree; the class label still says target.
  CHECK(st.labels.gold[st.labels.find(5, 8)] == ArcLabel::target);
  CHECK(st.labels.find(3, 4) < 0);
}

TEST_CASE("stage 2 with no roles only pins the expression") {
  const SpanList e{{1, 2}};
  const StageTarget st = build_stage2_mask(5, e, {{}, {}, e, Polarity::negative});
  long long expected = 0;
  for_each_projective_tree(5, [&](const DepTree& t) {
    int root_children = 0;
    bool ok = true;
    for (int m = 1; m <= 5; ++m) {
      if (t.heads[m] == 0) ok = ok && (m == 2 || m == 3) && ++root_children == 1;
      if ((m == 2 || m == 3) && t.heads[m] != 0) ok = ok && (t.heads[m] == 2 || t.heads[m] == 3);
    }
    expected += ok;
  });
  CHECK(count_admitted(st.mask) == expected);
}

TEST_CASE("stage 2 tree count with one holder") {
  // Holder {0,1}: 2 single-rooted shapes under the expression word; the two
  // trailing words form one of 3 forests under it.
  const SpanList e{{2, 2}};
  const StageTarget st = build_stage2_mask(5, e, {{{0, 1}}, {}, e, Polarity::positive});
  CHECK(count_admitted(st.mask) == 6);
}

TEST_CASE("annotation errors") {
  CHECK_THROWS_AS(build_stage1_mask(3, {{{}, {}, {{2, 3}}, Polarity::neutral}}), AnnotationError);
  try {
    build_stage1_mask(6, {{{}, {}, {{1, 2}}, Polarity::neutral},
                          {{}, {}, {{2, 4}}, Polarity::negative}});
    FAIL("expected an annotation error");
  } catch (const AnnotationError& e) {
    CHECK(e.tuple_index() == 1);
  }
  // Identical expressions are shared, not rejected.
  CHECK_NOTHROW(build_stage1_mask(6, {{{{0, 0}}, {}, {{1, 2}}, Polarity::neutral},
                                      {{}, {{4, 5}}, {{1, 2}}, Polarity::neutral}}));
  CHECK_THROWS_AS(build_stage2_mask(3, {{0, 5}}, {}), AnnotationError);
}

TEST_CASE("grouping merges tuples that share an expression") {
  std::vector<std::string> warnings;
  const auto groups = group_tuples(8,
                                   {{{{0, 0}}, {}, {{2, 3}}, Polarity::positive},
                                    {{}, {{5, 6}}, {{2, 3}}, Polarity::positive},
                                    {{{4, 4}}, {{4, 4}}, {{7, 7}}, Polarity::negative}},
                                   &warnings);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].holder == SpanList{{0, 0}});
  CHECK(groups[0].target == SpanList{{5, 6}});
  CHECK(groups[0].tuples == std::vector<std::size_t>{0, 1});
  CHECK(groups[1].holder.empty());
  CHECK(groups[1].target.empty());
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("recover_stage1") {
  DepTree latent = tree_of({0, 0, 5, 5, 0, 0, 0, 0, 0, 0});
  latent.labels[5] = ArcLabel::exp_neutral;
  const auto found = recover_stage1(latent);
  REQUIRE(found.size() == 1);
  CHECK(found[0].spans == SpanList{{2, 4}});
  CHECK(found[0].polarity == Polarity::neutral);

  CHECK(recover_stage1(tree_of({0, 0, 5, 5, 0, 0, 0, 0, 0, 0})).empty());

  // Incomplete pieces join the nearest complete expression, right on ties.
  DepTree pieces = tree_of({0, 0, 0, 0, 0, 0, 0});
  pieces.labels[1] = ArcLabel::exp_positive;
  pieces.labels[4] = ArcLabel::exp_incomplete;
  pieces.labels[7] = ArcLabel::exp_negative;
  pieces.labels[3] = ArcLabel::exp_incomplete;
  const auto merged = recover_stage1(pieces);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].spans == SpanList{{0, 0}, {2, 2}});
  CHECK(merged[1].spans == SpanList{{3, 3}, {6, 6}});

  DepTree orphan = tree_of({0, 0});
  orphan.labels[2] = ArcLabel::exp_incomplete;
  CHECK(recover_stage1(orphan).empty());
}

TEST_CASE("recover_stage2") {
  const SpanList e{{2, 4}};
  const auto roles = recover_stage2(moscow_full_tree(), e);
  CHECK(roles.holder == SpanList{{0, 1}});
  CHECK(roles.target == SpanList{{6, 9}});

  DepTree plain = moscow_full_tree();
  plain.labels.assign(plain.labels.size(), ArcLabel::none);
  CHECK(recover_stage2(plain, e) == RecoveredRoles{});

  CHECK_THROWS_AS(recover_stage2(moscow_full_tree(), SpanList{{6, 9}}), ContractViolation);
}

TEST_CASE("masks admit exactly the recovery-consistent trees (n <= 6)") {
  const auto r = verify::round_trip_suite(6, 3);
  INFO(r.first_failure);
  CHECK(r.ok());
  CHECK(r.checks > 1000);
}

TEST_CASE("round-trip on masked samples") {
  // Viterbi under a stage mask with random scores returns a tree whose gold
  // labeling recovers the annotation.
  const SentimentTuple t = moscow_tuple();
  const StageTarget s1 = build_stage1_mask(kMoscowLength, {t});
  const StageTarget s2 = build_stage2_mask(kMoscowLength, t.expression, t);
  for (int k = 0; k < 20; ++k) {
    ScoreSet<double> s(kMoscowLength);
    std::uint64_t x = 88172645463325252ull + k;
    s.for_each_part([&](double& v) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
      v = static_cast<double>(x % 2001) / 1000.0 - 1.0;
    });
    CHECK(verify::stage1_consistent(viterbi(s, &s1.mask).tree, {t}));
    CHECK(verify::stage2_consistent(viterbi(s, &s2.mask).tree, t.expression, t));
  }
}
