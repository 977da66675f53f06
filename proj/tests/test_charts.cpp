#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "ssa/charts.hpp"

using namespace ssa;
using ssa::testing::random_scores;

namespace {

std::string dump_of(const ScoreSet<double>& s) {
  ChartSet<double> c;
  inside(s, nullptr, c);
  std::ostringstream out;
  c.dump(out);
  return out.str();
}

DepTree tree_of(std::vector<int> modifier_heads) {
  modifier_heads.insert(modifier_heads.begin(), -1);
  return DepTree(modifier_heads);
}

}  // namespace

TEST_CASE("projective tree counts follow the ternary numbers") {
  const long long expected[] = {1, 3, 12, 55, 273, 1428, 7752};
  for (int n = 1; n <= 7; ++n) {
    long long count = 0;
    for_each_projective_tree(n, [&](const DepTree& t) {
      CHECK(is_projective_tree(t));
      ++count;
    });
    CHECK(count == expected[n - 1]);
  }
}

TEST_CASE("inside on tiny all-zero inputs") {
  CHECK(inside(ScoreSet<double>(1)) == doctest::Approx(0.0));
  const auto bf = brute_force(ScoreSet<double>(2), nullptr, Semiring::sum);
  CHECK(bf.tree_count == 3);
  CHECK(inside(ScoreSet<double>(2)) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(bf.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("chart dumps for n = 1 and n = 2 match hand-computed tables") {
  CHECK(dump_of(ScoreSet<double>(1)) == ssa::testing::golden("charts_n1.txt"));
  CHECK(dump_of(ScoreSet<double>(2)) == ssa::testing::golden("charts_n2.txt"));
}

TEST_CASE("inside equals exhaustive log-sum on random scores") {
  const auto s5 = random_scores(5, 20240501);
  CHECK(std::abs(inside(s5) - brute_force(s5, nullptr, Semiring::sum).value) < 1e-9);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    const auto s = random_scores(n, 1000 + trial, 2.0);
    CHECK(std::abs(inside(s) - brute_force(s, nullptr, Semiring::sum).value) < 1e-9);
  }
}

TEST_CASE("viterbi picks the chain in the two-token example") {
  ScoreSet<double> s(2);
  s.arc(0, 1) = 5;
  s.arc(1, 2) = 4;
  const auto best = viterbi(s);
  CHECK(best.tree == tree_of({0, 1}));
  CHECK(best.score == doctest::Approx(9.0));
}

TEST_CASE("viterbi tie-breaking on all-zero scores is the right-branching chain") {
  for (int run = 0; run < 3; ++run) CHECK(viterbi(ScoreSet<double>(3)).tree == tree_of({0, 1, 2}));
}

TEST_CASE("viterbi agrees with exhaustive max, with and without a root window") {
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 7;
    const auto s = random_scores(n, 77 + trial, 2.0);
    const auto best = viterbi(s);
    const auto bf = brute_force(s, nullptr, Semiring::max);
    CHECK(std::abs(best.score - bf.value) < 1e-9);
    CHECK(std::abs(tree_score(s, best.tree) - best.score) < 1e-9);
  }
  const auto s = random_scores(4, 4242);
  const auto best = viterbi(s, nullptr, RootWindow{2, 3});
  auto windowed = ConstraintMask::permissive(4);
  windowed.restrict_root(2, 3);
  const auto bf = brute_force(s, &windowed, Semiring::max);
  int root_children = 0;
  for (int m = 1; m <= 4; ++m)
    if (best.tree.heads[m] == 0) {
      ++root_children;
      CHECK((m == 2 || m == 3));
    }
  CHECK(root_children >= 1);
  CHECK(std::abs(best.score - bf.value) < 1e-9);
}

TEST_CASE("viterbi and marginals report an empty space") {
  auto mask = ConstraintMask::permissive(3);
  for (int m = 1; m <= 3; ++m) mask.arc_allowed(0, m) = false;
  const ScoreSet<double> s(3);
  CHECK_THROWS_AS(viterbi(s, &mask), NoLegalTree);
  CHECK_THROWS_AS(marginals(s, &mask), NoLegalTree);
  CHECK(inside(s, &mask) == neg_inf<double>());
  CHECK(brute_force(s, &mask, Semiring::sum).value == neg_inf<double>());
  CHECK(brute_force(s, &mask, Semiring::max).value == neg_inf<double>());
}

TEST_CASE("shape mismatches are contract violations") {
  const auto mask = ConstraintMask::permissive(3);
  CHECK_THROWS_AS(inside(ScoreSet<double>(4), &mask), ContractViolation);
  ScoreSet<double> bad(3);
  bad.arc.resize(3, 3);
  CHECK_THROWS_AS(inside(bad), ContractViolation);
  CHECK_THROWS_AS(brute_force(ScoreSet<double>(9), nullptr, Semiring::sum), ContractViolation);
}

TEST_CASE("marginals: single token, row sums, finite differences") {
  CHECK(marginals(ScoreSet<double>(1)).parts.arc(0, 1) == doctest::Approx(1.0));

  for (int n = 2; n <= 6; ++n) {
    const auto s = random_scores(n, 31 * n, 1.5);
    const auto marg = marginals(s);
    for (int m = 1; m <= n; ++m) {
      double total = 0;
      for (int h = 0; h <= n; ++h)
        if (h != m) total += marg.parts.arc(h, m);
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }

  auto s = random_scores(4, 9001);
  auto marg = marginals(s);
  const double step = 1e-4;
  std::vector<double*> cells;
  std::vector<double> analytic;
  s.for_each_part([&](double& v) { cells.push_back(&v); });
  marg.parts.for_each_part([&](double& v) { analytic.push_back(v); });
  REQUIRE(cells.size() == analytic.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double saved = *cells[k];
    *cells[k] = saved + step;
    const double up = inside(s);
    *cells[k] = saved - step;
    const double down = inside(s);
    *cells[k] = saved;
    const double fd = (up - down) / (2 * step);
    CHECK(std::abs(fd - analytic[k]) <= 1e-4 * std::abs(analytic[k]) + 1e-9);
  }
}

TEST_CASE("marginals under a mask match finite differences of the masked inside") {
  auto s = random_scores(5, 555);
  auto mask = ConstraintMask::permissive(5);
  mask.arc_allowed(0, 1) = false;
  mask.arc_allowed(3, 2) = false;
  mask.finish_allowed(4, 2) = false;
  mask.sibling_group = {-1, -1, 0, 0, -1, -1};
  const double log_z = inside(s, &mask);
  CHECK(std::abs(log_z - brute_force(s, &mask, Semiring::sum).value) < 1e-9);
  auto marg = marginals(s, &mask);
  std::vector<double*> cells;
  std::vector<double> analytic;
  s.for_each_part([&](double& v) { cells.push_back(&v); });
  marg.parts.for_each_part([&](double& v) { analytic.push_back(v); });
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double saved = *cells[k];
    *cells[k] = saved + 1e-4;
    const double up = inside(s, &mask);
    *cells[k] = saved - 1e-4;
    const double down = inside(s, &mask);
    *cells[k] = saved;
    const double fd = (up - down) / 2e-4;
    CHECK(std::abs(fd - analytic[k]) <= 1e-4 * std::abs(analytic[k]) + 1e-9);
  }
}

TEST_CASE("tree_score") {
  CHECK(tree_score(ScoreSet<double>(3), tree_of({2, 0, 2})) == 0.0);

  ScoreSet<double> s(2);
  s.arc(0, 1) = 5;
  s.arc(1, 2) = 4;
  s.span_right(1, 2) = 1;
  CHECK(tree_score(s, tree_of({0, 1})) == doctest::Approx(10.0));

  CHECK_THROWS_AS(tree_score(ScoreSet<double>(3), tree_of({2, 3, 1})), ContractViolation);
  // 0 -> 2, 2 -> 4 would be crossed by 1 -> 3.
  CHECK_THROWS_AS(tree_score(ScoreSet<double>(4), tree_of({0, 0, 1, 2})), ContractViolation);

  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    const auto sc = random_scores(n, 500 + trial, 2.0);
    std::vector<DepTree> all;
    for_each_projective_tree(n, [&](const DepTree& t) { all.push_back(t); });
    const DepTree& pick = all[(trial * 7919) % all.size()];
    CHECK(tree_score(sc, pick) <= inside(sc) + 1e-12);
  }
}

TEST_CASE("sibling and span parts are scored once per tree") {
  // 0 -> 2, 2 -> 1, 2 -> 3, 2 -> 4: right siblings (3, 4) under 2.
  ScoreSet<double> s(4);
  s.sib(2, 3, 4) = 1.5;
  s.sib(0, 1, 2) = 100;  // never adjacent here
  s.span_left(2, 1) = 0.25;
  s.span_right(2, 4) = 0.5;
  s.span_right(3, 3) = 2;
  CHECK(tree_score(s, tree_of({2, 0, 2, 2})) == doctest::Approx(4.25));
}

TEST_CASE("brute force on one token") {
  CHECK(brute_force(ScoreSet<double>(1), nullptr, Semiring::sum).value == 0.0);
  const auto mx = brute_force(ScoreSet<double>(1), nullptr, Semiring::max);
  CHECK(mx.value == 0.0);
  REQUIRE(mx.argmax);
  CHECK(*mx.argmax == tree_of({0}));
}

TEST_CASE("float charts track double charts") {
  const auto s = random_scores(6, 8080);
  CHECK(std::abs(inside(s.cast<float>()) - inside(s)) < 1e-4);
}
