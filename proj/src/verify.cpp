#include "ssa/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "ssa/charts.hpp"

namespace ssa::verify {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Span token_span(const Yield& y) { return {y.left - 1, y.right - 1}; }

std::vector<RecoveredExpression> sorted(std::vector<RecoveredExpression> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.spans < b.spans; });
  return v;
}

std::string describe(const SentimentTuple& t) {
  std::ostringstream out;
  const auto list = [&](const SpanList& s) {
    out << '[';
    for (const Span& x : s) out << ' ' << x.start << ':' << x.end;
    out << " ]";
  };
  out << "exp";
  list(t.expression);
  out << " holder";
  list(t.holder);
  out << " target";
  list(t.target);
  return out.str();
}

std::string describe(const DepTree& t) {
  std::ostringstream out;
  for (int m = 1; m <= t.size(); ++m) out << (m > 1 ? "," : "") << t.heads[m];
  return out.str();
}

ScoreSet<double> random_scores(int n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ScoreSet<double> s(n);
  s.for_each_part([&](double& v) { v = u(rng); });
  return s;
}

}  // namespace

namespace {

bool stage1_consistent(const DepTree& tree, const std::vector<Yield>& span,
                       const std::vector<std::pair<Span, ArcLabel>>& regions,
                       const std::vector<RecoveredExpression>& gold_sorted) {
  const int n = tree.size();
  DepTree labeled = tree;
  labeled.labels.assign(n + 1, ArcLabel::none);
  for (int m = 1; m <= n; ++m) {
    if (tree.heads[m] != 0) continue;
    for (const auto& [s, label] : regions)
      if (s == token_span(span[m])) labeled.labels[m] = label;
  }
  return sorted(recover_stage1(labeled)) == gold_sorted;
}

bool stage2_consistent(const DepTree& tree, const std::vector<Yield>& span,
                       const ExpressionGroup& g, const std::vector<bool>& in_e) {
  const int n = tree.size();
  // recover_stage2's precondition, checked here to avoid an exception per tree.
  int root_children = 0;
  for (int m = 1; m <= n; ++m) {
    const int h = tree.heads[m];
    if (h == 0 && (!in_e[m] || ++root_children > 1)) return false;
    if (h > 0 && in_e[m] && !in_e[h]) return false;
  }
  DepTree labeled = tree;
  labeled.labels.assign(n + 1, ArcLabel::none);
  for (int m = 1; m <= n; ++m) {
    const int h = tree.heads[m];
    if (h <= 0 || !in_e[h] || in_e[m]) continue;
    const Span s = token_span(span[m]);
    if (std::find(g.holder.begin(), g.holder.end(), s) != g.holder.end())
      labeled.labels[m] = ArcLabel::holder;
    if (std::find(g.target.begin(), g.target.end(), s) != g.target.end())
      labeled.labels[m] = ArcLabel::target;
  }
  try {
    return recover_stage2(labeled, g.expression) == RecoveredRoles{g.holder, g.target};
  } catch (const ContractViolation&) {
    return false;
  }
}

std::vector<RecoveredExpression> gold_expressions(const std::vector<ExpressionGroup>& groups) {
  std::vector<RecoveredExpression> gold;
  for (const ExpressionGroup& g : groups) gold.push_back({g.expression, g.polarity});
  return sorted(gold);
}

std::vector<bool> expression_positions(int n, const SpanList& expression) {
  std::vector<bool> in_e(n + 1, false);
  for (const Span& s : expression)
    for (int k = s.start; k <= s.end; ++k) in_e[k + 1] = true;
  return in_e;
}

}  // namespace

bool stage1_consistent(const DepTree& tree, const std::vector<SentimentTuple>& tuples) {
  const auto groups = group_tuples(tree.size(), tuples);
  return stage1_consistent(tree, yields(tree), stage1_regions(groups), gold_expressions(groups));
}

bool stage2_consistent(const DepTree& tree, const SpanList& expression,
                       const SentimentTuple& tuple) {
  SentimentTuple t = tuple;
  t.expression = expression;
  const ExpressionGroup g = group_tuples(tree.size(), {t}).front();
  return stage2_consistent(tree, yields(tree), g, expression_positions(tree.size(), expression));
}

std::vector<SentimentTuple> enumerate_annotations(int n, int max_len) {
  std::vector<SentimentTuple> out;
  SentimentTuple cur;
  std::function<void(int)> place = [&](int t) {
    if (t >= n) {
      if (!cur.expression.empty()) out.push_back(cur);
      return;
    }
    place(t + 1);
    for (int len = 1; len <= max_len && t + len <= n; ++len)
      for (SpanList* role : {&cur.expression, &cur.holder, &cur.target}) {
        role->push_back({t, t + len - 1});
        place(t + len);
        role->pop_back();
      }
  };
  place(0);
  return out;
}

SuiteResult round_trip_suite(int n_max, int max_len) {
  SuiteResult r;
  r.name = "conversion round-trip";
  const auto t0 = Clock::now();
  for (int n = 1; n <= n_max; ++n) {
    std::vector<DepTree> trees;
    for_each_projective_tree(n, [&](const DepTree& t) { trees.push_back(t); });
    std::vector<std::vector<Yield>> spans;
    std::vector<TreeParts> parts;
    for (const DepTree& t : trees) {
      spans.push_back(yields(t));
      parts.push_back(TreeParts::of(t));
    }
    std::vector<SpanList> seen_expressions;
    for (SentimentTuple tuple : enumerate_annotations(n, max_len)) {
      tuple.polarity = static_cast<Polarity>(r.checks % 3);
      const auto groups = group_tuples(n, {tuple});
      const auto report = [&](int stage, const DepTree& t, bool admits) {
        r.fail("stage " + std::to_string(stage) + ", n=" + std::to_string(n) + " " +
               describe(tuple) + " tree " + describe(t) +
               (admits ? " admitted but inconsistent" : " consistent but rejected"));
      };
      if (std::find(seen_expressions.begin(), seen_expressions.end(), tuple.expression) ==
          seen_expressions.end()) {
        seen_expressions.push_back(tuple.expression);
        const StageTarget st = build_stage1_mask(n, {tuple});
        const auto regions = stage1_regions(groups);
        const auto gold = gold_expressions(groups);
        long long admitted = 0;
        for (std::size_t k = 0; k < trees.size(); ++k) {
          ++r.checks;
          const bool admits = st.mask.admits(trees[k], parts[k]);
          admitted += admits;
          if (admits != stage1_consistent(trees[k], spans[k], regions, gold))
            report(1, trees[k], admits);
        }
        if (admitted == 0) r.fail("stage 1 mask admits nothing: " + describe(tuple));
      }
      const StageTarget st = build_stage2_mask(n, tuple.expression, tuple);
      const auto in_e = expression_positions(n, tuple.expression);
      long long admitted = 0;
      for (std::size_t k = 0; k < trees.size(); ++k) {
        ++r.checks;
        const bool admits = st.mask.admits(trees[k], parts[k]);
        admitted += admits;
        if (admits != stage2_consistent(trees[k], spans[k], groups.front(), in_e))
          report(2, trees[k], admits);
      }
      if (admitted == 0) r.fail("stage 2 mask admits nothing: " + describe(tuple));
    }
  }
  r.seconds = since(t0);
  return r;
}

ConstraintMask random_mask(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto all = enumerate_annotations(n, 3);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  SentimentTuple t = all[pick(rng)];
  t.polarity = static_cast<Polarity>(rng() % 3);
  if (rng() % 2 == 0) return build_stage1_mask(n, {t}).mask;
  return build_stage2_mask(n, t.expression, t).mask;
}

SuiteResult inside_suite(int n_max, int trials, std::uint64_t seed, int masks_per_n) {
  SuiteResult r;
  r.name = "inside vs brute force";
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  ChartSet<double> charts;
  for (int n = 1; n <= n_max; ++n) {
    for (int k = 0; k < trials; ++k) {
      const auto s = random_scores(n, rng, 2.0);
      const double a = inside(s, nullptr, charts);
      const double b = brute_force(s, nullptr, Semiring::sum).value;
      ++r.checks;
      if (!(std::abs(a - b) <= 1e-9))
        r.fail("n=" + std::to_string(n) + " unmasked: " + std::to_string(a) + " vs " +
               std::to_string(b));
    }
    for (int k = 0; k < masks_per_n; ++k) {
      const ConstraintMask mask = random_mask(n, rng());
      const auto s = random_scores(n, rng, 2.0);
      const double a = inside(s, &mask, charts);
      const double b = brute_force(s, &mask, Semiring::sum).value;
      const double full = inside(s, nullptr, charts);
      ++r.checks;
      if (!(std::abs(a - b) <= 1e-9) || !(a <= full + 1e-12))
        r.fail("n=" + std::to_string(n) + " masked: " + std::to_string(a) + " vs " +
               std::to_string(b));
    }
  }
  r.seconds = since(t0);
  return r;
}

SuiteResult viterbi_suite(int n_max, int trials, std::uint64_t seed, int masks_per_n) {
  SuiteResult r;
  r.name = "viterbi vs brute force";
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  ChartSet<double> charts;
  const auto check = [&](const ScoreSet<double>& s, const ConstraintMask* mask,
                         const std::string& what) {
    ++r.checks;
    const auto bf = brute_force(s, mask, Semiring::max);
    const auto first = viterbi(s, mask, std::nullopt, charts);
    const auto second = viterbi(s, mask, std::nullopt, charts);
    const bool ok = std::abs(first.score - bf.value) <= 1e-9 &&
                    std::abs(tree_score(s, first.tree) - first.score) <= 1e-9 &&
                    (!mask || mask->admits(first.tree)) && first.tree == second.tree &&
                    is_projective_tree(first.tree);
    if (!ok) r.fail(what + " n=" + std::to_string(s.n));
  };
  for (int n = 1; n <= n_max; ++n) {
    for (int k = 0; k < trials; ++k) check(random_scores(n, rng, 2.0), nullptr, "unmasked");
    for (int k = 0; k < masks_per_n; ++k) {
      const ConstraintMask mask = random_mask(n, rng());
      check(random_scores(n, rng, 2.0), &mask, "masked");
    }
  }
  r.seconds = since(t0);
  return r;
}

SuiteResult marginal_suite(int n_max, int trials, std::uint64_t seed) {
  SuiteResult r;
  r.name = "marginals vs finite differences";
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  ChartSet<double> charts;
  const double step = 1e-4;
  for (int k = 0; k < trials; ++k) {
    const int n = 1 + k % n_max;
    auto s = random_scores(n, rng, 1.5);
    const ConstraintMask mask = random_mask(n, rng());
    const ConstraintMask* m = k % 2 ? &mask : nullptr;
    auto marg = marginals(s, m, charts);
    std::vector<double*> cells;
    std::vector<double> analytic;
    s.for_each_part([&](double& v) { cells.push_back(&v); });
    marg.parts.for_each_part([&](double& v) { analytic.push_back(v); });
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double saved = *cells[c];
      *cells[c] = saved + step;
      const double up = inside(s, m, charts);
      *cells[c] = saved - step;
      const double down = inside(s, m, charts);
      *cells[c] = saved;
      const double fd = (up - down) / (2 * step);
      ++r.checks;
      if (!(std::abs(fd - analytic[c]) <= 1e-4 * std::abs(analytic[c]) + 1e-9))
        r.fail("n=" + std::to_string(n) + " cell " + std::to_string(c) + ": " +
               std::to_string(analytic[c]) + " vs " + std::to_string(fd));
    }
  }
  r.seconds = since(t0);
  return r;
}

}  // namespace ssa::verify
