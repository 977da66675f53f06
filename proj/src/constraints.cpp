#include "ssa/constraints.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace ssa {

int LabeledArcs::find(int h, int m) const {
  for (std::size_t k = 0; k < arcs.size(); ++k)
    if (arcs[k].first == h && arcs[k].second == m) return static_cast<int>(k);
  return -1;
}

namespace {

void check_role(int n, const SpanList& spans, std::size_t tuple, const char* role) {
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const Span& s = spans[k];
    if (s.start < 0 || s.end < s.start || s.end >= n)
      throw AnnotationError(tuple, std::string(role) + " span out of bounds");
    if (k > 0 && spans[k - 1].end >= s.start)
      throw AnnotationError(tuple, std::string(role) + " segments overlap or are unsorted");
  }
}

bool overlaps_any(const Span& s, const SpanList& others) {
  for (const Span& o : others)
    if (s.overlaps(o)) return true;
  return false;
}

// Keeps the segments of `role` that touch neither `blocked` nor each other.
SpanList filter_role(const SpanList& role, const SpanList& blocked, const std::string& what,
                     std::vector<std::string>* warnings) {
  SpanList out;
  for (const Span& s : role) {
    if (overlaps_any(s, blocked) || overlaps_any(s, out)) {
      if (std::find(out.begin(), out.end(), s) != out.end()) continue;  // duplicate
      if (warnings)
        warnings->push_back(what + " segment " + std::to_string(s.start) + ":" +
                            std::to_string(s.end) + " dropped (overlap)");
      continue;
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Sentence positions are token index + 1.
void gate_region_finish(ConstraintMask& mask, const Span& region) {
  const int a = region.start + 1, b = region.end + 1;
  for (int h = 1; h <= mask.n; ++h) {
    if (h >= a && h <= b) continue;
    if (h < a)
      for (int j = a; j < b; ++j) mask.finish_allowed(h, j) = false;
    else
      for (int i = a + 1; i <= b; ++i) mask.finish_allowed(h, i) = false;
  }
}

}  // namespace

std::size_t complete_segment(const SpanList& expression) {
  expects(!expression.empty(), "expression has no segments");
  std::size_t best = 0;
  for (std::size_t k = 1; k < expression.size(); ++k)
    if (expression[k].length() >= expression[best].length()) best = k;
  return best;
}

std::vector<ExpressionGroup> group_tuples(int n, const std::vector<SentimentTuple>& tuples,
                                          std::vector<std::string>* warnings) {
  expects(n >= 1, "sentence must have at least one token");
  std::vector<ExpressionGroup> groups;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const SentimentTuple& tup = tuples[t];
    if (tup.expression.empty()) throw AnnotationError(t, "expression has no segments");
    check_role(n, tup.expression, t, "expression");
    check_role(n, tup.holder, t, "holder");
    check_role(n, tup.target, t, "target");
    for (const ExpressionGroup& g : groups)
      for (const Span& s : tup.expression)
        for (const Span& o : g.expression)
          if (s.overlaps(o) && s != o)
            throw AnnotationError(t, "expression overlaps another expression");
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const ExpressionGroup& g) { return g.expression == tup.expression; });
    if (it == groups.end()) {
      groups.push_back({tup.expression, tup.polarity, {}, {}, {}});
      it = groups.end() - 1;
    } else if (it->polarity != tup.polarity && warnings) {
      warnings->push_back("tuple " + std::to_string(t) +
                          ": polarity differs from an earlier tuple with the same expression; "
                          "keeping the first");
    }
    it->tuples.push_back(t);
    it->holder.insert(it->holder.end(), tup.holder.begin(), tup.holder.end());
    it->target.insert(it->target.end(), tup.target.begin(), tup.target.end());
  }
  for (ExpressionGroup& g : groups) {
    std::sort(g.holder.begin(), g.holder.end());
    std::sort(g.target.begin(), g.target.end());
    g.holder = filter_role(g.holder, g.expression, "holder", warnings);
    g.target = filter_role(g.target, g.expression, "target", warnings);
    // Segments claimed by both roles are ambiguous; neither survives.
    SpanList holder, target;
    for (const Span& s : g.holder)
      if (!overlaps_any(s, g.target)) holder.push_back(s);
    for (const Span& s : g.target)
      if (!overlaps_any(s, g.holder)) target.push_back(s);
    if (warnings && (holder.size() != g.holder.size() || target.size() != g.target.size()))
      warnings->push_back("holder and target overlap; overlapping segments dropped");
    g.holder = std::move(holder);
    g.target = std::move(target);
  }
  return groups;
}

LabeledArcs stage1_label_arcs(int n) {
  LabeledArcs out;
  out.stage = Stage::expression;
  for (int m = 1; m <= n; ++m) {
    out.arcs.emplace_back(0, m);
    out.gold.push_back(ArcLabel::none);
  }
  return out;
}

LabeledArcs stage2_label_arcs(int n, const SpanList& expression) {
  std::vector<bool> in_e(n + 1, false);
  for (const Span& s : expression)
    for (int t = s.start; t <= s.end; ++t) in_e.at(t + 1) = true;
  LabeledArcs out;
  out.stage = Stage::role;
  for (int h = 1; h <= n; ++h) {
    if (!in_e[h]) continue;
    for (int m = 1; m <= n; ++m)
      if (!in_e[m]) {
        out.arcs.emplace_back(h, m);
        out.gold.push_back(ArcLabel::none);
      }
  }
  return out;
}

std::vector<std::pair<Span, ArcLabel>> stage1_regions(const std::vector<ExpressionGroup>& groups) {
  // Complete beats incomplete when segments are shared.
  std::map<Span, ArcLabel> regions;
  for (const ExpressionGroup& g : groups) {
    const std::size_t complete = complete_segment(g.expression);
    for (std::size_t k = 0; k < g.expression.size(); ++k) {
      const ArcLabel label =
          k == complete ? expression_label(g.polarity) : ArcLabel::exp_incomplete;
      auto [it, fresh] = regions.emplace(g.expression[k], label);
      if (!fresh && it->second == ArcLabel::exp_incomplete) it->second = label;
    }
  }
  return {regions.begin(), regions.end()};
}

StageTarget build_stage1_mask(int n, const std::vector<SentimentTuple>& tuples) {
  const auto regions = stage1_regions(group_tuples(n, tuples));

  StageTarget out{ConstraintMask::permissive(n), stage1_label_arcs(n)};
  ConstraintMask& mask = out.mask;
  std::vector<int> region_of(n + 1, -1);
  std::vector<ArcLabel> region_label;
  for (const auto& [span, label] : regions) {
    const int g = static_cast<int>(region_label.size());
    region_label.push_back(label);
    for (int t = span.start; t <= span.end; ++t) region_of[t + 1] = g;
    gate_region_finish(mask, span);
  }
  mask.sibling_group = region_of;
  mask.sibling_group[0] = -1;
  for (int m = 1; m <= n; ++m)
    for (int h = 1; h <= n; ++h)
      if (h != m) mask.arc_allowed(h, m) = region_of[h] == region_of[m];
  for (int m = 1; m <= n; ++m)
    if (region_of[m] >= 0) out.labels.gold[m - 1] = region_label[region_of[m]];
  return out;
}

StageTarget build_stage2_mask(int n, const SpanList& expression, const SentimentTuple& tuple) {
  expects(n >= 1, "sentence must have at least one token");
  SentimentTuple t = tuple;
  t.expression = expression;
  const auto groups = group_tuples(n, {t});
  const ExpressionGroup& g = groups.front();

  enum Kind { kExpr, kRole, kFree };
  std::vector<Kind> kind(n + 1, kFree);
  std::vector<int> group(n + 1, -1);
  for (const Span& s : g.expression)
    for (int p = s.start + 1; p <= s.end + 1; ++p) {
      kind[p] = kExpr;
      group[p] = 0;
    }

  StageTarget out{ConstraintMask::permissive(n), stage2_label_arcs(n, g.expression)};
  ConstraintMask& mask = out.mask;
  std::vector<ArcLabel> role_label(1, ArcLabel::none);
  const auto add_roles = [&](const SpanList& spans, ArcLabel label) {
    for (const Span& s : spans) {
      const int id = static_cast<int>(role_label.size());
      role_label.push_back(label);
      for (int p = s.start + 1; p <= s.end + 1; ++p) {
        kind[p] = kRole;
        group[p] = id;
      }
      gate_region_finish(mask, s);
    }
  };
  add_roles(g.holder, ArcLabel::holder);
  add_roles(g.target, ArcLabel::target);

  mask.sibling_group = group;
  mask.sibling_group[0] = -1;
  for (int m = 1; m <= n; ++m) {
    mask.arc_allowed(0, m) = kind[m] == kExpr;
    for (int h = 1; h <= n; ++h) {
      if (h == m) continue;
      switch (kind[m]) {
        case kExpr: mask.arc_allowed(h, m) = kind[h] == kExpr; break;
        case kRole: mask.arc_allowed(h, m) = kind[h] == kExpr || group[h] == group[m]; break;
        case kFree: mask.arc_allowed(h, m) = kind[h] != kRole; break;
      }
    }
  }
  for (std::size_t k = 0; k < out.labels.arcs.size(); ++k) {
    const int m = out.labels.arcs[k].second;
    if (kind[m] == kRole) out.labels.gold[k] = role_label[group[m]];
  }
  return out;
}

SpanList runs_of(const std::vector<int>& tokens) {
  std::vector<int> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  SpanList out;
  for (int t : sorted) {
    if (!out.empty() && out.back().end + 1 == t)
      out.back().end = t;
    else
      out.push_back({t, t});
  }
  return out;
}

std::vector<RecoveredExpression> recover_stage1(const DepTree& tree) {
  require_projective_tree(tree);
  const auto span = yields(tree);
  const int n = tree.size();
  struct Piece {
    Span span;
    ArcLabel label;
  };
  std::vector<Piece> complete, incomplete;
  for (int m = 1; m <= n; ++m) {
    if (tree.heads[m] != 0) continue;
    const ArcLabel l = tree.labels.empty() ? ArcLabel::none : tree.labels[m];
    if (!is_expression_label(l)) continue;
    const Span s{span[m].left - 1, span[m].right - 1};
    (l == ArcLabel::exp_incomplete ? incomplete : complete).push_back({s, l});
  }
  std::vector<RecoveredExpression> out;
  for (const Piece& p : complete) out.push_back({{p.span}, polarity_of(p.label)});
  for (const Piece& p : incomplete) {
    int best = -1, best_gap = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < complete.size(); ++k) {
      const Span& c = complete[k].span;
      const int gap = c.start > p.span.end ? c.start - p.span.end : p.span.start - c.end;
      if (gap <= best_gap) {  // later (more rightward) wins ties
        best_gap = gap;
        best = static_cast<int>(k);
      }
    }
    if (best >= 0) out[best].spans.push_back(p.span);
  }
  for (RecoveredExpression& e : out) std::sort(e.spans.begin(), e.spans.end());
  return out;
}

RecoveredRoles recover_stage2(const DepTree& tree, const SpanList& expression) {
  require_projective_tree(tree);
  const int n = tree.size();
  std::vector<bool> in_e(n + 1, false);
  for (const Span& s : expression) {
    expects(s.start >= 0 && s.end < n && s.start <= s.end, "expression span out of bounds");
    for (int t = s.start; t <= s.end; ++t) in_e[t + 1] = true;
  }
  int root_children = 0;
  for (int m = 1; m <= n; ++m) {
    const int h = tree.heads[m];
    if (h == 0) {
      ++root_children;
      if (!in_e[m]) throw ContractViolation("root attaches outside the expression");
    } else if (in_e[m] && !in_e[h]) {
      throw ContractViolation("expression word headed outside the expression");
    }
  }
  if (root_children != 1) throw ContractViolation("expression must have a single root");

  const auto label_of = [&](int m) {
    return tree.labels.empty() ? ArcLabel::none : tree.labels[m];
  };
  const auto labeled = [&](int m) {
    const int h = tree.heads[m];
    return h > 0 && in_e[h] && !in_e[m] && label_of(m) != ArcLabel::none;
  };
  const auto span = yields(tree);
  RecoveredRoles out;
  for (int m = 1; m <= n; ++m) {
    if (!labeled(m)) continue;
    const ArcLabel l = label_of(m);
    if (l != ArcLabel::holder && l != ArcLabel::target) continue;
    std::vector<bool> claimed(n + 1, false);
    for (int p = span[m].left; p <= span[m].right; ++p) claimed[p] = true;
    for (int x = 1; x <= n; ++x)
      if (x != m && labeled(x) && span[x].left >= span[m].left && span[x].right <= span[m].right)
        for (int p = span[x].left; p <= span[x].right; ++p) claimed[p] = false;
    std::vector<int> tokens;
    for (int p = 1; p <= n; ++p)
      if (claimed[p]) tokens.push_back(p - 1);
    for (const Span& s : runs_of(tokens))
      (l == ArcLabel::holder ? out.holder : out.target).push_back(s);
  }
  std::sort(out.holder.begin(), out.holder.end());
  std::sort(out.target.begin(), out.target.end());
  return out;
}

}  // namespace ssa
