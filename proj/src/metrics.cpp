#include "ssa/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace ssa {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::holder: return "holder";
    case Role::target: return "target";
    case Role::expression: return "expression";
  }
  return "?";
}

Score make_score(long long gold, long long predicted, long long matched) {
  Score s;
  s.gold = gold;
  s.predicted = predicted;
  s.matched = matched;
  s.precision = predicted > 0 ? static_cast<double>(matched) / predicted : 0.0;
  s.recall = gold > 0 ? static_cast<double>(matched) / gold : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

nlohmann::json Score::to_json() const {
  return {{"precision", precision}, {"recall", recall},       {"f1", f1},
          {"gold", gold},           {"predicted", predicted}, {"matched", matched}};
}

TupleCorpus tuples_of(const Dataset& data) {
  TupleCorpus out;
  out.reserve(data.size());
  for (const auto& ex : data) out.push_back(ex.tuples);
  return out;
}

namespace {

const SpanList& role_spans(const SentimentTuple& t, Role role) {
  switch (role) {
    case Role::holder: return t.holder;
    case Role::target: return t.target;
    default: return t.expression;
  }
}

std::set<int> tokens_of(const SpanList& spans) {
  std::set<int> out;
  for (const Span& s : spans)
    for (int t = s.start; t <= s.end; ++t) out.insert(t);
  return out;
}

long long overlap(const std::set<int>& a, const std::set<int>& b) {
  long long k = 0;
  for (int t : a) k += b.count(t);
  return k;
}

struct TupleKey {
  std::set<int> holder, target, expression;
  Polarity polarity;
  int length() const { return static_cast<int>(holder.size() + target.size() + expression.size()); }
};

TupleKey key_of(const SentimentTuple& t) {
  return {tokens_of(t.holder), tokens_of(t.target), tokens_of(t.expression), t.polarity};
}

bool same(const TupleKey& a, const TupleKey& b, bool with_polarity) {
  return a.holder == b.holder && a.target == b.target && a.expression == b.expression &&
         (!with_polarity || a.polarity == b.polarity);
}

void aligned(const TupleCorpus& gold, const TupleCorpus& pred) {
  if (gold.size() != pred.size())
    throw ContractViolation("gold and predicted corpora differ in sentence count");
}

// Exact matches between two tuple lists, each tuple used once.
long long match_count(const std::vector<TupleKey>& gold, const std::vector<TupleKey>& pred,
                      bool with_polarity) {
  std::vector<bool> used(gold.size(), false);
  long long k = 0;
  for (const auto& p : pred)
    for (std::size_t g = 0; g < gold.size(); ++g)
      if (!used[g] && same(gold[g], p, with_polarity)) {
        used[g] = true;
        ++k;
        break;
      }
  return k;
}

template <typename Keep>
Score tuple_score(const TupleCorpus& gold, const TupleCorpus& pred, bool with_polarity, Keep keep) {
  aligned(gold, pred);
  long long ng = 0, np = 0, nm = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    std::vector<TupleKey> g, p;
    for (const auto& t : gold[k])
      if (auto key = key_of(t); keep(key)) g.push_back(std::move(key));
    for (const auto& t : pred[k])
      if (auto key = key_of(t); keep(key)) p.push_back(std::move(key));
    ng += static_cast<long long>(g.size());
    np += static_cast<long long>(p.size());
    nm += match_count(g, p, with_polarity);
  }
  return make_score(ng, np, nm);
}

template <typename Keep>
Score token_score(const TupleCorpus& gold, const TupleCorpus& pred, Role role, Keep keep) {
  aligned(gold, pred);
  long long ng = 0, np = 0, nm = 0;
  const auto collect = [&](const std::vector<SentimentTuple>& ts) {
    std::set<int> out;
    for (const auto& t : ts) {
      const SpanList& spans = role_spans(t, role);
      if (!keep(spans)) continue;
      for (int tok : tokens_of(spans)) out.insert(tok);
    }
    return out;
  };
  for (std::size_t k = 0; k < gold.size(); ++k) {
    const auto g = collect(gold[k]), p = collect(pred[k]);
    ng += static_cast<long long>(g.size());
    np += static_cast<long long>(p.size());
    nm += overlap(g, p);
  }
  return make_score(ng, np, nm);
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string bucket_name(const Bucket& b) {
  if (!b.high) return std::to_string(b.low) + "+";
  if (*b.high == b.low + 1) return std::to_string(b.low);
  return std::to_string(b.low) + "-" + std::to_string(*b.high - 1);
}

}  // namespace

Score span_f1(const TupleCorpus& gold, const TupleCorpus& pred, Role role) {
  return token_score(gold, pred, role, [](const SpanList&) { return true; });
}

Score graph_f1(const TupleCorpus& gold, const TupleCorpus& pred, bool with_polarity) {
  return tuple_score(gold, pred, with_polarity, [](const TupleKey&) { return true; });
}

Evaluation evaluate(const TupleCorpus& gold, const TupleCorpus& pred) {
  Evaluation e;
  e.holder = span_f1(gold, pred, Role::holder);
  e.target = span_f1(gold, pred, Role::target);
  e.expression = span_f1(gold, pred, Role::expression);
  e.nsf1 = graph_f1(gold, pred, false);
  e.sf1 = graph_f1(gold, pred, true);
  return e;
}

Evaluation evaluate(const Dataset& gold, const Dataset& pred) {
  if (gold.size() != pred.size())
    throw ContractViolation("gold and predicted corpora differ in sentence count");
  for (std::size_t k = 0; k < gold.size(); ++k)
    if (gold[k].sentence.id != pred[k].sentence.id ||
        gold[k].sentence.tokens != pred[k].sentence.tokens)
      throw ContractViolation("sentence " + std::to_string(k) + " (" + gold[k].sentence.id +
                              ") differs between gold and prediction");
  return evaluate(tuples_of(gold), tuples_of(pred));
}

nlohmann::json Evaluation::to_json() const {
  return {{"holder", holder.to_json()}, {"target", target.to_json()},
          {"expression", expression.to_json()}, {"nsf1", nsf1.to_json()},
          {"sf1", sf1.to_json()}};
}

std::string Evaluation::to_text() const {
  std::ostringstream out;
  out << "metric      precision  recall  f1\n";
  const std::pair<const char*, const Score*> rows[] = {
      {"holder", &holder}, {"target", &target}, {"expression", &expression},
      {"NSF1", &nsf1},     {"SF1", &sf1}};
  for (const auto& [name, s] : rows) {
    std::string label = name;
    label.resize(12, ' ');
    out << label << percent(s->precision) << "      " << percent(s->recall) << "   "
        << percent(s->f1) << "\n";
  }
  return out.str();
}

Breakdown breakdown(const TupleCorpus& gold, const TupleCorpus& pred, const std::vector<int>& edges) {
  expects(!edges.empty(), "bucket edges must not be empty");
  for (std::size_t k = 1; k < edges.size(); ++k)
    expects(edges[k] > edges[k - 1], "bucket edges must increase strictly");
  aligned(gold, pred);
  Breakdown out;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Bucket b;
    b.low = edges[k];
    if (k + 1 < edges.size()) b.high = edges[k + 1];
    const auto in = [&b](int len) { return len >= b.low && (!b.high || len < *b.high); };

    Bucket e = b;
    const Score es = token_score(gold, pred, Role::expression,
                                 [&](const SpanList& s) { return in(token_count(s)); });
    if (es.gold + es.predicted > 0) e.score = es;
    out.expression.push_back(e);

    Bucket t = b;
    const Score ts = tuple_score(gold, pred, true, [&](const TupleKey& key) { return in(key.length()); });
    if (ts.gold + ts.predicted > 0) t.score = ts;
    out.tuple.push_back(t);
  }
  return out;
}

nlohmann::json Breakdown::to_json() const {
  const auto rows = [](const std::vector<Bucket>& buckets) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : buckets)
      arr.push_back({{"low", b.low},
                     {"high", b.high ? nlohmann::json(*b.high) : nlohmann::json(nullptr)},
                     {"score", b.score ? b.score->to_json() : nlohmann::json(nullptr)}});
    return arr;
  };
  return {{"expression_f1_by_length", rows(expression)}, {"sf1_by_tuple_length", rows(tuple)}};
}

std::string Breakdown::to_text() const {
  std::ostringstream out;
  const auto table = [&](const char* title, const std::vector<Bucket>& buckets) {
    out << title << "\n";
    for (const auto& b : buckets) {
      std::string name = bucket_name(b);
      name.resize(8, ' ');
      out << "  " << name << (b.score ? percent(b.score->f1) : std::string("null")) << "\n";
    }
  };
  table("expression F1 by expression length", expression);
  table("SF1 by tuple length", tuple);
  return out.str();
}

}  // namespace ssa
