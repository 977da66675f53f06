#include "ssa/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ssa/constraints.hpp"

namespace ssa {

namespace {

using nlohmann::json;

bool starts_code_point(unsigned char c) { return (c & 0xC0) != 0x80; }

// Byte position of every code point, plus the end.
std::vector<std::size_t> code_point_bytes(const std::string& text) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < text.size(); ++k)
    if (starts_code_point(static_cast<unsigned char>(text[k]))) out.push_back(k);
  out.push_back(text.size());
  return out;
}

std::pair<int, int> parse_offset(const std::string& s, const std::string& where) {
  const auto colon = s.find(':');
  int b = -1, e = -1;
  const auto ok = [&](const char* first, const char* last, int& v) {
    auto [p, ec] = std::from_chars(first, last, v);
    return ec == std::errc() && p == last;
  };
  if (colon == std::string::npos || !ok(s.data(), s.data() + colon, b) ||
      !ok(s.data() + colon + 1, s.data() + s.size(), e) || b < 0 || e <= b)
    throw DataError(where + ": bad offset '" + s + "'");
  return {b, e};
}

SpanList parse_role(const json& role, const Sentence& sent, const std::string& where,
                    const LoadOptions& options, std::vector<std::string>* warnings) {
  if (role.is_null()) return {};
  if (!role.is_array() || role.size() != 2 || !role[0].is_array() || !role[1].is_array())
    throw DataError(where + ": expected [[strings], [offsets]]");
  if (role[0].size() != role[1].size())
    throw DataError(where + ": " + std::to_string(role[0].size()) + " strings but " +
                    std::to_string(role[1].size()) + " offsets");
  const auto cps = code_point_bytes(sent.text);
  const int text_len = static_cast<int>(cps.size()) - 1;
  std::vector<int> tokens;
  for (std::size_t k = 0; k < role[1].size(); ++k) {
    if (!role[1][k].is_string()) throw DataError(where + ": offsets must be strings");
    const auto [b, e] = parse_offset(role[1][k].get<std::string>(), where);
    if (e > text_len)
      throw DataError(where + ": offset " + std::to_string(b) + ":" + std::to_string(e) +
                      " runs past the text");
    int first = -1, last = -1;
    for (int t = 0; t < sent.size(); ++t)
      if (sent.offsets[t].first < e && b < sent.offsets[t].second) {
        if (first < 0) first = t;
        last = t;
      }
    const std::string at = where + " " + std::to_string(b) + ":" + std::to_string(e);
    if (first < 0) throw DataError(at + " covers no token");
    if (sent.offsets[first].first != b || sent.offsets[last].second != e) {
      if (options.strict) throw DataError(at + " is not aligned to token boundaries");
      if (warnings)
        warnings->push_back(at + " widened to " + std::to_string(sent.offsets[first].first) + ":" +
                            std::to_string(sent.offsets[last].second));
    }
    const std::string surface = sent.text.substr(cps[b], cps[e] - cps[b]);
    if (role[0][k].is_string() && role[0][k].get<std::string>() != surface && warnings)
      warnings->push_back(at + ": surface '" + role[0][k].get<std::string>() +
                          "' differs from the text '" + surface + "'");
    for (int t = first; t <= last; ++t) tokens.push_back(t);
  }
  return runs_of(tokens);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

json role_to_json(const SpanList& spans, const Sentence& sent) {
  json strings = json::array(), offsets = json::array();
  const auto cps = code_point_bytes(sent.text);
  for (const Span& s : spans) {
    expects(s.start >= 0 && s.end < sent.size() && s.start <= s.end, "span outside sentence");
    const int b = sent.offsets[s.start].first, e = sent.offsets[s.end].second;
    strings.push_back(sent.text.substr(cps[b], cps[e] - cps[b]));
    offsets.push_back(std::to_string(b) + ":" + std::to_string(e));
  }
  return json::array({strings, offsets});
}

}  // namespace

Polarity parse_polarity(const std::string& text) {
  const std::string p = lower(text);
  if (p == "positive") return Polarity::positive;
  if (p == "negative") return Polarity::negative;
  if (p == "neutral") return Polarity::neutral;
  throw DataError("unknown polarity '" + text + "'");
}

Dataset parse_dataset(const std::string& json_text, const LoadOptions& options,
                      std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError("JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("dataset must be a JSON array of sentences");
  Dataset out;
  out.reserve(doc.size());
  std::set<std::string> ids;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const json& item = doc[k];
    const std::string where = "sentence #" + std::to_string(k);
    if (!item.is_object() || !item.contains("sent_id") || !item.contains("text"))
      throw DataError(where + ": needs sent_id and text");
    const std::string id = item["sent_id"].is_string() ? item["sent_id"].get<std::string>()
                                                       : item["sent_id"].dump();
    if (!item["text"].is_string()) throw DataError("sentence " + id + ": text must be a string");
    if (!ids.insert(id).second && warnings) warnings->push_back("sentence " + id + " appears twice");
    AnnotatedSentence ex{make_sentence(id, item["text"].get<std::string>()), {}};
    const json opinions = item.value("opinions", json::array());
    if (!opinions.is_array()) throw DataError("sentence " + id + ": opinions must be an array");
    for (std::size_t o = 0; o < opinions.size(); ++o) {
      const json& op = opinions[o];
      const std::string at = "sentence " + id + " opinion " + std::to_string(o);
      if (!op.is_object()) throw DataError(at + ": not an object");
      SentimentTuple t;
      t.holder = parse_role(op.value("Source", json()), ex.sentence, at + " Source", options, warnings);
      t.target = parse_role(op.value("Target", json()), ex.sentence, at + " Target", options, warnings);
      t.expression = parse_role(op.value("Polar_expression", json()), ex.sentence,
                                at + " Polar_expression", options, warnings);
      if (!op.contains("Polarity") || !op["Polarity"].is_string())
        throw DataError(at + ": missing Polarity");
      try {
        t.polarity = parse_polarity(op["Polarity"].get<std::string>());
      } catch (const DataError& e) {
        throw DataError(at + ": " + e.what());
      }
      if (t.expression.empty()) {
        if (options.strict) throw DataError(at + ": no polar expression");
        if (warnings) warnings->push_back(at + ": no polar expression, skipped");
        continue;
      }
      ex.tuples.push_back(std::move(t));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

Dataset load_dataset(const std::string& path, const LoadOptions& options,
                     std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_dataset(ss.str(), options, warnings);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

json dataset_to_json(const Dataset& data) {
  json out = json::array();
  for (const auto& ex : data) {
    json opinions = json::array();
    for (const auto& t : ex.tuples)
      opinions.push_back({{"Source", role_to_json(t.holder, ex.sentence)},
                          {"Target", role_to_json(t.target, ex.sentence)},
                          {"Polar_expression", role_to_json(t.expression, ex.sentence)},
                          {"Polarity", std::string(to_string(t.polarity))}});
    out.push_back({{"sent_id", ex.sentence.id}, {"text", ex.sentence.text}, {"opinions", opinions}});
  }
  return out;
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << dataset_to_json(data).dump(1) << "\n";
  if (!out) throw DataError("failed writing " + path);
}

nlohmann::json DatasetStats::to_json() const {
  const auto role = [](const RoleStats& r) {
    return json{{"spans", r.spans},
                {"fraction_len_ge_4", r.long_fraction ? json(*r.long_fraction) : json(nullptr)},
                {"max_length", r.max_length ? json(*r.max_length) : json(nullptr)}};
  };
  return {{"sentences", sentences}, {"tokens", tokens},       {"tuples", tuples},
          {"holder", role(holder)}, {"target", role(target)}, {"expression", role(expression)}};
}

std::string DatasetStats::to_text() const {
  std::ostringstream out;
  out << "sentences " << sentences << ", tokens " << tokens << ", tuples " << tuples << "\n";
  out << "role        spans   len>=4   max\n";
  const std::pair<const char*, const RoleStats*> rows[] = {
      {"holder", &holder}, {"target", &target}, {"expression", &expression}};
  for (const auto& [name, r] : rows) {
    char frac[16] = "null", max[16] = "null", line[96];
    if (r->long_fraction) std::snprintf(frac, sizeof frac, "%.1f%%", 100 * *r->long_fraction);
    if (r->max_length) std::snprintf(max, sizeof max, "%d", *r->max_length);
    std::snprintf(line, sizeof line, "%-10s %6lld   %6s   %4s\n", name, r->spans, frac, max);
    out << line;
  }
  return out.str();
}

DatasetStats dataset_stats(const Dataset& data) {
  DatasetStats s;
  struct Acc {
    long long spans = 0, longs = 0;
    int max = 0;
    void add(const SpanList& l) {
      if (l.empty()) return;
      const int len = token_count(l);
      ++spans;
      longs += len >= 4;
      max = std::max(max, len);
    }
    RoleStats done() const {
      RoleStats r;
      r.spans = spans;
      if (spans > 0) {
        r.long_fraction = static_cast<double>(longs) / spans;
        r.max_length = max;
      }
      return r;
    }
  } h, t, e;
  for (const auto& ex : data) {
    ++s.sentences;
    s.tokens += ex.sentence.size();
    for (const auto& tu : ex.tuples) {
      ++s.tuples;
      h.add(tu.holder);
      t.add(tu.target);
      e.add(tu.expression);
    }
  }
  s.holder = h.done();
  s.target = t.done();
  s.expression = e.done();
  return s;
}

// ---- synthetic corpus ----

namespace {

struct Lexeme {
  const char* text;
  Polarity polarity = Polarity::neutral;
};

const std::vector<const char*> kHolders = {"John", "Mary", "the critics", "my neighbour",
                                           "Anna Berg", "the old man", "our teacher"};
const std::vector<const char*> kTargets = {"pizza", "new phone", "battery life", "hotel staff",
                                           "film", "service", "small garden", "concert",
                                           "train schedule", "local museum"};
const std::vector<Lexeme> kVerbs = {
    {"loves", Polarity::positive},      {"really enjoys", Polarity::positive},
    {"praised", Polarity::positive},    {"hates", Polarity::negative},
    {"strongly dislikes", Polarity::negative}, {"criticized", Polarity::negative},
    {"mentioned", Polarity::neutral},   {"talked about", Polarity::neutral}};
const std::vector<Lexeme> kAdjectives = {
    {"great", Polarity::positive},       {"truly wonderful", Polarity::positive},
    {"awful", Polarity::negative},       {"terribly slow", Polarity::negative},
    {"okay", Polarity::neutral},         {"fairly average", Polarity::neutral}};
const std::vector<const char*> kFillers = {
    "it rained all day yesterday", "we took the train to the city",
    "the meeting starts at nine",  "they walked along the river",
    "nobody knew the answer",      "the shop closes early on sunday"};

class Builder {
 public:
  void word(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    while (in >> w) tokens_.push_back(w);
  }
  Span phrase(const std::string& text) {
    const int start = static_cast<int>(tokens_.size());
    word(text);
    return {start, static_cast<int>(tokens_.size()) - 1};
  }
  int size() const { return static_cast<int>(tokens_.size()); }
  std::string text() const {
    std::string out;
    for (const auto& t : tokens_) out += (out.empty() ? "" : " ") + t;
    return out;
  }

 private:
  std::vector<std::string> tokens_;
};

// Draws without replacement, reshuffling when empty, so every entry recurs.
template <typename T>
class Deck {
 public:
  explicit Deck(const std::vector<T>& items) : items_(items) {}
  const T& draw(std::mt19937_64& rng) {
    if (next_ == order_.size()) {
      order_.resize(items_.size());
      for (std::size_t k = 0; k < order_.size(); ++k) order_[k] = k;
      std::shuffle(order_.begin(), order_.end(), rng);
      next_ = 0;
    }
    return items_[order_[next_++]];
  }

 private:
  const std::vector<T>& items_;
  std::vector<std::size_t> order_;
  std::size_t next_ = 0;
};

}  // namespace

Dataset synthesize(const SynthOptions& options) {
  expects(options.sentences >= 0, "sentence count must be non-negative");
  std::mt19937_64 rng(options.seed);
  Deck holders(kHolders), targets(kTargets), fillers(kFillers);
  Deck verbs(kVerbs), adjectives(kAdjectives);
  Dataset out;
  for (int k = 0; k < options.sentences; ++k) {
    Builder b;
    std::vector<SentimentTuple> tuples;
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
      case 0: {  // H V the T .
        const Span h = b.phrase(holders.draw(rng));
        const Lexeme& v = verbs.draw(rng);
        const Span e = b.phrase(v.text);
        b.word("the");
        const Span t = b.phrase(targets.draw(rng));
        tuples.push_back({{h}, {t}, {e}, v.polarity});
        break;
      }
      case 1: {  // the T was ADJ .
        b.word("the");
        const Span t = b.phrase(targets.draw(rng));
        b.word("was");
        const Lexeme& a = adjectives.draw(rng);
        const Span e = b.phrase(a.text);
        tuples.push_back({{}, {t}, {e}, a.polarity});
        break;
      }
      case 2: {  // H said the T was ADJ .
        const Span h = b.phrase(holders.draw(rng));
        b.word("said the");
        const Span t = b.phrase(targets.draw(rng));
        b.word("was");
        const Lexeme& a = adjectives.draw(rng);
        const Span e = b.phrase(a.text);
        tuples.push_back({{h}, {t}, {e}, a.polarity});
        break;
      }
      case 3: {  // H V the T1 but V2 the T2 .
        const Span h = b.phrase(holders.draw(rng));
        const Lexeme& v1 = verbs.draw(rng);
        const Span e1 = b.phrase(v1.text);
        b.word("the");
        const Span t1 = b.phrase(targets.draw(rng));
        b.word("but");
        const Lexeme& v2 = verbs.draw(rng);
        const Span e2 = b.phrase(v2.text);
        b.word("the");
        const Span t2 = b.phrase(targets.draw(rng));
        tuples.push_back({{h}, {t1}, {e1}, v1.polarity});
        tuples.push_back({{h}, {t2}, {e2}, v2.polarity});
        break;
      }
      default:
        b.word(fillers.draw(rng));
        break;
    }
    if (options.mean_tokens > 0) {
      std::normal_distribution<double> len(options.mean_tokens, options.mean_tokens / 6.0);
      const int want = std::max(1, static_cast<int>(std::lround(len(rng))));
      while (b.size() + 3 <= want) {
        b.word(", while");
        b.word(fillers.draw(rng));
      }
    }
    b.word(".");
    out.push_back({make_sentence("synth-" + std::to_string(k), b.text()), std::move(tuples)});
  }
  return out;
}

}  // namespace ssa
