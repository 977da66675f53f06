#include "ssa/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "scorers.hpp"

namespace ssa {

std::string lowercase(const std::string& word) {
  std::string out = word;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Vocabulary::Vocabulary() {
  insert("<unk>");
  insert("<bos>");
  insert("<eos>");
}

void Vocabulary::insert(const std::string& word) {
  ids_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
}

Vocabulary Vocabulary::build(const Dataset& data) {
  std::set<std::string> seen;
  for (const auto& ex : data)
    for (const auto& t : ex.sentence.tokens) seen.insert(lowercase(t));
  Vocabulary v;
  for (const auto& w : seen)
    if (!v.ids_.count(w)) v.insert(w);
  return v;
}

int Vocabulary::id(const std::string& word) const {
  auto it = ids_.find(lowercase(word));
  // the reserved markers are never produced by a token
  if (it == ids_.end() || it->second < 3) return kUnknown;
  return it->second;
}

nlohmann::json Vocabulary::to_json() const { return words_; }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < 3) throw DataError("vocabulary must be an array of words");
  Vocabulary v;
  for (std::size_t k = 3; k < j.size(); ++k) {
    const auto w = j[k].get<std::string>();
    if (v.ids_.count(w)) throw DataError("vocabulary repeats '" + w + "'");
    v.insert(w);
  }
  return v;
}

std::unique_ptr<Scorer> make_scorer(const Config& config, const Vocabulary& vocab) {
  config.validate();
  if (config.encoder == EncoderKind::sparse) return make_sparse_scorer(config, vocab);
  return make_neural_scorer(config, vocab);
}

}  // namespace ssa
