#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssa/common.hpp"

namespace ssa {

struct LoadOptions {
  /// Offsets that cut through a token are an error instead of being widened.
  bool strict = false;
};

/// Reads the sentiment-graph JSON layout: an array of
/// {sent_id, text, opinions: [{Source, Target, Polar_expression, Polarity}]}
/// where each role is [[surface strings], ["begin:end", ...]] in characters.
Dataset parse_dataset(const std::string& json_text, const LoadOptions& options = {},
                      std::vector<std::string>* warnings = nullptr);
Dataset load_dataset(const std::string& path, const LoadOptions& options = {},
                     std::vector<std::string>* warnings = nullptr);

/// Same layout, offsets rebuilt from token positions.
nlohmann::json dataset_to_json(const Dataset& data);
void write_dataset(const std::string& path, const Dataset& data);

Polarity parse_polarity(const std::string& text);

struct RoleStats {
  long long spans = 0;
  std::optional<double> long_fraction;  // share of spans with >= 4 tokens
  std::optional<int> max_length;
};

struct DatasetStats {
  long long sentences = 0;
  long long tokens = 0;
  long long tuples = 0;
  RoleStats holder, target, expression;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

/// A role's span in a tuple counts once, with its length summed over segments.
DatasetStats dataset_stats(const Dataset& data);

struct SynthOptions {
  int sentences = 50;
  std::uint64_t seed = 1;
  /// When positive, sentences are padded with opinion-free clauses until
  /// their length is drawn around this many tokens.
  int mean_tokens = 0;
};

/// Templated sentences over a small lexicon: holders, targets and polar
/// words recur, so the tuples are learnable from a few dozen examples.
Dataset synthesize(const SynthOptions& options);

}  // namespace ssa
