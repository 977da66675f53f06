#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssa/common.hpp"

namespace ssa {

enum class Role { holder, target, expression };

std::string_view to_string(Role role);

struct Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long long gold = 0;
  long long predicted = 0;
  long long matched = 0;

  nlohmann::json to_json() const;
};

/// Builds P/R/F1 from counts; an empty denominator gives 0.
Score make_score(long long gold, long long predicted, long long matched);

using TupleCorpus = std::vector<std::vector<SentimentTuple>>;

/// Tuples of each sentence, in order.
TupleCorpus tuples_of(const Dataset& data);

/// Token-level: per sentence and role, the union of the role's tokens over
/// all tuples is compared.
Score span_f1(const TupleCorpus& gold, const TupleCorpus& pred, Role role);

/// Exact match of holder, target and expression token sets (and polarity
/// when asked), each tuple used at most once.
Score graph_f1(const TupleCorpus& gold, const TupleCorpus& pred, bool with_polarity);

struct Evaluation {
  Score holder, target, expression;
  Score nsf1, sf1;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

Evaluation evaluate(const TupleCorpus& gold, const TupleCorpus& pred);
/// Also checks that both datasets list the same sentences.
Evaluation evaluate(const Dataset& gold, const Dataset& pred);

/// Bucket k holds lengths in [edges[k], edges[k+1]), the last one is open.
struct Bucket {
  int low = 0;
  std::optional<int> high;  // exclusive
  std::optional<Score> score;  // nothing when the bucket is empty on both sides
};

struct Breakdown {
  std::vector<Bucket> expression;  // expression token F1 by expression length
  std::vector<Bucket> tuple;       // SF1 by total tuple length

  nlohmann::json to_json() const;
  std::string to_text() const;
};

Breakdown breakdown(const TupleCorpus& gold, const TupleCorpus& pred, const std::vector<int>& edges);

}  // namespace ssa
