#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssa {

/// Raised when a caller breaks a documented precondition (shape mismatch,
/// malformed tree, out-of-range index).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The constrained search space contains no tree.
class NoLegalTree : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (unknown polarity, bad offsets,
/// unsatisfiable training annotation).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sentiment annotation that cannot be converted into a constraint set.
class AnnotationError : public DataError {
 public:
  AnnotationError(std::size_t tuple_index, const std::string& what)
      : DataError("tuple " + std::to_string(tuple_index) + ": " + what),
        tuple_index_(tuple_index) {}
  std::size_t tuple_index() const noexcept { return tuple_index_; }

 private:
  std::size_t tuple_index_;
};

inline void expects(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

/// Inclusive token interval over sentence tokens (0-based, root excluded).
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool contains(int token) const { return start <= token && token <= end; }
  bool overlaps(const Span& other) const {
    return start <= other.end && other.start <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

using SpanList = std::vector<Span>;

int token_count(const SpanList& spans);

enum class Polarity : std::uint8_t { positive, negative, neutral };

std::string_view to_string(Polarity p);

/// Arc labels of both parsing stages. Stage one uses `none` and the `exp_*`
/// labels on root arcs; stage two uses `none`, `holder` and `target` on arcs
/// leaving the expression.
enum class ArcLabel : std::uint8_t {
  none,
  exp_positive,
  exp_negative,
  exp_neutral,
  exp_incomplete,
  holder,
  target,
};

std::string_view to_string(ArcLabel label);

enum class Stage : std::uint8_t { expression, role };

/// Label inventory of a stage, in the order used by the label scorers.
const std::vector<ArcLabel>& stage_labels(Stage stage);

/// Index of `label` within stage_labels(stage); throws if absent.
int label_index(Stage stage, ArcLabel label);

ArcLabel expression_label(Polarity p);
bool is_expression_label(ArcLabel label);
Polarity polarity_of(ArcLabel label);

struct SentimentTuple {
  SpanList holder;
  SpanList target;
  SpanList expression;
  Polarity polarity = Polarity::neutral;

  friend bool operator==(const SentimentTuple&, const SentimentTuple&) = default;
};

struct Sentence {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
  /// Code-point offsets [begin, end) of each token within `text`.
  std::vector<std::pair<int, int>> offsets;

  int size() const { return static_cast<int>(tokens.size()); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Builds a sentence from whitespace-separated text.
Sentence make_sentence(std::string id, std::string text);

struct AnnotatedSentence {
  Sentence sentence;
  std::vector<SentimentTuple> tuples;

  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) = default;
};

using Dataset = std::vector<AnnotatedSentence>;

}  // namespace ssa
