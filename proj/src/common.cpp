#include "ssa/common.hpp"

namespace ssa {

int token_count(const SpanList& spans) {
  int total = 0;
  for (const Span& s : spans) total += s.length();
  return total;
}

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "Positive";
    case Polarity::negative: return "Negative";
    case Polarity::neutral: return "Neutral";
  }
  return "?";
}

std::string_view to_string(ArcLabel label) {
  switch (label) {
    case ArcLabel::none: return "none";
    case ArcLabel::exp_positive: return "exp:pos";
    case ArcLabel::exp_negative: return "exp:neg";
    case ArcLabel::exp_neutral: return "exp:neu";
    case ArcLabel::exp_incomplete: return "exp:incomplete";
    case ArcLabel::holder: return "holder";
    case ArcLabel::target: return "target";
  }
  return "?";
}

const std::vector<ArcLabel>& stage_labels(Stage stage) {
  static const std::vector<ArcLabel> first{ArcLabel::none, ArcLabel::exp_positive,
                                           ArcLabel::exp_negative, ArcLabel::exp_neutral,
                                           ArcLabel::exp_incomplete};
  static const std::vector<ArcLabel> second{ArcLabel::none, ArcLabel::holder, ArcLabel::target};
  return stage == Stage::expression ? first : second;
}

int label_index(Stage stage, ArcLabel label) {
  const auto& labels = stage_labels(stage);
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == label) return static_cast<int>(k);
  throw ContractViolation("label " + std::string(to_string(label)) + " not used in this stage");
}

ArcLabel expression_label(Polarity p) {
  switch (p) {
    case Polarity::positive: return ArcLabel::exp_positive;
    case Polarity::negative: return ArcLabel::exp_negative;
    case Polarity::neutral: break;
  }
  return ArcLabel::exp_neutral;
}

bool is_expression_label(ArcLabel label) {
  return label == ArcLabel::exp_positive || label == ArcLabel::exp_negative ||
         label == ArcLabel::exp_neutral || label == ArcLabel::exp_incomplete;
}

Polarity polarity_of(ArcLabel label) {
  switch (label) {
    case ArcLabel::exp_positive: return Polarity::positive;
    case ArcLabel::exp_negative: return Polarity::negative;
    case ArcLabel::exp_neutral: return Polarity::neutral;
    default: throw ContractViolation("label carries no polarity");
  }
}

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// UTF-8 continuation bytes do not start a code point.
bool starts_code_point(unsigned char c) { return (c & 0xC0) != 0x80; }

}  // namespace

Sentence make_sentence(std::string id, std::string text) {
  Sentence s;
  s.id = std::move(id);
  s.text = std::move(text);
  int cp = 0;
  std::size_t k = 0;
  const std::string& t = s.text;
  while (k < t.size()) {
    const auto c = static_cast<unsigned char>(t[k]);
    if (is_space(c)) {
      ++k;
      ++cp;
      continue;
    }
    const std::size_t begin_byte = k;
    const int begin_cp = cp;
    while (k < t.size() && !is_space(static_cast<unsigned char>(t[k]))) {
      if (starts_code_point(static_cast<unsigned char>(t[k]))) ++cp;
      ++k;
    }
    s.tokens.push_back(t.substr(begin_byte, k - begin_byte));
    s.offsets.emplace_back(begin_cp, cp);
  }
  return s;
}

}  // namespace ssa
