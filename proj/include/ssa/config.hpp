#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ssa {

enum class EncoderKind { sparse, window, bilstm };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder(const std::string& text);

/// Model and optimiser settings. Every field has a default; the flat
/// `key = value` file format uses the field names below.
struct Config {
  EncoderKind encoder = EncoderKind::bilstm;
  int emb_dim = 32;
  int hidden_dim = 32;
  int arc_dim = 32;
  int sib_dim = 8;
  int span_dim = 16;
  int label_dim = 32;
  int hash_bits = 18;

  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;

  int epochs = 60;
  int batch_size = 32;
  std::uint64_t seed = 1;
  int workers = 1;
  double dev_fraction = 0.1;

  void validate() const;
  nlohmann::json to_json() const;
  static Config from_json(const nlohmann::json& j);
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// malformed values raise DataError with the line number.
Config parse_config(const std::string& text, Config base = {});
Config load_config(const std::string& path);

}  // namespace ssa
