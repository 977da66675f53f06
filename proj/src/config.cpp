#include "ssa/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ssa/common.hpp"

namespace ssa {

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::sparse: return "sparse";
    case EncoderKind::window: return "window";
    case EncoderKind::bilstm: return "bilstm";
  }
  return "?";
}

EncoderKind parse_encoder(const std::string& text) {
  if (text == "sparse") return EncoderKind::sparse;
  if (text == "window") return EncoderKind::window;
  if (text == "bilstm") return EncoderKind::bilstm;
  throw DataError("unknown encoder '" + text + "' (expected sparse, window or bilstm)");
}

void Config::validate() const {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) throw DataError("config: " + what);
  };
  need(emb_dim > 0 && hidden_dim > 0 && arc_dim > 0 && sib_dim > 0 && span_dim > 0 &&
           label_dim > 0,
       "dimensions must be positive");
  need(hash_bits >= 4 && hash_bits <= 26, "hash_bits must lie in 4..26");
  need(lr >= 0, "lr must be non-negative");
  need(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "betas must lie in [0, 1)");
  need(eps > 0, "eps must be positive");
  need(clip > 0, "clip must be positive");
  need(epochs >= 0, "epochs must be non-negative");
  need(batch_size >= 1, "batch_size must be at least 1");
  need(workers >= 1, "workers must be at least 1");
  need(dev_fraction >= 0 && dev_fraction < 1, "dev_fraction must lie in [0, 1)");
}

nlohmann::json Config::to_json() const {
  return {{"encoder", to_string(encoder)},
          {"emb_dim", emb_dim},
          {"hidden_dim", hidden_dim},
          {"arc_dim", arc_dim},
          {"sib_dim", sib_dim},
          {"span_dim", span_dim},
          {"label_dim", label_dim},
          {"hash_bits", hash_bits},
          {"lr", lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"eps", eps},
          {"clip", clip},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"seed", seed},
          {"workers", workers},
          {"dev_fraction", dev_fraction}};
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw DataError("config: bad value '" + text + "' for " + key);
  return value;
}

using Setter = std::function<void(Config&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    const auto int_field = [&](const char* key, int Config::*field) {
      t[key] = [field](Config& c, const std::string& v, const std::string& k) {
        c.*field = parse_number<int>(v, k);
      };
    };
    const auto real_field = [&](const char* key, double Config::*field) {
      t[key] = [field](Config& c, const std::string& v, const std::string& k) {
        c.*field = parse_number<double>(v, k);
      };
    };
    t["encoder"] = [](Config& c, const std::string& v, const std::string&) {
      c.encoder = parse_encoder(v);
    };
    int_field("emb_dim", &Config::emb_dim);
    int_field("hidden_dim", &Config::hidden_dim);
    int_field("arc_dim", &Config::arc_dim);
    int_field("sib_dim", &Config::sib_dim);
    int_field("span_dim", &Config::span_dim);
    int_field("label_dim", &Config::label_dim);
    int_field("hash_bits", &Config::hash_bits);
    real_field("lr", &Config::lr);
    real_field("beta1", &Config::beta1);
    real_field("beta2", &Config::beta2);
    real_field("eps", &Config::eps);
    real_field("clip", &Config::clip);
    int_field("epochs", &Config::epochs);
    int_field("batch_size", &Config::batch_size);
    t["seed"] = [](Config& c, const std::string& v, const std::string& k) {
      c.seed = parse_number<std::uint64_t>(v, k);
    };
    int_field("workers", &Config::workers);
    real_field("dev_fraction", &Config::dev_fraction);
    return t;
  }();
  return table;
}

}  // namespace

Config Config::from_json(const nlohmann::json& j) {
  Config c;
  for (const auto& [key, value] : j.items()) {
    auto it = setters().find(key);
    if (it == setters().end()) throw DataError("config: unknown key '" + key + "'");
    it->second(c, value.is_string() ? value.get<std::string>() : value.dump(), key);
  }
  c.validate();
  return c;
}

Config parse_config(const std::string& text, Config base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end())
      throw DataError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    try {
      it->second(base, value, key);
    } catch (const DataError& e) {
      throw DataError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace ssa
