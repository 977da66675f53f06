#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "ssa/scorer.hpp"

namespace ssa {

/// A scorer bundled with what is needed to rebuild it from a checkpoint.
class Model {
 public:
  Model(const Config& config, const Vocabulary& vocab);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model& other);
  Model& operator=(const Model& other);

  Scorer& scorer() { return *scorer_; }
  const Scorer& scorer() const { return *scorer_; }
  ParameterSet& params() { return scorer_->params(); }
  const ParameterSet& params() const { return scorer_->params(); }
  const Config& config() const { return scorer_->config(); }
  const Vocabulary& vocabulary() const { return scorer_->vocabulary(); }

  /// `extra` is merged into the checkpoint metadata.
  void save(const std::string& path, const nlohmann::json& extra = nlohmann::json::object()) const;
  static Model load(const std::string& path, nlohmann::json* meta = nullptr);

  nlohmann::json metadata() const;

 private:
  std::unique_ptr<Scorer> scorer_;
};

}  // namespace ssa
