#include "ssa/model.hpp"

namespace ssa {

Model::Model(const Config& config, const Vocabulary& vocab) : scorer_(make_scorer(config, vocab)) {}

Model::Model(const Model& other) : scorer_(make_scorer(other.config(), other.vocabulary())) {
  scorer_->params() = other.params();
}

Model& Model::operator=(const Model& other) {
  if (this != &other) *this = Model(other);
  return *this;
}

nlohmann::json Model::metadata() const {
  return {{"format", "ssa-model"},
          {"config", config().to_json()},
          {"vocabulary", vocabulary().to_json()}};
}

void Model::save(const std::string& path, const nlohmann::json& extra) const {
  nlohmann::json meta = metadata();
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  save_checkpoint(path, meta, params());
}

Model Model::load(const std::string& path, nlohmann::json* meta) {
  Checkpoint ck = load_checkpoint(path);
  if (!ck.meta.is_object() || ck.meta.value("format", "") != "ssa-model" ||
      !ck.meta.contains("config") || !ck.meta.contains("vocabulary"))
    throw DataError(path + ": checkpoint does not describe a model");
  Model m(Config::from_json(ck.meta["config"]), Vocabulary::from_json(ck.meta["vocabulary"]));
  if (!m.params().same_layout(ck.params))
    throw DataError(path + ": parameter blocks do not match the stored configuration");
  m.params() = std::move(ck.params);
  if (meta) *meta = std::move(ck.meta);
  return m;
}

}  // namespace ssa
