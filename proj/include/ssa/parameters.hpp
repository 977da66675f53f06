#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace ssa {

/// Named dense blocks in insertion order. Values are kept in double but are
/// always representable in float (see quantize()) so checkpoints round-trip.
class ParameterSet {
 public:
  Eigen::MatrixXd& add(const std::string& name, int rows, int cols);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Eigen::MatrixXd& operator[](const std::string& name);
  const Eigen::MatrixXd& operator[](const std::string& name) const;

  std::size_t size() const { return blocks_.size(); }
  const std::string& name(std::size_t k) const { return names_[k]; }
  Eigen::MatrixXd& block(std::size_t k) { return blocks_[k]; }
  const Eigen::MatrixXd& block(std::size_t k) const { return blocks_[k]; }

  /// Same names and shapes, all zero.
  ParameterSet zeros_like() const;
  void set_zero();
  /// this += alpha * other (same layout required).
  void add_scaled(const ParameterSet& other, double alpha);
  void scale(double alpha);
  double squared_norm() const;
  long long parameter_count() const;
  bool all_finite() const;
  /// Rounds every entry to the nearest float.
  void quantize();
  bool same_layout(const ParameterSet& other) const;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> blocks_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Glorot-style uniform initialisation for `W`, zero for names ending in ".b".
void initialize(ParameterSet& params, std::mt19937_64& rng);

/// Binary container: magic, version, JSON metadata, dimension table,
/// little-endian float32 blocks (row-major), FNV-1a 64 trailer.
void save_checkpoint(const std::string& path, const nlohmann::json& meta,
                     const ParameterSet& params);

struct Checkpoint {
  nlohmann::json meta;
  ParameterSet params;
};

Checkpoint load_checkpoint(const std::string& path);

std::string encode_checkpoint(const nlohmann::json& meta, const ParameterSet& params);
Checkpoint decode_checkpoint(const std::string& bytes);

std::uint64_t fnv1a64(const char* data, std::size_t size);

}  // namespace ssa
