#include "ssa/parameters.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ssa/common.hpp"

namespace ssa {

Eigen::MatrixXd& ParameterSet::add(const std::string& name, int rows, int cols) {
  expects(!contains(name), "duplicate parameter block");
  expects(rows >= 0 && cols >= 0, "negative parameter shape");
  index_[name] = blocks_.size();
  names_.push_back(name);
  blocks_.push_back(Eigen::MatrixXd::Zero(rows, cols));
  return blocks_.back();
}

Eigen::MatrixXd& ParameterSet::operator[](const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("unknown parameter block " + name);
  return blocks_[it->second];
}

const Eigen::MatrixXd& ParameterSet::operator[](const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("unknown parameter block " + name);
  return blocks_[it->second];
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (std::size_t k = 0; k < size(); ++k)
    out.add(names_[k], static_cast<int>(blocks_[k].rows()), static_cast<int>(blocks_[k].cols()));
  return out;
}

void ParameterSet::set_zero() {
  for (auto& b : blocks_) b.setZero();
}

bool ParameterSet::same_layout(const ParameterSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t k = 0; k < size(); ++k)
    if (names_[k] != other.names_[k] || blocks_[k].rows() != other.blocks_[k].rows() ||
        blocks_[k].cols() != other.blocks_[k].cols())
      return false;
  return true;
}

void ParameterSet::add_scaled(const ParameterSet& other, double alpha) {
  expects(same_layout(other), "parameter layouts differ");
  for (std::size_t k = 0; k < size(); ++k) blocks_[k] += alpha * other.blocks_[k];
}

void ParameterSet::scale(double alpha) {
  for (auto& b : blocks_) b *= alpha;
}

double ParameterSet::squared_norm() const {
  double total = 0;
  for (const auto& b : blocks_) total += b.squaredNorm();
  return total;
}

long long ParameterSet::parameter_count() const {
  long long total = 0;
  for (const auto& b : blocks_) total += b.size();
  return total;
}

bool ParameterSet::all_finite() const {
  for (const auto& b : blocks_)
    if (!b.allFinite()) return false;
  return true;
}

void ParameterSet::quantize() {
  for (auto& b : blocks_) b = b.cast<float>().cast<double>();
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.blocks_[k] != b.blocks_[k]) return false;
  return true;
}

void initialize(ParameterSet& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const std::string& name = params.name(k);
    Eigen::MatrixXd& b = params.block(k);
    if (name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0) {
      b.setZero();
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(b.rows() + b.cols()));
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = bound * u(rng);
  }
  params.quantize();
}

std::uint64_t fnv1a64(const char* data, std::size_t size) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t k = 0; k < size; ++k) {
    h ^= static_cast<unsigned char>(data[k]);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'A', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t k = 0; k < sizeof(T); ++k)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * k)) & 0xFF));
}

void put_float(std::string& out, float f) { put(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  float get_float() { return std::bit_cast<float>(get<std::uint32_t>()); }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const nlohmann::json& meta, const ParameterSet& params) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  const std::string meta_text = meta.dump();
  put<std::uint64_t>(out, meta_text.size());
  out += meta_text;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t k = 0; k < params.size(); ++k) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.name(k).size()));
    out += params.name(k);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.block(k).rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.block(k).cols()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Eigen::MatrixXd& b = params.block(k);
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j) put_float(out, static_cast<float>(b(i, j)));
  }
  put<std::uint64_t>(out, fnv1a64(out.data(), out.size()));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw DataError("not a checkpoint (bad magic)");
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes);
  tail.get_bytes(body);
  if (tail.get<std::uint64_t>() != fnv1a64(bytes.data(), body))
    throw DataError("checkpoint checksum mismatch");

  Reader in(bytes);
  in.get_bytes(sizeof kMagic);
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto meta_len = in.get<std::uint64_t>();
  Checkpoint ck;
  try {
    ck.meta = nlohmann::json::parse(in.get_bytes(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = in.get<std::uint32_t>();
    const std::string name = in.get_bytes(len);
    const auto rows = in.get<std::uint32_t>();
    const auto cols = in.get<std::uint32_t>();
    ck.params.add(name, static_cast<int>(rows), static_cast<int>(cols));
  }
  for (std::size_t k = 0; k < ck.params.size(); ++k) {
    Eigen::MatrixXd& b = ck.params.block(k);
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = in.get_float();
  }
  if (in.position() != body) throw DataError("checkpoint has trailing bytes");
  return ck;
}

void save_checkpoint(const std::string& path, const nlohmann::json& meta,
                     const ParameterSet& params) {
  const std::string bytes = encode_checkpoint(meta, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return decode_checkpoint(ss.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace ssa
