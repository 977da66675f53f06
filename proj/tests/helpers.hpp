#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ssa/score_set.hpp"

namespace ssa::testing {

inline ScoreSet<double> random_scores(int n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  ScoreSet<double> s(n);
  s.for_each_part([&](double& v) { v = u(rng); });
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string golden(const std::string& name) {
  return read_file(std::string(SSA_TEST_DATA_DIR) + "/golden/" + name);
}

}  // namespace ssa::testing
