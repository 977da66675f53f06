#pragma once

#include <memory>

#include "ssa/scorer.hpp"

namespace ssa {

std::unique_ptr<Scorer> make_neural_scorer(const Config& config, const Vocabulary& vocab);
std::unique_ptr<Scorer> make_sparse_scorer(const Config& config, const Vocabulary& vocab);

}  // namespace ssa
