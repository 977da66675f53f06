// Gradient and loss self-checks; separate from verify.cpp so the chart
// checks do not pull in the scorers.

#include <chrono>
#include <cmath>
#include <random>

#include "ssa/training.hpp"
#include "ssa/verify.hpp"

namespace ssa::verify {

namespace {

Config small_config(EncoderKind kind) {
  Config c;
  c.encoder = kind;
  c.emb_dim = 4;
  c.hidden_dim = 3;
  c.arc_dim = 3;
  c.sib_dim = 2;
  c.span_dim = 2;
  c.label_dim = 3;
  c.hash_bits = 8;
  return c;
}

AnnotatedSentence three_tokens() {
  AnnotatedSentence ex{make_sentence("three", "John loves pizza"), {}};
  ex.tuples.push_back({{{0, 0}}, {{2, 2}}, {{1, 1}}, Polarity::positive});
  return ex;
}

Dataset loss_examples() {
  Dataset d;
  d.push_back(three_tokens());
  d.push_back({make_sentence("none", "it rained"), {}});
  AnnotatedSentence two{make_sentence("two", "Mary hates the slow service but likes food"), {}};
  two.tuples.push_back({{{0, 0}}, {{3, 4}}, {{1, 1}}, Polarity::negative});
  two.tuples.push_back({{{0, 0}}, {{7, 7}}, {{6, 6}}, Polarity::positive});
  d.push_back(two);
  AnnotatedSentence split{make_sentence("split", "not at all what I call good"), {}};
  split.tuples.push_back({{{4, 4}}, {}, {{0, 2}, {6, 6}}, Polarity::negative});
  d.push_back(split);
  return d;
}

void perturb(ParameterSet& params, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (std::size_t k = 0; k < params.size(); ++k)
    for (Eigen::Index i = 0; i < params.block(k).size(); ++i) params.block(k).data()[i] += u(rng);
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SuiteResult gradient_suite(int trials, std::uint64_t seed) {
  SuiteResult r;
  r.name = "loss gradient vs finite differences";
  const auto t0 = std::chrono::steady_clock::now();
  const AnnotatedSentence ex = three_tokens();
  const TrainingExample te = build_training_example(ex);
  Dataset vocab_source = {ex};
  std::mt19937_64 rng(seed);
  const double step = 1e-5;
  for (EncoderKind kind : {EncoderKind::sparse, EncoderKind::window, EncoderKind::bilstm}) {
    for (int trial = 0; trial < trials; ++trial) {
      Model model(small_config(kind), Vocabulary::build(vocab_source));
      initialize(model.params(), rng);
      perturb(model.params(), rng, 0.5);
      ParameterSet grad = model.params().zeros_like();
      example_gradient(model.scorer(), te, grad);
      for (std::size_t k = 0; k < grad.size(); ++k)
        for (Eigen::Index i = 0; i < grad.block(k).size(); ++i) {
          double& p = model.params().block(k).data()[i];
          const double keep = p;
          p = keep + step;
          const double up = example_loss(model.scorer(), te);
          p = keep - step;
          const double down = example_loss(model.scorer(), te);
          p = keep;
          const double fd = (up - down) / (2 * step);
          const double an = grad.block(k).data()[i];
          ++r.checks;
          if (!(std::abs(fd - an) <= 1e-3 * std::max(std::abs(fd), std::abs(an)) + 1e-7))
            r.fail(to_string(kind) + " " + grad.name(k) + "[" + std::to_string(i) +
                   "]: analytic " + std::to_string(an) + " vs " + std::to_string(fd));
        }
    }
  }
  r.seconds = since(t0);
  return r;
}

SuiteResult loss_suite(int draws, std::uint64_t seed) {
  SuiteResult r;
  r.name = "loss sanity";
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset data = loss_examples();
  std::vector<TrainingExample> examples;
  for (const auto& ex : data) examples.push_back(build_training_example(ex));
  std::mt19937_64 rng(seed);
  for (EncoderKind kind : {EncoderKind::sparse, EncoderKind::bilstm}) {
    Model model(small_config(kind), Vocabulary::build(data));
    for (int d = 0; d < draws; ++d) {
      initialize(model.params(), rng);
      perturb(model.params(), rng, 1.0);
      for (const auto& ex : examples) {
        const double loss = example_loss(model.scorer(), ex);
        ++r.checks;
        if (!(loss >= 0)) r.fail(to_string(kind) + " " + ex.id + ": loss " + std::to_string(loss));
      }
    }
    // every tree is gold and no arc has a label factor
    TrainingExample all = examples.front();
    for (auto& inst : all.instances) {
      inst.target.mask = ConstraintMask::permissive(all.sentence.size());
      inst.target.labels.arcs.clear();
      inst.target.labels.gold.clear();
    }
    ParameterSet grad = model.params().zeros_like();
    const double loss = example_gradient(model.scorer(), all, grad);
    ++r.checks;
    if (std::abs(loss) > 1e-12 || grad.squared_norm() > 1e-20)
      r.fail(to_string(kind) + " degenerate loss " + std::to_string(loss));
  }
  r.seconds = since(t0);
  return r;
}

}  // namespace ssa::verify
