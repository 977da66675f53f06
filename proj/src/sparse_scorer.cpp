// Hashed indicator features over word forms in a +-2 window, directions,
// distances and (stage two) expression membership. Every part score is the
// sum of the weights its features hit in one shared vector "sparse.w".

#include <cmath>
#include <cstdint>

#include "scorers.hpp"

namespace ssa {

namespace {

using Eigen::MatrixXd;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Key {
  std::uint64_t h;
  Key(std::uint64_t seed, int templ) : h(splitmix(seed ^ (static_cast<std::uint64_t>(templ) << 40))) {}
  Key& operator()(std::uint64_t v) {
    h = splitmix(h ^ v);
    return *this;
  }
};

int bucket(int d) {
  d = std::abs(d);
  if (d <= 4) return d;
  return d <= 7 ? 5 : 6;
}

struct SparseReps : Representations {
  std::vector<std::uint64_t> words;  // index p + 2 for p in -2..n+3
  std::vector<int> flags;            // expression membership, index p + 2
  std::vector<int> side;             // -1 / +1 left / right of every expression word, else 0
  std::vector<int> gap;              // bucketed distance to the nearest expression word
  std::uint64_t seed = 0;

  std::uint64_t w(int p) const { return words[p + 2]; }
  std::uint64_t e(int p) const { return static_cast<std::uint64_t>(flags[p + 2]); }
  std::uint64_t where(int p) const {
    return static_cast<std::uint64_t>((side[p + 2] + 1) * 8 + gap[p + 2]);
  }
};

class SparseScorer final : public Scorer {
 public:
  SparseScorer(const Config& config, const Vocabulary& vocab) : Scorer(config, vocab) {
    params_.add("sparse.w", 1 << config_.hash_bits, 1);
    mask_ = (std::uint64_t{1} << config_.hash_bits) - 1;
  }

  std::unique_ptr<Representations> encode(const Sentence& sentence, Stage stage,
                                          const SpanList& expression) const override {
    const int n = sentence.size();
    expects(n >= 1, "cannot encode an empty sentence");
    auto reps = std::make_unique<SparseReps>();
    reps->n = n;
    reps->stage = stage;
    reps->seed = stage == Stage::expression ? 0x5151ull : 0xa2a2ull;
    const auto mark = [](const char* s) { return fnv1a64(s, std::char_traits<char>::length(s)); };
    reps->words.assign(n + 6, mark("<pad>"));
    reps->flags.assign(n + 6, 0);
    reps->words[2] = mark("<root>");
    reps->words[n + 3] = mark("<end>");
    for (int t = 0; t < n; ++t) {
      const std::string& tok = sentence.tokens[t];
      reps->words[t + 3] = fnv1a64(tok.data(), tok.size());
    }
    if (stage == Stage::role)
      for (const Span& s : expression) {
        expects(s.start >= 0 && s.end < n && s.start <= s.end, "expression out of bounds");
        for (int t = s.start; t <= s.end; ++t) reps->flags[t + 3] = 1;
      }
    reps->side.assign(n + 6, 0);
    reps->gap.assign(n + 6, 0);
    if (stage == Stage::role)
      for (int p = 1; p <= n; ++p) {
        int nearest = n + 1, left = 0, right = 0;
        for (int q = 1; q <= n; ++q)
          if (reps->flags[q + 2]) {
            nearest = std::min(nearest, std::abs(p - q));
            (q < p ? left : right) += q != p;
          }
        reps->gap[p + 2] = bucket(nearest);
        reps->side[p + 2] = left == 0 && right > 0 ? -1 : (right == 0 && left > 0 ? 1 : 0);
      }
    return reps;
  }

  ScoreSet<double> score_structure(const Representations& base) const override {
    const auto& r = cast(base);
    const auto& wv = params_["sparse.w"];
    ScoreSet<double> s(r.n);
    const auto sum = [&](double& out) {
      return [&out, &wv, this](std::uint64_t key) { out += wv(key & mask_, 0); };
    };
    visit_parts(r, [&](auto&& feats, int kind, int a, int b, int c) {
      double& cell = cell_of(s, kind, a, b, c);
      feats(sum(cell));
    });
    return s;
  }

  Eigen::MatrixXd score_labels(const Representations& base, const ArcList& arcs) const override {
    const auto& r = cast(base);
    const auto& wv = params_["sparse.w"];
    const int L = static_cast<int>(stage_labels(r.stage).size());
    MatrixXd out(arcs.size(), L);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto [h, m] = arcs[k];
      expects(h >= 0 && h <= r.n && m >= 1 && m <= r.n && h != m, "arc out of bounds");
      for (int l = 0; l < L; ++l) {
        double z = 0;
        label_features(r, h, m, l, [&](std::uint64_t key) { z += wv(key & mask_, 0); });
        out(k, l) = z;
      }
      const double mx = out.row(k).maxCoeff();
      const double lse = mx + std::log((out.row(k).array() - mx).exp().sum());
      out.row(k).array() -= lse;
    }
    return out;
  }

  void backward(const Representations& base, const ScoreSet<double>& weights, const ArcList& arcs,
                const Eigen::MatrixXd& label_weights, ParameterSet& grad) const override {
    const auto& r = cast(base);
    expects(weights.n == r.n, "part weights do not match the sentence");
    expects(label_weights.rows() == static_cast<Eigen::Index>(arcs.size()) &&
                (arcs.empty() || label_weights.cols() ==
                                     static_cast<Eigen::Index>(stage_labels(r.stage).size())),
            "label weights have the wrong shape");
    expects(grad.same_layout(params_), "gradient layout differs from the parameters");
    MatrixXd& g = grad["sparse.w"];
    visit_parts(r, [&](auto&& feats, int kind, int a, int b, int c) {
      const double wgt = value_of(weights, kind, a, b, c);
      if (wgt != 0) feats([&](std::uint64_t key) { g(key & mask_, 0) += wgt; });
    });
    if (arcs.empty()) return;
    const MatrixXd logp = score_labels(r, arcs);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const double total = label_weights.row(k).sum();
      const auto [h, m] = arcs[k];
      for (Eigen::Index l = 0; l < logp.cols(); ++l) {
        const double dz = label_weights(k, l) - std::exp(logp(k, l)) * total;
        if (dz != 0)
          label_features(r, h, m, static_cast<int>(l),
                         [&](std::uint64_t key) { g(key & mask_, 0) += dz; });
      }
    }
  }

 private:
  enum Kind { kArc, kSib, kLeft, kRight };

  static double& cell_of(ScoreSet<double>& s, int kind, int a, int b, int c) {
    switch (kind) {
      case kArc: return s.arc(a, b);
      case kSib: return s.sib(a, b, c);
      case kLeft: return s.span_left(a, b);
      default: return s.span_right(a, b);
    }
  }

  static double value_of(const ScoreSet<double>& s, int kind, int a, int b, int c) {
    switch (kind) {
      case kArc: return s.arc(a, b);
      case kSib: return s.sib(a, b, c);
      case kLeft: return s.span_left(a, b);
      default: return s.span_right(a, b);
    }
  }

  static const SparseReps& cast(const Representations& base) {
    const auto* reps = dynamic_cast<const SparseReps*>(&base);
    expects(reps != nullptr, "representations come from a different scorer");
    return *reps;
  }

  // f(features, kind, a, b, c) where features(emit) emits every key of the part.
  template <typename F>
  void visit_parts(const SparseReps& r, F&& f) const {
    const int n = r.n;
    for (int h = 0; h <= n; ++h)
      for (int m = 1; m <= n; ++m) {
        if (h == m) continue;
        f([&](auto&& emit) { arc_features(r, h, m, emit); }, kArc, h, m, 0);
        const int lo = std::min(h, m), hi = std::max(h, m);
        for (int s = lo + 1; s < hi; ++s)
          f([&](auto&& emit) { sib_features(r, h, s, m, emit); }, kSib, h, s, m);
      }
    for (int k = 1; k <= n; ++k) {
      for (int i = 1; i <= k; ++i)
        f([&](auto&& emit) { left_features(r, k, i, emit); }, kLeft, k, i, 0);
      for (int j = k; j <= n; ++j)
        f([&](auto&& emit) { right_features(r, k, j, emit); }, kRight, k, j, 0);
    }
  }

  template <typename E>
  static void arc_features(const SparseReps& r, int h, int m, E&& emit) {
    const std::uint64_t dir = h < m, dist = bucket(h - m), s = r.seed;
    const std::uint64_t eh = r.e(h), em = r.e(m);
    emit(Key(s, 1)(dir)(dist).h);
    emit(Key(s, 2)(r.w(h))(dir).h);
    emit(Key(s, 3)(r.w(m))(dir).h);
    emit(Key(s, 4)(r.w(h))(r.w(m))(dir).h);
    emit(Key(s, 5)(r.w(h))(dist)(dir).h);
    emit(Key(s, 6)(r.w(m))(dist)(dir).h);
    emit(Key(s, 7)(r.w(m - 1))(r.w(m)).h);
    emit(Key(s, 8)(r.w(m))(r.w(m + 1)).h);
    emit(Key(s, 9)(r.w(h - 1))(r.w(h))(dir).h);
    emit(Key(s, 10)(r.w(h))(r.w(h + 1))(dir).h);
    emit(Key(s, 11)(r.w(m - 2))(r.w(m)).h);
    emit(Key(s, 12)(r.w(m))(r.w(m + 2)).h);
    emit(Key(s, 13)(eh)(em)(dir)(dist).h);
    emit(Key(s, 14)(eh)(em)(r.w(m))(dir).h);
    emit(Key(s, 15)(eh)(em)(r.w(h))(dir).h);
    if (r.stage == Stage::role) {
      const std::uint64_t pos = r.where(m);
      emit(Key(s, 16)(eh)(pos).h);
      emit(Key(s, 17)(eh)(pos)(r.w(m)).h);
      emit(Key(s, 18)(eh)(em)(r.w(h))(r.w(m))(dir).h);
      emit(Key(s, 19)(eh)(r.e(h - 1))(r.e(h + 1))(dir)(dist).h);
    }
  }

  template <typename E>
  static void sib_features(const SparseReps& r, int h, int sb, int m, E&& emit) {
    const std::uint64_t dir = h < m, s = r.seed;
    emit(Key(s, 20)(r.w(sb))(r.w(m))(dir).h);
    emit(Key(s, 21)(r.w(h))(r.w(sb))(dir).h);
    emit(Key(s, 22)(r.w(h))(r.w(m))(dir).h);
    emit(Key(s, 23)(bucket(sb - m))(dir).h);
    emit(Key(s, 24)(r.e(h))(r.e(sb))(r.e(m))(dir).h);
  }

  template <typename E>
  static void left_features(const SparseReps& r, int k, int i, E&& emit) {
    const std::uint64_t s = r.seed;
    emit(Key(s, 30)(r.w(k))(r.w(i - 1)).h);
    emit(Key(s, 31)(r.w(i)).h);
    emit(Key(s, 32)(r.w(i - 1)).h);
    emit(Key(s, 33)(r.w(i - 1))(r.w(i)).h);
    emit(Key(s, 34)(bucket(k - i)).h);
    emit(Key(s, 35)(r.e(k))(r.e(i - 1))(r.e(i)).h);
    emit(Key(s, 36)(r.w(k))(r.w(i)).h);
  }

  template <typename E>
  static void right_features(const SparseReps& r, int k, int j, E&& emit) {
    const std::uint64_t s = r.seed;
    emit(Key(s, 40)(r.w(k))(r.w(j + 1)).h);
    emit(Key(s, 41)(r.w(j)).h);
    emit(Key(s, 42)(r.w(j + 1)).h);
    emit(Key(s, 43)(r.w(j))(r.w(j + 1)).h);
    emit(Key(s, 44)(bucket(j - k)).h);
    emit(Key(s, 45)(r.e(k))(r.e(j))(r.e(j + 1)).h);
    emit(Key(s, 46)(r.w(k))(r.w(j)).h);
  }

  template <typename E>
  static void label_features(const SparseReps& r, int h, int m, int label, E&& emit) {
    const std::uint64_t dir = h < m, dist = bucket(h - m), s = r.seed, l = label;
    emit(Key(s, 50)(l).h);
    emit(Key(s, 51)(l)(r.w(m)).h);
    emit(Key(s, 52)(l)(r.w(h))(r.w(m)).h);
    emit(Key(s, 53)(l)(dir)(dist).h);
    emit(Key(s, 54)(l)(r.w(m - 1)).h);
    emit(Key(s, 55)(l)(r.w(m + 1)).h);
    emit(Key(s, 56)(l)(r.e(h))(r.e(m))(dir).h);
    emit(Key(s, 57)(l)(r.w(h)).h);
    emit(Key(s, 58)(l)(r.w(m - 2))(r.w(m + 2)).h);
    if (r.stage == Stage::role) {
      emit(Key(s, 59)(l)(r.where(m)).h);
      emit(Key(s, 60)(l)(r.where(m))(r.w(m)).h);
      emit(Key(s, 61)(l)(r.where(m))(r.w(m - 1)).h);
    }
  }

  std::uint64_t mask_ = 0;
};

}  // namespace

std::unique_ptr<Scorer> make_sparse_scorer(const Config& config, const Vocabulary& vocab) {
  return std::make_unique<SparseScorer>(config, vocab);
}

}  // namespace ssa
