#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <limits>

#include "ssa/common.hpp"

namespace ssa {

template <typename Scalar>
constexpr Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// Dense log-scores of every part a second-order, headed-span tree can use.
///
/// Positions run over 0..n with 0 the root. `arc(h, m)` scores h -> m,
/// `sib(h, s, m)` scores adjacent modifiers s, m of h (s between h and m),
/// `span_left(k, i)` / `span_right(k, j)` score k's yield starting at i /
/// ending at j. Unused cells are ignored; negative infinity forbids a part.
template <typename Scalar>
struct ScoreSet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int n = 0;
  Matrix arc;
  Vector sib_values;
  Matrix span_left;
  Matrix span_right;

  ScoreSet() = default;
  explicit ScoreSet(int token_count)
      : n(token_count),
        arc(Matrix::Zero(token_count + 1, token_count + 1)),
        sib_values(Vector::Zero(static_cast<Eigen::Index>(token_count + 1) *
                                (token_count + 1) * (token_count + 1))),
        span_left(Matrix::Zero(token_count + 1, token_count + 1)),
        span_right(Matrix::Zero(token_count + 1, token_count + 1)) {}

  Eigen::Index sib_index(int h, int s, int m) const {
    const Eigen::Index N = n + 1;
    return (static_cast<Eigen::Index>(h) * N + s) * N + m;
  }
  Scalar& sib(int h, int s, int m) { return sib_values[sib_index(h, s, m)]; }
  Scalar sib(int h, int s, int m) const { return sib_values[sib_index(h, s, m)]; }

  /// Same shape, every entry zero.
  static ScoreSet zeros_like(const ScoreSet& other) { return ScoreSet(other.n); }

  template <typename Other>
  ScoreSet<Other> cast() const {
    ScoreSet<Other> out;
    out.n = n;
    out.arc = arc.template cast<Other>();
    out.sib_values = sib_values.template cast<Other>();
    out.span_left = span_left.template cast<Other>();
    out.span_right = span_right.template cast<Other>();
    return out;
  }

  /// Visits every cell a tree can read, as (scalar reference) in a fixed order.
  template <typename F>
  void for_each_part(F&& f) {
    for (int h = 0; h <= n; ++h)
      for (int m = 1; m <= n; ++m)
        if (h != m) f(arc(h, m));
    for (int h = 0; h <= n; ++h)
      for (int m = 1; m <= n; ++m) {
        const int lo = std::min(h, m), hi = std::max(h, m);
        for (int s = lo + 1; s < hi; ++s) f(sib(h, s, m));
      }
    for (int k = 1; k <= n; ++k) {
      for (int i = 1; i <= k; ++i) f(span_left(k, i));
      for (int j = k; j <= n; ++j) f(span_right(k, j));
    }
  }
};

}  // namespace ssa
