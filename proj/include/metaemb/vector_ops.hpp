#ifndef METAEMB_VECTOR_OPS_HPP
#define METAEMB_VECTOR_OPS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"

namespace metaemb {

/// Norms at or below this are treated as zero.
inline constexpr double kZeroTolerance = 1e-12;

enum class PadSide { front, rear };

struct PadSpec {
  PadSide side = PadSide::rear;
  std::size_t count = 0;
};

inline void require_same_length(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::dimension, "vector length mismatch: " + std::to_string(u.size()) + " vs " +
                                     std::to_string(v.size()));
  }
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline std::vector<double> l2_normalize_vector(std::span<const double> v) {
  const double n = l2_norm(v);
  if (!(n > kZeroTolerance)) throw Error(Errc::degenerate, "cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

/// Unit-normalizes every row. A zero row is reported by token.
inline EmbeddingSet normalize_vectors(const EmbeddingSet& set) {
  std::vector<double> data(set.data().begin(), set.data().end());
  const std::size_t d = set.dim();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double n = l2_norm(set.row(i));
    if (!(n > kZeroTolerance)) {
      throw Error(Errc::degenerate, "zero vector for token '" + set.token(i) + "' in set '" +
                                        set.name() + "'");
    }
    for (std::size_t j = 0; j < d; ++j) data[i * d + j] /= n;
  }
  return EmbeddingSet(set.name(), set.vocab(), std::move(data), d);
}

/// Divides each column by its l2 norm taken over the whole vocabulary.
inline EmbeddingSet normalize_dimensions(const EmbeddingSet& set) {
  const std::size_t d = set.dim();
  std::vector<double> sq(d, 0.0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto r = set.row(i);
    for (std::size_t j = 0; j < d; ++j) sq[j] += r[j] * r[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    sq[j] = std::sqrt(sq[j]);
    if (!(sq[j] > kZeroTolerance)) {
      throw Error(Errc::degenerate, "dimension " + std::to_string(j) + " of set '" + set.name() +
                                        "' is zero across the vocabulary");
    }
  }
  std::vector<double> data(set.data().begin(), set.data().end());
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) data[i * d + j] /= sq[j];
  }
  return EmbeddingSet(set.name(), set.vocab(), std::move(data), d);
}

inline std::vector<double> pad(std::span<const double> v, PadSpec spec) {
  std::vector<double> out(v.size() + spec.count, 0.0);
  const std::size_t offset = spec.side == PadSide::front ? spec.count : 0;
  std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
  return out;
}

inline EmbeddingSet pad_set(const EmbeddingSet& set, PadSpec spec) {
  if (spec.count == 0) return set;
  const std::size_t d = set.dim() + spec.count;
  std::vector<double> data(set.size() * d, 0.0);
  const std::size_t offset = spec.side == PadSide::front ? spec.count : 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto r = set.row(i);
    std::copy(r.begin(), r.end(), data.begin() + static_cast<std::ptrdiff_t>(i * d + offset));
  }
  return EmbeddingSet(set.name(), set.vocab(), std::move(data), d);
}

inline double euclidean(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = u[i] - v[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

/// Cosine similarity clamped to [-1, 1].
inline double cosine(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v);
  const double uu = dot(u, u);
  const double vv = dot(v, v);
  if (!(std::sqrt(uu) > kZeroTolerance) || !(std::sqrt(vv) > kZeroTolerance)) {
    throw Error(Errc::degenerate, "cosine of a zero vector");
  }
  // sqrt(uu * vv) rather than |u||v| so that cosine(x, -x) is exactly -1.
  return std::clamp(dot(u, v) / std::sqrt(uu * vv), -1.0, 1.0);
}

inline double angle_between(std::span<const double> u, std::span<const double> v) {
  return std::acos(cosine(u, v));
}

inline std::vector<double> subtract(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - v[i];
  return out;
}

}  // namespace metaemb

#endif  // METAEMB_VECTOR_OPS_HPP
