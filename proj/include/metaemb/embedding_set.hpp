#ifndef METAEMB_EMBEDDING_SET_HPP
#define METAEMB_EMBEDDING_SET_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metaemb/error.hpp"

namespace metaemb {

/// A named vocabulary with one float64 row per token, stored row-major.
///
/// Instances are validated on construction (unique tokens, row count equals
/// vocabulary size, all entries finite) and are immutable afterwards, so a
/// set may be shared read-only between threads.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  EmbeddingSet(std::string name, std::vector<std::string> vocab, std::vector<double> data,
               std::size_t dim)
      : name_(std::move(name)), vocab_(std::move(vocab)), data_(std::move(data)), dim_(dim) {
    if (dim_ == 0) throw Error(Errc::invalid_value, "embedding dimension must be positive");
    if (data_.size() != vocab_.size() * dim_) {
      throw Error(Errc::dimension, "matrix has " + std::to_string(data_.size()) +
                                       " entries, expected " + std::to_string(vocab_.size()) +
                                       " x " + std::to_string(dim_));
    }
    index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (!index_.emplace(vocab_[i], i).second) {
        throw Error(Errc::format, "duplicate token '" + vocab_[i] + "' in set '" + name_ + "'");
      }
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw Error(Errc::invalid_value, "non-finite entry for token '" + vocab_[i / dim_] +
                                             "' at dimension " + std::to_string(i % dim_));
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return vocab_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  const std::string& token(std::size_t i) const noexcept { return vocab_[i]; }

  std::optional<std::size_t> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const std::string& token) const { return index_.contains(token); }

  /// Same vocabulary and matrix; the name is not compared.
  bool same_content(const EmbeddingSet& other) const {
    return dim_ == other.dim_ && vocab_ == other.vocab_ && data_ == other.data_;
  }

  EmbeddingSet renamed(std::string name) const {
    EmbeddingSet copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  std::string name_;
  std::vector<std::string> vocab_;
  std::vector<double> data_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Two sets restricted to their common vocabulary, rows aligned by token.
struct AlignedPair {
  EmbeddingSet left;
  EmbeddingSet right;

  const std::vector<std::string>& shared_vocab() const noexcept { return left.vocab(); }
  std::size_t size() const noexcept { return left.size(); }
  bool empty() const noexcept { return left.empty(); }
};

/// Rows of `set` for `tokens`, in that order. Every token must be present.
inline EmbeddingSet restrict_to(const EmbeddingSet& set, const std::vector<std::string>& tokens) {
  std::vector<double> data;
  data.reserve(tokens.size() * set.dim());
  for (const auto& t : tokens) {
    auto idx = set.find(t);
    if (!idx) throw Error(Errc::format, "token '" + t + "' not in set '" + set.name() + "'");
    auto r = set.row(*idx);
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingSet(set.name(), tokens, std::move(data), set.dim());
}

/// Tokens present in both sets, ordered as in `a`. An empty intersection
/// yields an empty (but valid) pair.
inline AlignedPair intersect(const EmbeddingSet& a, const EmbeddingSet& b) {
  std::vector<std::string> shared;
  for (const auto& t : a.vocab()) {
    if (b.contains(t)) shared.push_back(t);
  }
  return AlignedPair{restrict_to(a, shared), restrict_to(b, shared)};
}

/// Tokens common to every set, in the order of the first.
inline std::vector<std::string> common_vocab(std::span<const EmbeddingSet> sets) {
  if (sets.empty()) return {};
  std::vector<std::string> shared;
  for (const auto& t : sets.front().vocab()) {
    bool everywhere = true;
    for (const auto& s : sets.subspan(1)) {
      if (!s.contains(t)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) shared.push_back(t);
  }
  return shared;
}

}  // namespace metaemb

#endif  // METAEMB_EMBEDDING_SET_HPP
