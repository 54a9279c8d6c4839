#ifndef METAEMB_RANDOM_HPP
#define METAEMB_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "metaemb/embedding_set.hpp"

namespace metaemb {

/// SplitMix64 (Steele, Lea & Flood 2014): 64-bit state, Weyl increment
/// 0x9e3779b97f4a7c15 and the variant-13 finalizer. Satisfies
/// UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  static constexpr const char* kAlgorithm = "splitmix64";

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal by the Marsaglia polar method; fully specified here so
  /// draws do not depend on the standard library's distribution code.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double x, y, s;
    do {
      x = 2.0 * uniform() - 1.0;
      y = 2.0 * uniform() - 1.0;
      s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = y * f;
    has_spare_ = true;
    return x * f;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed for an independent substream `index` of `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  SplitMix64 mix(seed ^ (index * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL));
  mix();
  return mix();
}

/// `vocab_size` standard Gaussian vectors, each scaled to unit length.
/// Tokens are "w0", "w1", ...
inline EmbeddingSet random_unit_set(std::string name, std::size_t vocab_size, std::size_t dim,
                                    std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::string> vocab(vocab_size);
  std::vector<double> data(vocab_size * dim);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    vocab[i] = "w" + std::to_string(i);
    double* row = data.data() + i * dim;
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        row[j] = rng.normal();
        n2 += row[j] * row[j];
      }
    } while (n2 == 0.0);
    const double n = std::sqrt(n2);
    for (std::size_t j = 0; j < dim; ++j) row[j] /= n;
  }
  return EmbeddingSet(std::move(name), std::move(vocab), std::move(data), dim);
}

}  // namespace metaemb

#endif  // METAEMB_RANDOM_HPP
