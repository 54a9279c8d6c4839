#ifndef METAEMB_ANGLE_ANALYSIS_HPP
#define METAEMB_ANGLE_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"
#include "metaemb/io.hpp"
#include "metaemb/parallel.hpp"
#include "metaemb/random.hpp"
#include "metaemb/vector_ops.hpp"

namespace metaemb {

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  double density = 0.0;  // count / (n * width)
};

/// Summary of the angles between (u_left - v_left) and (v_right - u_right)
/// over sampled token pairs.
struct AngleStats {
  std::size_t sample_count = 0;
  std::size_t skipped = 0;  // pairs with a zero difference vector
  double mean = 0.0;
  double variance = 0.0;  // unbiased, n - 1 denominator
  std::vector<HistogramBin> histogram;
  std::uint64_t seed = 0;
  std::string generator = SplitMix64::kAlgorithm;
};

struct AngleSamples {
  std::vector<double> angles;  // draw order, skipped draws removed
  std::size_t skipped = 0;
};

struct SamplingOptions {
  std::size_t bins = 100;
  unsigned threads = default_threads();
};

/// Draws per chunk; each chunk has its own substream so results do not
/// depend on the number of threads.
inline constexpr std::size_t kSampleChunk = 4096;

/// Samples `n_pairs` token pairs uniformly with replacement (u != v within a
/// pair) and returns the angle for each.
inline AngleSamples sample_angle_values(const AlignedPair& pair, std::size_t n_pairs,
                                        std::uint64_t seed,
                                        unsigned threads = default_threads()) {
  const std::size_t n = pair.size();
  if (n < 2) throw Error(Errc::empty, "angle sampling needs at least two shared tokens");
  if (n_pairs == 0) throw Error(Errc::invalid_value, "n_pairs must be positive");
  if (pair.left.dim() != pair.right.dim()) {
    throw Error(Errc::dimension, "angle sampling needs equal dimensions (" +
                                     std::to_string(pair.left.dim()) + " vs " +
                                     std::to_string(pair.right.dim()) + "); pad the narrower set");
  }
  const std::size_t d = pair.left.dim();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> raw(n_pairs);
  const std::size_t chunks = (n_pairs + kSampleChunk - 1) / kSampleChunk;

  parallel_for(chunks, threads, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      SplitMix64 rng(substream_seed(seed, c));
      const std::size_t end = std::min(n_pairs, (c + 1) * kSampleChunk);
      for (std::size_t s = c * kSampleChunk; s < end; ++s) {
        const std::size_t i = rng.below(n);
        std::size_t j = rng.below(n - 1);
        if (j >= i) ++j;
        auto ul = pair.left.row(i), vl = pair.left.row(j);
        auto ur = pair.right.row(i), vr = pair.right.row(j);
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double a = ul[k] - vl[k];
          const double b = vr[k] - ur[k];
          ab += a * b;
          aa += a * a;
          bb += b * b;
        }
        if (!(std::sqrt(aa) > kZeroTolerance) || !(std::sqrt(bb) > kZeroTolerance)) {
          raw[s] = nan;
          continue;
        }
        raw[s] = std::acos(std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0));
      }
    }
  });

  AngleSamples out;
  out.angles.reserve(n_pairs);
  for (double a : raw) {
    if (std::isnan(a)) {
      ++out.skipped;
    } else {
      out.angles.push_back(a);
    }
  }
  return out;
}

/// Mean, unbiased variance and a density histogram over [0, pi].
inline AngleStats summarize_angles(const AngleSamples& samples, std::uint64_t seed,
                                   std::size_t bins = 100) {
  if (samples.angles.empty()) {
    throw Error(Errc::degenerate, "no valid angle samples (" + std::to_string(samples.skipped) +
                                      " degenerate pairs skipped)");
  }
  if (bins == 0) throw Error(Errc::invalid_value, "histogram needs at least one bin");
  AngleStats st;
  st.sample_count = samples.angles.size();
  st.skipped = samples.skipped;
  st.seed = seed;

  const double n = static_cast<double>(st.sample_count);
  double sum = 0.0;
  for (double a : samples.angles) sum += a;
  st.mean = sum / n;
  if (st.sample_count > 1) {
    double ss = 0.0;
    for (double a : samples.angles) ss += (a - st.mean) * (a - st.mean);
    st.variance = ss / (n - 1.0);
  }

  const double width = std::numbers::pi / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double a : samples.angles) {
    auto b = static_cast<std::size_t>(a / width);
    ++counts[std::min(b, bins - 1)];
  }
  st.histogram.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    st.histogram[b].lower = static_cast<double>(b) * width;
    st.histogram[b].upper = b + 1 == bins ? std::numbers::pi : static_cast<double>(b + 1) * width;
    st.histogram[b].density = static_cast<double>(counts[b]) / (n * width);
  }
  return st;
}

inline AngleStats sample_angles(const AlignedPair& pair, std::size_t n_pairs, std::uint64_t seed,
                                const SamplingOptions& opts = {}) {
  return summarize_angles(sample_angle_values(pair, n_pairs, seed, opts.threads), seed, opts.bins);
}

/// Angle statistics for independent pairs of random unit-vector sets, one
/// per dimension, in ascending dimension order.
inline std::vector<std::pair<std::size_t, AngleStats>> variance_vs_dimension(
    std::vector<std::size_t> dims, std::size_t vocab_size, std::size_t n_pairs,
    std::uint64_t seed, const SamplingOptions& opts = {}) {
  std::sort(dims.begin(), dims.end());
  std::vector<std::pair<std::size_t, AngleStats>> out;
  for (std::size_t d : dims) {
    if (d < 2) throw Error(Errc::invalid_value, "dimension must be at least 2");
    AlignedPair pair{random_unit_set("left", vocab_size, d, substream_seed(seed, 2 * d)),
                     random_unit_set("right", vocab_size, d, substream_seed(seed, 2 * d + 1))};
    out.emplace_back(d, sample_angles(pair, n_pairs, seed, opts));
  }
  return out;
}

/// CSV: "# n=.. mean=.. var=.. seed=.." summary line, header
/// "bin_lower,bin_upper,density", one row per bin.
inline void export_histogram(const AngleStats& stats, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  char buf[160];
  int len = std::snprintf(buf, sizeof buf, "# n=%zu mean=%.17g var=%.17g seed=%llu\n",
                          stats.sample_count, stats.mean, stats.variance,
                          static_cast<unsigned long long>(stats.seed));
  out.write(buf, len);
  out << "bin_lower,bin_upper,density\n";
  for (const auto& b : stats.histogram) {
    len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", b.lower, b.upper, b.density);
    out.write(buf, len);
  }
  detail::check_written(out, path);
}

}  // namespace metaemb

#endif  // METAEMB_ANGLE_ANALYSIS_HPP
