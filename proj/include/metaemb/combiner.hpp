#ifndef METAEMB_COMBINER_HPP
#define METAEMB_COMBINER_HPP

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"
#include "metaemb/vector_ops.hpp"

namespace metaemb {

enum class Method { average, concatenate };

inline const char* method_name(Method m) {
  return m == Method::average ? "average" : "concatenate";
}

inline Method parse_method(std::string_view s) {
  if (s == "avg" || s == "average") return Method::average;
  if (s == "concat" || s == "conc" || s == "concatenate") return Method::concatenate;
  throw Error(Errc::config, "unknown combination method '" + std::string(s) + "'");
}

struct MetaRecipe {
  std::string name;  // output set name; defaults to sources joined by '+'
  Method method = Method::average;
  std::vector<std::string> sources;
  // Averaging only: zero-pad narrower sources up to the widest dimension,
  // on the side given per source (rear when unspecified).
  bool pad_to_common_dim = false;
  std::vector<PadSide> pad_sides;
  bool post_normalize = false;
};

struct AverageOptions {
  bool pad_to_common_dim = false;
  PadSide left_side = PadSide::rear;
  PadSide right_side = PadSide::rear;
};

namespace detail {

using SetRefs = std::span<const EmbeddingSet* const>;

inline std::string joined_name(SetRefs sets) {
  std::string out;
  for (const auto* s : sets) {
    if (!out.empty()) out += '+';
    out += s->name();
  }
  return out;
}

// Inputs are row-aligned over the same vocabulary.
inline EmbeddingSet average_aligned(SetRefs sets, bool pad_to_common,
                                    std::span<const PadSide> sides, std::string name) {
  std::size_t width = 0;
  for (const auto* s : sets) width = std::max(width, s->dim());
  for (const auto* s : sets) {
    if (s->dim() != width && !pad_to_common) {
      throw Error(Errc::dimension, "cannot average '" + s->name() + "' (dim " +
                                       std::to_string(s->dim()) + ") with dim " +
                                       std::to_string(width) + " sources without padding");
    }
  }
  const std::size_t n = sets.front()->size();
  std::vector<double> data(n * width, 0.0);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& s = *sets[k];
    const PadSide side = k < sides.size() ? sides[k] : PadSide::rear;
    const std::size_t offset = side == PadSide::front ? width - s.dim() : 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = s.row(i);
      double* out = data.data() + i * width + offset;
      for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j];
    }
  }
  const double k = static_cast<double>(sets.size());
  for (double& x : data) x /= k;
  return EmbeddingSet(std::move(name), sets.front()->vocab(), std::move(data), width);
}

// Stacks the last source first, so two sources give [right; left].
inline EmbeddingSet concatenate_aligned(SetRefs sets, std::string name) {
  std::size_t width = 0;
  for (const auto* s : sets) width += s->dim();
  const std::size_t n = sets.front()->size();
  std::vector<double> data(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    double* out = data.data() + i * width;
    for (std::size_t k = sets.size(); k-- > 0;) {
      auto r = sets[k]->row(i);
      out = std::copy(r.begin(), r.end(), out);
    }
  }
  return EmbeddingSet(std::move(name), sets.front()->vocab(), std::move(data), width);
}

}  // namespace detail

/// Stacked form [right; left], i.e. the left source front-padded by the
/// right dimension plus the right source rear-padded by the left dimension.
inline EmbeddingSet concatenate(const AlignedPair& pair, std::string name = {}) {
  if (pair.empty()) throw Error(Errc::empty, "cannot concatenate an empty aligned pair");
  const EmbeddingSet* const sets[] = {&pair.left, &pair.right};
  if (name.empty()) name = detail::joined_name(sets);
  return detail::concatenate_aligned(sets, std::move(name));
}

/// Word-wise mean (left + right) / 2.
inline EmbeddingSet average(const AlignedPair& pair, const AverageOptions& opts = {},
                            std::string name = {}) {
  if (pair.empty()) throw Error(Errc::empty, "cannot average an empty aligned pair");
  const EmbeddingSet* const sets[] = {&pair.left, &pair.right};
  const PadSide sides[] = {opts.left_side, opts.right_side};
  if (name.empty()) name = detail::joined_name(sets);
  return detail::average_aligned(sets, opts.pad_to_common_dim, sides, std::move(name));
}

/// Combines K >= 2 sets over their common vocabulary (first-set order).
/// `recipe.sources`, when given, must name the sets in order.
inline EmbeddingSet combine_k(std::span<const EmbeddingSet> sets, const MetaRecipe& recipe) {
  if (sets.size() < 2) throw Error(Errc::config, "combination needs at least two sources");
  if (!recipe.sources.empty()) {
    if (recipe.sources.size() != sets.size()) {
      throw Error(Errc::config, "recipe lists " + std::to_string(recipe.sources.size()) +
                                    " sources but " + std::to_string(sets.size()) + " were given");
    }
    std::set<std::string> distinct(recipe.sources.begin(), recipe.sources.end());
    if (distinct.size() != recipe.sources.size()) {
      throw Error(Errc::config, "recipe sources must be distinct");
    }
  }
  const auto shared = common_vocab(sets);
  if (shared.empty()) throw Error(Errc::empty, "sources have no common vocabulary");

  std::vector<EmbeddingSet> aligned;
  std::vector<const EmbeddingSet*> refs;
  aligned.reserve(sets.size());
  for (const auto& s : sets) aligned.push_back(restrict_to(s, shared));
  for (const auto& s : aligned) refs.push_back(&s);

  std::string name = recipe.name.empty() ? detail::joined_name(refs) : recipe.name;
  EmbeddingSet out = recipe.method == Method::average
                         ? detail::average_aligned(refs, recipe.pad_to_common_dim,
                                                   recipe.pad_sides, std::move(name))
                         : detail::concatenate_aligned(refs, std::move(name));
  return recipe.post_normalize ? normalize_vectors(out) : out;
}

}  // namespace metaemb

#endif  // METAEMB_COMBINER_HPP
