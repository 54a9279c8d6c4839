#ifndef METAEMB_EVAL_HPP
#define METAEMB_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"
#include "metaemb/io.hpp"
#include "metaemb/parallel.hpp"
#include "metaemb/vector_ops.hpp"

namespace metaemb {

struct SimilarityPair {
  std::string word1;
  std::string word2;
  double score = 0.0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;
};

struct AnalogyQuestion {
  std::string a, b, c, d;
  std::size_t category = 0;  // index into AnalogyDataset::categories
};

struct AnalogyDataset {
  std::string name;
  std::vector<std::string> categories;
  std::vector<AnalogyQuestion> questions;
};

enum class Metric { spearman, accuracy };

inline const char* metric_name(Metric m) { return m == Metric::spearman ? "spearman" : "accuracy"; }

struct EvalReport {
  std::string set;
  std::string dataset;
  Metric metric = Metric::spearman;
  double value = 0.0;  // rho in [-1, 1] or accuracy in [0, 1]
  std::size_t covered = 0;
  std::size_t skipped = 0;
};

// ---------------------------------------------------------------------------
// Dataset files

/// Rows of "word1 <sep> word2 <sep> score" with the separator (tab, comma, or
/// other whitespace) detected from the first data line. A first row whose
/// score field is not numeric is taken as a header. Extra columns are ignored.
inline SimilarityDataset load_similarity(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  SimilarityDataset ds;
  ds.name = path.stem().string();

  char sep = 0;
  bool first = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    if (sep == 0) {
      sep = line.find('\t') != std::string::npos ? '\t'
            : line.find(',') != std::string::npos ? ','
                                                   : ' ';
    }
    std::vector<std::string> fields;
    if (sep == ' ') {
      for (auto f : detail::split_fields(line)) fields.emplace_back(f);
    } else {
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, sep)) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        fields.push_back(b == std::string::npos ? std::string() : f.substr(b, e - b + 1));
      }
    }
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() < 3 || fields[0].empty() || fields[1].empty()) {
      throw Error(Errc::format, where + ": expected word1, word2, score");
    }
    double score = 0.0;
    const bool numeric = detail::parse_double(fields[2], score);
    if (first) {
      first = false;
      if (!numeric) continue;
    }
    if (!numeric) throw Error(Errc::format, where + ": non-numeric score '" + fields[2] + "'");
    if (!std::isfinite(score)) throw Error(Errc::invalid_value, where + ": non-finite score");
    ds.pairs.push_back({fields[0], fields[1], score});
  }
  if (ds.pairs.empty()) throw Error(Errc::empty, path.string() + ": no similarity pairs");
  return ds;
}

/// Google analogy format: ": category" lines, then "a b c d" lines.
inline AnalogyDataset load_analogy(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  AnalogyDataset ds;
  ds.name = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (fields[0] == ":") {
      std::string cat;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (!cat.empty()) cat += ' ';
        cat += fields[i];
      }
      ds.categories.push_back(cat);
      continue;
    }
    if (fields.size() != 4) {
      throw Error(Errc::format, path.string() + ":" + std::to_string(lineno) +
                                    ": expected four tokens per analogy question");
    }
    if (ds.categories.empty()) ds.categories.emplace_back();
    ds.questions.push_back({std::string(fields[0]), std::string(fields[1]),
                            std::string(fields[2]), std::string(fields[3]),
                            ds.categories.size() - 1});
  }
  if (ds.questions.empty()) throw Error(Errc::empty, path.string() + ": no analogy questions");
  return ds;
}

// ---------------------------------------------------------------------------
// Spearman

/// 1-based ranks with tied values sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman rank correlation: Pearson correlation of average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::dimension, "spearman: lists differ in length (" + std::to_string(x.size()) +
                                     " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(Errc::empty, "spearman: need at least two observations");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) {
    throw Error(Errc::degenerate, "spearman: a list is constant, correlation undefined");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

// ---------------------------------------------------------------------------
// Word similarity

/// Pairs with an OOV word, or a zero vector, are skipped and counted.
inline EvalReport eval_similarity(const EmbeddingSet& set, const SimilarityDataset& data) {
  std::vector<double> model, human;
  for (const auto& p : data.pairs) {
    auto i = set.find(p.word1);
    auto j = set.find(p.word2);
    if (!i || !j) continue;
    auto u = set.row(*i), v = set.row(*j);
    if (!(l2_norm(u) > kZeroTolerance) || !(l2_norm(v) > kZeroTolerance)) continue;
    model.push_back(cosine(u, v));
    human.push_back(p.score);
  }
  EvalReport r{set.name(), data.name, Metric::spearman, 0.0, model.size(),
               data.pairs.size() - model.size()};
  if (model.size() < 2) {
    throw Error(Errc::empty, "'" + data.name + "': only " + std::to_string(model.size()) +
                                 " of " + std::to_string(data.pairs.size()) +
                                 " pairs are in the vocabulary of '" + set.name() + "'");
  }
  r.value = spearman(model, human);
  return r;
}

// ---------------------------------------------------------------------------
// Analogy (CosAdd)

struct AnalogyOptions {
  bool exclude_query_words = true;
  unsigned threads = default_threads();
};

/// Per-question CosAdd outcome; `question` indexes the dataset.
struct AnalogyPrediction {
  std::size_t question = 0;
  std::optional<std::size_t> predicted;  // vocabulary row, none if nothing scorable
  std::size_t expected = 0;
};

struct AnalogyResult {
  EvalReport report;
  std::vector<AnalogyPrediction> predictions;  // covered questions only, dataset order
};

inline constexpr std::size_t kQueryBlock = 32;

/// For every question with all four words in the vocabulary, the candidate
/// maximising cos(b - a + c, x) over the whole vocabulary. Query words are
/// excluded when requested; ties go to the lowest vocabulary index.
inline AnalogyResult cosadd(const EmbeddingSet& set, const AnalogyDataset& data,
                            const AnalogyOptions& opts = {}) {
  struct Query {
    std::size_t question, a, b, c, d;
  };
  std::vector<Query> queries;
  for (std::size_t q = 0; q < data.questions.size(); ++q) {
    const auto& aq = data.questions[q];
    auto a = set.find(aq.a), b = set.find(aq.b), c = set.find(aq.c), d = set.find(aq.d);
    if (a && b && c && d) queries.push_back({q, *a, *b, *c, *d});
  }

  AnalogyResult res;
  res.report = {set.name(), data.name, Metric::accuracy, 0.0, queries.size(),
                data.questions.size() - queries.size()};
  if (queries.empty()) {
    throw Error(Errc::empty, "'" + data.name + "': no question has all four words in '" +
                                 set.name() + "'");
  }

  const std::size_t dim = set.dim();
  const std::size_t vocab = set.size();
  std::vector<double> inv_norm(vocab, 0.0);
  for (std::size_t i = 0; i < vocab; ++i) {
    const double n = l2_norm(set.row(i));
    inv_norm[i] = n > kZeroTolerance ? 1.0 / n : 0.0;
  }

  res.predictions.resize(queries.size());
  const std::size_t blocks = (queries.size() + kQueryBlock - 1) / kQueryBlock;
  parallel_for(blocks, opts.threads, [&](std::size_t bb, std::size_t be) {
    std::vector<double> qmat(kQueryBlock * dim);
    std::vector<double> best(kQueryBlock);
    std::vector<std::optional<std::size_t>> arg(kQueryBlock);
    std::vector<bool> usable(kQueryBlock);
    for (std::size_t blk = bb; blk < be; ++blk) {
      const std::size_t q0 = blk * kQueryBlock;
      const std::size_t nq = std::min(kQueryBlock, queries.size() - q0);
      for (std::size_t k = 0; k < nq; ++k) {
        const auto& q = queries[q0 + k];
        auto a = set.row(q.a), b = set.row(q.b), c = set.row(q.c);
        double* dst = qmat.data() + k * dim;
        double n2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          dst[j] = b[j] - a[j] + c[j];
          n2 += dst[j] * dst[j];
        }
        usable[k] = std::sqrt(n2) > kZeroTolerance;
        best[k] = -std::numeric_limits<double>::infinity();
        arg[k].reset();
      }
      for (std::size_t r = 0; r < vocab; ++r) {
        if (inv_norm[r] == 0.0) continue;
        auto x = set.row(r);
        for (std::size_t k = 0; k < nq; ++k) {
          if (!usable[k]) continue;
          const auto& q = queries[q0 + k];
          if (opts.exclude_query_words && (r == q.a || r == q.b || r == q.c)) continue;
          const double* qv = qmat.data() + k * dim;
          double s = 0.0;
          for (std::size_t j = 0; j < dim; ++j) s += qv[j] * x[j];
          s *= inv_norm[r];
          if (s > best[k]) {
            best[k] = s;
            arg[k] = r;
          }
        }
      }
      for (std::size_t k = 0; k < nq; ++k) {
        res.predictions[q0 + k] = {queries[q0 + k].question, arg[k], queries[q0 + k].d};
      }
    }
  });

  std::size_t correct = 0;
  for (const auto& p : res.predictions) {
    if (p.predicted && *p.predicted == p.expected) ++correct;
  }
  res.report.value = static_cast<double>(correct) / static_cast<double>(queries.size());
  return res;
}

inline EvalReport eval_analogy(const EmbeddingSet& set, const AnalogyDataset& data,
                               const AnalogyOptions& opts = {}) {
  return cosadd(set, data, opts).report;
}

// ---------------------------------------------------------------------------
// Suite

struct SuiteCell {
  std::string set;
  std::string dataset;
  Metric metric = Metric::spearman;
  bool ok = false;
  double value = 0.0;
  std::size_t covered = 0;
  std::size_t skipped = 0;
  std::string reason;  // why the cell is missing
};

struct SuiteTable {
  std::vector<std::string> sets;
  std::vector<std::string> datasets;
  std::vector<SuiteCell> cells;  // row-major: sets x datasets

  const SuiteCell& at(std::size_t set, std::size_t dataset) const {
    return cells[set * datasets.size() + dataset];
  }
  std::size_t succeeded() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.ok; }));
  }
};

/// Every set against every dataset (similarity first, then analogy). A cell
/// that fails is kept with its reason instead of aborting the suite.
inline SuiteTable run_suite(std::span<const EmbeddingSet> sets,
                            std::span<const SimilarityDataset> sim_data,
                            std::span<const AnalogyDataset> ana_data,
                            const AnalogyOptions& opts = {}) {
  if (sets.empty()) throw Error(Errc::empty, "evaluation suite needs at least one embedding set");
  if (sim_data.empty() && ana_data.empty()) {
    throw Error(Errc::empty, "evaluation suite needs at least one dataset");
  }
  SuiteTable t;
  for (const auto& s : sets) t.sets.push_back(s.name());
  for (const auto& d : sim_data) t.datasets.push_back(d.name);
  for (const auto& d : ana_data) t.datasets.push_back(d.name);

  for (const auto& s : sets) {
    for (const auto& d : sim_data) {
      SuiteCell c;
      c.set = s.name();
      c.dataset = d.name;
      c.metric = Metric::spearman;
      try {
        auto r = eval_similarity(s, d);
        c.ok = true;
        c.value = r.value;
        c.covered = r.covered;
        c.skipped = r.skipped;
      } catch (const Error& e) {
        c.reason = e.what();
        for (const auto& p : d.pairs) {
          (s.contains(p.word1) && s.contains(p.word2)) ? ++c.covered : ++c.skipped;
        }
      }
      t.cells.push_back(std::move(c));
    }
    for (const auto& d : ana_data) {
      SuiteCell c;
      c.set = s.name();
      c.dataset = d.name;
      c.metric = Metric::accuracy;
      try {
        auto r = eval_analogy(s, d, opts);
        c.ok = true;
        c.value = r.value;
        c.covered = r.covered;
        c.skipped = r.skipped;
      } catch (const Error& e) {
        c.reason = e.what();
        for (const auto& q : d.questions) {
          (s.contains(q.a) && s.contains(q.b) && s.contains(q.c) && s.contains(q.d))
              ? ++c.covered
              : ++c.skipped;
        }
      }
      t.cells.push_back(std::move(c));
    }
  }
  return t;
}

/// Metric x 100 with one decimal, the usual reporting convention.
inline std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", value * 100.0);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

/// "set,dataset,metric,value,covered,skipped"; missing cells have an empty value.
inline std::string suite_csv(const SuiteTable& t) {
  std::string out = "set,dataset,metric,value,covered,skipped\n";
  for (const auto& c : t.cells) {
    out += csv_field(c.set) + ',' + csv_field(c.dataset) + ',' + metric_name(c.metric) + ',' +
           (c.ok ? format_score(c.value) : std::string()) + ',' + std::to_string(c.covered) + ',' +
           std::to_string(c.skipped) + "\n";
  }
  return out;
}

/// Sets as rows, datasets as columns; "--" marks a missing cell, with the
/// reasons listed underneath.
inline std::string suite_text(const SuiteTable& t) {
  std::size_t w0 = 10;
  for (const auto& s : t.sets) w0 = std::max(w0, s.size());
  std::vector<std::size_t> w;
  for (const auto& d : t.datasets) w.push_back(std::max<std::size_t>(6, d.size()));

  auto pad_right = [](std::string s, std::size_t n) {
    if (s.size() < n) s.append(n - s.size(), ' ');
    return s;
  };
  auto pad_left = [](std::string s, std::size_t n) {
    if (s.size() < n) s.insert(0, n - s.size(), ' ');
    return s;
  };

  std::string out = pad_right("Embeddings", w0);
  for (std::size_t j = 0; j < t.datasets.size(); ++j) out += "  " + pad_left(t.datasets[j], w[j]);
  out += '\n';
  std::string notes;
  for (std::size_t i = 0; i < t.sets.size(); ++i) {
    out += pad_right(t.sets[i], w0);
    for (std::size_t j = 0; j < t.datasets.size(); ++j) {
      const auto& c = t.at(i, j);
      out += "  " + pad_left(c.ok ? format_score(c.value) : "--", w[j]);
      if (!c.ok) notes += "  " + c.set + " / " + c.dataset + ": " + c.reason + '\n';
    }
    out += '\n';
  }
  if (!notes.empty()) out += "missing:\n" + notes;
  return out;
}

}  // namespace metaemb

#endif  // METAEMB_EVAL_HPP
