#ifndef METAEMB_PIPELINE_HPP
#define METAEMB_PIPELINE_HPP

// Command implementations behind the metaemb tool. Each command reports on
// `out`, diagnoses on `err`, and returns a process exit code.

#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metaemb/angle_analysis.hpp"
#include "metaemb/combiner.hpp"
#include "metaemb/embedding_set.hpp"
#include "metaemb/error.hpp"
#include "metaemb/eval.hpp"
#include "metaemb/io.hpp"
#include "metaemb/vector_ops.hpp"

namespace metaemb {

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Preprocessing steps

struct Step {
  enum class Kind { norm_dims, norm_vectors, pad } kind = Kind::norm_vectors;
  PadSpec pad{};
};

/// "rear:200" or "front:3".
inline PadSpec parse_pad(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    throw Error(Errc::config, "pad spec '" + std::string(s) + "' is not <front|rear>:<count>");
  }
  const auto side = s.substr(0, colon);
  PadSpec spec;
  if (side == "front") {
    spec.side = PadSide::front;
  } else if (side == "rear") {
    spec.side = PadSide::rear;
  } else {
    throw Error(Errc::config, "pad side must be 'front' or 'rear', got '" + std::string(side) + "'");
  }
  if (!detail::parse_size(s.substr(colon + 1), spec.count)) {
    throw Error(Errc::config, "pad count in '" + std::string(s) + "' is not a non-negative integer");
  }
  return spec;
}

/// "norm-dims", "norm-vectors" or "pad:<side>:<count>".
inline Step parse_step(std::string_view s) {
  if (s == "norm-dims") return {Step::Kind::norm_dims};
  if (s == "norm-vectors") return {Step::Kind::norm_vectors};
  if (s.starts_with("pad:")) return {Step::Kind::pad, parse_pad(s.substr(4))};
  throw Error(Errc::config, "unknown preprocessing step '" + std::string(s) + "'");
}

inline std::string step_name(const Step& s) {
  switch (s.kind) {
    case Step::Kind::norm_dims: return "norm-dims";
    case Step::Kind::norm_vectors: return "norm-vectors";
    case Step::Kind::pad:
      return std::string("pad:") + (s.pad.side == PadSide::front ? "front" : "rear") + ":" +
             std::to_string(s.pad.count);
  }
  return "?";
}

/// Applies steps in the given order.
inline EmbeddingSet apply_steps(EmbeddingSet set, const std::vector<Step>& steps) {
  for (const auto& s : steps) {
    switch (s.kind) {
      case Step::Kind::norm_dims: set = normalize_dimensions(set); break;
      case Step::Kind::norm_vectors: set = normalize_vectors(set); break;
      case Step::Kind::pad: set = pad_set(set, s.pad); break;
    }
  }
  return set;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char b[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
  std::filesystem::path input;
  Format format = Format::text;
  std::filesystem::path output;
  std::string name;
  std::vector<Step> steps;
  std::string skip_tokens_containing;  // drop tokens containing this substring
};

inline LoadOptions load_options(const std::string& name, const std::string& skip) {
  LoadOptions lo;
  lo.name = name;
  if (!skip.empty()) {
    lo.keep = [skip](std::string_view t) { return t.find(skip) == std::string_view::npos; };
  }
  return lo;
}

inline int cmd_ingest(const IngestOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    LoadReport rep;
    auto set = load(opts.input, opts.format, load_options(opts.name, opts.skip_tokens_containing),
                    &rep);
    set = apply_steps(std::move(set), opts.steps);
    save_native(set, opts.output);
    out << set.name() << ": " << set.size() << " words, dim " << set.dim();
    if (rep.duplicates) out << ", " << rep.duplicates << " duplicate tokens dropped";
    if (rep.filtered) out << ", " << rep.filtered << " tokens filtered";
    out << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "ingest: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// combine

struct CombineOptions {
  std::vector<std::filesystem::path> inputs;
  Method method = Method::average;
  std::filesystem::path output;
  std::string name;
  bool pad_to_common_dim = false;
  PadSide pad_side = PadSide::rear;
  bool post_normalize = false;
};

inline int cmd_combine(const CombineOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.inputs.size() < 2) throw Error(Errc::config, "combine needs at least two inputs");
    std::vector<EmbeddingSet> sets;
    for (const auto& p : opts.inputs) sets.push_back(load_native(p));
    MetaRecipe recipe;
    recipe.name = opts.name;
    recipe.method = opts.method;
    recipe.pad_to_common_dim = opts.pad_to_common_dim;
    recipe.pad_sides.assign(sets.size(), opts.pad_side);
    recipe.post_normalize = opts.post_normalize;
    auto combined = combine_k(sets, recipe);
    save_native(combined, opts.output);
    out << "intersection: " << combined.size() << " words\n"
        << "output dim: " << combined.dim() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "combine: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// angles

struct AnglesOptions {
  std::filesystem::path left;
  std::filesystem::path right;
  std::size_t pairs = 200000;
  std::uint64_t seed = 0;
  std::size_t bins = 100;
  std::filesystem::path output;  // histogram CSV; empty to skip
  unsigned threads = default_threads();
};

inline void print_angle_row(std::ostream& out, const std::string& label, const AngleStats& st) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f  %.4f", st.mean, st.variance);
  out << label << "  " << buf << "\n";
}

inline AngleStats analyse_angles(const EmbeddingSet& a, const EmbeddingSet& b, std::size_t pairs,
                                 std::uint64_t seed, std::size_t bins, unsigned threads) {
  auto pair = intersect(a, b);
  if (pair.size() < 2) {
    throw Error(Errc::empty, "'" + a.name() + "' and '" + b.name() + "' share " +
                                 std::to_string(pair.size()) + " tokens; need at least 2");
  }
  return sample_angles(pair, pairs, seed, {bins, threads});
}

inline int cmd_angles(const AnglesOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    auto a = load_native(opts.left);
    auto b = load_native(opts.right);
    auto st = analyse_angles(a, b, opts.pairs, opts.seed, opts.bins, opts.threads);
    out << "Embeddings  mu  sigma^2\n";
    print_angle_row(out, a.name() + " & " + b.name(), st);
    out << "samples: " << st.sample_count << " (" << st.skipped << " degenerate skipped), seed "
        << st.seed << ", " << st.generator << "\n";
    if (!opts.output.empty()) export_histogram(st, opts.output);
    return 0;
  } catch (const std::exception& e) {
    err << "angles: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::vector<std::filesystem::path> sets;
  std::vector<std::filesystem::path> similarity;  // files or directories
  std::vector<std::filesystem::path> analogy;
  std::filesystem::path output;  // CSV; a .txt table is written alongside
  unsigned threads = default_threads();
};

/// Files directly inside each directory (sorted by name), or the path itself.
inline std::vector<std::filesystem::path> expand_paths(
    const std::vector<std::filesystem::path>& paths) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        if (e.is_regular_file() && !e.path().filename().string().starts_with(".")) {
          files.push_back(e.path());
        }
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else if (std::filesystem::exists(p)) {
      out.push_back(p);
    } else {
      throw Error(Errc::io, "'" + p.string() + "' does not exist");
    }
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto f = detail::open_out(path);
  f << text;
  detail::check_written(f, path);
}

inline SuiteTable evaluate(std::span<const EmbeddingSet> sets,
                           const std::vector<std::filesystem::path>& similarity,
                           const std::vector<std::filesystem::path>& analogy, unsigned threads) {
  std::vector<SimilarityDataset> sim;
  std::vector<AnalogyDataset> ana;
  for (const auto& p : expand_paths(similarity)) sim.push_back(load_similarity(p));
  for (const auto& p : expand_paths(analogy)) ana.push_back(load_analogy(p));
  if (sim.empty() && ana.empty()) throw Error(Errc::empty, "no evaluation datasets found");
  return run_suite(sets, sim, ana, {true, threads});
}

inline int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.sets.empty()) throw Error(Errc::config, "eval needs at least one embedding set");
    std::vector<EmbeddingSet> sets;
    for (const auto& p : opts.sets) sets.push_back(load_native(p));
    auto table = evaluate(sets, opts.similarity, opts.analogy, opts.threads);
    const auto text = suite_text(table);
    out << text;
    if (!opts.output.empty()) {
      write_text_file(opts.output, suite_csv(table));
      auto txt = opts.output;
      txt.replace_extension(".txt");
      if (txt != opts.output) write_text_file(txt, text);
    }
    if (table.succeeded() == 0) {
      err << "eval: no cell could be evaluated\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// run: config-driven pipeline

struct SourceDecl {
  std::string id;
  std::filesystem::path path;
  Format format = Format::text;
  std::vector<Step> steps;
  std::string skip_tokens_containing;
};

struct PipelineConfig {
  std::filesystem::path output;
  std::uint64_t seed = 0;
  std::size_t angle_pairs = 200000;
  std::size_t bins = 100;
  unsigned threads = default_threads();
  std::vector<SourceDecl> sources;  // declaration order
  std::vector<MetaRecipe> recipes;
  std::vector<std::pair<std::string, std::string>> angles;  // default: every source pair
  std::vector<std::filesystem::path> similarity;
  std::vector<std::filesystem::path> analogy;
  std::string text;  // the config as read
};

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto f : detail::split_fields(s)) out.emplace_back(f);
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& where) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw Error(Errc::config, where + ": expected true or false, got '" + std::string(v) + "'");
}

/// Line-oriented "key = value" config. '#' starts a comment line. Relative
/// paths resolve against the config file's directory. Keys:
///
///   output = DIR                     seed = N
///   angles.pairs = N                 angles.bins = N
///   threads = N
///   source.ID.path = FILE            source.ID.format = text|word2vec|native
///   source.ID.steps = STEP...        (norm-dims, norm-vectors, pad:rear:200)
///   source.ID.skip_tokens_containing = STR
///   recipe.ID = avg|concat SRC SRC...
///   recipe.ID.pad_to_common = true   recipe.ID.post_normalize = true
///   angles = SRC SRC                 (repeatable)
///   eval.similarity = FILE|DIR       (repeatable)
///   eval.analogy = FILE              (repeatable)
inline PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base) {
  PipelineConfig cfg;
  std::map<std::string, std::size_t> source_index;
  std::map<std::string, std::size_t> recipe_index;
  auto source = [&](const std::string& id) -> SourceDecl& {
    auto [it, added] = source_index.emplace(id, cfg.sources.size());
    if (added) cfg.sources.emplace_back().id = id;
    return cfg.sources[it->second];
  };
  auto resolve = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_absolute() ? p : base / p;
  };
  std::map<std::string, bool> recipe_pad, recipe_post;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    cfg.text += line + "\n";
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string where = "config line " + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::config, where + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto number = [&](std::string_view v) {
      std::size_t n = 0;
      if (!detail::parse_size(v, n)) {
        throw Error(Errc::config, where + ": '" + std::string(v) + "' is not a non-negative integer");
      }
      return n;
    };

    if (key == "output") {
      cfg.output = resolve(value);
    } else if (key == "seed") {
      cfg.seed = number(value);
    } else if (key == "angles.pairs") {
      cfg.angle_pairs = number(value);
    } else if (key == "angles.bins") {
      cfg.bins = number(value);
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(std::max<std::size_t>(1, number(value)));
    } else if (key == "angles") {
      auto w = split_words(value);
      if (w.size() != 2) throw Error(Errc::config, where + ": angles takes two source ids");
      cfg.angles.emplace_back(w[0], w[1]);
    } else if (key == "eval.similarity") {
      cfg.similarity.push_back(resolve(value));
    } else if (key == "eval.analogy") {
      cfg.analogy.push_back(resolve(value));
    } else if (key.starts_with("source.")) {
      const auto rest = key.substr(7);
      const auto dot = rest.rfind('.');
      if (dot == std::string::npos || dot == 0) {
        throw Error(Errc::config, where + ": expected source.<id>.<field>");
      }
      auto& src = source(rest.substr(0, dot));
      const auto field = rest.substr(dot + 1);
      if (field == "path") {
        src.path = resolve(value);
      } else if (field == "format") {
        src.format = parse_format(value);
      } else if (field == "steps") {
        src.steps.clear();
        for (const auto& s : split_words(value)) src.steps.push_back(parse_step(s));
      } else if (field == "skip_tokens_containing") {
        src.skip_tokens_containing = value;
      } else {
        throw Error(Errc::config, where + ": unknown source field '" + field + "'");
      }
    } else if (key.starts_with("recipe.")) {
      const auto rest = key.substr(7);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) {
        auto w = split_words(value);
        if (w.size() < 3) {
          throw Error(Errc::config, where + ": recipe takes a method and at least two sources");
        }
        if (recipe_index.contains(rest)) {
          throw Error(Errc::config, where + ": recipe '" + rest + "' declared twice");
        }
        MetaRecipe r;
        r.name = rest;
        r.method = parse_method(w[0]);
        r.sources.assign(w.begin() + 1, w.end());
        recipe_index.emplace(rest, cfg.recipes.size());
        cfg.recipes.push_back(std::move(r));
      } else {
        const auto id = rest.substr(0, dot);
        const auto field = rest.substr(dot + 1);
        if (field == "pad_to_common") {
          recipe_pad[id] = parse_bool(value, where);
        } else if (field == "post_normalize") {
          recipe_post[id] = parse_bool(value, where);
        } else {
          throw Error(Errc::config, where + ": unknown recipe field '" + field + "'");
        }
      }
    } else {
      throw Error(Errc::config, where + ": unknown key '" + key + "'");
    }
  }

  for (const auto& [id, v] : recipe_pad) {
    if (!recipe_index.contains(id)) throw Error(Errc::config, "options for undeclared recipe '" + id + "'");
    cfg.recipes[recipe_index[id]].pad_to_common_dim = v;
  }
  for (const auto& [id, v] : recipe_post) {
    if (!recipe_index.contains(id)) throw Error(Errc::config, "options for undeclared recipe '" + id + "'");
    cfg.recipes[recipe_index[id]].post_normalize = v;
  }

  if (cfg.output.empty()) throw Error(Errc::config, "config has no output directory");
  if (cfg.sources.empty()) throw Error(Errc::config, "config declares no sources");
  for (const auto& s : cfg.sources) {
    if (s.path.empty()) throw Error(Errc::config, "source '" + s.id + "' has no path");
  }
  auto check_ref = [&](const std::string& id, const std::string& user) {
    if (!source_index.contains(id)) {
      throw Error(Errc::config, user + " references undeclared source '" + id + "'");
    }
  };
  for (const auto& r : cfg.recipes) {
    std::set<std::string> distinct(r.sources.begin(), r.sources.end());
    if (distinct.size() != r.sources.size()) {
      throw Error(Errc::config, "recipe '" + r.name + "' lists a source twice");
    }
    if (source_index.contains(r.name)) {
      throw Error(Errc::config, "recipe '" + r.name + "' has the same id as a source");
    }
    for (const auto& s : r.sources) check_ref(s, "recipe '" + r.name + "'");
  }
  for (const auto& [a, b] : cfg.angles) {
    check_ref(a, "angles");
    check_ref(b, "angles");
  }
  if (cfg.angle_pairs == 0) throw Error(Errc::config, "angles.pairs must be positive");
  if (cfg.bins == 0) throw Error(Errc::config, "angles.bins must be positive");
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return parse_config(in, path.parent_path());
}

inline int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    err << "run: " << e.what() << "\n";
    return 1;
  }
  using nlohmann::ordered_json;
  namespace fs = std::filesystem;
  std::string stage = "setup";
  try {
    const fs::path dir = cfg.output;
    fs::create_directories(dir / "sources");
    fs::create_directories(dir / "combined");
    fs::create_directories(dir / "angles");
    fs::create_directories(dir / "eval");
    write_text_file(dir / "config.txt", cfg.text);

    ordered_json manifest;
    manifest["tool"] = "metaemb";
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["generator"] = SplitMix64::kAlgorithm;
    manifest["config"] = cfg.text;

    stage = "ingest";
    std::vector<EmbeddingSet> sources;
    std::map<std::string, std::size_t> by_id;
    manifest["sources"] = ordered_json::array();
    for (const auto& s : cfg.sources) {
      out << "[ingest] " << s.id << " <- " << s.path.string() << "\n";
      LoadReport rep;
      auto set = load(s.path, s.format, load_options(s.id, s.skip_tokens_containing), &rep);
      set = apply_steps(std::move(set), s.steps);
      const auto file = fs::path("sources") / (s.id + ".meb");
      save_native(set, dir / file);
      ordered_json steps = ordered_json::array();
      for (const auto& st : s.steps) steps.push_back(step_name(st));
      manifest["sources"].push_back({{"id", s.id},
                                     {"path", s.path.string()},
                                     {"sha256", sha256_file(s.path)},
                                     {"format", s.format == Format::text       ? "text"
                                                : s.format == Format::word2vec ? "word2vec"
                                                                               : "native"},
                                     {"steps", steps},
                                     {"skip_tokens_containing", s.skip_tokens_containing},
                                     {"records", rep.records},
                                     {"duplicates", rep.duplicates},
                                     {"filtered", rep.filtered},
                                     {"words", set.size()},
                                     {"dim", set.dim()},
                                     {"output", file.generic_string()}});
      by_id[s.id] = sources.size();
      sources.push_back(std::move(set));
    }

    stage = "combine";
    std::vector<EmbeddingSet> combos;
    manifest["combinations"] = ordered_json::array();
    for (const auto& r : cfg.recipes) {
      std::vector<EmbeddingSet> inputs;
      for (const auto& id : r.sources) inputs.push_back(sources[by_id[id]]);
      auto set = combine_k(inputs, r);
      const auto file = fs::path("combined") / (r.name + ".meb");
      save_native(set, dir / file);
      out << "[combine] " << r.name << ": " << method_name(r.method) << ", " << set.size()
          << " words, dim " << set.dim() << "\n";
      manifest["combinations"].push_back({{"id", r.name},
                                          {"method", method_name(r.method)},
                                          {"sources", r.sources},
                                          {"pad_to_common", r.pad_to_common_dim},
                                          {"post_normalize", r.post_normalize},
                                          {"words", set.size()},
                                          {"dim", set.dim()},
                                          {"output", file.generic_string()}});
      combos.push_back(std::move(set));
    }

    stage = "angles";
    auto angle_pairs = cfg.angles;
    if (angle_pairs.empty()) {
      for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.sources.size(); ++j) {
          angle_pairs.emplace_back(cfg.sources[i].id, cfg.sources[j].id);
        }
      }
    }
    manifest["angles"] = ordered_json::array();
    for (const auto& [a, b] : angle_pairs) {
      auto st = analyse_angles(sources[by_id[a]], sources[by_id[b]], cfg.angle_pairs, cfg.seed,
                               cfg.bins, cfg.threads);
      const auto file = fs::path("angles") / (a + "__" + b + ".csv");
      export_histogram(st, dir / file);
      print_angle_row(out, "[angles] " + a + " & " + b, st);
      manifest["angles"].push_back({{"left", a},
                                    {"right", b},
                                    {"pairs", cfg.angle_pairs},
                                    {"seed", cfg.seed},
                                    {"bins", cfg.bins},
                                    {"samples", st.sample_count},
                                    {"skipped", st.skipped},
                                    {"mean", st.mean},
                                    {"variance", st.variance},
                                    {"output", file.generic_string()}});
    }

    stage = "eval";
    if (!cfg.similarity.empty() || !cfg.analogy.empty()) {
      std::vector<EmbeddingSet> all = sources;
      all.insert(all.end(), combos.begin(), combos.end());
      auto table = evaluate(all, cfg.similarity, cfg.analogy, cfg.threads);
      write_text_file(dir / "eval" / "table.csv", suite_csv(table));
      write_text_file(dir / "eval" / "table.txt", suite_text(table));
      out << suite_text(table);
      ordered_json datasets = ordered_json::array();
      for (const auto& p : expand_paths(cfg.similarity)) {
        datasets.push_back({{"kind", "similarity"}, {"path", p.string()}, {"sha256", sha256_file(p)}});
      }
      for (const auto& p : expand_paths(cfg.analogy)) {
        datasets.push_back({{"kind", "analogy"}, {"path", p.string()}, {"sha256", sha256_file(p)}});
      }
      manifest["eval"] = {{"datasets", datasets},
                          {"cells", table.cells.size()},
                          {"succeeded", table.succeeded()},
                          {"output", {"eval/table.csv", "eval/table.txt"}}};
    }

    manifest["decisions"] = {
        {"token_matching", "exact bytes"},
        {"duplicates", "first occurrence kept"},
        {"concatenation_order", "last source first ([right; left] for two sources)"},
        {"average_divisor", "number of sources"},
        {"post_normalize_default", false},
        {"angle_sampling", "uniform pairs with replacement, u != v"},
        {"histogram", "density = count / (n * bin_width) over [0, pi]"},
        {"variance", "unbiased (n - 1)"},
        {"oov", "skipped and counted"},
        {"cosadd_excludes_query_words", true},
        {"argmax_ties", "lowest vocabulary index"},
        {"score_format", "metric x 100, one decimal"}};

    stage = "manifest";
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "[done] outputs in " << dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "run (" << stage << "): " << e.what() << "\n";
    return 1;
  }
}

}  // namespace metaemb

#endif  // METAEMB_PIPELINE_HPP
