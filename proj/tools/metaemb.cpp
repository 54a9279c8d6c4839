// metaemb: build, analyse and evaluate averaged / concatenated meta-embeddings.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaemb/pipeline.hpp"

namespace {

using namespace metaemb;

int run_ingest(CLI::App& app, const std::string& input, const std::string& format,
               const std::string& output, const std::string& name, const std::string& skip,
               CLI::Option* norm_dims, CLI::Option* norm_vectors, CLI::Option* pad,
               const std::vector<std::string>& pad_values) {
  IngestOptions opts;
  opts.input = input;
  opts.output = output;
  opts.name = name;
  opts.skip_tokens_containing = skip;
  try {
    opts.format = parse_format(format);
    // Steps run in command-line order.
    std::size_t pad_seen = 0;
    for (const CLI::Option* o : app.parse_order()) {
      if (o == norm_dims) {
        opts.steps.push_back({Step::Kind::norm_dims});
      } else if (o == norm_vectors) {
        opts.steps.push_back({Step::Kind::norm_vectors});
      } else if (o == pad) {
        opts.steps.push_back({Step::Kind::pad, parse_pad(pad_values.at(pad_seen++))});
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "ingest: " << e.what() << "\n";
    return 1;
  }
  return cmd_ingest(opts, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-embeddings by averaging and concatenation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(metaemb::kVersion));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load, preprocess and store an embedding set");
  std::string in_path, in_format = "text", in_out, in_name, in_skip;
  std::vector<std::string> pad_values;
  ingest->add_option("input", in_path, "Embedding file")->required()->check(CLI::ExistingFile);
  ingest->add_option("-f,--format", in_format, "text | word2vec | native")->capture_default_str();
  ingest->add_option("-o,--out", in_out, "Native output file")->required();
  ingest->add_option("--name", in_name, "Set name (default: file stem)");
  ingest->add_option("--skip-tokens-containing", in_skip, "Drop tokens containing this string");
  auto* norm_dims = ingest->add_flag("--norm-dims", "l2-normalise each dimension over the vocabulary");
  auto* norm_vectors = ingest->add_flag("--norm-vectors", "l2-normalise each word vector");
  auto* pad = ingest->add_option("--pad", pad_values, "Zero-pad, e.g. rear:200")
                  ->allow_extra_args(false)
                  ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  norm_dims->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  norm_vectors->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  // combine
  auto* combine = app.add_subcommand("combine", "Average or concatenate native sets");
  metaemb::CombineOptions comb;
  std::vector<std::string> comb_inputs;
  std::string comb_method = "avg", comb_side = "rear";
  combine->add_option("inputs", comb_inputs, "Native input files (two or more)")
      ->required()
      ->expected(2, -1)
      ->check(CLI::ExistingFile);
  combine->add_option("-m,--method", comb_method, "avg | concat")->capture_default_str();
  combine->add_option("-o,--out", comb.output, "Native output file")->required();
  combine->add_option("--name", comb.name, "Output set name");
  combine->add_flag("--pad-to-common", comb.pad_to_common_dim,
                    "Zero-pad narrower sources before averaging");
  combine->add_option("--pad-side", comb_side, "front | rear")->capture_default_str();
  combine->add_flag("--post-normalize", comb.post_normalize, "l2-normalise output rows");

  // angles
  auto* angles = app.add_subcommand("angles", "Angle distribution between difference vectors");
  metaemb::AnglesOptions ang;
  std::string ang_left, ang_right, ang_out;
  angles->add_option("left", ang_left, "Native file")->required()->check(CLI::ExistingFile);
  angles->add_option("right", ang_right, "Native file")->required()->check(CLI::ExistingFile);
  angles->add_option("--pairs", ang.pairs, "Random word pairs to sample")->capture_default_str();
  angles->add_option("--seed", ang.seed, "PRNG seed")->capture_default_str();
  angles->add_option("--bins", ang.bins, "Histogram bins over [0, pi]")->capture_default_str();
  angles->add_option("--out", ang_out, "Histogram CSV");
  angles->add_option("--threads", ang.threads, "Worker threads");

  // eval
  auto* eval = app.add_subcommand("eval", "Word similarity and analogy evaluation");
  metaemb::EvalOptions ev;
  std::vector<std::string> ev_sets, ev_sim, ev_ana;
  std::string ev_out;
  eval->add_option("sets", ev_sets, "Native embedding files")->required()->check(CLI::ExistingFile);
  eval->add_option("--sim", ev_sim, "Similarity dataset file or directory (repeatable)");
  eval->add_option("--analogy", ev_ana, "Analogy dataset file (repeatable)");
  eval->add_option("--out", ev_out, "CSV output (a .txt table is written alongside)");
  eval->add_option("--threads", ev.threads, "Worker threads");

  // run
  auto* run = app.add_subcommand("run", "Execute a pipeline config end to end");
  std::string config;
  run->add_option("config", config, "Pipeline config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*ingest) {
    return run_ingest(*ingest, in_path, in_format, in_out, in_name, in_skip, norm_dims,
                      norm_vectors, pad, pad_values);
  }
  if (*combine) {
    try {
      comb.method = metaemb::parse_method(comb_method);
      comb.pad_side = metaemb::parse_pad(comb_side + ":0").side;
    } catch (const std::exception& e) {
      std::cerr << "combine: " << e.what() << "\n";
      return 1;
    }
    for (const auto& p : comb_inputs) comb.inputs.emplace_back(p);
    return metaemb::cmd_combine(comb, std::cout, std::cerr);
  }
  if (*angles) {
    ang.left = ang_left;
    ang.right = ang_right;
    ang.output = ang_out;
    return metaemb::cmd_angles(ang, std::cout, std::cerr);
  }
  if (*eval) {
    for (const auto& p : ev_sets) ev.sets.emplace_back(p);
    for (const auto& p : ev_sim) ev.similarity.emplace_back(p);
    for (const auto& p : ev_ana) ev.analogy.emplace_back(p);
    ev.output = ev_out;
    return metaemb::cmd_eval(ev, std::cout, std::cerr);
  }
  if (*run) return metaemb::cmd_run(config, std::cout, std::cerr);
  return 1;
}
