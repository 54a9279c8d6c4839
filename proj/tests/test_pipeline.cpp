#include <catch_amalgamated.hpp>

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "metaemb/pipeline.hpp"
#include "test_util.hpp"

using namespace metaemb;
using testing::read_file;
using testing::run_cli;
using testing::TempDir;
using testing::write_file;

namespace {

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Shared vocabulary of 60 words, distinct values per set.
void write_sources(const TempDir& tmp) {
  save_text(testing::random_set("A", 60, 8, 1), tmp / "a.txt");
  save_text(testing::random_set("B", 60, 5, 2), tmp / "b.txt");
  save_word2vec_binary(testing::random_set("C", 60, 8, 3, true), tmp / "c.bin");
}

void write_datasets(const TempDir& tmp) {
  std::filesystem::create_directories(tmp / "sim");
  std::string rg = "word1\tword2\tscore\n", mc;
  for (int i = 0; i < 30; ++i) {
    rg += "w" + std::to_string(i) + "\tw" + std::to_string(i + 17) + "\t" + std::to_string(i % 9) + "\n";
    mc += "w" + std::to_string(i + 3) + ",w" + std::to_string(59 - i) + "," + std::to_string(i % 5) + "\n";
  }
  mc += "w0,nosuchword,3\n";
  write_file(tmp / "sim" / "RG.txt", rg);
  write_file(tmp / "sim" / "MC.csv", mc);
  std::string ana = ": syn\n";
  for (int i = 0; i < 40; ++i) {
    ana += "w" + std::to_string(i) + " w" + std::to_string(i + 1) + " w" + std::to_string(i + 2) +
           " w" + std::to_string(i + 3) + "\n";
  }
  write_file(tmp / "analogy.txt", ana);
}

std::string config_text() {
  return "# three sources, six recipes\n"
         "output = out\n"
         "seed = 42\n"
         "angles.pairs = 5000\n"
         "threads = 2\n"
         "source.A.path = a.txt\n"
         "source.A.steps = norm-vectors\n"
         "source.B.path = b.txt\n"
         "source.B.steps = norm-dims norm-vectors pad:rear:3\n"
         "source.C.path = c.bin\n"
         "source.C.format = word2vec\n"
         "recipe.AB_avg = avg A B\n"
         "recipe.AB_conc = concat A B\n"
         "recipe.AC_avg = avg A C\n"
         "recipe.AC_conc = concat A C\n"
         "recipe.ABC_avg = avg A B C\n"
         "recipe.ABC_conc = concat A B C\n"
         "recipe.ABC_conc.post_normalize = true\n"
         "eval.similarity = sim\n"
         "eval.analogy = analogy.txt\n";
}

}  // namespace

TEST_CASE("step parsing", "[pipeline]") {
  auto p = parse_pad("rear:200");
  CHECK(p.side == PadSide::rear);
  CHECK(p.count == 200);
  CHECK(parse_pad("front:3").side == PadSide::front);
  CHECK_THROWS_AS(parse_pad("middle:3"), Error);
  CHECK_THROWS_AS(parse_pad("rear"), Error);
  CHECK_THROWS_AS(parse_pad("rear:-1"), Error);

  CHECK(parse_step("norm-dims").kind == Step::Kind::norm_dims);
  CHECK(parse_step("norm-vectors").kind == Step::Kind::norm_vectors);
  CHECK(step_name(parse_step("pad:front:7")) == "pad:front:7");
  CHECK_THROWS_AS(parse_step("normalize"), Error);
}

TEST_CASE("apply_steps respects order", "[pipeline]") {
  auto s = testing::make_set("S", {"a", "b"}, {{3, 0}, {4, 2}});
  // Dimension normalization then vector normalization leaves unit rows; the
  // reverse order leaves unit columns instead.
  auto dv = apply_steps(s, {parse_step("norm-dims"), parse_step("norm-vectors")});
  auto vd = apply_steps(s, {parse_step("norm-vectors"), parse_step("norm-dims")});
  for (std::size_t i = 0; i < 2; ++i) CHECK(l2_norm(dv.row(i)) == Catch::Approx(1.0).epsilon(1e-14));
  const double col0 = std::hypot(vd.row(0)[0], vd.row(1)[0]);
  CHECK(col0 == Catch::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(dv.same_content(vd));

  auto padded = apply_steps(s, {parse_step("pad:front:2")});
  CHECK(padded.dim() == 4);
  CHECK(padded.row(1)[2] == 4.0);
}

TEST_CASE("config parsing", "[pipeline]") {
  SECTION("full config") {
    std::istringstream in(config_text());
    auto cfg = parse_config(in, "/base");
    CHECK(cfg.output == std::filesystem::path("/base/out"));
    CHECK(cfg.seed == 42);
    CHECK(cfg.angle_pairs == 5000);
    CHECK(cfg.threads == 2);
    REQUIRE(cfg.sources.size() == 3);
    CHECK(cfg.sources[1].steps.size() == 3);
    CHECK(cfg.sources[2].format == Format::word2vec);
    REQUIRE(cfg.recipes.size() == 6);
    CHECK(cfg.recipes[5].post_normalize);
    CHECK_FALSE(cfg.recipes[0].post_normalize);
    CHECK(cfg.recipes[4].sources == std::vector<std::string>{"A", "B", "C"});
    CHECK(cfg.angles.empty());
    CHECK(cfg.similarity.size() == 1);
  }
  SECTION("errors are raised before any work") {
    auto fails = [](const std::string& text) {
      std::istringstream in(text);
      CHECK_THROWS_AS(parse_config(in, "."), Error);
    };
    fails("output = o\nsource.A.path = a\nrecipe.X = avg A Z\n");
    fails("output = o\nsource.A.path = a\nangles = A Q\n");
    fails("output = o\nsource.A.path = a\nrecipe.X = avg A A\n");
    fails("output = o\nsource.A.path = a\nrecipe.X = blend A A\n");
    fails("output = o\nsource.A.format = text\n");
    fails("source.A.path = a\n");
    fails("output = o\nsource.A.path = a\nfrobnicate = 1\n");
    fails("output = o\nsource.A.path = a\nno equals sign\n");
    fails("output = o\nsource.A.path = a\nrecipe.Y.post_normalize = true\n");
  }
  SECTION("undeclared source in run leaves no output behind") {
    TempDir tmp;
    write_file(tmp / "bad.cfg", "output = out\nsource.A.path = a.txt\nrecipe.X = avg A Z\n");
    std::ostringstream out, err;
    CHECK(cmd_run(tmp / "bad.cfg", out, err) == 1);
    CHECK(err.str().find("'Z'") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(tmp / "out"));
  }
}

TEST_CASE("commands in process", "[pipeline]") {
  TempDir tmp;
  write_sources(tmp);
  std::ostringstream out, err;

  IngestOptions io{tmp / "a.txt", Format::text, tmp / "a.meb", "A", {parse_step("pad:rear:4")}, {}};
  REQUIRE(cmd_ingest(io, out, err) == 0);
  CHECK(out.str() == "A: 60 words, dim 12\n");
  CHECK(load_native(tmp / "a.meb").dim() == 12);

  IngestOptions ib{tmp / "b.txt", Format::text, tmp / "b.meb", "B", {parse_step("pad:rear:7")}, {}};
  REQUIRE(cmd_ingest(ib, out, err) == 0);

  out.str("");
  CombineOptions co;
  co.inputs = {tmp / "a.meb", tmp / "b.meb"};
  co.method = Method::concatenate;
  co.output = tmp / "ab.meb";
  REQUIRE(cmd_combine(co, out, err) == 0);
  CHECK(out.str() == "intersection: 60 words\noutput dim: 24\n");

  out.str("");
  AnglesOptions ao;
  ao.left = tmp / "a.meb";
  ao.right = tmp / "b.meb";
  ao.pairs = 3000;
  ao.seed = 9;
  ao.output = tmp / "h.csv";
  REQUIRE(cmd_angles(ao, out, err) == 0);
  // Native files carry no set name, so names come from the file stems.
  CHECK(out.str().starts_with("Embeddings  mu  sigma^2\na & b  "));
  CHECK(out.str().find("seed 9, splitmix64") != std::string::npos);

  ao.right = tmp / "ab.meb";
  std::ostringstream err2;
  CHECK(cmd_angles(ao, out, err2) == 1);
  CHECK(err2.str().find("pad") != std::string::npos);

  IngestOptions missing{tmp / "nope.txt", Format::text, tmp / "x.meb", "", {}, {}};
  CHECK(cmd_ingest(missing, out, err) == 1);
}

TEST_CASE("token filter in ingest", "[pipeline]") {
  TempDir tmp;
  write_file(tmp / "p.txt", "new_york 1 2\nnew 3 4\nyork 5 6\n");
  std::ostringstream out, err;
  IngestOptions io{tmp / "p.txt", Format::text, tmp / "p.meb", "P", {}, "_"};
  REQUIRE(cmd_ingest(io, out, err) == 0);
  auto s = load_native(tmp / "p.meb");
  CHECK(s.size() == 2);
  CHECK_FALSE(s.contains("new_york"));
  CHECK(out.str().find("1 tokens filtered") != std::string::npos);
}

TEST_CASE("cli binary", "[pipeline][cli]") {
  TempDir tmp;
  write_sources(tmp);

  SECTION("usage errors and missing files exit 1") {
    CHECK(run_cli("") == 1);
    CHECK(run_cli("bogus") == 1);
    CHECK(run_cli("ingest " + q(tmp / "none.txt") + " -o " + q(tmp / "x.meb")) == 1);
    CHECK(run_cli("--help") == 0);
  }
  SECTION("ingest, combine and angles") {
    REQUIRE(run_cli("ingest " + q(tmp / "a.txt") + " -o " + q(tmp / "a.meb") + " --name A") == 0);
    REQUIRE(run_cli("ingest " + q(tmp / "b.txt") + " -o " + q(tmp / "b.meb") + " --norm-vectors --pad rear:3") == 0);
    CHECK(load_native(tmp / "b.meb").dim() == 8);
    REQUIRE(run_cli("ingest " + q(tmp / "c.bin") + " -f word2vec -o " + q(tmp / "c.meb")) == 0);

    REQUIRE(run_cli("combine " + q(tmp / "a.meb") + " " + q(tmp / "b.meb") + " -m avg -o " + q(tmp / "avg.meb")) == 0);
    CHECK(load_native(tmp / "avg.meb").dim() == 8);
    REQUIRE(run_cli("combine " + q(tmp / "a.meb") + " " + q(tmp / "b.meb") + " -m concat -o " + q(tmp / "conc.meb")) == 0);
    CHECK(load_native(tmp / "conc.meb").dim() == 16);

    // Averaging a set with itself returns it unchanged.
    REQUIRE(run_cli("combine " + q(tmp / "a.meb") + " " + q(tmp / "a.meb") + " -o " + q(tmp / "aa.meb")) == 0);
    auto a = load_native(tmp / "a.meb");
    auto aa = load_native(tmp / "aa.meb");
    CHECK(std::equal(a.data().begin(), a.data().end(), aa.data().begin(), aa.data().end()));

    const std::string angles = "angles " + q(tmp / "a.meb") + " " + q(tmp / "c.meb") + " --pairs 4000 --seed 5 --out ";
    REQUIRE(run_cli(angles + q(tmp / "h1.csv")) == 0);
    REQUIRE(run_cli(angles + q(tmp / "h2.csv") + " --threads 3") == 0);
    CHECK(read_file(tmp / "h1.csv") == read_file(tmp / "h2.csv"));
    CHECK(run_cli("combine " + q(tmp / "a.meb") + " -o " + q(tmp / "x.meb")) == 1);
  }
  SECTION("eval") {
    write_datasets(tmp);
    REQUIRE(run_cli("ingest " + q(tmp / "a.txt") + " -o " + q(tmp / "a.meb")) == 0);
    std::filesystem::create_directories(tmp / "empty");
    CHECK(run_cli("eval " + q(tmp / "a.meb") + " --sim " + q(tmp / "empty")) == 1);

    const auto start = std::chrono::steady_clock::now();
    REQUIRE(run_cli("eval " + q(tmp / "a.meb") + " --sim " + q(tmp / "sim") + " --analogy " +
                    q(tmp / "analogy.txt") + " --out " + q(tmp / "res.csv")) == 0);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
    const auto csv = read_file(tmp / "res.csv");
    CHECK(csv.starts_with("set,dataset,metric,value,covered,skipped\n"));
    // Directory entries are taken in name order.
    CHECK(csv.find("a,MC,spearman,") < csv.find("a,RG,spearman,"));
    CHECK(csv.find("a,MC,spearman,") != std::string::npos);
    CHECK(csv.find(",30,1\n") != std::string::npos);
    CHECK(std::filesystem::exists(tmp / "res.txt"));
  }
}

TEST_CASE("run end to end", "[pipeline][cli]") {
  TempDir tmp;
  write_sources(tmp);
  write_datasets(tmp);
  write_file(tmp / "exp.cfg", config_text());

  REQUIRE(run_cli("run " + q(tmp / "exp.cfg")) == 0);
  const auto out = tmp / "out";
  const auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["sources"].size() == 3);
  CHECK(manifest["combinations"].size() == 6);
  CHECK(manifest["angles"].size() == 3);
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["sources"][0]["sha256"] == sha256_file(tmp / "a.txt"));
  CHECK(manifest["eval"]["cells"] == 9 * 3);
  CHECK(manifest["combinations"][1]["dim"] == 16);
  CHECK(manifest["combinations"][5]["dim"] == 24);
  CHECK(std::filesystem::exists(out / "angles" / "A__B.csv"));
  CHECK(std::filesystem::exists(out / "eval" / "table.csv"));
  CHECK(read_file(out / "config.txt") == config_text());

  auto snapshot = [&] {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(out)) {
      if (e.is_regular_file()) files[e.path().lexically_relative(out).string()] = read_file(e.path());
    }
    return files;
  };
  const auto first = snapshot();
  REQUIRE(run_cli("run " + q(tmp / "exp.cfg")) == 0);
  CHECK(snapshot() == first);
}

TEST_CASE("sha256_file", "[pipeline]") {
  TempDir tmp;
  write_file(tmp / "abc.txt", "abc");
  CHECK(sha256_file(tmp / "abc.txt") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
