#include <catch_amalgamated.hpp>

#include <bit>
#include <cstring>
#include <random>
#include <set>

#include "metaemb/embedding_set.hpp"
#include "metaemb/io.hpp"
#include "test_util.hpp"

using namespace metaemb;
using testing::TempDir;
using testing::write_file;

namespace {

Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected metaemb::Error");
  return Errc::io;
}

bool bitwise_equal(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.vocab() != b.vocab() || a.dim() != b.dim()) return false;
  auto x = a.data(), y = b.data();
  return x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("EmbeddingSet enforces its invariants", "[embedding_io]") {
  CHECK_THROWS_AS(EmbeddingSet("s", {"a", "a"}, {1, 2}, 1), Error);
  CHECK_THROWS_AS(EmbeddingSet("s", {"a", "b"}, {1, 2, 3}, 1), Error);
  CHECK_THROWS_AS(EmbeddingSet("s", {"a"}, {std::nan("")}, 1), Error);
  CHECK_THROWS_AS(EmbeddingSet("s", {"a"}, {1.0}, 0), Error);
  EmbeddingSet ok("s", {"a", "b"}, {1, 2, 3, 4}, 2);
  CHECK(ok.find("b") == 1u);
  CHECK_FALSE(ok.find("c"));
  CHECK(ok.row(1)[0] == 3.0);
}

TEST_CASE("load_text reads a minimal file", "[embedding_io]") {
  TempDir tmp;
  write_file(tmp / "min.txt", "a 1.0 0.0\nb 0.0 1.0");
  auto s = load_text(tmp / "min.txt");
  CHECK(s.dim() == 2);
  CHECK(s.vocab() == std::vector<std::string>{"a", "b"});
  CHECK(s.name() == "min");
  CHECK(s.row(1)[1] == 1.0);
}

TEST_CASE("load_text error paths", "[embedding_io]") {
  TempDir tmp;
  SECTION("inconsistent dimension") {
    write_file(tmp / "f.txt", "a 1.0\nb 2.0 3.0");
    CHECK(error_code_of([&] { load_text(tmp / "f.txt"); }) == Errc::dimension);
  }
  SECTION("non-numeric field") {
    write_file(tmp / "f.txt", "a 1.0 2.0\nb 2.0 x3\n");
    CHECK(error_code_of([&] { load_text(tmp / "f.txt"); }) == Errc::format);
  }
  SECTION("empty file") {
    write_file(tmp / "f.txt", "");
    CHECK(error_code_of([&] { load_text(tmp / "f.txt"); }) == Errc::empty);
    write_file(tmp / "g.txt", "\n\n  \n");
    CHECK(error_code_of([&] { load_text(tmp / "g.txt"); }) == Errc::empty);
  }
  SECTION("token containing whitespace") {
    write_file(tmp / "f.txt", "a 1.0 2.0\nnew york 0.5 0.25\n");
    CHECK_THROWS_WITH(load_text(tmp / "f.txt"), Catch::Matchers::ContainsSubstring("whitespace"));
  }
  SECTION("non-finite value") {
    write_file(tmp / "f.txt", "a 1.0 nan\n");
    CHECK(error_code_of([&] { load_text(tmp / "f.txt"); }) == Errc::invalid_value);
  }
  SECTION("missing file") {
    CHECK(error_code_of([&] { load_text(tmp / "nope.txt"); }) == Errc::io);
  }
}

TEST_CASE("load_text keeps the first of duplicate tokens and reports them", "[embedding_io]") {
  TempDir tmp;
  write_file(tmp / "d.txt", "a 1 2\nb 3 4\na 5 6\na 7 8\n");
  LoadReport rep;
  auto s = load_text(tmp / "d.txt", {}, &rep);
  CHECK(s.size() == 2);
  CHECK(s.row(0)[0] == 1.0);
  CHECK(rep.duplicates == 2);
  CHECK(rep.records == 4);
}

TEST_CASE("load_text recognises a word2vec text header", "[embedding_io]") {
  TempDir tmp;
  write_file(tmp / "h.txt", "2 3\nx 1 2 3\ny 4 5 6\n");
  auto s = load_text(tmp / "h.txt");
  CHECK(s.size() == 2);
  CHECK(s.dim() == 3);

  write_file(tmp / "bad.txt", "3 3\nx 1 2 3\ny 4 5 6\n");
  CHECK(error_code_of([&] { load_text(tmp / "bad.txt"); }) == Errc::format);

  // Two integers that are really a token and a 1-d vector.
  write_file(tmp / "one.txt", "7 5\n8 6\n");
  auto t = load_text(tmp / "one.txt");
  CHECK(t.vocab() == std::vector<std::string>{"7", "8"});
  CHECK(t.dim() == 1);
}

TEST_CASE("token filter drops matching tokens", "[embedding_io]") {
  TempDir tmp;
  write_file(tmp / "p.txt", "new_york 1 2\ncity 3 4\nlos_angeles 5 6\n");
  LoadOptions opts;
  opts.keep = [](std::string_view t) { return t.find('_') == std::string_view::npos; };
  LoadReport rep;
  auto s = load_text(tmp / "p.txt", opts, &rep);
  CHECK(s.vocab() == std::vector<std::string>{"city"});
  CHECK(rep.filtered == 2);
}

TEST_CASE("text save/load round-trips at full printed precision", "[embedding_io]") {
  TempDir tmp;
  auto s = testing::random_set("r", 1000, 300, 11);
  save_text(s, tmp / "r.txt");
  auto t = load_text(tmp / "r.txt");
  REQUIRE(t.vocab() == s.vocab());
  double worst = 0.0;
  for (std::size_t i = 0; i < s.data().size(); ++i) {
    worst = std::max(worst, std::abs(s.data()[i] - t.data()[i]));
  }
  CHECK(worst <= 1e-12);
  CHECK(worst == 0.0);  // %.17g is exact for binary64
}

TEST_CASE("word2vec binary format", "[embedding_io]") {
  TempDir tmp;
  auto record = [](const std::string& tok, std::vector<float> v) {
    std::string r = tok + " ";
    for (float f : v) {
      auto bits = std::bit_cast<std::uint32_t>(f);
      for (int k = 0; k < 4; ++k) r.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
    }
    return r + "\n";
  };

  SECTION("minimal file") {
    write_file(tmp / "m.bin", "2 3\n" + record("a", {1, 2, 3}) + record("b", {4, 5, 6}));
    auto s = load_word2vec_binary(tmp / "m.bin");
    CHECK(s.dim() == 3);
    CHECK(s.size() == 2);
    CHECK(s.row(1)[2] == 6.0);
  }
  SECTION("records without newline separators") {
    std::string body = record("a", {1, 2});
    body.pop_back();
    write_file(tmp / "m.bin", "2 2\n" + body + record("b", {3, 4}));
    auto s = load_word2vec_binary(tmp / "m.bin");
    CHECK(s.vocab() == std::vector<std::string>{"a", "b"});
  }
  SECTION("truncated") {
    write_file(tmp / "t.bin", "3 3\n" + record("a", {1, 2, 3}) + record("b", {4, 5, 6}));
    CHECK_THROWS_WITH(load_word2vec_binary(tmp / "t.bin"),
                      Catch::Matchers::ContainsSubstring("truncated"));
    auto partial = "1 3\n" + record("a", {1, 2, 3});
    write_file(tmp / "p.bin", partial.substr(0, partial.size() - 3));
    CHECK(error_code_of([&] { load_word2vec_binary(tmp / "p.bin"); }) == Errc::format);
  }
  SECTION("more records than declared") {
    write_file(tmp / "x.bin", "1 1\n" + record("a", {1}) + record("b", {2}));
    CHECK(error_code_of([&] { load_word2vec_binary(tmp / "x.bin"); }) == Errc::format);
  }
  SECTION("non-positive dimension") {
    write_file(tmp / "z.bin", "1 0\n");
    CHECK(error_code_of([&] { load_word2vec_binary(tmp / "z.bin"); }) == Errc::invalid_value);
    write_file(tmp / "n.bin", "1 -3\n");
    CHECK(error_code_of([&] { load_word2vec_binary(tmp / "n.bin"); }) == Errc::invalid_value);
  }
  SECTION("write then read is bit-exact") {
    auto s = testing::random_set("w", 500, 50, 5, /*float_exact=*/true);
    save_word2vec_binary(s, tmp / "w.bin");
    auto t = load_word2vec_binary(tmp / "w.bin");
    CHECK(bitwise_equal(s, t));
  }
}

TEST_CASE("native container layout", "[embedding_io]") {
  TempDir tmp;
  EmbeddingSet s("s", {"ab", "c"}, {1.5, -2.0}, 1);
  save_native(s, tmp / "s.meb");
  const auto bytes = testing::read_file(tmp / "s.meb");
  REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + (4 + 2) + (4 + 1) + 2 * 8);
  CHECK(bytes.substr(0, 4) == "MEB1");
  CHECK(bytes[4] == 1);  // version, little-endian
  CHECK(bytes[8] == 1);  // dim
  CHECK(bytes[12] == 2);  // count
  CHECK(bytes.substr(20, 4) == std::string("\x02\0\0\0", 4));
  CHECK(bytes.substr(24, 2) == "ab");
  double last;
  std::memcpy(&last, bytes.data() + bytes.size() - 8, 8);
  CHECK(last == -2.0);
}

TEST_CASE("native save/load", "[embedding_io]") {
  TempDir tmp;
  SECTION("round trip is bitwise") {
    auto s = testing::random_set("big", 10000, 30, 3);
    save_native(s, tmp / "big.meb");
    auto t = load_native(tmp / "big.meb");
    CHECK(bitwise_equal(s, t));
    CHECK(t.name() == "big");
  }
  SECTION("empty vocabulary") {
    EmbeddingSet e("e", {}, {}, 4);
    save_native(e, tmp / "e.meb");
    CHECK(std::filesystem::file_size(tmp / "e.meb") == 20);
    auto t = load_native(tmp / "e.meb");
    CHECK(t.size() == 0);
    CHECK(t.dim() == 4);
  }
  SECTION("corrupt files are rejected") {
    write_file(tmp / "bad.meb", "NOPE");
    CHECK(error_code_of([&] { load_native(tmp / "bad.meb"); }) == Errc::format);
    auto s = testing::random_set("s", 3, 2, 1);
    save_native(s, tmp / "s.meb");
    auto bytes = testing::read_file(tmp / "s.meb");
    write_file(tmp / "trunc.meb", bytes.substr(0, bytes.size() - 1));
    CHECK(error_code_of([&] { load_native(tmp / "trunc.meb"); }) == Errc::format);
    write_file(tmp / "tail.meb", bytes + "x");
    CHECK(error_code_of([&] { load_native(tmp / "tail.meb"); }) == Errc::format);
  }
}

TEST_CASE("intersect", "[embedding_io]") {
  auto a = testing::make_set("A", {"a", "b", "c"}, {{1, 0}, {2, 0}, {3, 0}});
  auto b = testing::make_set("B", {"d", "c", "b"}, {{0, 4}, {0, 3}, {0, 2}});

  SECTION("self-intersection") {
    auto p = intersect(a, a);
    CHECK(p.shared_vocab() == a.vocab());
  }
  SECTION("order follows the first argument and rows stay aligned") {
    auto p = intersect(a, b);
    CHECK(p.shared_vocab() == std::vector<std::string>{"b", "c"});
    CHECK(p.right.vocab() == p.left.vocab());
    CHECK(p.left.row(1)[0] == 3.0);
    CHECK(p.right.row(1)[1] == 3.0);
  }
  SECTION("disjoint sets give an empty pair") {
    auto c = testing::make_set("C", {"x"}, {{1, 1}});
    auto p = intersect(a, c);
    CHECK(p.empty());
    CHECK(p.left.dim() == 2);
  }
  SECTION("dimensions are unchanged") {
    auto c = testing::make_set("C", {"a", "c"}, {{1, 2, 3}, {4, 5, 6}});
    auto p = intersect(a, c);
    CHECK(p.left.dim() == 2);
    CHECK(p.right.dim() == 3);
  }
}

TEST_CASE("intersect is symmetric as a set and preserves rows", "[embedding_io][property]") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    std::bernoulli_distribution pick(0.5);
    std::vector<std::string> va, vb;
    for (int i = 0; i < 40; ++i) {
      if (pick(rng)) va.push_back("t" + std::to_string(i));
      if (pick(rng)) vb.push_back("t" + std::to_string(i));
    }
    std::shuffle(vb.begin(), vb.end(), rng);
    std::vector<double> da(va.size() * 3), db(vb.size() * 2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& x : da) x = u(rng);
    for (double& x : db) x = u(rng);
    if (va.empty() || vb.empty()) continue;
    EmbeddingSet A("A", va, da, 3), B("B", vb, db, 2);

    auto ab = intersect(A, B);
    auto ba = intersect(B, A);
    std::set<std::string> s1(ab.shared_vocab().begin(), ab.shared_vocab().end());
    std::set<std::string> s2(ba.shared_vocab().begin(), ba.shared_vocab().end());
    CHECK(s1 == s2);
    for (std::size_t i = 0; i < ab.size(); ++i) {
      const auto& t = ab.shared_vocab()[i];
      auto ra = A.row(*A.find(t));
      auto rb = B.row(*B.find(t));
      CHECK(std::equal(ra.begin(), ra.end(), ab.left.row(i).begin()));
      CHECK(std::equal(rb.begin(), rb.end(), ab.right.row(i).begin()));
    }
  }
}
