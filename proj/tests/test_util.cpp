#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "uficlab/config.hpp"
#include "uficlab/csv.hpp"
#include "uficlab/parallel.hpp"
#include "uficlab/rng.hpp"

using namespace uficlab;
namespace fs = std::filesystem;

static fs::path scratch(const std::string& name) {
  fs::path p = fs::path("scratch_util") / name;
  fs::create_directories(p.parent_path());
  return p;
}

TEST_CASE("config parses key = value with comments and whitespace") {
  const Config cfg = Config::from_string(
      "# full-line comment\n"
      "\n"
      "  alpha = 1.5   # trailing comment\n"
      "name= spiral\n"
      "flag =true\n"
      "count = 42\n");
  CHECK(cfg.has("alpha"));
  CHECK(cfg.get_double("alpha") == 1.5);
  CHECK(cfg.get_string("name") == "spiral");
  CHECK(cfg.get_bool("flag"));
  CHECK(cfg.get_int("count") == 42);
  CHECK_FALSE(cfg.has("absent"));
}

TEST_CASE("config typed getters fall back and throw") {
  const Config cfg = Config::from_string("x = 2\nbad = 1.2.3\n");
  CHECK(cfg.get_double("missing", 7.0) == 7.0);
  CHECK(cfg.get_int("missing", -3) == -3);
  CHECK(cfg.get_string("missing", "d") == "d");
  CHECK_THROWS_AS(cfg.get_double("missing"), ConfigError);
  CHECK_THROWS_AS(cfg.get_double("bad"), ConfigError);
  CHECK_THROWS_AS((void)Config::from_string("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS((void)Config::from_string("= value\n"), ConfigError);
}

TEST_CASE("config vector getters") {
  const Config cfg = Config::from_string("w = 1, 2, 3, 4, 5, 6\nshort = 1, 2\n");
  const Vec6 w = cfg.get_vec6("w");
  CHECK(w[0] == 1.0);
  CHECK(w[5] == 6.0);
  CHECK_THROWS_AS((void)cfg.get_vec6("short"), ConfigError);
  const std::vector<double> d = cfg.get_doubles("short");
  REQUIRE(d.size() == 2);
  CHECK(d[1] == 2.0);
}

TEST_CASE("config canonical text ignores declaration order") {
  const Config a = Config::from_string("b = 2\na = 1\n");
  const Config b = Config::from_string("a = 1\n# note\nb = 2\n");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.hash() == b.hash());
  Config c = a;
  c.set("b", "3");
  CHECK(c.hash() != a.hash());
}

TEST_CASE("config keys_with_prefix") {
  const Config cfg = Config::from_string("s.a = 1\ns.b = 2\nt.a = 3\n");
  const auto keys = cfg.keys_with_prefix("s.");
  REQUIRE(keys.size() == 2);
  CHECK(std::set<std::string>(keys.begin(), keys.end()) ==
        std::set<std::string>{"s.a", "s.b"});
}

TEST_CASE("doubles round-trip through shortest decimal strings") {
  const double values[] = {0.0,      1.0,    0.1,   -0.1,  1.0 / 3.0, 1e-300,
                           -1e300,   2.5e-8, 29.43, 1e17,  123456.789,
                           0x1.fffffffffffffp+1023, 5e-324};
  for (double v : values) {
    const std::string s = double_to_string(v);
    CHECK(string_to_double(s) == v);
  }
  CHECK(double_to_string(1.0) == "1");
  CHECK(double_to_string(0.1) == "0.1");
  CHECK_THROWS_AS((void)string_to_double("12x"), ParseError);
  CHECK_THROWS_AS((void)string_to_double(""), ParseError);
}

TEST_CASE("csv table writes and reads bit-exactly") {
  CsvTable t;
  t.metadata["surface"] = "curved";
  t.metadata["epsilon"] = "0.1";
  t.columns = {"t", "a", "b"};
  t.data.resize(3, 3);
  t.data << 0.0, 1.0 / 3.0, -2.5e-8,
            1e-3, 29.43, 1e17,
            2e-3, -0.0, 5e-324;
  const auto path = scratch("round.csv").string();
  t.write(path);
  const CsvTable r = CsvTable::read(path);
  CHECK(r.metadata == t.metadata);
  CHECK(r.columns == t.columns);
  REQUIRE(r.rows() == 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(r.data(i, j) == t.data(i, j));
  CHECK(r.col_index("b") == 2);
  CHECK_THROWS_AS((void)r.col_index("absent"), ParseError);
}

TEST_CASE("csv read rejects malformed rows") {
  const auto path = scratch("bad.csv").string();
  {
    std::ofstream out(path);
    out << "a,b\n1.0\n";
  }
  CHECK_THROWS_AS((void)CsvTable::read(path), ParseError);
}

TEST_CASE("derived seeds are reproducible and decorrelated") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ULL, 1ULL, 42ULL})
    for (std::uint64_t tag = 1; tag <= 6; ++tag)
      for (std::uint64_t idx = 0; idx < 8; ++idx)
        seen.insert(derive_seed(master, tag, idx));
  CHECK(seen.size() == 3 * 6 * 8);  // no collisions across the small grid
}

TEST_CASE("engines from the same stream agree") {
  auto a = make_engine(7, seed_tag::kDropout, 5);
  auto b = make_engine(7, seed_tag::kDropout, 5);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  auto c = make_engine(7, seed_tag::kDropout, 6);
  CHECK(a() != c());
}

TEST_CASE("parallel_chunks covers the range once with fixed boundaries") {
  const std::size_t n = 103, chunk = 10;
  std::vector<std::atomic<int>> hits(n);
  std::vector<std::pair<std::size_t, std::size_t>> bounds(11);
  parallel_chunks(n, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
    bounds[ci] = {b, e};
    for (std::size_t i = b; i < e; ++i) hits[i].fetch_add(1);
  });
  for (std::size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
  for (std::size_t ci = 0; ci < bounds.size(); ++ci) {
    CHECK(bounds[ci].first == ci * chunk);
    CHECK(bounds[ci].second == std::min(n, (ci + 1) * chunk));
  }
}

TEST_CASE("parallel_chunks handles empty and single-chunk inputs") {
  int calls = 0;
  parallel_chunks(0, 8, [&](std::size_t, std::size_t, std::size_t) { ++calls; });
  CHECK(calls == 0);
  parallel_chunks(3, 8, [&](std::size_t ci, std::size_t b, std::size_t e) {
    ++calls;
    CHECK(ci == 0);
    CHECK(b == 0);
    CHECK(e == 3);
  });
  CHECK(calls == 1);
}

TEST_CASE("fnv1a hash is stable") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
  CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
}
