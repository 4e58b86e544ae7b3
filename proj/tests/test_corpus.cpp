#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "groupcos/corpus.hpp"
#include "support/helpers.hpp"

using namespace groupcos;
using testsupport::TempDir;

namespace {

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::multiset<std::string> id_set(const std::vector<PairRecord>& records) {
  std::multiset<std::string> ids;
  for (const auto& r : records) ids.insert(r.id);
  return ids;
}

}  // namespace

TEST_CASE("load_pairs", "[corpus]") {
  TempDir dir;
  write_text(dir.file("pairs.tsv"),
             "a\tfirst text\tsecond text\t1\n"
             "b\tleft\tright\t0\n"
             "c\tone\tother\t-1\n");
  const auto records = load_pairs(dir.file("pairs.tsv"));
  REQUIRE(records.size() == 3);
  CHECK(records[0].id == "a");
  CHECK(records[0].gold_class == 1);
  CHECK(records[1].gold_class == 0);
  CHECK(records[2].gold_class == -1);
  CHECK(records[2].text2 == "other");
}

TEST_CASE("load_pairs header and blank ids", "[corpus]") {
  TempDir dir;
  write_text(dir.file("pairs.tsv"),
             "id\ttext1\ttext2\tclass\n"
             "\tfoo\tbar\t1\n"
             "x7\tbaz\tqux\t0\n");
  const auto records = load_pairs(dir.file("pairs.tsv"));
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "2");  // line number stands in for the blank id
  CHECK(records[1].id == "x7");
}

TEST_CASE("load_pairs error paths", "[corpus]") {
  TempDir dir;

  write_text(dir.file("bad_class.tsv"),
             "a\tt\tt\t1\nb\tt\tt\t0\nc\tt\tt\t-1\nd\tt\tt\t1\ne\tt\tt\t2\n");
  try {
    load_pairs(dir.file("bad_class.tsv"));
    FAIL("expected InvalidClass");
  } catch (const InvalidClass& e) {
    CHECK(e.line() == 5);
  }

  write_text(dir.file("columns.tsv"), "a\tonly three columns\t1\n");
  CHECK_THROWS_AS(load_pairs(dir.file("columns.tsv")), ParseError);

  write_text(dir.file("nonint.tsv"), "a\tt\tt\t1\nb\tt\tt\tmaybe\n");
  CHECK_THROWS_AS(load_pairs(dir.file("nonint.tsv")), ParseError);

  write_text(dir.file("empty_text.tsv"), "a\t\tt\t1\n");
  CHECK_THROWS_AS(load_pairs(dir.file("empty_text.tsv")), ParseError);

  CHECK_THROWS_AS(load_pairs(dir.file("nope.tsv")), IoError);
}

TEST_CASE("split determinism and partition", "[corpus]") {
  std::vector<PairRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back({"r" + std::to_string(i), "a", "b", i % 3 - 1});
  }

  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 42;
  const auto [train1, test1] = split(records, spec);
  CHECK(train1.size() == 7);
  CHECK(test1.size() == 3);

  const auto [train2, test2] = split(records, spec);
  CHECK(id_set(train1) == id_set(train2));
  CHECK(id_set(test1) == id_set(test2));
  for (std::size_t i = 0; i < train1.size(); ++i) CHECK(train1[i].id == train2[i].id);

  // partition: together they are exactly the input records
  std::multiset<std::string> all = id_set(train1);
  for (const auto& r : test1) all.insert(r.id);
  CHECK(all == id_set(records));

  SplitSpec other_seed{0.7, 43};
  const auto [train3, test3] = split(records, other_seed);
  CHECK(id_set(train1) != id_set(train3));  // different seed, different draw
}

TEST_CASE("split at the paper's corpus size", "[corpus]") {
  std::vector<PairRecord> records;
  for (int i = 0; i < 1913; ++i) {
    records.push_back({std::to_string(i), "a", "b", i % 3 - 1});
  }
  const auto [train, test] = split(records, SplitSpec{0.7, 42});
  CHECK(train.size() == 1339);
  CHECK(test.size() == 574);
}

TEST_CASE("split rejects bad inputs", "[corpus]") {
  std::vector<PairRecord> one = {{"a", "x", "y", 1}};
  CHECK_THROWS_AS(split(one, SplitSpec{0.7, 1}), TooFewRecords);
  std::vector<PairRecord> two = {{"a", "x", "y", 1}, {"b", "x", "y", 0}};
  CHECK_THROWS_AS(split(two, SplitSpec{0.0, 1}), Error);
  CHECK_THROWS_AS(split(two, SplitSpec{1.0, 1}), Error);
}

TEST_CASE("split partition holds across seeds and fractions", "[corpus]") {
  std::vector<PairRecord> records;
  for (int i = 0; i < 57; ++i) {
    records.push_back({std::to_string(i), "a", "b", 1});
  }
  for (double fraction : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (std::uint64_t seed : {0ULL, 1ULL, 999ULL}) {
      const auto [train, test] = split(records, SplitSpec{fraction, seed});
      CHECK(train.size() + test.size() == records.size());
      std::multiset<std::string> all = id_set(train);
      for (const auto& r : test) all.insert(r.id);
      CHECK(all == id_set(records));
    }
  }
}

TEST_CASE("score_pairs", "[corpus]") {
  TempDir dir;
  write_text(dir.file("emb.txt"), "4 4\naa 1 0 0 0\nbb 0 1 0 0\ncc 0 0 1 0\ndd 0 0 0 1\n");
  const EmbeddingTable table = load_embeddings(dir.file("emb.txt"));

  std::vector<PairRecord> records = {
      {"same", "aa bb", "aa bb", 1},
      {"orthogonal", "aa bb", "cc dd", -1},
      {"oov", "zz yy", "aa bb", 0},
  };
  const auto scored = score_pairs(records, table);
  REQUIRE(scored.size() == 3);

  REQUIRE(scored[0].proximity.has_value());
  CHECK(*scored[0].proximity == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(scored[1].proximity.has_value());
  CHECK(*scored[1].proximity == 0.0);
  CHECK(scored[2].skipped());
  CHECK(scored[2].skip_reason.find("text1") != std::string::npos);

  // order preserved, skipped + scored = total
  CHECK(scored[0].record.id == "same");
  CHECK(scored[2].record.id == "oov");
  std::size_t skipped = 0;
  for (const auto& s : scored) skipped += s.skipped() ? 1 : 0;
  CHECK(skipped == 1);
}

TEST_CASE("score_pairs proximity stays in [0,1]", "[corpus]") {
  TempDir dir;
  write_text(dir.file("emb.txt"), "2 2\npos 1 0\nneg -1 0\n");
  const EmbeddingTable table = load_embeddings(dir.file("emb.txt"));
  std::vector<PairRecord> records = {{"anti", "pos", "neg", -1}};

  ScoreOptions options;
  options.measure = Measure::pairwise_mean;
  const auto scored = score_pairs(records, table, options);
  REQUIRE(scored[0].proximity.has_value());
  // raw pairwise cosine is -1; the pipeline clamps into the [0,1] domain
  CHECK(*scored[0].proximity == 0.0);

  options.measure = Measure::projection_sim;
  const auto proj_scored = score_pairs(records, table, options);
  CHECK(*proj_scored[0].proximity == 1.0);  // same span either way
}

TEST_CASE("loaders survive malformed bytes", "[corpus]") {
  TempDir dir;
  std::mt19937_64 rng(91);
  const std::string alphabet = "abc\t\t\n\n 01-\xD0\xBA\xFF=.";
  std::uniform_int_distribution<std::size_t> len(0, 200);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);

  for (int trial = 0; trial < 200; ++trial) {
    std::string junk;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) junk += alphabet[pick(rng)];
    write_text(dir.file("junk.bin"), junk);

    // anything may be rejected, but only with this library's error types
    try {
      load_pairs(dir.file("junk.bin"));
    } catch (const Error&) {
    }
    try {
      load_embeddings(dir.file("junk.bin"));
    } catch (const Error&) {
    }
  }
  SUCCEED("no crash on malformed input");
}

TEST_CASE("save_scores format", "[corpus]") {
  std::vector<ScoredPair> scored(2);
  scored[0].record = {"a", "x", "y", 1};
  scored[0].proximity = 0.5;
  scored[1].record = {"b", "x", "y", -1};
  scored[1].skip_reason = "text2: empty";

  std::ostringstream out;
  save_scores(scored, out);
  CHECK(out.str() ==
        "id\tproximity\tgold_class\tskipped_reason\n"
        "a\t0.5\t1\t\n"
        "b\t\t-1\ttext2: empty\n");
}
