#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "groupcos/embeddings.hpp"
#include "groupcos/groupsim.hpp"

namespace groupcos {

/// One corpus row: a pair of texts with a gold paraphrase class.
/// Classes: 1 = paraphrase, 0 = not sure, -1 = not paraphrase.
struct PairRecord {
  std::string id;
  std::string text1;
  std::string text2;
  int gold_class = 0;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline bool parse_int(std::string_view field, int& out) {
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace detail

/// Loads a 4-column TSV (id, text1, text2, class) in UTF-8. A first line
/// whose class field is not an integer is treated as a header and skipped.
/// Blank ids are replaced by the 1-based line number.
inline std::vector<PairRecord> load_pairs(const std::filesystem::path& path) {
  detail::LineReader reader(path);
  std::vector<PairRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (reader.getline(line)) {
    ++line_no;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 4) {
      throw ParseError(line_no, "expected 4 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    int gold = 0;
    if (!detail::parse_int(fields[3], gold)) {
      if (line_no == 1) continue;  // header row
      throw ParseError(line_no, "class field \"" + std::string(fields[3]) + "\" is not an integer");
    }
    if (gold != -1 && gold != 0 && gold != 1) {
      throw InvalidClass(line_no, "class " + std::to_string(gold) + " is outside {-1, 0, 1}");
    }
    if (fields[1].empty() || fields[2].empty()) {
      throw ParseError(line_no, "empty text column");
    }
    PairRecord record;
    record.id = fields[0].empty() ? std::to_string(line_no) : std::string(fields[0]);
    record.text1 = std::string(fields[1]);
    record.text2 = std::string(fields[2]);
    record.gold_class = gold;
    records.push_back(std::move(record));
  }
  return records;
}

/// Train/test split parameters. The same spec always produces the same
/// partition.
struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
};

namespace detail {

/// 64-bit linear congruential generator with Knuth's MMIX constants
/// (a = 6364136223846793005, c = 1442695040888963407, modulus 2^64).
/// bounded(k) maps the next state to [0, k) by taking the high 64 bits of
/// the 128-bit product state * k, so shuffles reproduce across
/// implementations.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }

  std::size_t bounded(std::size_t k) {
    // portable multiply-high via 32-bit limbs
    const std::uint64_t x = next();
    const std::uint64_t x_lo = x & 0xffffffffULL;
    const std::uint64_t x_hi = x >> 32;
    const std::uint64_t k_lo = static_cast<std::uint64_t>(k) & 0xffffffffULL;
    const std::uint64_t k_hi = static_cast<std::uint64_t>(k) >> 32;
    const std::uint64_t lo_lo = x_lo * k_lo;
    const std::uint64_t hi_lo = x_hi * k_lo;
    const std::uint64_t lo_hi = x_lo * k_hi;
    const std::uint64_t hi_hi = x_hi * k_hi;
    const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xffffffffULL) + lo_hi;
    return static_cast<std::size_t>(hi_hi + (hi_lo >> 32) + (cross >> 32));
  }

 private:
  std::uint64_t state_;
};

}  // namespace detail

/// Seeded Fisher-Yates shuffle, then a prefix split at
/// round(train_fraction * N). Returns {train, test}; together they are a
/// permutation of the input.
inline std::pair<std::vector<PairRecord>, std::vector<PairRecord>> split(
    const std::vector<PairRecord>& records, const SplitSpec& spec) {
  if (records.size() < 2) {
    throw TooFewRecords("split: need at least 2 records, have " +
                        std::to_string(records.size()));
  }
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error("split: train_fraction must lie in (0, 1)");
  }

  std::vector<PairRecord> shuffled = records;
  detail::SplitRng rng(spec.seed);
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
    const std::size_t j = rng.bounded(i + 1);
    std::swap(shuffled[i], shuffled[j]);
  }

  const auto train_count = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(shuffled.size())));
  std::vector<PairRecord> train(shuffled.begin(), shuffled.begin() + train_count);
  std::vector<PairRecord> test(shuffled.begin() + train_count, shuffled.end());
  return {std::move(train), std::move(test)};
}

/// Which similarity measure scores a pair of sentences.
enum class Measure { projection_sim, pairwise_mean };

struct ScoreOptions {
  Measure measure = Measure::projection_sim;
  bool dedup = false;
  double tolerance = kDefaultTolerance;
  SimCombine combine = SimCombine::mean;
  ProjectionPath path = ProjectionPath::basis;
};

/// A record with its proximity, or the reason it could not be scored.
/// proximity is present iff the pair was not skipped.
struct ScoredPair {
  PairRecord record;
  std::optional<double> proximity;
  std::string skip_reason;

  bool skipped() const { return !proximity.has_value(); }
};

/// Scores every record with the chosen measure, in input order. Pairs whose
/// sides cannot be embedded (fully out of vocabulary, or containing a zero
/// embedding) are marked skipped instead of failing the batch. The pairwise
/// mean lies in [-1, 1]; negative values are clamped to 0 so every proximity
/// shares the [0, 1] domain the threshold classifier operates on.
inline std::vector<ScoredPair> score_pairs(const std::vector<PairRecord>& records,
                                           const EmbeddingTable& table,
                                           const ScoreOptions& options = {}) {
  std::vector<ScoredPair> scored;
  scored.reserve(records.size());
  for (const PairRecord& record : records) {
    ScoredPair entry;
    entry.record = record;

    auto embed = [&](const std::string& text, const char* side) -> std::optional<VectorGroup> {
      try {
        return sentence_to_group(tokenize(text), table, options.dedup).group;
      } catch (const EmptySentenceGroup& e) {
        entry.skip_reason = std::string(side) + ": " + e.what();
        return std::nullopt;
      }
    };

    const std::optional<VectorGroup> group1 = embed(record.text1, "text1");
    const std::optional<VectorGroup> group2 =
        group1 ? embed(record.text2, "text2") : std::nullopt;
    if (group1 && group2) {
      try {
        double value = 0.0;
        if (options.measure == Measure::projection_sim) {
          SimOptions sim_options;
          sim_options.tolerance = options.tolerance;
          sim_options.combine = options.combine;
          sim_options.path = options.path;
          value = sim_symmetric(*group1, *group2, sim_options).value;
        } else {
          value = pairwise_mean_cosine(*group1, *group2);
        }
        entry.proximity = std::clamp(value, 0.0, 1.0);
      } catch (const ZeroVector& e) {
        entry.skip_reason = std::string("zero embedding vector: ") + e.what();
      }
    }
    scored.push_back(std::move(entry));
  }
  return scored;
}

/// Writes scores as TSV: id, proximity, gold_class, skipped_reason. The
/// proximity column is empty for skipped pairs.
inline void save_scores(const std::vector<ScoredPair>& scored, std::ostream& out) {
  out << "id\tproximity\tgold_class\tskipped_reason\n";
  for (const ScoredPair& entry : scored) {
    out << entry.record.id << '\t';
    if (entry.proximity) out << detail::format_double(*entry.proximity);
    out << '\t' << entry.record.gold_class << '\t' << entry.skip_reason << '\n';
  }
}

inline void save_scores(const std::vector<ScoredPair>& scored,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_scores(scored, out);
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace groupcos
