#pragma once

#include <zlib.h>

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "groupcos/linalg.hpp"

namespace groupcos {

namespace detail {

/// Line-oriented reader over a plain or gzip-compressed file; zlib reads
/// uncompressed input transparently.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) {
    file_ = gzopen(path.string().c_str(), "rb");
    if (file_ == nullptr) throw IoError("cannot open " + path.string());
  }
  ~LineReader() {
    if (file_ != nullptr) gzclose(file_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  /// Reads the next line without its terminator; strips a trailing CR.
  /// Returns false at end of input.
  bool getline(std::string& out) {
    out.clear();
    char buffer[1 << 16];
    bool got_any = false;
    while (true) {
      if (gzgets(file_, buffer, sizeof(buffer)) == nullptr) break;
      got_any = true;
      std::string_view chunk(buffer);
      if (!chunk.empty() && chunk.back() == '\n') {
        out.append(chunk.substr(0, chunk.size() - 1));
        break;
      }
      out.append(chunk);
    }
    if (got_any && !out.empty() && out.back() == '\r') out.pop_back();
    return got_any;
  }

 private:
  gzFile file_ = nullptr;
};

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start < line.size()) {
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
    if (start >= line.size()) break;
    std::size_t end = start;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    fields.push_back(line.substr(start, end - start));
    start = end;
  }
  return fields;
}

inline bool parse_double(std::string_view field, double& out) {
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

inline bool parse_size(std::string_view field, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return std::string(buffer, ptr);
}

// --- minimal UTF-8 handling for tokenization ---

/// Decodes the codepoint at `pos`, advancing it. Malformed or truncated
/// sequences yield U+FFFD and advance one byte.
inline char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const unsigned char lead = static_cast<unsigned char>(text[pos]);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char c = static_cast<unsigned char>(text[pos + i]);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += 1 + extra;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Lowercase mapping for ASCII, Latin-1, Greek and Cyrillic; other scripts
/// pass through unchanged.
inline char32_t fold_case(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;    // Latin-1
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20; // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;                // Cyrillic А..Я
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;                // Cyrillic Ѐ..Џ (incl. Ё)
  return cp;
}

/// Token characters are letters and digits; everything else separates.
inline bool is_word_char(char32_t cp) {
  if ((cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) {
    return true;
  }
  if (cp < 0x80) return false;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;  // Latin-1 + extended
  if (cp >= 0x386 && cp <= 0x3FF) return cp != 0x387;              // Greek
  if (cp >= 0x400 && cp <= 0x52F) return true;                     // Cyrillic + supplement
  if (cp >= 0x531 && cp <= 0x58F) return true;                     // Armenian
  if (cp >= 0x5D0 && cp <= 0x5F2) return true;                     // Hebrew
  if (cp >= 0x620 && cp <= 0x64A) return true;                     // Arabic
  if (cp >= 0x3040 && cp <= 0x30FF) return cp != 0x3099 && cp != 0x309A && cp != 0x30FB; // kana
  if (cp >= 0x4E00 && cp <= 0x9FFF) return true;                   // CJK unified
  return false;
}

}  // namespace detail

/// Immutable token -> vector table. Entries keep file order so a table
/// written back out reloads bit-for-bit.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dimension, std::vector<std::pair<std::string, Vector>> entries,
                 std::size_t duplicates_skipped = 0)
      : dimension_(dimension), entries_(std::move(entries)),
        duplicates_skipped_(duplicates_skipped) {
    if (dimension_ == 0) throw Error("EmbeddingTable: dimension must be >= 1");
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& [token, vec] = entries_[i];
      if (token.empty()) throw Error("EmbeddingTable: empty token");
      if (vec.size() != dimension_) {
        throw DimensionMismatch("EmbeddingTable: entry '" + token + "' has dimension " +
                                std::to_string(vec.size()) + ", expected " +
                                std::to_string(dimension_));
      }
      for (double x : vec) {
        if (!std::isfinite(x)) throw Error("EmbeddingTable: entry '" + token + "' is non-finite");
      }
      if (!index_.emplace(token, i).second) {
        throw Error("EmbeddingTable: duplicate token '" + token + "'");
      }
    }
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t duplicates_skipped() const { return duplicates_skipped_; }
  const std::vector<std::pair<std::string, Vector>>& entries() const { return entries_; }

  const Vector* find(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }

 private:
  std::size_t dimension_;
  std::vector<std::pair<std::string, Vector>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t duplicates_skipped_ = 0;
};

/// Loads a word2vec-style text table: a "V d" header line, then one token
/// and d decimal numbers per line, space-separated UTF-8. Files ending in
/// ".gz" are decompressed on the fly. The first occurrence of a duplicated
/// token wins; later ones are counted and skipped.
inline EmbeddingTable load_embeddings(const std::filesystem::path& path,
                                      std::optional<std::size_t> limit = std::nullopt) {
  detail::LineReader reader(path);
  std::string line;
  std::size_t line_no = 1;
  if (!reader.getline(line)) throw ParseError(1, "missing header line");

  const auto header = detail::split_fields(line);
  std::size_t declared_count = 0;
  std::size_t dimension = 0;
  if (header.size() != 2 || !detail::parse_size(header[0], declared_count) ||
      !detail::parse_size(header[1], dimension) || dimension == 0) {
    throw ParseError(1, "expected header \"<vocabulary> <dimension>\"");
  }

  std::vector<std::pair<std::string, Vector>> entries;
  // reservation hint only; the header count is untrusted
  entries.reserve(std::min({declared_count, limit.value_or(declared_count),
                            static_cast<std::size_t>(1) << 20}));
  std::unordered_set<std::string> seen;
  std::size_t duplicates = 0;

  while (reader.getline(line)) {
    ++line_no;
    if (limit && entries.size() >= *limit) break;
    const auto fields = detail::split_fields(line);
    if (fields.size() != dimension + 1) {
      throw ParseError(line_no, "expected 1 token and " + std::to_string(dimension) +
                                    " numbers, found " + std::to_string(fields.size()) +
                                    " fields");
    }
    std::string token(fields[0]);
    Vector vec(dimension);
    for (std::size_t i = 0; i < dimension; ++i) {
      if (!detail::parse_double(fields[i + 1], vec[i]) || !std::isfinite(vec[i])) {
        throw ParseError(line_no, "unparseable number \"" + std::string(fields[i + 1]) + "\"");
      }
    }
    if (!seen.insert(token).second) {
      ++duplicates;
      continue;
    }
    entries.emplace_back(std::move(token), std::move(vec));
  }

  if (entries.empty()) throw EmptyTable("no embedding entries in " + path.string());
  return EmbeddingTable(dimension, std::move(entries), duplicates);
}

/// Writes a table in the same text format load_embeddings reads. Numbers use
/// the shortest round-tripping representation, so reload is bit-exact.
inline void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << table.size() << ' ' << table.dimension() << '\n';
  for (const auto& [token, vec] : table.entries()) {
    out << token;
    for (double x : vec) out << ' ' << detail::format_double(x);
    out << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

/// Splits UTF-8 text into lowercase tokens on whitespace and punctuation.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = detail::decode_utf8(text, pos);
    if (detail::is_word_char(cp)) {
      detail::append_utf8(current, detail::fold_case(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// One sentence as a vector group plus the bookkeeping of which tokens
/// matched the table and which were out of vocabulary.
struct SentenceVectors {
  VectorGroup group;
  std::vector<std::string> matched_tokens;
  std::vector<std::string> missing_tokens;
};

/// Looks every token up in the table. Missing tokens are recorded, never
/// zero-filled. With dedup on, a repeated token contributes one row; the
/// projection measure is basis-invariant so this cannot change its value.
/// Throws EmptySentenceGroup when no token matches.
inline SentenceVectors sentence_to_group(const std::vector<std::string>& tokens,
                                         const EmbeddingTable& table, bool dedup = false) {
  std::vector<Vector> rows;
  std::vector<std::string> matched;
  std::vector<std::string> missing;
  std::unordered_set<std::string> seen;
  for (const std::string& token : tokens) {
    if (dedup && !seen.insert(token).second) continue;
    if (const Vector* vec = table.find(token)) {
      rows.push_back(*vec);
      matched.push_back(token);
    } else {
      missing.push_back(token);
    }
  }
  if (rows.empty()) {
    std::string what = "no token found in the embedding table; missing:";
    for (const std::string& token : missing) what += " " + token;
    throw EmptySentenceGroup(what);
  }
  return SentenceVectors{VectorGroup(std::move(rows)), std::move(matched), std::move(missing)};
}

}  // namespace groupcos
