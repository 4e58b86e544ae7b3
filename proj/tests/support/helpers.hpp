#pragma once

// Shared fixtures for the test suites: deterministic random data, synthetic
// corpora, independent reference implementations, and a harness for driving
// the command-line tool.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "groupcos/corpus.hpp"
#include "groupcos/linalg.hpp"

namespace testsupport {

inline groupcos::Vector random_vector(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  groupcos::Vector v(d);
  for (double& x : v) x = dist(rng);
  return v;
}

inline groupcos::VectorGroup random_group(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::vector<groupcos::Vector> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_vector(rng, d));
  return groupcos::VectorGroup(std::move(rows));
}

/// Reference for the explicit group-cosine formula: computes
/// sqrt(b A^T (A A^T)^-1 A b^T) / |b| with a plain Gauss-Jordan inverse,
/// sharing no code with the library's pivoted solver.
inline double eq13_reference(const groupcos::Vector& b, const groupcos::VectorGroup& g) {
  const std::size_t n = g.size();
  const std::size_t d = g.dimension();

  // gram = A A^T, augmented with the identity for Gauss-Jordan
  std::vector<std::vector<double>> aug(n, std::vector<double>(2 * n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += g.row(i)[c] * g.row(j)[c];
      aug[i][j] = s;
    }
    aug[i][n + i] = 1.0;
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(aug[r][k]) > std::abs(aug[pivot][k])) pivot = r;
    }
    std::swap(aug[k], aug[pivot]);
    const double p = aug[k][k];
    for (std::size_t c = 0; c < 2 * n; ++c) aug[k][c] /= p;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = aug[r][k];
      for (std::size_t c = 0; c < 2 * n; ++c) aug[r][c] -= f * aug[k][c];
    }
  }

  // t = (b A^T) G^-1 ; squared length = t . (A b^T)
  std::vector<double> b_at(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) b_at[i] += b[c] * g.row(i)[c];
  }
  double squared = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double t_j = 0.0;
    for (std::size_t i = 0; i < n; ++i) t_j += b_at[i] * aug[i][n + j];
    squared += t_j * b_at[j];
  }

  double b_norm_sq = 0.0;
  for (double x : b) b_norm_sq += x * x;
  return std::sqrt(std::max(squared, 0.0)) / std::sqrt(b_norm_sq);
}

/// Self-deleting unique temporary directory.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("groupcos-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string onehot_token(std::size_t i, std::size_t vocab) {
  char token[16];
  std::snprintf(token, sizeof(token), "w%02u", static_cast<unsigned>(i % vocab) % 100u);
  return token;
}

/// One-hot vocabulary: tokens w00..w{V-1} mapped to the standard basis of
/// dimension V, written in the word2vec text format.
inline void write_onehot_embeddings(const std::filesystem::path& path, std::size_t vocab) {
  std::ofstream out(path, std::ios::binary);
  out << vocab << ' ' << vocab << '\n';
  for (std::size_t i = 0; i < vocab; ++i) {
    out << onehot_token(i, vocab);
    for (std::size_t c = 0; c < vocab; ++c) out << ' ' << (c == i ? 1 : 0);
    out << '\n';
  }
}

/// Deterministic paraphrase corpus over the one-hot vocabulary. Classes
/// cycle 1, 0, -1; with one-hot embeddings the projection similarity is
/// exactly 1 (identical token sets), 0.5 (half overlap) or 0 (disjoint).
inline void write_synthetic_pairs(const std::filesystem::path& path, std::size_t count,
                                  std::size_t vocab = 40) {
  std::ofstream out(path, std::ios::binary);
  out << "id\ttext1\ttext2\tclass\n";
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t base = (i * 5) % (vocab - 4);
    const auto t = [&](std::size_t offset) { return onehot_token(base + offset, vocab); };
    std::string text1;
    std::string text2;
    int gold = 0;
    switch (i % 3) {
      case 0:
        text1 = t(0) + " " + t(1) + " " + t(2);
        text2 = text1;
        gold = 1;
        break;
      case 1:
        text1 = t(0) + " " + t(1);
        text2 = t(0) + " " + t(2);
        gold = 0;
        break;
      default:
        text1 = t(0) + " " + t(1);
        text2 = t(2) + " " + t(3);
        gold = -1;
        break;
    }
    out << 'p' << i << '\t' << text1 << '\t' << text2 << '\t' << gold << '\n';
  }
}

/// Scored pairs with proximities planted in three separated bands:
/// class -1 in [0, 0.3), class 0 in [0.4, 0.6), class 1 in [0.8, 1].
/// Sentinels pin the extreme band values so the inter-band candidate
/// midpoints land inside (0.3, 0.4) and (0.6, 0.8).
inline std::vector<groupcos::ScoredPair> banded_scored_pairs(std::size_t count,
                                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<groupcos::ScoredPair> scored;
  scored.reserve(count + 4);

  auto add = [&scored](double mu, int gold) {
    groupcos::ScoredPair entry;
    entry.record.id = "s" + std::to_string(scored.size());
    entry.record.text1 = "x";
    entry.record.text2 = "y";
    entry.record.gold_class = gold;
    entry.proximity = mu;
    scored.push_back(std::move(entry));
  };

  add(0.295, -1);
  add(0.405, 0);
  add(0.595, 0);
  add(0.805, 1);
  for (std::size_t i = scored.size(); i < count; ++i) {
    switch (i % 3) {
      case 0: add(0.295 * unit(rng), -1); break;
      case 1: add(0.4 + 0.195 * unit(rng), 0); break;
      default: add(0.8 + 0.2 * unit(rng), 1); break;
    }
  }
  return scored;
}

#ifdef GROUPCOS_CLI_PATH

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

/// Runs the CLI with the given argument string; captures combined output.
inline CliResult run_cli(const std::string& args) {
  const std::string command = std::string("'") + GROUPCOS_CLI_PATH + "' " + args + " 2>&1";
  CliResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

#endif  // GROUPCOS_CLI_PATH

}  // namespace testsupport
