#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "groupcos/corpus.hpp"
#include "groupcos/errors.hpp"
#include "groupcos/version.hpp"

namespace groupcos {

/// three_class keeps {-1, 0, 1}; the two-class modes merge a neighbouring
/// pair: merge_low folds 0 into -1 (its single bound is the upper one),
/// merge_high folds 0 into 1 (its single bound is the lower one).
enum class ClassifierMode { three_class, two_class_merge_low, two_class_merge_high };

inline const char* mode_name(ClassifierMode mode) {
  switch (mode) {
    case ClassifierMode::three_class: return "three_class";
    case ClassifierMode::two_class_merge_low: return "two_class_merge_low";
    case ClassifierMode::two_class_merge_high: return "two_class_merge_high";
  }
  return "?";
}

inline ClassifierMode mode_from_name(std::string_view name) {
  if (name == "three_class") return ClassifierMode::three_class;
  if (name == "two_class_merge_low") return ClassifierMode::two_class_merge_low;
  if (name == "two_class_merge_high") return ClassifierMode::two_class_merge_high;
  throw Error("unknown classifier mode \"" + std::string(name) + "\"");
}

/// Clipping constants of the threshold classifier. Proximity at or above the
/// upper bound is class 1, below the lower bound class -1, class 0 between;
/// boundary points go to the higher class.
struct ThresholdModel {
  ClassifierMode mode = ClassifierMode::three_class;
  std::optional<double> lower_a;
  std::optional<double> upper_b;

  void validate() const {
    const auto in_range = [](double x) { return x >= 0.0 && x <= 1.0; };
    switch (mode) {
      case ClassifierMode::three_class:
        if (!lower_a || !upper_b) throw Error("three_class model needs both bounds");
        if (!in_range(*lower_a) || !in_range(*upper_b)) {
          throw Error("bounds must lie in [0, 1]");
        }
        if (*lower_a > *upper_b) throw Error("lower bound exceeds upper bound");
        break;
      case ClassifierMode::two_class_merge_low:
        if (!upper_b || lower_a) throw Error("two_class_merge_low uses exactly the upper bound");
        if (!in_range(*upper_b)) throw Error("bounds must lie in [0, 1]");
        break;
      case ClassifierMode::two_class_merge_high:
        if (!lower_a || upper_b) throw Error("two_class_merge_high uses exactly the lower bound");
        if (!in_range(*lower_a)) throw Error("bounds must lie in [0, 1]");
        break;
    }
  }
};

/// Maps a gold label into the label set of the mode.
inline int merge_gold(int gold, ClassifierMode mode) {
  if (gold != -1 && gold != 0 && gold != 1) {
    throw InvalidClass("gold class " + std::to_string(gold) + " is outside {-1, 0, 1}");
  }
  if (gold == 0) {
    if (mode == ClassifierMode::two_class_merge_low) return -1;
    if (mode == ClassifierMode::two_class_merge_high) return 1;
  }
  return gold;
}

inline int predict(double mu, const ThresholdModel& model) {
  model.validate();
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw InvalidProximity("proximity " + std::to_string(mu) + " is outside [0, 1]");
  }
  switch (model.mode) {
    case ClassifierMode::three_class:
      if (mu >= *model.upper_b) return 1;
      if (mu >= *model.lower_a) return 0;
      return -1;
    case ClassifierMode::two_class_merge_low:
      return mu >= *model.upper_b ? 1 : -1;
    case ClassifierMode::two_class_merge_high:
      return mu >= *model.lower_a ? 1 : -1;
  }
  return -1;
}

/// What the grid search maximizes. Macro precision is the default; ties are
/// broken by higher macro recall, then lower upper bound, then lower lower
/// bound, all defined on candidate values so the result does not depend on
/// evaluation order.
enum class TrainObjective { macro_precision, accuracy };

inline const char* objective_name(TrainObjective objective) {
  return objective == TrainObjective::macro_precision ? "macro_precision" : "accuracy";
}

inline TrainObjective objective_from_name(std::string_view name) {
  if (name == "macro_precision") return TrainObjective::macro_precision;
  if (name == "accuracy") return TrainObjective::accuracy;
  throw Error("unknown training objective \"" + std::string(name) + "\"");
}

struct TrainReport {
  ClassifierMode mode = ClassifierMode::three_class;
  TrainObjective objective = TrainObjective::macro_precision;
  std::optional<double> lower_a;
  std::optional<double> upper_b;
  double objective_value = 0.0;   ///< on the training pairs
  double macro_recall = 0.0;      ///< at the chosen candidate
  std::size_t grid_size = 0;      ///< candidate models examined
  std::size_t train_pairs = 0;    ///< non-skipped pairs used
  std::size_t ties = 0;           ///< candidates sharing the best objective
  std::string tie_break;          ///< how the winner was selected
};

namespace detail {

/// Candidate thresholds: midpoints between consecutive distinct sorted
/// proximities, plus 0 and 1. Exact for piecewise-constant objectives.
inline std::vector<double> threshold_candidates(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> candidates;
  candidates.push_back(0.0);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    candidates.push_back((values[i] + values[i + 1]) / 2.0);
  }
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  return candidates;
}

/// Gold-class counts split by a candidate interval assignment. For k labels,
/// entry [i][c] counts class-c points predicted as label index i.
struct GridScore {
  double objective_value = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double accuracy = 0.0;
};

/// Precision/recall/accuracy of an interval assignment. rows[g][p] counts
/// gold-class-index g predicted as class index p; every gold class is
/// guaranteed present, so the macro mean runs over all of them, matching
/// evaluate() on the same counts.
template <std::size_t K>
inline GridScore score_counts(const std::array<std::array<std::size_t, K>, K>& rows,
                              std::size_t total, TrainObjective objective) {
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  std::size_t diag_total = 0;
  for (std::size_t c = 0; c < K; ++c) {
    std::size_t col = 0;
    std::size_t row = 0;
    for (std::size_t g = 0; g < K; ++g) {
      col += rows[g][c];
      row += rows[c][g];
    }
    const std::size_t diag = rows[c][c];
    diag_total += diag;
    precision_sum += col == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(col);
    recall_sum += row == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(row);
  }
  GridScore score;
  score.macro_precision = precision_sum / static_cast<double>(K);
  score.macro_recall = recall_sum / static_cast<double>(K);
  score.accuracy = static_cast<double>(diag_total) / static_cast<double>(total);
  score.objective_value =
      objective == TrainObjective::macro_precision ? score.macro_precision : score.accuracy;
  return score;
}

}  // namespace detail

/// Exhaustive grid search for the clipping constants on scored training
/// pairs. Skipped pairs are ignored; every class of the mode must be present
/// among the remaining gold labels or DegenerateTraining is thrown.
inline std::pair<ThresholdModel, TrainReport> train(
    const std::vector<ScoredPair>& scored, ClassifierMode mode,
    TrainObjective objective = TrainObjective::macro_precision) {
  // gather usable points with merged gold labels
  std::vector<std::pair<double, int>> points;
  points.reserve(scored.size());
  for (const ScoredPair& entry : scored) {
    if (entry.skipped()) continue;
    points.emplace_back(*entry.proximity, merge_gold(entry.record.gold_class, mode));
  }
  if (points.empty()) throw DegenerateTraining("no scored training pairs");

  const bool three = mode == ClassifierMode::three_class;
  const std::vector<int> classes = three ? std::vector<int>{-1, 0, 1} : std::vector<int>{-1, 1};
  for (int cls : classes) {
    const bool present = std::any_of(points.begin(), points.end(),
                                     [cls](const auto& p) { return p.second == cls; });
    if (!present) {
      throw DegenerateTraining("gold class " + std::to_string(cls) +
                               " is absent from the training data");
    }
  }

  std::sort(points.begin(), points.end());
  std::vector<double> values;
  values.reserve(points.size());
  for (const auto& p : points) values.push_back(p.first);
  const std::vector<double> candidates = detail::threshold_candidates(std::move(values));

  // below[k][c]: points of class index c with proximity strictly below
  // candidates[k]
  const std::size_t k_count = candidates.size();
  const std::size_t class_count = classes.size();
  auto class_index = [&](int cls) { return cls == -1 ? 0u : (cls == 0 ? 1u : class_count - 1); };
  std::vector<std::array<std::size_t, 3>> below(k_count, {0, 0, 0});
  std::array<std::size_t, 3> running{0, 0, 0};
  std::array<std::size_t, 3> totals{0, 0, 0};
  {
    std::size_t ptr = 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      while (ptr < points.size() && points[ptr].first < candidates[k]) {
        ++running[class_index(points[ptr].second)];
        ++ptr;
      }
      below[k] = running;
    }
    for (const auto& p : points) ++totals[class_index(p.second)];
  }

  struct Candidate {
    detail::GridScore score;
    double upper = 0.0;
    double lower = 0.0;
  };
  std::optional<Candidate> best;
  std::size_t ties = 0;
  std::size_t grid_size = 0;

  // lexicographic maximum of (objective, macro recall, -upper, -lower);
  // defined on values only, so any evaluation order picks the same winner
  auto consider = [&](const Candidate& candidate) {
    ++grid_size;
    if (!best) {
      best = candidate;
      ties = 1;
      return;
    }
    if (candidate.score.objective_value > best->score.objective_value) {
      ties = 1;
    } else if (candidate.score.objective_value == best->score.objective_value) {
      ++ties;
    }
    const auto key = [](const Candidate& c) {
      return std::array<double, 4>{c.score.objective_value, c.score.macro_recall, -c.upper,
                                   -c.lower};
    };
    if (key(candidate) > key(*best)) best = candidate;
  };

  if (three) {
    for (std::size_t ai = 0; ai < k_count; ++ai) {
      for (std::size_t bi = ai; bi < k_count; ++bi) {
        std::array<std::array<std::size_t, 3>, 3> rows{};
        for (std::size_t c = 0; c < 3; ++c) {
          rows[c][0] = below[ai][c];
          rows[c][1] = below[bi][c] - below[ai][c];
          rows[c][2] = totals[c] - below[bi][c];
        }
        Candidate candidate;
        candidate.score = detail::score_counts<3>(rows, points.size(), objective);
        candidate.lower = candidates[ai];
        candidate.upper = candidates[bi];
        consider(candidate);
      }
    }
  } else {
    for (std::size_t ti = 0; ti < k_count; ++ti) {
      std::array<std::array<std::size_t, 2>, 2> rows{};
      for (std::size_t c = 0; c < 2; ++c) {
        rows[c][0] = below[ti][c];
        rows[c][1] = totals[c] - below[ti][c];
      }
      Candidate candidate;
      candidate.score = detail::score_counts<2>(rows, points.size(), objective);
      if (mode == ClassifierMode::two_class_merge_low) {
        candidate.upper = candidates[ti];
      } else {
        candidate.lower = candidates[ti];
      }
      consider(candidate);
    }
  }

  ThresholdModel model;
  model.mode = mode;
  if (three) {
    model.lower_a = best->lower;
    model.upper_b = best->upper;
  } else if (mode == ClassifierMode::two_class_merge_low) {
    model.upper_b = best->upper;
  } else {
    model.lower_a = best->lower;
  }
  model.validate();

  TrainReport report;
  report.mode = mode;
  report.objective = objective;
  report.lower_a = model.lower_a;
  report.upper_b = model.upper_b;
  report.objective_value = best->score.objective_value;
  report.macro_recall = best->score.macro_recall;
  report.grid_size = grid_size;
  report.train_pairs = points.size();
  report.ties = ties;
  report.tie_break =
      ties <= 1 ? "unique optimum"
                : std::to_string(ties) + " candidates tied on the objective; chose the highest "
                                         "macro recall, then the lowest upper bound, then the "
                                         "lowest lower bound";
  return {model, report};
}

namespace detail {

inline std::string bound_field(const std::optional<double>& bound) {
  return bound ? format_double(*bound) : "--";
}

}  // namespace detail

/// All fields of a persisted model file.
struct ModelFile {
  ThresholdModel model;
  std::string objective;
  double objective_value = 0.0;
  std::size_t grid_size = 0;
  std::string version;
};

/// Writes the model as exact key=value lines: mode, a, b, objective,
/// objective_value, grid_size, version. Unused bounds are written as "--".
inline void save_model(const ThresholdModel& model, const TrainReport& report,
                       const std::filesystem::path& path) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "mode=" << mode_name(model.mode) << '\n';
  out << "a=" << detail::bound_field(model.lower_a) << '\n';
  out << "b=" << detail::bound_field(model.upper_b) << '\n';
  out << "objective=" << objective_name(report.objective) << '\n';
  out << "objective_value=" << detail::format_double(report.objective_value) << '\n';
  out << "grid_size=" << report.grid_size << '\n';
  out << "version=" << kVersion << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

inline ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  ModelFile file;
  std::optional<std::string> mode_value;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    auto parse_bound = [&](std::optional<double>& out_bound) {
      if (value == "--") return;
      double x = 0.0;
      if (!detail::parse_double(value, x)) throw ParseError(line_no, "bad bound \"" + value + "\"");
      out_bound = x;
    };

    if (key == "mode") {
      mode_value = value;
    } else if (key == "a") {
      parse_bound(file.model.lower_a);
    } else if (key == "b") {
      parse_bound(file.model.upper_b);
    } else if (key == "objective") {
      file.objective = value;
    } else if (key == "objective_value") {
      if (!detail::parse_double(value, file.objective_value)) {
        throw ParseError(line_no, "bad objective_value \"" + value + "\"");
      }
    } else if (key == "grid_size") {
      if (!detail::parse_size(value, file.grid_size)) {
        throw ParseError(line_no, "bad grid_size \"" + value + "\"");
      }
    } else if (key == "version") {
      file.version = value;
    } else {
      throw ParseError(line_no, "unknown key \"" + key + "\"");
    }
  }
  if (!mode_value) throw ParseError(line_no, "missing mode line");
  file.model.mode = mode_from_name(*mode_value);
  file.model.validate();
  return file;
}

}  // namespace groupcos
