#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "groupcos/errors.hpp"

namespace groupcos {

/// Square table of gold-vs-predicted counts. Labels are the union of the
/// observed gold and predicted labels, in ascending (canonical) order.
class ConfusionMatrix {
 public:
  ConfusionMatrix(const std::vector<int>& golds, const std::vector<int>& preds) {
    if (golds.size() != preds.size()) {
      throw LengthMismatch("confusion: " + std::to_string(golds.size()) + " gold labels vs " +
                           std::to_string(preds.size()) + " predictions");
    }
    if (golds.empty()) throw Error("confusion: need at least one labelled pair");

    std::set<int> observed(golds.begin(), golds.end());
    observed.insert(preds.begin(), preds.end());
    labels_.assign(observed.begin(), observed.end());
    counts_.assign(labels_.size() * labels_.size(), 0);
    for (std::size_t i = 0; i < golds.size(); ++i) {
      ++counts_[index_of(golds[i]) * labels_.size() + index_of(preds[i])];
    }
  }

  const std::vector<int>& labels() const { return labels_; }
  std::size_t total() const { return counts_total(); }

  std::size_t count(int gold, int pred) const {
    return counts_[index_of(gold) * labels_.size() + index_of(pred)];
  }

  /// Number of pairs with this gold label (the class support).
  std::size_t row_sum(int gold) const {
    const std::size_t r = index_of(gold);
    std::size_t sum = 0;
    for (std::size_t c = 0; c < labels_.size(); ++c) sum += counts_[r * labels_.size() + c];
    return sum;
  }

  /// Number of pairs predicted as this label.
  std::size_t col_sum(int pred) const {
    const std::size_t c = index_of(pred);
    std::size_t sum = 0;
    for (std::size_t r = 0; r < labels_.size(); ++r) sum += counts_[r * labels_.size() + c];
    return sum;
  }

  std::size_t diagonal() const {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < labels_.size(); ++i) sum += counts_[i * labels_.size() + i];
    return sum;
  }

 private:
  std::size_t index_of(int label) const {
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) throw Error("confusion: unknown label");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  std::size_t counts_total() const {
    std::size_t sum = 0;
    for (std::size_t c : counts_) sum += c;
    return sum;
  }

  std::vector<int> labels_;
  std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& preds) {
  return ConfusionMatrix(golds, preds);
}

struct ClassMetrics {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// The four evaluation columns plus the per-class breakdown. Zero-denominator
/// convention: a precision, recall, or F1 whose denominator vanishes is 0.
/// Macro values average over classes that appear in the gold labels; micro
/// values coincide with accuracy for single-label prediction.
struct EvalReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t total = 0;
  std::size_t skipped = 0;
};

inline EvalReport evaluate(const ConfusionMatrix& cm, std::size_t skipped = 0) {
  EvalReport report;
  report.total = cm.total();
  report.skipped = skipped;

  double precision_sum = 0.0;
  double recall_sum = 0.0;
  double f1_sum = 0.0;
  std::size_t gold_present = 0;

  for (int label : cm.labels()) {
    ClassMetrics m;
    m.label = label;
    m.support = cm.row_sum(label);
    const std::size_t diag = cm.count(label, label);
    const std::size_t predicted = cm.col_sum(label);
    m.precision = predicted == 0 ? 0.0
                                 : static_cast<double>(diag) / static_cast<double>(predicted);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(m.support);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    if (m.support > 0) {
      precision_sum += m.precision;
      recall_sum += m.recall;
      f1_sum += m.f1;
      ++gold_present;
    }
    report.per_class.push_back(m);
  }

  if (gold_present > 0) {
    report.macro_precision = precision_sum / static_cast<double>(gold_present);
    report.macro_recall = recall_sum / static_cast<double>(gold_present);
    report.macro_f1 = f1_sum / static_cast<double>(gold_present);
  }
  const double trace_ratio = static_cast<double>(cm.diagonal()) / static_cast<double>(cm.total());
  report.accuracy = trace_ratio;
  report.micro_precision = trace_ratio;
  report.micro_recall = trace_ratio;
  report.micro_f1 = trace_ratio;
  return report;
}

namespace detail {

inline std::string fixed4(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", x);
  return buffer;
}

inline std::string full_precision(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

}  // namespace detail

/// Machine-readable report: one row per class, then macro, micro, accuracy
/// and skipped rows.
inline std::string to_tsv(const EvalReport& report) {
  std::string out = "label\tprecision\trecall\tf1\tsupport\n";
  for (const ClassMetrics& m : report.per_class) {
    out += std::to_string(m.label) + '\t' + detail::full_precision(m.precision) + '\t' +
           detail::full_precision(m.recall) + '\t' + detail::full_precision(m.f1) + '\t' +
           std::to_string(m.support) + '\n';
  }
  out += "macro\t" + detail::full_precision(report.macro_precision) + '\t' +
         detail::full_precision(report.macro_recall) + '\t' +
         detail::full_precision(report.macro_f1) + '\t' + std::to_string(report.total) + '\n';
  out += "micro\t" + detail::full_precision(report.micro_precision) + '\t' +
         detail::full_precision(report.micro_recall) + '\t' +
         detail::full_precision(report.micro_f1) + '\t' + std::to_string(report.total) + '\n';
  out += "accuracy\t" + detail::full_precision(report.accuracy) + '\n';
  out += "skipped\t" + std::to_string(report.skipped) + '\n';
  return out;
}

/// Human-readable table with the four headline columns.
inline std::string to_table(const EvalReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %9s\n", "", "Precision", "Recall",
                "F1-score", "Accuracy");
  out += line;
  std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %9s\n", "macro",
                detail::fixed4(report.macro_precision).c_str(),
                detail::fixed4(report.macro_recall).c_str(),
                detail::fixed4(report.macro_f1).c_str(),
                detail::fixed4(report.accuracy).c_str());
  out += line;
  for (const ClassMetrics& m : report.per_class) {
    const std::string name = "class " + std::to_string(m.label);
    std::snprintf(line, sizeof(line), "%-10s %9s %9s %9s %9s\n", name.c_str(),
                  detail::fixed4(m.precision).c_str(), detail::fixed4(m.recall).c_str(),
                  detail::fixed4(m.f1).c_str(), "");
    out += line;
  }
  out += "pairs: " + std::to_string(report.total) + "   skipped: " +
         std::to_string(report.skipped) + '\n';
  return out;
}

}  // namespace groupcos
