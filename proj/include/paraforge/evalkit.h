#ifndef PARAFORGE_EVALKIT_H_
#define PARAFORGE_EVALKIT_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paraforge/corpus.h"
#include "paraforge/nlu.h"

namespace paraforge {

// Gold x predicted counts over a sorted label index.
class ConfusionTable {
 public:
  // Labels are the sorted union of gold and predicted labels.
  static ConfusionTable from_pairs(const std::vector<std::string>& gold,
                                   const std::vector<std::string>& predicted);

  const std::vector<std::string>& labels() const { return labels_; }
  std::uint64_t count(std::size_t gold, std::size_t predicted) const {
    return counts_[gold * labels_.size() + predicted];
  }
  std::uint64_t total() const { return total_; }

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct LabelMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;  // gold occurrences

  bool operator==(const LabelMetrics&) const = default;
};

struct EvalReport {
  double micro_score = 0.0;  // accuracy
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<LabelMetrics> per_intent;  // labels present in the gold set
  std::uint64_t samples = 0;

  bool operator==(const EvalReport&) const = default;
};

// Precision/recall are 0 when their denominator is 0, F1 is 0 when p + r
// is 0, and macro averages run over gold labels in sorted order.
EvalReport report_from_confusion(const ConfusionTable& table);

// Throws Error(kStructural) on empty or mismatched inputs.
EvalReport evaluate_predictions(const std::vector<std::string>& gold,
                                const std::vector<std::string>& predicted);

// Throws Error(kCoverage) listing test intents the model cannot predict.
EvalReport evaluate(const ClassifierModel& model, const IntentDataset& test);

// Half-up rounding of a [0, 1] value to tenths of a percent.
std::int64_t percent_tenths(double fraction);
std::string format_tenths(std::int64_t tenths);  // 667 -> "66.7"

enum Metric : std::size_t { kMicro = 0, kMacroF1, kMacroPrecision, kMacroRecall };
inline constexpr std::array<std::string_view, 4> kMetricColumns = {
    "micro", "macro_f1", "macro_precision", "macro_recall"};

// One row of a report file, values in tenths of a percent.
struct ReportRow {
  std::string system;
  std::array<std::int64_t, 4> tenths{};
  std::uint64_t n = 0;
};

ReportRow to_report_row(std::string system, const EvalReport& report);

// Report file: header system,micro,macro_f1,macro_precision,macro_recall,n.
std::string report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(std::string_view text);

struct ComparisonTable {
  std::vector<ReportRow> rows;
  // best[row][metric]: the rounded value equals the column maximum.
  std::vector<std::array<bool, 4>> best;
};

// Requires at least two rows.
ComparisonTable compare(std::vector<ReportRow> rows);
ComparisonTable compare(const std::vector<std::pair<std::string, EvalReport>>& reports);

// Report columns plus "best", a ';'-joined list of columns this row leads.
std::string render_csv(const ComparisonTable& table);
// Aligned columns; leading values carry a trailing '*'.
std::string render_text(const ComparisonTable& table);

}  // namespace paraforge

#endif  // PARAFORGE_EVALKIT_H_
