#include "paraforge/evalkit.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "paraforge/error.h"
#include "paraforge/io.h"

namespace paraforge {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::size_t index_in(const std::vector<std::string>& sorted, const std::string& label) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), label) - sorted.begin());
}

}  // namespace

ConfusionTable ConfusionTable::from_pairs(const std::vector<std::string>& gold,
                                          const std::vector<std::string>& predicted) {
  if (gold.size() != predicted.size()) {
    fail(ErrorKind::kStructural, "gold and predicted label lists differ in length");
  }
  std::set<std::string> all(gold.begin(), gold.end());
  all.insert(predicted.begin(), predicted.end());

  ConfusionTable table;
  table.labels_.assign(all.begin(), all.end());
  const std::size_t n = table.labels_.size();
  table.counts_.assign(n * n, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t g = index_in(table.labels_, gold[i]);
    const std::size_t p = index_in(table.labels_, predicted[i]);
    ++table.counts_[g * n + p];
  }
  table.total_ = gold.size();
  return table;
}

EvalReport report_from_confusion(const ConfusionTable& table) {
  if (table.total() == 0) fail(ErrorKind::kStructural, "cannot evaluate an empty test set");
  const std::size_t n = table.labels().size();
  std::vector<std::uint64_t> gold_totals(n, 0), predicted_totals(n, 0);
  std::uint64_t correct = 0;
  for (std::size_t g = 0; g < n; ++g) {
    for (std::size_t p = 0; p < n; ++p) {
      gold_totals[g] += table.count(g, p);
      predicted_totals[p] += table.count(g, p);
    }
    correct += table.count(g, g);
  }

  EvalReport report;
  report.samples = table.total();
  report.micro_score = ratio(correct, table.total());
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (gold_totals[c] == 0) continue;
    const std::uint64_t tp = table.count(c, c);
    LabelMetrics m;
    m.label = table.labels()[c];
    m.precision = ratio(tp, predicted_totals[c]);
    m.recall = ratio(tp, gold_totals[c]);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.support = gold_totals[c];
    sum_p += m.precision;
    sum_r += m.recall;
    sum_f += m.f1;
    report.per_intent.push_back(std::move(m));
  }
  const auto labels = static_cast<double>(report.per_intent.size());
  report.macro_precision = sum_p / labels;
  report.macro_recall = sum_r / labels;
  report.macro_f1 = sum_f / labels;
  return report;
}

EvalReport evaluate_predictions(const std::vector<std::string>& gold,
                                const std::vector<std::string>& predicted) {
  if (gold.empty()) fail(ErrorKind::kStructural, "cannot evaluate an empty test set");
  return report_from_confusion(ConfusionTable::from_pairs(gold, predicted));
}

EvalReport evaluate(const ClassifierModel& model, const IntentDataset& test) {
  std::string unknown;
  for (const auto& intent : test.intents()) {
    if (!model.label_index(intent)) unknown += (unknown.empty() ? "" : ", ") + intent;
  }
  if (!unknown.empty()) {
    fail(ErrorKind::kCoverage, "test intents unknown to the model: " + unknown);
  }
  std::vector<std::string> gold, predicted;
  gold.reserve(test.size());
  predicted.reserve(test.size());
  for (const Sample& s : test.samples()) {
    gold.push_back(s.intent());
    predicted.push_back(model.predict(s.text()).intent);
  }
  return evaluate_predictions(gold, predicted);
}

std::int64_t percent_tenths(double fraction) {
  return static_cast<std::int64_t>(std::floor(fraction * 1000.0 + 0.5 + 1e-9));
}

std::string format_tenths(std::int64_t tenths) {
  std::string sign = tenths < 0 ? "-" : "";
  if (tenths < 0) tenths = -tenths;
  return sign + std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

ReportRow to_report_row(std::string system, const EvalReport& report) {
  return {std::move(system),
          {percent_tenths(report.micro_score), percent_tenths(report.macro_f1),
           percent_tenths(report.macro_precision), percent_tenths(report.macro_recall)},
          report.samples};
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      csv_row({"system", "micro", "macro_f1", "macro_precision", "macro_recall", "n"});
  for (const auto& r : rows) {
    std::vector<std::string> fields{r.system};
    for (auto t : r.tenths) fields.push_back(format_tenths(t));
    fields.push_back(std::to_string(r.n));
    out += csv_row(fields);
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty() || records.front().fields.size() < 6 ||
      records.front().fields[0] != "system") {
    fail(ErrorKind::kParse, "row 1: expected report header");
  }
  std::vector<ReportRow> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const std::string where = "row " + std::to_string(r + 1);
    if (f.size() < 6) fail(ErrorKind::kParse, where + ": expected 6 fields");
    ReportRow row;
    row.system = f[0];
    try {
      for (std::size_t m = 0; m < 4; ++m) {
        std::size_t used = 0;
        const double value = std::stod(f[m + 1], &used);
        if (used != f[m + 1].size()) throw std::invalid_argument(f[m + 1]);
        row.tenths[m] = static_cast<std::int64_t>(std::llround(value * 10.0));
      }
      row.n = std::stoull(f[5]);
    } catch (const std::exception&) {
      fail(ErrorKind::kParse, where + ": non-numeric metric value");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ComparisonTable compare(std::vector<ReportRow> rows) {
  if (rows.size() < 2) fail(ErrorKind::kStructural, "comparison needs at least two reports");
  ComparisonTable table;
  std::array<std::int64_t, 4> top{};
  top.fill(std::numeric_limits<std::int64_t>::min());
  for (const auto& r : rows) {
    for (std::size_t m = 0; m < 4; ++m) top[m] = std::max(top[m], r.tenths[m]);
  }
  for (const auto& r : rows) {
    std::array<bool, 4> flags{};
    for (std::size_t m = 0; m < 4; ++m) flags[m] = r.tenths[m] == top[m];
    table.best.push_back(flags);
  }
  table.rows = std::move(rows);
  return table;
}

ComparisonTable compare(const std::vector<std::pair<std::string, EvalReport>>& reports) {
  std::vector<ReportRow> rows;
  for (const auto& [name, report] : reports) rows.push_back(to_report_row(name, report));
  return compare(std::move(rows));
}

std::string render_csv(const ComparisonTable& table) {
  std::string out = csv_row({"system", "micro", "macro_f1", "macro_precision",
                             "macro_recall", "n", "best"});
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    std::vector<std::string> fields{r.system};
    std::string best;
    for (std::size_t m = 0; m < 4; ++m) {
      fields.push_back(format_tenths(r.tenths[m]));
      if (table.best[i][m]) {
        best += (best.empty() ? "" : ";") + std::string(kMetricColumns[m]);
      }
    }
    fields.push_back(std::to_string(r.n));
    fields.push_back(best);
    out += csv_row(fields);
  }
  return out;
}

std::string render_text(const ComparisonTable& table) {
  std::size_t width = std::string_view("System").size();
  for (const auto& r : table.rows) width = std::max(width, r.system.size());
  const std::array<std::string_view, 4> titles = {"Micro", "Macro F1", "Macro P",
                                                  "Macro R"};
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "System";
  for (auto t : titles) out << "  " << std::right << std::setw(9) << t;
  out << "\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    out << std::left << std::setw(static_cast<int>(width)) << r.system;
    for (std::size_t m = 0; m < 4; ++m) {
      std::string cell = format_tenths(r.tenths[m]) + (table.best[i][m] ? "*" : " ");
      out << "  " << std::right << std::setw(9) << cell;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace paraforge
