#include "support.h"

#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "paraforge/io.h"

namespace testing {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "paraforge-test-XXXXXX").string();
  if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

const std::vector<std::string> kVerbs = {"show", "check", "explain", "find", "list",
                                         "update", "track", "describe", "compare", "review"};
const std::vector<std::string> kObjects = {"balance", "schedule", "order",   "route",
                                           "invoice", "policy",   "reminder", "playlist",
                                           "recipe",  "forecast"};

}  // namespace

void write_clinc_file(const fs::path& path, std::size_t intents, std::size_t train_per_intent,
                      std::size_t val_per_intent, std::size_t test_per_intent) {
  json root = json::object();
  auto split = [&](const std::string& tag, std::size_t per_intent) {
    json rows = json::array();
    for (std::size_t i = 0; i < intents; ++i) {
      const std::string intent = "intent_" + std::to_string(i);
      for (std::size_t j = 0; j < per_intent; ++j) {
        std::string text = kVerbs[j % kVerbs.size()] + " the " +
                           kObjects[i % kObjects.size()] + " " + tag + " " +
                           std::to_string(i) + " " + std::to_string(j);
        rows.push_back(json::array({text, intent}));
      }
    }
    return rows;
  };
  root["train"] = split("t", train_per_intent);
  root["val"] = split("v", val_per_intent);
  root["test"] = split("x", test_per_intent);
  root["oos_train"] = json::array({json::array({"what is the meaning of life", "oos"})});
  paraforge::write_file(path, root.dump());
}

paraforge::IntentDataset make_dataset(const std::vector<std::pair<std::string, std::string>>& rows,
                                      std::string name, std::string language) {
  std::vector<paraforge::Sample> samples;
  for (const auto& [text, intent] : rows) samples.emplace_back(text, intent, language);
  return paraforge::IntentDataset(std::move(name), std::move(language), std::move(samples));
}

paraforge::IntentDataset house_shaped_dataset() {
  const std::vector<std::string> nouns = {
      "compte",    "chéquier",  "virement",  "prélèvement", "découvert", "relevé",
      "plafond",   "carnet",    "rendez-vous", "conseiller", "placement", "livret",
      "crédit",    "assurance", "adresse",   "téléphone",   "agence",    "distributeur",
      "opposition", "épargne"};
  const std::vector<std::string> frames = {
      "je voudrais modifier mon {}",     "comment consulter le {}",
      "est-ce que je peux voir mon {}",  "aidez-moi avec le {} s'il vous plaît",
      "il faut annuler le {} demain",    "où se trouve mon {} actuel"};
  const std::vector<std::size_t> counts = {6, 6, 5, 5, 4, 4, 4, 3, 3, 3,
                                           3, 3, 3, 3, 3, 3, 3, 3, 3, 3};
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t i = 0; i < nouns.size(); ++i) {
    for (std::size_t j = 0; j < counts[i]; ++j) {
      std::string text = frames[j];
      text.replace(text.find("{}"), 2, nouns[i]);
      rows.emplace_back(text, "intent_" + std::to_string(i));
    }
  }
  return make_dataset(rows, "HOUSE-train", "fr");
}

OracleReport metrics_oracle(const std::vector<std::string>& gold,
                            const std::vector<std::string>& predicted) {
  if (gold.empty() || gold.size() != predicted.size()) {
    throw std::invalid_argument("oracle needs equally long, non-empty inputs");
  }
  OracleReport r;
  std::set<std::string> gold_labels(gold.begin(), gold.end());
  std::set<std::string> all_labels = gold_labels;
  all_labels.insert(predicted.begin(), predicted.end());

  double tp_sum = 0, fp_sum = 0, fn_sum = 0, correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == predicted[i];
  for (const auto& label : all_labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i] == label;
      const bool p = predicted[i] == label;
      if (g && p) tp += 1;
      if (!g && p) fp += 1;
      if (g && !p) fn += 1;
    }
    tp_sum += tp;
    fp_sum += fp;
    fn_sum += fn;
    if (!gold_labels.count(label)) continue;
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rc = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    const double f = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
    r.per_label[label] = {p, rc, f};
  }
  for (const auto& [label, prf] : r.per_label) {
    r.macro_precision += prf[0];
    r.macro_recall += prf[1];
    r.macro_f1 += prf[2];
  }
  const double n = static_cast<double>(r.per_label.size());
  r.macro_precision /= n;
  r.macro_recall /= n;
  r.macro_f1 /= n;
  r.accuracy = correct / static_cast<double>(gold.size());
  r.micro_precision = tp_sum / (tp_sum + fp_sum);
  r.micro_recall = tp_sum / (tp_sum + fn_sum);
  // Count form of the harmonic mean, so no rounding enters through p * r.
  r.micro_f1 = 2 * tp_sum / (2 * tp_sum + fp_sum + fn_sum);
  return r;
}

double dense_softmax_loss(const paraforge::SoftmaxProblem& problem,
                          const std::vector<double>& weights, const std::vector<double>& bias,
                          double l2) {
  const std::size_t c = problem.classes;
  double total = 0.0;
  for (std::size_t row = 0; row < problem.inputs.size(); ++row) {
    std::vector<double> x(problem.dimension, 0.0);
    for (auto [index, count] : problem.inputs[row].entries) x[index] = count;
    std::vector<double> z(c, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      z[k] = bias[k];
      for (std::size_t f = 0; f < problem.dimension; ++f) z[k] += x[f] * weights[f * c + k];
    }
    double top = z[0];
    for (double v : z) top = std::max(top, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    total += top + std::log(sum) - z[problem.labels[row]];
  }
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  return total / static_cast<double>(problem.inputs.size()) + 0.5 * l2 * norm;
}

paraforge::SoftmaxProblem random_problem(std::mt19937_64& rng, std::size_t rows,
                                         std::size_t dimension, std::size_t classes) {
  paraforge::SoftmaxProblem p;
  p.dimension = dimension;
  p.classes = classes;
  for (std::size_t r = 0; r < rows; ++r) {
    paraforge::SparseVector v;
    for (std::uint32_t f = 0; f < dimension; ++f) {
      if (rng() % 3 == 0) v.entries.emplace_back(f, 1 + rng() % 3);
    }
    p.inputs.push_back(std::move(v));
    p.labels.push_back(r < classes ? r : rng() % classes);
  }
  return p;
}

}  // namespace testing
