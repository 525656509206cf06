#ifndef PARAFORGE_TESTS_SUPPORT_H_
#define PARAFORGE_TESTS_SUPPORT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "paraforge/corpus.h"
#include "paraforge/evalkit.h"
#include "paraforge/nlu.h"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Writes a CLINC-format file with `intents` labels. Every split text is
// unique. Adds an "oos_train" split that loaders must ignore.
void write_clinc_file(const std::filesystem::path& path, std::size_t intents,
                      std::size_t train_per_intent, std::size_t val_per_intent,
                      std::size_t test_per_intent);

// Dataset built from (text, intent) pairs.
paraforge::IntentDataset make_dataset(
    const std::vector<std::pair<std::string, std::string>>& rows,
    std::string name = "fixture", std::string language = "en");

// 20 intents, 73 samples, 3 to 6 per intent, French.
paraforge::IntentDataset house_shaped_dataset();

// Reference metrics computed label by label straight from the pairs.
struct OracleReport {
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::map<std::string, std::array<double, 3>> per_label;  // p, r, f1
};

OracleReport metrics_oracle(const std::vector<std::string>& gold,
                            const std::vector<std::string>& predicted);

// Dense re-derivation of the regularized softmax objective.
double dense_softmax_loss(const paraforge::SoftmaxProblem& problem,
                          const std::vector<double>& weights,
                          const std::vector<double>& bias, double l2);

// Random sparse problem with every class present.
paraforge::SoftmaxProblem random_problem(std::mt19937_64& rng, std::size_t rows,
                                         std::size_t dimension, std::size_t classes);

}  // namespace testing

#endif  // PARAFORGE_TESTS_SUPPORT_H_
