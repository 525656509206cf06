#ifndef PARAFORGE_NLU_H_
#define PARAFORGE_NLU_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "paraforge/corpus.h"

namespace paraforge {

struct VocabConfig {
  int min_n = 3;  // character n-gram lengths, inclusive
  int max_n = 5;
  std::size_t min_count = 1;
};

// Feature keys of a text, with multiplicity: "w:<word>" per normalized word
// and "c:<gram>" per character n-gram of "^word$" (code points, never
// crossing word boundaries).
std::vector<std::string> extract_features(std::string_view text,
                                          const VocabConfig& cfg);

// Maps feature keys to dense column indices [0, dimension()). Keys are
// indexed in sorted order.
class FeatureVocabulary {
 public:
  FeatureVocabulary() = default;
  FeatureVocabulary(VocabConfig cfg, std::vector<std::string> keys,
                    std::vector<std::uint64_t> counts);

  // Throws Error(kStructural) on an empty dataset or vocabulary.
  static FeatureVocabulary build(const std::vector<std::string>& texts,
                                 const VocabConfig& cfg = {});
  static FeatureVocabulary build(const IntentDataset& train,
                                 const VocabConfig& cfg = {});

  std::size_t dimension() const { return keys_.size(); }
  std::optional<std::uint32_t> index_of(std::string_view key) const;
  const std::vector<std::string>& keys() const { return keys_; }
  // Training-corpus occurrences of each feature, aligned with keys().
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  const VocabConfig& config() const { return cfg_; }

 private:
  VocabConfig cfg_;
  std::vector<std::string> keys_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// (index, count) pairs with strictly increasing indices.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  bool empty() const { return entries.empty(); }
  bool operator==(const SparseVector&) const = default;
};

// Unknown features are ignored.
SparseVector featurize(const FeatureVocabulary& vocab, std::string_view text);

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// Featurized training data for a linear softmax model with weights laid
// out row-major as weights[feature * classes + label].
struct SoftmaxProblem {
  std::vector<SparseVector> inputs;
  std::vector<std::size_t> labels;
  std::size_t dimension = 0;
  std::size_t classes = 0;
};

// Mean softmax cross-entropy over `rows` plus (l2 / 2) * |weights|^2.
double softmax_objective(const SoftmaxProblem& problem,
                         std::span<const double> weights,
                         std::span<const double> bias, double l2,
                         std::span<const std::size_t> rows);

// Gradient of softmax_objective, written densely into the outputs. This
// runs the same batch routine the trainer uses.
void softmax_gradient(const SoftmaxProblem& problem,
                      std::span<const double> weights,
                      std::span<const double> bias, double l2,
                      std::span<const std::size_t> rows,
                      std::span<double> weight_grad, std::span<double> bias_grad);

struct Prediction {
  std::string intent;
  std::size_t label_index = 0;
  double confidence = 0.0;
  std::vector<double> probabilities;
};

class ClassifierModel {
 public:
  ClassifierModel(FeatureVocabulary vocab, std::vector<std::string> labels,
                  std::vector<double> weights, std::vector<double> bias,
                  TrainConfig config);

  const FeatureVocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> label_index(std::string_view intent) const;
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  const TrainConfig& config() const { return config_; }

  double final_loss() const { return final_loss_; }
  // Full training objective after each epoch.
  const std::vector<double>& loss_history() const { return loss_history_; }
  void set_loss_history(std::vector<double> history);

  // Softmax of the raw scores; ties go to the lowest label index.
  Prediction predict(std::string_view text) const;
  std::vector<double> logits(const SparseVector& features) const;

 private:
  FeatureVocabulary vocab_;
  std::vector<std::string> labels_;
  std::vector<double> weights_;
  std::vector<double> bias_;
  TrainConfig config_;
  double final_loss_ = 0.0;
  std::vector<double> loss_history_;
};

// Multinomial logistic regression by mini-batch gradient descent. Labels are
// indexed in sorted order; epoch shuffles draw from SplitMix64(config.seed).
// Same inputs give bit-identical weights.
ClassifierModel train(const IntentDataset& dataset, const TrainConfig& config = {},
                      const VocabConfig& vocab_config = {});

Prediction predict(const ClassifierModel& model, std::string_view text);

// Binary container: "PFCLSMDL", u32 version, u64 header length, JSON header
// (vocabulary, labels, config, losses), then weights and bias as
// little-endian IEEE-754 doubles.
inline constexpr std::uint32_t kModelFormatVersion = 1;
std::string serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::string_view bytes);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace paraforge

#endif  // PARAFORGE_NLU_H_
