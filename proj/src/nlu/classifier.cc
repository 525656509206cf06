#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "paraforge/error.h"
#include "paraforge/nlu.h"
#include "paraforge/rng.h"

namespace paraforge {

namespace {

// Data term of the mini-batch gradient. Effective weights are
// scale * weights; the trainer keeps L2 decay in `scale`.
struct BatchGradient {
  std::vector<std::uint32_t> features;  // touched rows, first-touch order
  std::vector<double> rows;             // features.size() x classes
  std::vector<double> bias;
  double loss = 0.0;  // mean cross-entropy over the batch
};

void logits_into(const SparseVector& x, std::span<const double> weights,
                 double scale, std::span<const double> bias,
                 std::vector<double>& z) {
  const std::size_t classes = bias.size();
  std::fill(z.begin(), z.end(), 0.0);
  for (const auto& [f, count] : x.entries) {
    const double* row = weights.data() + std::size_t{f} * classes;
    for (std::size_t c = 0; c < classes; ++c) z[c] += count * row[c];
  }
  for (std::size_t c = 0; c < classes; ++c) z[c] = scale * z[c] + bias[c];
}

// Turns logits into probabilities in place; returns log-sum-exp.
double softmax_in_place(std::vector<double>& z) {
  const double peak = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : z) v /= total;
  return peak + std::log(total);
}

void batch_gradient(const SoftmaxProblem& problem,
                    std::span<const double> weights, double scale,
                    std::span<const double> bias,
                    std::span<const std::size_t> rows, BatchGradient& out,
                    std::vector<std::int64_t>& slot) {
  const std::size_t classes = problem.classes;
  out.features.clear();
  out.rows.clear();
  out.bias.assign(classes, 0.0);
  out.loss = 0.0;
  if (rows.empty()) return;

  const double inv = 1.0 / static_cast<double>(rows.size());
  std::vector<double> z(classes);
  for (std::size_t r : rows) {
    const SparseVector& x = problem.inputs[r];
    const std::size_t y = problem.labels[r];
    logits_into(x, weights, scale, bias, z);
    const double gold = z[y];
    out.loss += softmax_in_place(z) - gold;
    z[y] -= 1.0;
    for (std::size_t c = 0; c < classes; ++c) out.bias[c] += inv * z[c];
    for (const auto& [f, count] : x.entries) {
      std::int64_t& s = slot[f];
      if (s < 0) {
        s = static_cast<std::int64_t>(out.features.size());
        out.features.push_back(f);
        out.rows.resize(out.rows.size() + classes, 0.0);
      }
      double* g = out.rows.data() + static_cast<std::size_t>(s) * classes;
      const double weight = inv * count;
      for (std::size_t c = 0; c < classes; ++c) g[c] += weight * z[c];
    }
  }
  out.loss *= inv;
  for (std::uint32_t f : out.features) slot[f] = -1;
}

double objective_scaled(const SoftmaxProblem& problem,
                        std::span<const double> weights, double scale,
                        std::span<const double> bias, double l2,
                        std::span<const std::size_t> rows) {
  std::vector<double> z(problem.classes);
  double loss = 0.0;
  for (std::size_t r : rows) {
    logits_into(problem.inputs[r], weights, scale, bias, z);
    const double gold = z[problem.labels[r]];
    loss += softmax_in_place(z) - gold;
  }
  if (!rows.empty()) loss /= static_cast<double>(rows.size());
  double norm = 0.0;
  for (double w : weights) norm += w * w;
  return loss + 0.5 * l2 * scale * scale * norm;
}

}  // namespace

double softmax_objective(const SoftmaxProblem& problem,
                         std::span<const double> weights,
                         std::span<const double> bias, double l2,
                         std::span<const std::size_t> rows) {
  return objective_scaled(problem, weights, 1.0, bias, l2, rows);
}

void softmax_gradient(const SoftmaxProblem& problem,
                      std::span<const double> weights,
                      std::span<const double> bias, double l2,
                      std::span<const std::size_t> rows,
                      std::span<double> weight_grad, std::span<double> bias_grad) {
  BatchGradient g;
  std::vector<std::int64_t> slot(problem.dimension, -1);
  batch_gradient(problem, weights, 1.0, bias, rows, g, slot);
  for (std::size_t i = 0; i < weights.size(); ++i) weight_grad[i] = l2 * weights[i];
  const std::size_t classes = problem.classes;
  for (std::size_t k = 0; k < g.features.size(); ++k) {
    for (std::size_t c = 0; c < classes; ++c) {
      weight_grad[std::size_t{g.features[k]} * classes + c] += g.rows[k * classes + c];
    }
  }
  std::copy(g.bias.begin(), g.bias.end(), bias_grad.begin());
}

ClassifierModel::ClassifierModel(FeatureVocabulary vocab,
                                 std::vector<std::string> labels,
                                 std::vector<double> weights,
                                 std::vector<double> bias, TrainConfig config)
    : vocab_(std::move(vocab)),
      labels_(std::move(labels)),
      weights_(std::move(weights)),
      bias_(std::move(bias)),
      config_(config) {
  if (labels_.empty()) fail(ErrorKind::kStructural, "model has no labels");
  if (bias_.size() != labels_.size() ||
      weights_.size() != vocab_.dimension() * labels_.size()) {
    fail(ErrorKind::kStructural, "model weight shape does not match vocabulary x labels");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) fail(ErrorKind::kTraining, "model has non-finite weights");
  }
}

std::optional<std::size_t> ClassifierModel::label_index(std::string_view intent) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), intent);
  if (it == labels_.end() || *it != intent) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

void ClassifierModel::set_loss_history(std::vector<double> history) {
  loss_history_ = std::move(history);
  final_loss_ = loss_history_.empty() ? 0.0 : loss_history_.back();
}

std::vector<double> ClassifierModel::logits(const SparseVector& features) const {
  std::vector<double> z(labels_.size());
  logits_into(features, weights_, 1.0, bias_, z);
  return z;
}

Prediction ClassifierModel::predict(std::string_view text) const {
  std::vector<double> z = logits(featurize(vocab_, text));
  std::size_t best = 0;
  for (std::size_t c = 1; c < z.size(); ++c) {
    if (z[c] > z[best]) best = c;
  }
  softmax_in_place(z);
  return {labels_[best], best, z[best], std::move(z)};
}

Prediction predict(const ClassifierModel& model, std::string_view text) {
  return model.predict(text);
}

ClassifierModel train(const IntentDataset& dataset, const TrainConfig& config,
                      const VocabConfig& vocab_config) {
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0) ||
      config.l2 < 0 || config.learning_rate * config.l2 >= 1.0) {
    fail(ErrorKind::kConfig, "invalid training configuration");
  }
  std::set<std::string> label_set(dataset.intents().begin(), dataset.intents().end());
  if (label_set.size() < 2) {
    fail(ErrorKind::kStructural, "training needs at least two intents");
  }
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  FeatureVocabulary vocab = FeatureVocabulary::build(dataset, vocab_config);

  SoftmaxProblem problem;
  problem.dimension = vocab.dimension();
  problem.classes = labels.size();
  for (const Sample& s : dataset.samples()) {
    problem.inputs.push_back(featurize(vocab, s.text()));
    problem.labels.push_back(static_cast<std::size_t>(
        std::lower_bound(labels.begin(), labels.end(), s.intent()) - labels.begin()));
  }

  const std::size_t classes = problem.classes;
  std::vector<double> weights(problem.dimension * classes, 0.0);
  std::vector<double> bias(classes, 0.0);
  double scale = 1.0;
  const double decay = 1.0 - config.learning_rate * config.l2;

  auto fold_scale = [&] {
    for (double& w : weights) w *= scale;
    scale = 1.0;
  };

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::vector<std::size_t> all_rows = order;
  SplitMix64 rng(config.seed);
  BatchGradient g;
  std::vector<std::int64_t> slot(problem.dimension, -1);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(rng, order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> rows(order.data() + start, stop - start);
      batch_gradient(problem, weights, scale, bias, rows, g, slot);
      if (!std::isfinite(g.loss)) {
        fail(ErrorKind::kTraining,
             "training diverged (loss " + std::to_string(g.loss) + ") in epoch " +
                 std::to_string(epoch) + "; try a smaller learning rate");
      }
      scale *= decay;
      const double step = config.learning_rate / scale;
      for (std::size_t k = 0; k < g.features.size(); ++k) {
        double* w = weights.data() + std::size_t{g.features[k]} * classes;
        const double* grad = g.rows.data() + k * classes;
        for (std::size_t c = 0; c < classes; ++c) w[c] -= step * grad[c];
      }
      for (std::size_t c = 0; c < classes; ++c) {
        bias[c] -= config.learning_rate * g.bias[c];
      }
      if (scale < 1e-100) fold_scale();
    }
    const double loss =
        objective_scaled(problem, weights, scale, bias, config.l2, all_rows);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::kTraining, "training diverged (loss " + std::to_string(loss) +
                                     ") after epoch " + std::to_string(epoch) +
                                     "; try a smaller learning rate");
    }
    history.push_back(loss);
  }
  fold_scale();

  ClassifierModel model(std::move(vocab), std::move(labels), std::move(weights),
                        std::move(bias), config);
  model.set_loss_history(std::move(history));
  return model;
}

}  // namespace paraforge
