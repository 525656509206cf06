#include <unicode/utf8.h>

#include <algorithm>
#include <map>

#include "paraforge/curation.h"
#include "paraforge/error.h"
#include "paraforge/nlu.h"

namespace paraforge {

namespace {

// Splits a UTF-8 word into code point substrings.
std::vector<std::string_view> code_points(std::string_view word) {
  std::vector<std::string_view> out;
  const auto* bytes = reinterpret_cast<const uint8_t*>(word.data());
  const auto length = static_cast<int32_t>(word.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    out.push_back(word.substr(static_cast<std::size_t>(start),
                              static_cast<std::size_t>(i - start)));
  }
  return out;
}

}  // namespace

std::vector<std::string> extract_features(std::string_view text,
                                          const VocabConfig& cfg) {
  const std::string normalized = normalize(text).key;
  std::vector<std::string> features;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    std::size_t end = normalized.find(' ', pos);
    if (end == std::string::npos) end = normalized.size();
    const std::string_view word(normalized.data() + pos, end - pos);
    pos = end + 1;
    if (word.empty()) continue;

    features.push_back("w:" + std::string(word));
    std::vector<std::string_view> padded = code_points(word);
    padded.insert(padded.begin(), "^");
    padded.push_back("$");
    for (int n = cfg.min_n; n <= cfg.max_n; ++n) {
      const auto width = static_cast<std::size_t>(n);
      if (n < 1 || width > padded.size()) continue;
      for (std::size_t s = 0; s + width <= padded.size(); ++s) {
        std::string gram = "c:";
        for (std::size_t k = 0; k < width; ++k) gram += padded[s + k];
        features.push_back(std::move(gram));
      }
    }
  }
  return features;
}

FeatureVocabulary::FeatureVocabulary(VocabConfig cfg,
                                     std::vector<std::string> keys,
                                     std::vector<std::uint64_t> counts)
    : cfg_(cfg), keys_(std::move(keys)), counts_(std::move(counts)) {
  if (counts_.size() != keys_.size()) {
    fail(ErrorKind::kStructural, "vocabulary keys and counts differ in length");
  }
  index_.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], static_cast<std::uint32_t>(i)).second) {
      fail(ErrorKind::kStructural, "duplicate vocabulary key '" + keys_[i] + "'");
    }
  }
}

FeatureVocabulary FeatureVocabulary::build(const std::vector<std::string>& texts,
                                           const VocabConfig& cfg) {
  if (texts.empty()) fail(ErrorKind::kStructural, "cannot build a vocabulary from no texts");
  if (cfg.min_n < 1 || cfg.max_n < cfg.min_n) {
    fail(ErrorKind::kConfig, "invalid character n-gram range");
  }
  std::map<std::string, std::uint64_t> counts;
  for (const auto& text : texts) {
    for (auto& f : extract_features(text, cfg)) ++counts[std::move(f)];
  }
  std::vector<std::string> keys;
  std::vector<std::uint64_t> kept_counts;
  for (auto& [key, count] : counts) {
    if (count < cfg.min_count) continue;
    keys.push_back(key);
    kept_counts.push_back(count);
  }
  if (keys.empty()) fail(ErrorKind::kStructural, "vocabulary is empty");
  return FeatureVocabulary(cfg, std::move(keys), std::move(kept_counts));
}

FeatureVocabulary FeatureVocabulary::build(const IntentDataset& train,
                                           const VocabConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(train.size());
  for (const Sample& s : train.samples()) texts.push_back(s.text());
  return build(texts, cfg);
}

std::optional<std::uint32_t> FeatureVocabulary::index_of(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector featurize(const FeatureVocabulary& vocab, std::string_view text) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& f : extract_features(text, vocab.config())) {
    if (auto idx = vocab.index_of(f)) ++counts[*idx];
  }
  SparseVector v;
  v.entries.assign(counts.begin(), counts.end());
  return v;
}

}  // namespace paraforge
