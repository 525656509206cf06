#include "paraforge/paraphrase.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "paraforge/error.h"

namespace paraforge {

using nlohmann::json;

json response_to_json(const BackendResponse& response) {
  json hyps = json::array();
  for (const auto& h : response.hypotheses) {
    hyps.push_back({{"text", h.text}, {"score", h.score}});
  }
  return {{"hypotheses", std::move(hyps)}};
}

BackendResponse response_from_json(const json& in) {
  const json& list = in.is_array() ? in : in.at("hypotheses");
  if (!list.is_array()) {
    throw json::type_error::create(302, "hypotheses must be an array", &in);
  }
  BackendResponse response;
  int rank = 0;
  for (const auto& item : list) {
    response.hypotheses.push_back({item.at("text").get<std::string>(),
                                   item.at("score").get<double>(), ++rank});
  }
  return response;
}

BackendResponse checked_generate(Backend& backend,
                                 const BackendRequest& request) {
  BackendResponse response = backend.generate(request);
  auto& hyps = response.hypotheses;
  if (hyps.size() > static_cast<std::size_t>(request.num_hypotheses)) {
    fail(ErrorKind::kGeneration,
         "backend '" + backend.id() + "' returned " +
             std::to_string(hyps.size()) + " hypotheses for a request of " +
             std::to_string(request.num_hypotheses));
  }
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyps[i].rank = static_cast<int>(i) + 1;
    if (i > 0 && hyps[i].score > hyps[i - 1].score) {
      fail(ErrorKind::kGeneration, "backend '" + backend.id() +
                                       "' returned scores that increase with rank");
    }
  }
  return response;
}

void PipelineConfig::validate(Method method) const {
  if (n_keep < 1) fail(ErrorKind::kConfig, "n_keep must be >= 1");
  if (forward_beam < 1) fail(ErrorKind::kConfig, "forward_beam must be >= 1");
  if (method == Method::kPivot) {
    if (pivot_language.empty()) {
      fail(ErrorKind::kConfig, "pivot procedure needs a pivot language");
    }
    if (backward_beam < n_keep + 1) {
      fail(ErrorKind::kConfig, "backward_beam (" + std::to_string(backward_beam) +
                                   ") must be >= n_keep + 1 (" +
                                   std::to_string(n_keep + 1) + ")");
    }
  } else if (lm_language.empty()) {
    fail(ErrorKind::kConfig, "LM procedure needs an LM language");
  }
}

std::vector<ParaphraseCandidate> pivot_paraphrase(Backend& backend,
                                                  const Sample& sample,
                                                  const PipelineConfig& cfg) {
  cfg.validate(Method::kPivot);
  const std::string& source = sample.language();
  if (cfg.pivot_language == source) {
    fail(ErrorKind::kConfig, "pivot language equals the sample language '" +
                                 source + "'");
  }

  auto forward = checked_generate(
      backend, {sample.text(), source, cfg.pivot_language, cfg.forward_beam});
  if (forward.hypotheses.empty()) {
    fail(ErrorKind::kGeneration, "empty forward translation for '" +
                                     sample.text() + "'");
  }
  const Hypothesis& pivot_text = forward.hypotheses.front();

  auto backward = checked_generate(
      backend, {pivot_text.text, cfg.pivot_language, source, cfg.backward_beam});
  if (backward.hypotheses.empty()) {
    fail(ErrorKind::kGeneration, "empty back-translation for '" +
                                     sample.text() + "'");
  }

  std::vector<ParaphraseCandidate> out;
  const auto& hyps = backward.hypotheses;
  for (std::size_t i = 1; i < hyps.size() && out.size() < static_cast<std::size_t>(cfg.n_keep); ++i) {
    const Hypothesis& h = hyps[i];
    GenerationTrace trace{backend.id(),
                          Method::kPivot,
                          cfg.pivot_language,
                          h.rank,
                          h.score,
                          sample.text(),
                          {{source, cfg.pivot_language, pivot_text.rank},
                           {cfg.pivot_language, source, h.rank}}};
    out.push_back({h.text, h.score, h.rank, std::move(trace)});
  }
  return out;
}

std::vector<ParaphraseCandidate> lm_paraphrase(Backend& lm, const Sample& sample,
                                               const PipelineConfig& cfg,
                                               Backend* translator) {
  cfg.validate(Method::kLm);
  Backend& mt = translator ? *translator : lm;
  const std::string& source = sample.language();
  const std::string& lm_lang = cfg.lm_language;

  if (source == lm_lang) {
    auto response =
        checked_generate(lm, {sample.text(), lm_lang, lm_lang, cfg.n_keep});
    if (response.hypotheses.empty()) {
      fail(ErrorKind::kGeneration, "empty paraphrase response for '" +
                                       sample.text() + "'");
    }
    std::vector<ParaphraseCandidate> out;
    for (const auto& h : response.hypotheses) {
      GenerationTrace trace{lm.id(),      Method::kLm,   std::nullopt,
                            h.rank,       h.score,       sample.text(),
                            {{lm_lang, lm_lang, h.rank}}};
      out.push_back({h.text, h.score, h.rank, std::move(trace)});
    }
    return out;
  }

  auto forward = checked_generate(
      mt, {sample.text(), source, lm_lang, cfg.forward_beam});
  if (forward.hypotheses.empty()) {
    fail(ErrorKind::kGeneration, "empty forward translation for '" +
                                     sample.text() + "'");
  }
  const Hypothesis& bridged = forward.hypotheses.front();

  auto paraphrases =
      checked_generate(lm, {bridged.text, lm_lang, lm_lang, cfg.n_keep});
  if (paraphrases.hypotheses.empty()) {
    fail(ErrorKind::kGeneration, "empty paraphrase response for '" +
                                     bridged.text + "'");
  }

  std::vector<ParaphraseCandidate> out;
  for (const auto& p : paraphrases.hypotheses) {
    BackendResponse back;
    try {
      back = checked_generate(mt, {p.text, lm_lang, source, 1});
    } catch (const Error& e) {
      spdlog::warn("dropping paraphrase '{}' of '{}': back-translation failed: {}",
                   p.text, sample.text(), e.what());
      continue;
    }
    if (back.hypotheses.empty()) {
      spdlog::warn("dropping paraphrase '{}' of '{}': empty back-translation",
                   p.text, sample.text());
      continue;
    }
    const Hypothesis& returned = back.hypotheses.front();
    GenerationTrace trace{lm.id(),
                          Method::kLm,
                          lm_lang,
                          p.rank,
                          p.score,
                          sample.text(),
                          {{source, lm_lang, bridged.rank},
                           {lm_lang, lm_lang, p.rank},
                           {lm_lang, source, returned.rank}}};
    out.push_back({returned.text, p.score, p.rank, std::move(trace)});
  }
  return out;
}

std::vector<std::vector<ParaphraseCandidate>> augment_samples(
    Backend& backend, const IntentDataset& dataset, const PipelineConfig& cfg,
    Method method, std::size_t workers, Backend* translator) {
  cfg.validate(method);
  const auto& samples = dataset.samples();
  std::vector<std::vector<ParaphraseCandidate>> results(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());

  std::size_t threads = std::max<std::size_t>(1, workers);
  for (const Backend* b : {&backend, translator}) {
    if (b && b->concurrency_limit() > 0) {
      threads = std::min(threads, b->concurrency_limit());
    }
  }
  threads = std::min(threads, samples.size());

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < samples.size(); i = next++) {
      try {
        results[i] = method == Method::kPivot
                         ? pivot_paraphrase(backend, samples[i], cfg)
                         : lm_paraphrase(backend, samples[i], cfg, translator);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace paraforge
