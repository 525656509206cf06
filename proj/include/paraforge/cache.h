#ifndef PARAFORGE_CACHE_H_
#define PARAFORGE_CACHE_H_

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>

#include "paraforge/paraphrase.h"

namespace paraforge {

// Hex SHA-256 over the canonical JSON array
// [backend_id, model_id, source_language, target_language, num_hypotheses, text].
std::string cache_key(const Backend& backend, const BackendRequest& request);

// Decorator persisting every response as <cache_dir>/<cache_key>. Hits are
// served without touching the wrapped backend. A corrupt entry is logged,
// ignored, and overwritten. In offline mode a miss is a transport error.
class CachedBackend : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::filesystem::path cache_dir,
                bool offline = false);

  const std::string& id() const override { return inner_->id(); }
  const std::string& model_id() const override { return inner_->model_id(); }
  std::size_t concurrency_limit() const override {
    return inner_->concurrency_limit();
  }
  BackendResponse generate(const BackendRequest& request) override;

  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::filesystem::path dir_;
  bool offline_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

std::shared_ptr<CachedBackend> cached(std::shared_ptr<Backend> backend,
                                      const std::filesystem::path& cache_dir,
                                      bool offline = false);

}  // namespace paraforge

#endif  // PARAFORGE_CACHE_H_
