#include "paraforge/cache.h"

#include <spdlog/spdlog.h>

#include <system_error>

#include "paraforge/error.h"
#include "paraforge/io.h"

namespace paraforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string cache_key(const Backend& backend, const BackendRequest& request) {
  json key = json::array({backend.id(), backend.model_id(),
                          request.source_language, request.target_language,
                          request.num_hypotheses, request.text});
  return sha256_hex(key.dump());
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, fs::path cache_dir,
                             bool offline)
    : inner_(std::move(inner)), dir_(std::move(cache_dir)), offline_(offline) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    fail(ErrorKind::kIo, "cannot create cache directory '" + dir_.string() +
                             "': " + ec.message());
  }
}

BackendResponse CachedBackend::generate(const BackendRequest& request) {
  const fs::path entry = dir_ / cache_key(*this, request);
  if (fs::exists(entry)) {
    try {
      BackendResponse hit =
          response_from_json(json::parse(read_file(entry)));
      ++hits_;
      return hit;
    } catch (const std::exception& e) {
      spdlog::warn("ignoring corrupt cache entry {}: {}", entry.string(), e.what());
    }
  }
  if (offline_) {
    fail(ErrorKind::kTransport, "offline: no cached response for '" +
                                    request.text + "' (" +
                                    request.source_language + "->" +
                                    request.target_language + ")");
  }
  ++misses_;
  BackendResponse response = inner_->generate(request);
  write_file_atomic(entry, response_to_json(response).dump());
  return response;
}

std::shared_ptr<CachedBackend> cached(std::shared_ptr<Backend> backend,
                                      const fs::path& cache_dir, bool offline) {
  return std::make_shared<CachedBackend>(std::move(backend), cache_dir, offline);
}

}  // namespace paraforge
