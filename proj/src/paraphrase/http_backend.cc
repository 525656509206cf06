#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "paraforge/http_backend.h"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

#include "paraforge/error.h"

namespace paraforge {

using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)) {
  const auto& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorKind::kConfig, "endpoint '" + url + "' has no scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (options_.attempts < 1) options_.attempts = 1;
}

BackendResponse HttpBackend::generate(const BackendRequest& request) {
  const std::string body = json{{"text", request.text},
                                {"source_lang", request.source_language},
                                {"target_lang", request.target_language},
                                {"num_hypotheses", request.num_hypotheses},
                                {"model", options_.model_id}}
                               .dump();
  httplib::Headers headers;
  if (!options_.token_env.empty()) {
    if (const char* token = std::getenv(options_.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(origin_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
    } else if (result->status != 200) {
      last_error = "HTTP " + std::to_string(result->status);
    } else {
      try {
        return response_from_json(json::parse(result->body));
      } catch (const json::exception& e) {
        fail(ErrorKind::kGeneration, "backend '" + options_.id +
                                         "' sent a malformed response: " + e.what());
      }
    }
    spdlog::warn("backend '{}' attempt {}/{} failed: {}", options_.id, attempt,
                 options_.attempts, last_error);
  }
  fail(ErrorKind::kTransport, "backend '" + options_.id + "' failed after " +
                                  std::to_string(options_.attempts) +
                                  " attempts: " + last_error);
}

}  // namespace paraforge
