#ifndef PARAFORGE_HTTP_BACKEND_H_
#define PARAFORGE_HTTP_BACKEND_H_

#include <chrono>
#include <string>

#include "paraforge/paraphrase.h"

namespace paraforge {

struct HttpBackendOptions {
  std::string id;
  std::string model_id;
  std::string endpoint;   // e.g. "http://localhost:8080/translate"
  std::string token_env;  // environment variable holding a bearer token
  std::size_t concurrency = 1;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::seconds timeout{60};
};

// Remote model reached with a JSON POST:
//   request  {"text", "source_lang", "target_lang", "num_hypotheses", "model"}
//   response [{"text", "score"}, ...]  or  {"hypotheses": [...]}
// Failed attempts are retried with doubling backoff; after the last attempt
// the call fails with a transport error.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  const std::string& id() const override { return options_.id; }
  const std::string& model_id() const override { return options_.model_id; }
  std::size_t concurrency_limit() const override { return options_.concurrency; }
  BackendResponse generate(const BackendRequest& request) override;

 private:
  HttpBackendOptions options_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace paraforge

#endif  // PARAFORGE_HTTP_BACKEND_H_
