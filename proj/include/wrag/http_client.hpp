#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

namespace wrag {

struct HttpEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

// Splits "http://host:port/v1/embeddings" into base and path. Throws Config
// on anything that is not an http(s) URL.
HttpEndpoint parse_endpoint(const std::string& url);

// JSON-over-HTTP POST with timeout, bounded retries and an in-flight limit.
// Connection failures, timeouts and 5xx replies are retried and finally
// surface as Transport errors; 4xx replies and non-JSON bodies are
// ProviderFault.
class JsonHttpClient {
 public:
  JsonHttpClient(const std::string& url, int timeout_ms, int retries, int max_in_flight);

  nlohmann::json post(const nlohmann::json& body) const;
  const std::string& url() const noexcept { return url_; }

 private:
  std::string url_;
  HttpEndpoint endpoint_;
  int timeout_ms_;
  int retries_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace wrag
