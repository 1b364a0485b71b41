#include "wrag/http_client.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "wrag/error.hpp"

namespace wrag {

HttpEndpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::Config, "endpoint '" + url + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    fail(ErrorKind::Config, "endpoint '" + url + "' must use http or https");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  HttpEndpoint endpoint;
  endpoint.base = url.substr(0, path_start);
  endpoint.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (endpoint.base.size() <= scheme_end + 3) fail(ErrorKind::Config, "endpoint '" + url + "' has no host");
  return endpoint;
}

JsonHttpClient::JsonHttpClient(const std::string& url, int timeout_ms, int retries, int max_in_flight)
    : url_(url),
      endpoint_(parse_endpoint(url)),
      timeout_ms_(timeout_ms),
      retries_(retries),
      in_flight_(std::make_unique<std::counting_semaphore<>>(max_in_flight)) {}

nlohmann::json JsonHttpClient::post(const nlohmann::json& body) const {
  const std::string payload = body.dump();
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*in_flight_};

  httplib::Client client(endpoint_.base);
  const auto timeout = std::chrono::milliseconds(timeout_ms_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  std::string last_cause;
  const int attempts = retries_ + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(endpoint_.path, payload, "application/json");
    if (!res) {
      last_cause = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_cause = "HTTP " + std::to_string(res->status);
    } else if (res->status >= 400) {
      fail(ErrorKind::ProviderFault,
           url_ + " rejected request with HTTP " + std::to_string(res->status) + ": " + res->body);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error&) {
        fail(ErrorKind::ProviderFault, url_ + " returned a non-JSON body");
      }
    }
    spdlog::debug("POST {} attempt {}/{} failed: {}", url_, attempt, attempts, last_cause);
  }
  fail(ErrorKind::Transport,
       "POST " + url_ + " failed after " + std::to_string(attempts) + " attempt(s): " + last_cause);
}

}  // namespace wrag
