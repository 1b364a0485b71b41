#pragma once

#include <memory>
#include <string>
#include <thread>

#include "wrag/engine.hpp"

namespace httplib {
class Server;
}

namespace wrag {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t worker_threads = 8;
};

// JSON HTTP front end over a shared Engine:
//   POST /v1/query     QueryRequest -> QueryResponse
//   POST /v1/retrieve  QueryRequest -> RetrievalResult
//   GET  /v1/sources   registry summary (?profile=NAME narrows the weights)
//   GET  /healthz      liveness plus build info
// Handlers only read the engine, so requests run concurrently.
class Service {
 public:
  Service(std::shared_ptr<const Engine> engine, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread. Throws Io if the port cannot be
  // bound. Returns the bound port.
  int start();
  // Blocks in the calling thread until stop() is called from elsewhere.
  void run();
  // Stops accepting and waits for in-flight requests.
  void stop();

  int port() const noexcept { return port_; }

 private:
  void bind();

  std::shared_ptr<const Engine> engine_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// Parses a QueryRequest body. Throws InvalidArgument with a message suitable
// for a 400 reply.
Query parse_query_request(const Engine& engine, const std::string& body);

nlohmann::json build_info();

}  // namespace wrag
