#include "wrag/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "wrag/error.hpp"

namespace wrag {

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::EmptyInput:
      return 400;
    case ErrorKind::NotFound:
      return 404;
    case ErrorKind::Transport:
    case ErrorKind::ProviderFault:
      return 502;
    default:
      return 500;
  }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      const int status = status_for(e.kind());
      if (status >= 500) spdlog::error("{} {}: {}", req.method, req.path, e.what());
      reply(res, status, {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}});
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      reply(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

nlohmann::json build_info() {
  return {{"name", "wrag"}, {"version", "0.1.0"}, {"compiler", __VERSION__}, {"cxx_standard", __cplusplus}};
}

Query parse_query_request(const Engine& engine, const std::string& body) {
  const auto json = nlohmann::json::parse(body, nullptr, false);
  if (json.is_discarded() || !json.is_object()) fail(ErrorKind::InvalidArgument, "request body must be a JSON object");
  for (const auto& [key, value] : json.items()) {
    if (key != "query" && key != "top_k" && key != "profile") {
      fail(ErrorKind::InvalidArgument, "unknown field '" + key + "'");
    }
  }
  if (!json.contains("query") || !json["query"].is_string()) {
    fail(ErrorKind::InvalidArgument, "'query' must be a string");
  }
  std::optional<std::size_t> top_k;
  if (json.contains("top_k")) {
    if (!json["top_k"].is_number_integer() || json["top_k"].get<long long>() < 1) {
      fail(ErrorKind::InvalidArgument, "'top_k' must be a positive integer");
    }
    top_k = json["top_k"].get<std::size_t>();
  }
  std::optional<std::string> profile;
  if (json.contains("profile")) {
    if (!json["profile"].is_string()) fail(ErrorKind::InvalidArgument, "'profile' must be a string");
    profile = json["profile"].get<std::string>();
    if (!engine.config().profile_set().profiles().count(*profile)) {
      fail(ErrorKind::InvalidArgument, "unknown profile '" + *profile + "'");
    }
  }
  return engine.make_query(json["query"].get<std::string>(), top_k, profile);
}

Service::Service(std::shared_ptr<const Engine> engine, ServiceOptions options)
    : engine_(std::move(engine)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  const auto threads = options_.worker_threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // The library default sets SO_REUSEPORT, which would let a second server
  // silently share a port that is already serving.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  server_->Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}, {"build", build_info()}});
  }));
  server_->Post("/v1/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, engine_->query_response(parse_query_request(*engine_, req.body)));
  }));
  server_->Post("/v1/retrieve", guarded([this](const httplib::Request& req, httplib::Response& res) {
    reply(res, 200, engine_->retrieve_response(parse_query_request(*engine_, req.body)));
  }));
  server_->Get("/v1/sources", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> profile;
    if (req.has_param("profile")) profile = req.get_param_value("profile");
    reply(res, 200, engine_->sources_summary(profile));
  }));
}

Service::~Service() { stop(); }

void Service::bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else if (server_->bind_to_port(options_.host, options_.port)) {
    port_ = options_.port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) {
    fail(ErrorKind::Io, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  spdlog::info("listening on {}:{}", options_.host, port_);
}

int Service::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Service::run() {
  bind();
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace wrag
