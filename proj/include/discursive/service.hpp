#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "discursive/bundle.hpp"

namespace discursive::service {

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using Query = std::map<std::string, std::string>;

/// Read-only view over one bundle. All request handling is a pure function of
/// the loaded bundle, so concurrent calls are safe and repeat calls agree.
class Service {
 public:
  /// A bundle that fails validation is remembered; every /api request then
  /// answers 409 with the validation message.
  explicit Service(const std::filesystem::path& bundle_dir,
                   std::optional<std::filesystem::path> static_dir = std::nullopt);

  Response handle(std::string_view method, std::string_view path, const Query& query) const;

  bool ok() const { return bundle_ != nullptr; }
  const std::string& load_error() const { return load_error_; }
  const bundle::LoadedBundle* bundle() const { return bundle_.get(); }

 private:
  Response landscape() const;
  Response topics() const;
  Response topic_speeches(std::string_view topic, const Query& query) const;
  Response speech(std::string_view id) const;
  Response network(const Query& query) const;
  Response static_file(std::string_view path) const;

  std::shared_ptr<const bundle::LoadedBundle> bundle_;
  std::string load_error_;
  std::optional<std::filesystem::path> static_dir_;
};

/// Port from the environment variable DISCURSIVE_PORT if set and valid,
/// otherwise `fallback`.
int resolve_port(int fallback);

/// HTTP front end over a Service. bind() then listen() blocks until stop()
/// is called from another thread.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  bool listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving HTTP on host:port until the process is stopped.
/// Returns false if the socket could not be bound.
bool run_server(const Service& service, const std::string& host, int port);

}  // namespace discursive::service
