#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "ua/stream/pipeline.hpp"

namespace ua {

struct Endpoint {
  std::string host;
  unsigned short port = 0;
};

// Parses `host:port`. Throws InputError.
Endpoint parse_endpoint(std::string_view text);

struct ServerOptions {
  Endpoint bind{"127.0.0.1", 0};  // port 0 picks a free port
  // Static files served to plain HTTP GETs on the same port.
  std::optional<std::filesystem::path> console_dir;
};

// WebSocket server: one ServerConnection per socket, JSON text frames. Runs
// its network loop on a background thread.
class StreamServer {
 public:
  // Throws ConfigError for invalid resources or a missing console directory.
  StreamServer(std::shared_ptr<const StreamResources> resources, ServerOptions options);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  // Binds and starts serving. Throws InputError if the address cannot be bound.
  void start();
  // Closes every connection and joins the network thread. Idempotent.
  void stop();
  unsigned short port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Content type for a static console file.
std::string_view mime_type(const std::filesystem::path& path);

}  // namespace ua
