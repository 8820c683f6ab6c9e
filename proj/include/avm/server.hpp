#pragma once

// Network front end: plain HTTP GET answers with a JSON status document, an
// HTTP upgrade opens the WebSocket message channel.

#include <cstdint>
#include <memory>
#include <string>

#include "avm/pipeline.hpp"

namespace avm::server {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  int frame_poll_ms = 100;  // newest frame is pushed at most this often
  int state_period_ms = 1000;
  int png_level = 1;
};

class Server {
 public:
  Server(service::Pipeline& pipeline, ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts the io thread. Throws std::system_error if binding fails.
  void start();
  void stop();
  unsigned short port() const;
  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace avm::server
