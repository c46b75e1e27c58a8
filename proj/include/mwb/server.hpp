#pragma once

#include <cstdint>
#include <memory>

#include "mwb/collab.hpp"

namespace mwb {

// Network front ends of a CollabService: the project API over HTTP and the
// room protocol over WebSocket text frames, each on its own port.
class CollabServer {
 public:
  CollabServer(CollabService& service, std::uint16_t http_port, std::uint16_t ws_port, std::string host = "127.0.0.1");
  ~CollabServer();
  CollabServer(const CollabServer&) = delete;
  CollabServer& operator=(const CollabServer&) = delete;

  // Binds both ports (0 picks a free one) and serves on background threads.
  void start();
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t http_port() const;
  std::uint16_t ws_port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mwb
