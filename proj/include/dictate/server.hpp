#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dictate/service.hpp"

namespace dictate {

// HTTP and WebSocket front end for a Service on one port. A WebSocket upgrade
// on /session/{id} carries one JSON client message per text frame; every
// reply goes back as its own text frame. Each connection gets a thread.
class Server {
 public:
  explicit Server(Service& service);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting; port 0 picks a free port. Returns the port.
  unsigned short start(const std::string& address, unsigned short port);
  // Closes the listener and every open connection, then joins their threads.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dictate
