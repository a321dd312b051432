#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holotable/protocol.hpp"
#include "holotable/server.hpp"
#include "holotable/websocket.hpp"

namespace holotable {

// Socket front end for TableServer. One listening port serves both the
// length-prefixed protocol and WebSocket upgrades (a request starting with
// "GET " cannot be a valid length prefix, since it would declare ~1.2 GB).
class ServerRunner {
 public:
  explicit ServerRunner(ServerConfig config);  // throws std::invalid_argument
  ~ServerRunner();
  ServerRunner(const ServerRunner&) = delete;
  ServerRunner& operator=(const ServerRunner&) = delete;

  // Opens logs, binds and listens. Returns the bound port. Throws
  // std::system_error when the address is unavailable.
  int start();
  // Serves until the table shuts down or stop() is called.
  void run();
  // Safe from any thread.
  void stop();

  // Hooks on the table may be installed before run(); they fire on the
  // thread executing run().
  TableServer& table() { return table_; }
  // Sees every engine event after it is written to the log.
  std::function<void(const Event&)> event_observer;
  int port() const { return port_; }
  const std::string& events_path() const { return events_path_; }
  const std::string& server_log_path() const { return server_log_path_; }

 private:
  enum class Mode : std::uint8_t { kSniff, kTcp, kWsHandshake, kWs };
  struct Conn {
    int fd = -1;
    Mode mode = Mode::kSniff;
    std::string pending;  // bytes before the mode is known / HTTP head
    std::optional<protocol::Role> route;  // WebSocket endpoint role
    protocol::Decoder decoder;
    ws::FrameDecoder ws_decoder{true, protocol::kMaxFrameBytes};
    protocol::Encoder encoder;
    std::string out;
    bool closing = false;
    std::int64_t close_by = 0;
  };
  struct Child {
    int pid = 0;
    std::string role;
    int index = 0;
  };

  std::int64_t now_ms() const;
  void write_audit(nlohmann::json record);
  void accept_all();
  void read_from(ConnId id, Conn& c);
  void on_bytes(ConnId id, Conn& c, std::string_view bytes);
  void handle_ws_frames(ConnId id, Conn& c);
  void deliver(ConnId id, const protocol::Envelope& env);
  void flush_table_output();
  void drop(ConnId id);
  void write_to(Conn& c);
  void spawn_step();
  void spawn_child(const std::string& role, int index);
  void reap_children(bool wait);

  ServerConfig config_;
  TableServer table_;
  int listen_fd_ = -1;
  int wake_[2] = {-1, -1};
  int port_ = 0;
  std::atomic<bool> stop_{false};
  std::int64_t epoch_ = 0;
  ConnId next_conn_ = 1;
  std::map<ConnId, Conn> conns_;

  std::string events_path_, server_log_path_;
  std::ofstream events_log_, server_log_;

  std::vector<Child> children_;
  int spawn_next_ = 0;  // 0..seat_count-1 seats, seat_count admin, beyond: done
  std::int64_t spawn_waiting_since_ = 0;
  bool spawning_ = false;
};

enum class RecvStatus : std::uint8_t { kMessage, kTimeout, kClosed, kProtocolError };

struct Received {
  RecvStatus status = RecvStatus::kTimeout;
  protocol::Envelope envelope;
  std::string error;  // kProtocolError
};

// Blocking length-prefixed client used by the bots and the admin shell.
class Client {
 public:
  // Throws std::system_error when the connection is refused.
  Client(const std::string& host, int port);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send(const protocol::Message& m);  // throws std::system_error
  void send_raw(std::string_view bytes);
  Received receive(int timeout_ms);
  void close();

  // Observes every received byte, for transcript audits.
  std::function<void(std::string_view)> on_bytes;

 private:
  int fd_ = -1;
  protocol::Decoder decoder_;
  protocol::Encoder encoder_;
  bool closed_ = false;
};

}  // namespace holotable
