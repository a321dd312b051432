#include "holotable/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <system_error>

extern char** environ;

namespace holotable {

using nlohmann::json;
namespace pr = protocol;

namespace {

constexpr std::size_t kMaxHttpHead = 8192;
constexpr std::size_t kMaxPendingOut = 64u << 20;
constexpr std::int64_t kCloseGraceMs = 2000;
constexpr std::int64_t kSpawnWaitMs = 10000;

std::system_error sys_error(const std::string& what) { return std::system_error(errno, std::generic_category(), what); }

std::optional<pr::Role> route_role(std::string_view path) {
  path = path.substr(0, path.find('?'));
  if (path == "/seat") return pr::Role::kSeat;
  if (path == "/table") return pr::Role::kSpectator;
  if (path == "/admin") return pr::Role::kAdmin;
  return std::nullopt;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::int64_t steady_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string self_exe() {
  std::error_code ec;
  auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::string() : p.string();
}

}  // namespace

ServerRunner::ServerRunner(ServerConfig config) : config_(config), table_(std::move(config)), epoch_(steady_ms()) {
  table_.on_audit = [this](const json& j) { write_audit(j); };
  table_.on_engine_event = [this](const Event& e) {
    if (events_log_.is_open()) events_log_ << pr::to_json(e).dump() << '\n' << std::flush;
    if (event_observer) event_observer(e);
  };
}

ServerRunner::~ServerRunner() {
  for (auto& [id, c] : conns_) ::close(c.fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
  for (int fd : wake_)
    if (fd >= 0) ::close(fd);
  reap_children(true);
}

std::int64_t ServerRunner::now_ms() const { return steady_ms() - epoch_; }

void ServerRunner::write_audit(json record) {
  if (!server_log_.is_open()) return;
  record["ts"] = utc_timestamp();
  server_log_ << record.dump() << '\n' << std::flush;
}

int ServerRunner::start() {
  if (!config_.log_dir.empty()) {
    std::filesystem::create_directories(config_.log_dir);
    events_path_ = (std::filesystem::path(config_.log_dir) / "events.jsonl").string();
    server_log_path_ = (std::filesystem::path(config_.log_dir) / "server.log").string();
    events_log_.open(events_path_, std::ios::trunc);
    server_log_.open(server_log_path_, std::ios::trunc);
    if (!events_log_ || !server_log_) throw std::system_error(errno, std::generic_category(), "open logs");
  }

  listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw sys_error("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(config_.port));
  ::inet_pton(AF_INET, config_.bind_address.c_str(), &addr.sin_addr);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw sys_error("bind " + config_.bind_address + ":" + std::to_string(config_.port));
  if (::listen(listen_fd_, 64) != 0) throw sys_error("listen");
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  set_nonblocking(listen_fd_);
  if (::pipe2(wake_, O_CLOEXEC | O_NONBLOCK) != 0) throw sys_error("pipe");

  json cfg = config_.to_json();
  cfg["port"] = port_;
  write_audit({{"event", "listening"}, {"bind", config_.bind_address}, {"port", port_},
               {"seed", table_.seed().value}, {"config", cfg}, {"mono_ms", now_ms()}});
  spawning_ = config_.spawn_clients;
  if (spawning_) table_.hold_hands(true, 0);
  return port_;
}

void ServerRunner::stop() {
  stop_ = true;
  if (wake_[1] >= 0) {
    const char b = 1;
    [[maybe_unused]] auto n = ::write(wake_[1], &b, 1);
  }
}

void ServerRunner::run() {
  std::optional<std::int64_t> finish_by;
  while (true) {
    const std::int64_t now = now_ms();
    if (stop_ && !table_.finished()) {
      table_.shutdown_now("stop", now);
      flush_table_output();
    }
    if (table_.finished()) {
      if (!finish_by) finish_by = now + kCloseGraceMs;
      bool pending = false;
      for (auto& [id, c] : conns_) pending |= !c.out.empty();
      if (!pending || now >= *finish_by) break;
    }
    if (spawning_) spawn_step();
    reap_children(false);

    int timeout = 100;
    if (auto d = table_.next_deadline()) timeout = static_cast<int>(std::clamp<std::int64_t>(*d - now, 0, 100));

    std::vector<pollfd> fds;
    std::vector<ConnId> ids;
    fds.push_back({listen_fd_, static_cast<short>(table_.finished() ? 0 : POLLIN), 0});
    fds.push_back({wake_[0], POLLIN, 0});
    for (auto& [id, c] : conns_) {
      short ev = c.closing ? 0 : POLLIN;
      if (!c.out.empty()) ev |= POLLOUT;
      fds.push_back({c.fd, ev, 0});
      ids.push_back(id);
    }
    const int n = ::poll(fds.data(), fds.size(), timeout);
    if (n < 0 && errno != EINTR) throw sys_error("poll");
    if (fds[1].revents & POLLIN) {
      char buf[64];
      while (::read(wake_[0], buf, sizeof buf) > 0) {
      }
    }
    if (fds[0].revents & POLLIN) accept_all();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto it = conns_.find(ids[i]);
      if (it == conns_.end()) continue;
      const short re = fds[i + 2].revents;
      if (re & (POLLIN | POLLHUP | POLLERR)) read_from(ids[i], it->second);
      it = conns_.find(ids[i]);
      if (it != conns_.end() && (re & POLLOUT)) write_to(it->second);
    }
    table_.on_tick(now_ms());
    flush_table_output();

    const std::int64_t after = now_ms();
    for (auto it = conns_.begin(); it != conns_.end();) {
      Conn& c = it->second;
      if (!c.out.empty()) write_to(c);
      if (c.closing && (c.out.empty() || after >= c.close_by)) {
        ::close(c.fd);
        it = conns_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& [id, c] : conns_) ::close(c.fd);
  conns_.clear();
  write_audit({{"event", "stopped"}, {"hands_played", table_.hands_played()}, {"mono_ms", now_ms()}});
}

void ServerRunner::accept_all() {
  while (true) {
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_NONBLOCK | SOCK_CLOEXEC);
    if (fd < 0) return;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    const ConnId id = next_conn_++;
    Conn& c = conns_[id];
    c.fd = fd;
    table_.on_connect(id, now_ms());
    flush_table_output();
  }
}

void ServerRunner::drop(ConnId id) {
  auto it = conns_.find(id);
  if (it == conns_.end()) return;
  ::close(it->second.fd);
  conns_.erase(it);
  table_.on_disconnect(id, now_ms());
  flush_table_output();
}

void ServerRunner::read_from(ConnId id, Conn& c) {
  char buf[65536];
  while (true) {
    const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
    if (n > 0) {
      if (!c.closing) on_bytes(id, c, std::string_view(buf, static_cast<std::size_t>(n)));
      if (!conns_.count(id)) return;
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return;
    if (n < 0 && errno == EINTR) continue;
    // peer closed or reset
    if (c.mode == Mode::kTcp && !c.closing) {
      if (auto err = c.decoder.finish()) table_.on_protocol_error(id, *err, now_ms());
    }
    drop(id);
    return;
  }
}

void ServerRunner::on_bytes(ConnId id, Conn& c, std::string_view bytes) {
  if (c.mode == Mode::kSniff || c.mode == Mode::kWsHandshake) {
    c.pending.append(bytes);
    if (c.mode == Mode::kSniff) {
      if (c.pending.size() < 4) return;
      if (c.pending.compare(0, 4, "GET ") == 0) {
        c.mode = Mode::kWsHandshake;
      } else {
        c.mode = Mode::kTcp;
        c.decoder.feed(c.pending);
        c.pending.clear();
      }
    }
    if (c.mode == Mode::kWsHandshake) {
      const std::size_t end = c.pending.find("\r\n\r\n");
      if (end == std::string::npos) {
        if (c.pending.size() > kMaxHttpHead) {
          c.out += ws::bad_request_response("request head too large");
          c.closing = true;
          c.close_by = now_ms() + kCloseGraceMs;
          table_.on_disconnect(id, now_ms());
        }
        return;
      }
      auto req = ws::parse_upgrade(std::string_view(c.pending).substr(0, end + 4));
      if (auto* why = std::get_if<std::string>(&req)) {
        c.out += ws::bad_request_response(*why);
        c.closing = true;
        c.close_by = now_ms() + kCloseGraceMs;
        table_.on_disconnect(id, now_ms());
        return;
      }
      const auto& up = std::get<ws::UpgradeRequest>(req);
      c.route = route_role(up.path);
      if (!c.route) {
        c.out += ws::not_found_response(up.path);
        c.closing = true;
        c.close_by = now_ms() + kCloseGraceMs;
        table_.on_disconnect(id, now_ms());
        return;
      }
      c.out += ws::upgrade_response(up.key);
      write_audit({{"event", "websocket_upgrade"}, {"conn", id}, {"path", up.path}, {"mono_ms", now_ms()}});
      c.mode = Mode::kWs;
      c.ws_decoder.feed(std::string_view(c.pending).substr(end + 4));
      c.pending.clear();
      handle_ws_frames(id, c);
      return;
    }
  } else if (c.mode == Mode::kWs) {
    c.ws_decoder.feed(bytes);
    handle_ws_frames(id, c);
    return;
  } else {
    c.decoder.feed(bytes);
  }
  // length-prefixed stream
  while (conns_.count(id) && !c.closing) {
    auto r = c.decoder.next();
    if (!r) break;
    if (auto* env = std::get_if<pr::Envelope>(&*r)) {
      deliver(id, *env);
    } else {
      table_.on_protocol_error(id, std::get<pr::DecodeError>(*r), now_ms());
      flush_table_output();
    }
  }
}

void ServerRunner::handle_ws_frames(ConnId id, Conn& c) {
  while (conns_.count(id) && !c.closing) {
    auto r = c.ws_decoder.next();
    if (!r) return;
    if (auto* why = std::get_if<std::string>(&*r)) {
      table_.on_protocol_error(id, {pr::DecodeErrorCode::kMalformedBody, "websocket: " + *why}, now_ms());
      table_.on_disconnect(id, now_ms());
      flush_table_output();
      c.out += ws::encode_frame(ws::Opcode::kClose, std::string("\x03\xea", 2));  // 1002
      c.closing = true;
      c.close_by = now_ms() + kCloseGraceMs;
      return;
    }
    auto& f = std::get<ws::Frame>(*r);
    switch (f.opcode) {
      case ws::Opcode::kText:
      case ws::Opcode::kBinary: {
        auto res = c.decoder.accept_body(f.payload);
        if (auto* env = std::get_if<pr::Envelope>(&res)) {
          deliver(id, *env);
        } else {
          table_.on_protocol_error(id, std::get<pr::DecodeError>(res), now_ms());
          flush_table_output();
        }
        break;
      }
      case ws::Opcode::kPing:
        c.out += ws::encode_frame(ws::Opcode::kPong, f.payload);
        break;
      case ws::Opcode::kClose:
        c.out += ws::encode_frame(ws::Opcode::kClose, f.payload.substr(0, 2));
        c.closing = true;
        c.close_by = now_ms() + kCloseGraceMs;
        table_.on_disconnect(id, now_ms());
        flush_table_output();
        return;
      default:
        break;
    }
  }
}

void ServerRunner::deliver(ConnId id, const pr::Envelope& env) {
  Conn& c = conns_.at(id);
  if (const auto* h = std::get_if<pr::Hello>(&env.message); h && c.route && h->role != *c.route) {
    write_audit({{"event", "wrong_route"}, {"conn", id}, {"role", pr::to_string(h->role)}, {"mono_ms", now_ms()}});
    c.out += ws::encode_frame(ws::Opcode::kText,
                              c.encoder.body(pr::Error{"wrong_route", "this endpoint serves the " +
                                                                          std::string(pr::to_string(*c.route)) + " role"}));
    c.out += ws::encode_frame(ws::Opcode::kClose, std::string("\x03\xf0", 2));  // 1008
    c.closing = true;
    c.close_by = now_ms() + kCloseGraceMs;
    table_.on_disconnect(id, now_ms());
    return;
  }
  table_.on_message(id, env, now_ms());
  flush_table_output();
}

void ServerRunner::flush_table_output() {
  for (auto& o : table_.take_outbox()) {
    auto it = conns_.find(o.conn);
    if (it == conns_.end()) continue;
    Conn& c = it->second;
    try {
      if (c.mode == Mode::kWs) {
        std::string body = c.encoder.body(o.message);
        if (body.size() > pr::kMaxFrameBytes) throw pr::EncodeError("body exceeds 1 MiB");
        c.out += ws::encode_frame(ws::Opcode::kText, body);
      } else {
        c.out += c.encoder.frame(o.message);
      }
    } catch (const pr::EncodeError& e) {
      write_audit({{"event", "encode_error"}, {"conn", o.conn}, {"detail", e.what()}, {"mono_ms", now_ms()}});
    }
    if (c.out.size() > kMaxPendingOut && !c.closing) {
      write_audit({{"event", "slow_consumer"}, {"conn", o.conn}, {"mono_ms", now_ms()}});
      c.out.clear();
      c.closing = true;
      c.close_by = 0;
      table_.on_disconnect(o.conn, now_ms());
    }
  }
  for (ConnId id : table_.take_closes()) {
    auto it = conns_.find(id);
    if (it == conns_.end() || it->second.closing) continue;
    Conn& c = it->second;
    if (c.mode == Mode::kWs) c.out += ws::encode_frame(ws::Opcode::kClose, std::string("\x03\xe8", 2));  // 1000
    c.closing = true;
    c.close_by = now_ms() + kCloseGraceMs;
  }
}

void ServerRunner::write_to(Conn& c) {
  while (!c.out.empty()) {
    const ssize_t n = ::send(c.fd, c.out.data(), c.out.size(), MSG_NOSIGNAL);
    if (n > 0) {
      c.out.erase(0, static_cast<std::size_t>(n));
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return;
    c.out.clear();  // peer gone; the read side reports the disconnect
    return;
  }
}

// ---------------------------------------------------------------------------
// Spawn mode: seat clients 0..n-1 one at a time, each after the previous one
// has taken its seat, then the admin client. No hand starts until the admin
// has connected or its wait has run out.

void ServerRunner::spawn_step() {
  const std::int64_t now = now_ms();
  if (spawn_next_ > config_.seat_count) {
    const bool joined = table_.admin_logins() > 0;
    if (!joined && now - spawn_waiting_since_ < kSpawnWaitMs) return;
    if (!joined) write_audit({{"event", "spawn_timeout"}, {"index", 0}, {"role", "admin"}, {"mono_ms", now}});
    spawning_ = false;
    table_.hold_hands(false, now);
    flush_table_output();
    return;
  }
  if (spawn_next_ > 0 && spawn_next_ <= config_.seat_count) {
    const bool seated = table_.seated_count() >= spawn_next_;
    if (!seated && now - spawn_waiting_since_ < kSpawnWaitMs) return;
    if (!seated) write_audit({{"event", "spawn_timeout"}, {"index", spawn_next_ - 1}, {"mono_ms", now}});
  }
  if (spawn_next_ < config_.seat_count) {
    spawn_child("seat", spawn_next_);
  } else {
    spawn_child("admin", 0);
  }
  ++spawn_next_;
  spawn_waiting_since_ = now;
}

void ServerRunner::spawn_child(const std::string& role, int index) {
  const std::string exe = config_.client_exe.empty() ? self_exe() : config_.client_exe;
  std::vector<std::string> args = {exe, role == "seat" ? "bot" : "admin", "--host", config_.bind_address, "--port",
                                   std::to_string(port_)};
  if (role == "seat") {
    args.push_back("--fallback");
    args.push_back("check_fold");
  }
  std::vector<std::string> env;
  for (char** e = environ; *e; ++e)
    if (std::string_view(*e).rfind("HOLOTABLE_PIN=", 0) != 0) env.emplace_back(*e);
  if (role == "admin") env.push_back("HOLOTABLE_PIN=" + config_.pin);
  std::vector<char*> argv, envp;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  for (auto& e : env) envp.push_back(e.data());
  envp.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, exe.c_str(), nullptr, nullptr, argv.data(), envp.data());
  if (rc != 0) {
    write_audit({{"event", "spawn_failed"}, {"role", role}, {"index", index}, {"error", std::strerror(rc)},
                 {"mono_ms", now_ms()}});
    return;
  }
  children_.push_back({pid, role, index});
  write_audit({{"event", "spawn"}, {"role", role}, {"index", index}, {"pid", pid}, {"mono_ms", now_ms()}});
}

void ServerRunner::reap_children(bool wait) {
  const std::int64_t give_up = now_ms() + 3000;
  bool signalled = false;
  while (!children_.empty()) {
    for (auto it = children_.begin(); it != children_.end();) {
      int status = 0;
      const pid_t r = ::waitpid(it->pid, &status, WNOHANG);
      if (r == it->pid || (r < 0 && errno == ECHILD)) {
        json rec = {{"event", "child_exit"}, {"role", it->role}, {"index", it->index}, {"pid", it->pid},
                    {"mono_ms", now_ms()}};
        if (r == it->pid && WIFEXITED(status)) rec["status"] = WEXITSTATUS(status);
        if (r == it->pid && WIFSIGNALED(status)) rec["signal"] = WTERMSIG(status);
        write_audit(rec);
        it = children_.erase(it);
      } else {
        ++it;
      }
    }
    if (!wait || children_.empty()) return;
    if (!signalled && now_ms() >= give_up) {
      for (auto& c : children_) ::kill(c.pid, SIGTERM);
      signalled = true;
    }
    ::usleep(10000);
  }
}

// ---------------------------------------------------------------------------

Client::Client(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw sys_error("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw std::system_error(EINVAL, std::generic_category(), "bad host " + host);
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    auto err = sys_error("connect " + host + ":" + std::to_string(port));
    ::close(fd_);
    throw err;
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

Client::~Client() { close(); }

void Client::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Client::send_raw(std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw sys_error("send");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void Client::send(const pr::Message& m) { send_raw(encoder_.frame(m)); }

Received Client::receive(int timeout_ms) {
  const std::int64_t until = steady_ms() + timeout_ms;
  while (true) {
    if (auto r = decoder_.next()) {
      if (auto* env = std::get_if<pr::Envelope>(&*r)) return {RecvStatus::kMessage, std::move(*env), {}};
      const auto& err = std::get<pr::DecodeError>(*r);
      return {RecvStatus::kProtocolError, {}, std::string(pr::to_string(err.code)) + ": " + err.detail};
    }
    if (closed_ || fd_ < 0) return {RecvStatus::kClosed, {}, {}};
    const std::int64_t left = until - steady_ms();
    if (left <= 0) return {RecvStatus::kTimeout, {}, {}};
    pollfd p{fd_, POLLIN, 0};
    const int n = ::poll(&p, 1, static_cast<int>(left));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) continue;
    char buf[65536];
    const ssize_t got = ::recv(fd_, buf, sizeof buf, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) {
      closed_ = true;
      continue;
    }
    const std::string_view bytes(buf, static_cast<std::size_t>(got));
    if (on_bytes) on_bytes(bytes);
    decoder_.feed(bytes);
  }
}

}  // namespace holotable
