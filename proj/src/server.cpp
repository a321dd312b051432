#include "holotable/server.hpp"

#include <arpa/inet.h>
#include <openssl/crypto.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace holotable {

using nlohmann::json;
namespace pr = protocol;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

bool valid_pin_format(std::string_view pin) {
  return pin.size() == 6 && std::all_of(pin.begin(), pin.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void ServerConfig::validate() const {
  require(valid_pin_format(pin), "pin must be exactly 6 ASCII digits");
  in_addr addr{};
  require(inet_pton(AF_INET, bind_address.c_str(), &addr) == 1, "bind address must be an IPv4 address");
  require(port >= 0 && port <= 65535, "port out of range");
  require(seat_count >= 2 && seat_count <= kMaxSeats, "seat count must be between 2 and 6");
  table_config().validate();
  require(lockout.max_attempts >= 1, "lockout max_attempts must be at least 1");
  require(lockout.lock_seconds >= 0, "lockout lock_seconds must be non-negative");
  require(min_players >= 2 && min_players <= seat_count, "min_players must be between 2 and seat count");
  require(max_hands >= 0, "max_hands must be non-negative");
  require(seat_stacks.size() <= static_cast<std::size_t>(seat_count), "more seat_stacks than seats");
  for (Chips c : seat_stacks) require(c > 0, "seat_stacks entries must be positive");
}

TableConfig ServerConfig::table_config() const {
  TableConfig t = table;
  t.seat_count = seat_count;
  return t;
}

void ServerConfig::merge_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  take(j, "bind", bind_address);
  take(j, "port", port);
  take(j, "pin", pin);
  take(j, "seats", seat_count);
  take(j, "sb", table.small_blind);
  take(j, "bb", table.big_blind);
  take(j, "stack", table.starting_stack);
  if (j.contains("timeout")) table.action_timeout_ms = std::llround(j.at("timeout").get<double>() * 1000.0);
  if (j.contains("seed") && !j.at("seed").is_null()) seed = Seed{j.at("seed").get<std::uint64_t>()};
  take(j, "spawn_clients", spawn_clients);
  take(j, "log_dir", log_dir);
  if (j.contains("lockout")) {
    take(j.at("lockout"), "max_attempts", lockout.max_attempts);
    take(j.at("lockout"), "lock_seconds", lockout.lock_seconds);
  }
  take(j, "min_players", min_players);
  take(j, "max_hands", max_hands);
  take(j, "rebuy", auto_rebuy);
  take(j, "seat_stacks", seat_stacks);
  take(j, "client_exe", client_exe);
}

json ServerConfig::to_json() const {
  json j = {{"bind", bind_address},
            {"port", port},
            {"seats", seat_count},
            {"sb", table.small_blind},
            {"bb", table.big_blind},
            {"stack", table.starting_stack},
            {"timeout", static_cast<double>(table.action_timeout_ms) / 1000.0},
            {"spawn_clients", spawn_clients},
            {"log_dir", log_dir},
            {"lockout", {{"max_attempts", lockout.max_attempts}, {"lock_seconds", lockout.lock_seconds}}},
            {"min_players", min_players},
            {"max_hands", max_hands},
            {"rebuy", auto_rebuy},
            {"seat_stacks", seat_stacks},
            {"client_exe", client_exe}};
  j["seed"] = seed ? json(seed->value) : json(nullptr);
  return j;  // the pin is deliberately left out
}

std::string_view to_string(GateResult r) {
  switch (r) {
    case GateResult::kGranted: return "granted";
    case GateResult::kDenied: return "denied";
    case GateResult::kLocked: return "locked";
  }
  return "?";
}

GateOutcome AdminGate::attempt(const std::optional<std::string>& pin, TimeMs now) {
  if (state_.locked_until) {
    if (now < *state_.locked_until) {
      const TimeMs left = *state_.locked_until - now;
      return {GateResult::kLocked, "locked for " + std::to_string((left + 999) / 1000) + " s", left};
    }
    state_.locked_until.reset();
  }
  const bool format_ok = pin && valid_pin_format(*pin);
  if (format_ok && CRYPTO_memcmp(pin->data(), pin_.data(), pin_.size()) == 0) {
    state_.failed_attempts = 0;
    return {GateResult::kGranted, "", 0};
  }
  if (++state_.failed_attempts >= policy_.max_attempts) {
    state_.failed_attempts = 0;
    const TimeMs lock = TimeMs{policy_.lock_seconds} * 1000;
    state_.locked_until = now + lock;
    return {GateResult::kLocked, "locked for " + std::to_string(policy_.lock_seconds) + " s", lock};
  }
  return {GateResult::kDenied, format_ok ? "mismatch" : "format", 0};
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kIdle: return "idle";
    case Phase::kHandInProgress: return "hand_in_progress";
    case Phase::kPaused: return "paused";
    case Phase::kShuttingDown: return "shutting_down";
  }
  return "?";
}

// ---------------------------------------------------------------------------

namespace {

Seed pick_seed(const std::optional<Seed>& s) {
  if (s) return *s;
  std::random_device rd;
  return Seed{(std::uint64_t{rd()} << 32) | rd()};
}

}  // namespace

TableServer::TableServer(ServerConfig config)
    : config_((config.validate(), std::move(config))),
      next_config_(config_.table_config()),
      gate_(config_.pin, config_.lockout),
      seed_(pick_seed(config_.seed)),
      hand_seeds_(seed_.value) {}

int TableServer::seated_count() const {
  return static_cast<int>(std::count_if(seats_.begin(), seats_.end(), [](const SeatRecord& r) { return r.occupied; }));
}

std::array<Chips, kMaxSeats> TableServer::net_chips() const {
  auto net = settled_net_;
  for (std::size_t i = 0; i < net.size(); ++i)
    if (seats_[i].occupied) net[i] += seats_[i].stack - seats_[i].bought_in;
  return net;
}

std::vector<Outbound> TableServer::take_outbox() { return std::exchange(outbox_, {}); }
std::vector<ConnId> TableServer::take_closes() { return std::exchange(closes_, {}); }

void TableServer::send(ConnId conn, pr::Message m) { outbox_.push_back({conn, std::move(m)}); }

void TableServer::audit(json record, TimeMs now) {
  record["mono_ms"] = now;
  if (on_audit) on_audit(record);
}

void TableServer::close(ConnId conn) {
  auto it = sessions_.find(conn);
  if (it == sessions_.end()) return;
  sessions_.erase(it);
  if (admin_ == conn) admin_.reset();
  closes_.push_back(conn);
}

void TableServer::send_error_and_close(ConnId conn, std::string code, std::string detail) {
  send(conn, pr::Error{std::move(code), std::move(detail)});
  close(conn);
}

void TableServer::on_connect(ConnId conn, TimeMs now) {
  if (finished()) {
    closes_.push_back(conn);
    return;
  }
  sessions_[conn] = Session{};
  audit({{"event", "connect"}, {"conn", conn}}, now);
}

void TableServer::on_message(ConnId conn, const pr::Envelope& env, TimeMs now) {
  auto it = sessions_.find(conn);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  const pr::Message& m = env.message;

  if (!s.greeted) {
    if (const auto* h = std::get_if<pr::Hello>(&m)) {
      handle_hello(conn, s, *h, now);
    } else {
      send_error_and_close(conn, "expected_hello", "first message must be hello");
    }
    return;
  }
  if (std::holds_alternative<pr::Hello>(m)) {
    send(conn, pr::Error{"already_joined", "hello already accepted on this connection"});
  } else if (const auto* a = std::get_if<pr::SubmitAction>(&m)) {
    if (s.role != pr::Role::kSeat) {
      send(conn, pr::Error{"forbidden", "only seats submit actions"});
      return;
    }
    handle_submit(conn, s, *a, now);
  } else if (const auto* c = std::get_if<pr::AdminCmd>(&m)) {
    if (s.role != pr::Role::kAdmin) {
      send(conn, pr::Error{"unauthorized", "admin session required"});
      audit({{"event", "admin_cmd_rejected"}, {"conn", conn}, {"cmd", c->cmd}}, now);
      return;
    }
    handle_admin(conn, *c, now);
  } else if (std::holds_alternative<pr::Ping>(m)) {
    send(conn, pr::Pong{});
  } else if (std::holds_alternative<pr::Pong>(m)) {
    // keepalive reply, nothing to do
  } else {
    send(conn, pr::Error{"unexpected_message", std::string(pr::type_name(m)) + " is sent by the server only"});
  }
}

void TableServer::on_protocol_error(ConnId conn, const pr::DecodeError& err, TimeMs) {
  auto it = sessions_.find(conn);
  if (it == sessions_.end()) return;
  const bool fatal = !it->second.greeted || err.code == pr::DecodeErrorCode::kFrameTooLarge ||
                     err.code == pr::DecodeErrorCode::kTruncated;
  if (fatal) {
    send_error_and_close(conn, std::string(pr::to_string(err.code)), err.detail);
  } else {
    send(conn, pr::Error{std::string(pr::to_string(err.code)), err.detail});
  }
}

void TableServer::on_disconnect(ConnId conn, TimeMs now) {
  auto it = sessions_.find(conn);
  if (it == sessions_.end()) return;
  const Session s = it->second;
  sessions_.erase(it);
  if (admin_ == conn) admin_.reset();
  audit({{"event", "disconnect"}, {"conn", conn}, {"role", s.greeted ? pr::to_string(s.role) : "none"}}, now);
  if (s.greeted && s.role == pr::Role::kSeat) release_seat(s.seat, now);
}

void TableServer::handle_hello(ConnId conn, Session& s, const pr::Hello& h, TimeMs now) {
  switch (h.role) {
    case pr::Role::kSeat: {
      SeatId seat = -1;
      for (SeatId i = 0; i < config_.seat_count; ++i) {
        if (!seats_[static_cast<std::size_t>(i)].occupied) {
          seat = i;
          break;
        }
      }
      if (seat < 0) {
        audit({{"event", "seat_refused"}, {"conn", conn}, {"reason", "table_full"}}, now);
        send_error_and_close(conn, "table_full", "all seats are taken");
        return;
      }
      auto& r = seats_[static_cast<std::size_t>(seat)];
      r = SeatRecord{};
      r.occupied = true;
      r.conn = conn;
      const auto idx = static_cast<std::size_t>(seat);
      r.stack = idx < config_.seat_stacks.size() ? config_.seat_stacks[idx] : next_config_.starting_stack;
      r.bought_in = r.stack;
      s.greeted = true;
      s.role = pr::Role::kSeat;
      s.seat = seat;
      audit({{"event", "seat_join"}, {"conn", conn}, {"seat", seat}, {"stack", r.stack}}, now);
      send(conn, pr::Welcome{pr::Role::kSeat, seat, next_config_});
      broadcast_snapshots();
      if (phase_ == Phase::kIdle && start_hand_if_ready(now)) drive(now);
      return;
    }
    case pr::Role::kSpectator:
      s.greeted = true;
      s.role = pr::Role::kSpectator;
      audit({{"event", "spectator_join"}, {"conn", conn}}, now);
      send(conn, pr::Welcome{pr::Role::kSpectator, std::nullopt, next_config_});
      send(conn, pr::Snapshot{pr::redact_for(hand_ ? &*hand_ : nullptr, table_meta(false), pr::ViewLevel::spectator())});
      return;
    case pr::Role::kAdmin: {
      if (admin_) {
        audit({{"event", "admin_refused"}, {"conn", conn}, {"reason", "admin_busy"}}, now);
        send_error_and_close(conn, "admin_busy", "another admin session is active");
        return;
      }
      const GateOutcome g = gate_.attempt(h.pin, now);
      audit({{"event", "admin_gate"}, {"conn", conn}, {"result", to_string(g.result)}, {"detail", g.detail}}, now);
      if (g.result == GateResult::kGranted) {
        s.greeted = true;
        s.role = pr::Role::kAdmin;
        admin_ = conn;
        ++admin_logins_;
        send(conn, pr::Welcome{pr::Role::kAdmin, std::nullopt, next_config_});
        send(conn, pr::Snapshot{pr::redact_for(hand_ ? &*hand_ : nullptr, table_meta(true), pr::ViewLevel::admin())});
      } else if (g.result == GateResult::kLocked) {
        send_error_and_close(conn, "pin_locked", g.detail);
      } else {
        send_error_and_close(conn, "pin_denied", g.detail == "format" ? "format: pin must be 6 digits" : "wrong pin");
      }
      return;
    }
  }
}

void TableServer::handle_submit(ConnId conn, const Session& s, const pr::SubmitAction& a, TimeMs now) {
  if (phase_ != Phase::kHandInProgress || !hand_ || hand_->complete()) {
    send(conn, pr::ActionAck{false, "no_hand"});
    return;
  }
  if (hand_->acting() != s.seat) {
    send(conn, pr::ActionAck{false, std::string(to_string(ActionError::kOutOfTurn))});
    return;
  }
  if (a.prompt_id && *a.prompt_id != prompt_id_) {
    send(conn, pr::ActionAck{false, "stale_prompt"});
    return;
  }
  ApplyResult r = hand_->apply(s.seat, a.action);
  if (!r.ok()) {
    send(conn, pr::ActionAck{false, std::string(to_string(r.error))});
    return;
  }
  deadline_.reset();
  send(conn, pr::ActionAck{true, std::nullopt});
  publish(r.events);
  drive(now);
}

void TableServer::on_tick(TimeMs now) {
  if (!deadline_ || now < *deadline_) return;
  deadline_.reset();
  if (phase_ != Phase::kHandInProgress || !hand_ || !hand_->acting()) return;
  const SeatId seat = *hand_->acting();
  ApplyResult r = hand_->apply_timeout(seat);
  audit({{"event", "action_timeout"}, {"hand_id", hand_->hand_id()}, {"seat", seat}}, now);
  publish(r.events);
  drive(now);
}

// ---------------------------------------------------------------------------

pr::ViewLevel TableServer::level_of(const Session& s) const {
  switch (s.role) {
    case pr::Role::kSeat: return pr::ViewLevel::for_seat(s.seat);
    case pr::Role::kAdmin: return pr::ViewLevel::admin();
    case pr::Role::kSpectator: return pr::ViewLevel::spectator();
  }
  return pr::ViewLevel::spectator();
}

pr::TableMeta TableServer::table_meta(bool for_admin) const {
  pr::TableMeta m;
  m.phase = std::string(to_string(phase_));
  m.config = next_config_;
  for (std::size_t i = 0; i < seats_.size(); ++i)
    m.seats[i] = pr::SeatMeta{seats_[i].occupied, seats_[i].conn.has_value(), seats_[i].stack};
  m.reveal_holes_to_admin = reveal_holes_;
  if (for_admin) m.admin_info = status_json();
  return m;
}

json TableServer::status_json() const {
  json seats = json::array();
  const auto net = net_chips();
  for (SeatId i = 0; i < config_.seat_count; ++i) {
    const auto& r = seats_[static_cast<std::size_t>(i)];
    seats.push_back({{"seat", i},
                     {"occupied", r.occupied},
                     {"connected", r.conn.has_value()},
                     {"stack", r.stack},
                     {"net", net[static_cast<std::size_t>(i)]}});
  }
  int spectators = 0;
  for (const auto& [id, s] : sessions_)
    if (s.greeted && s.role == pr::Role::kSpectator) ++spectators;
  json j = {{"phase", to_string(phase_)},
            {"hand_id", hand_ ? hand_->hand_id() : 0},
            {"hands_played", hands_played_},
            {"config", pr::to_json(next_config_)},
            {"seats", seats},
            {"spectators", spectators},
            {"pause_pending", pause_pending_},
            {"shutdown_pending", shutdown_pending_},
            {"reveal_holes", reveal_holes_}};
  if (hand_) j["hand_blinds"] = {{"sb", hand_->config().small_blind}, {"bb", hand_->config().big_blind}};
  return j;
}

void TableServer::broadcast_snapshots() {
  const HandState* h = hand_ ? &*hand_ : nullptr;
  std::optional<pr::SnapshotView> spectator_view;
  std::optional<pr::TableMeta> meta;
  for (const auto& [conn, s] : sessions_) {
    if (!s.greeted) continue;
    if (!meta) meta = table_meta(false);
    if (s.role == pr::Role::kSpectator) {
      if (!spectator_view) spectator_view = pr::redact_for(h, *meta, pr::ViewLevel::spectator());
      send(conn, pr::Snapshot{*spectator_view});
    } else if (s.role == pr::Role::kAdmin) {
      send(conn, pr::Snapshot{pr::redact_for(h, table_meta(true), pr::ViewLevel::admin())});
    } else {
      send(conn, pr::Snapshot{pr::redact_for(h, *meta, level_of(s))});
    }
  }
}

void TableServer::publish(const std::vector<Event>& events) {
  for (const Event& e : events) {
    if (on_engine_event) on_engine_event(e);
    for (const auto& [conn, s] : sessions_) {
      if (s.greeted && pr::event_visible_to(e, level_of(s), reveal_holes_)) send(conn, pr::EventMsg{e});
    }
  }
  if (hand_ && on_transition) on_transition(*hand_);
  broadcast_snapshots();
}

// ---------------------------------------------------------------------------

void TableServer::free_seat(SeatId seat, TimeMs now) {
  auto& r = seats_[static_cast<std::size_t>(seat)];
  if (!r.occupied) return;
  settled_net_[static_cast<std::size_t>(seat)] += r.stack - r.bought_in;
  audit({{"event", "seat_free"}, {"seat", seat}, {"stack", r.stack}}, now);
  r = SeatRecord{};
}

void TableServer::release_seat(SeatId seat, TimeMs now) {
  auto& r = seats_[static_cast<std::size_t>(seat)];
  r.conn.reset();
  const bool dealt = phase_ == Phase::kHandInProgress && hand_ &&
                     hand_->seat(seat).status != SeatStatus::kEmpty &&
                     hand_->seat(seat).status != SeatStatus::kSittingOut;
  if (dealt) {
    r.leaving = true;
    audit({{"event", "seat_autoplay"}, {"seat", seat}, {"hand_id", hand_->hand_id()}}, now);
  } else {
    free_seat(seat, now);
  }
  broadcast_snapshots();
  if (dealt && hand_->acting() == seat) {
    deadline_.reset();
    ApplyResult res = hand_->apply_timeout(seat);
    publish(res.events);
    drive(now);
  }
}

bool TableServer::start_hand_if_ready(TimeMs now) {
  if (phase_ != Phase::kIdle) return false;
  SeatStacks stacks{};
  int funded = 0;
  for (SeatId i = 0; i < config_.seat_count; ++i) {
    const auto& r = seats_[static_cast<std::size_t>(i)];
    if (!r.occupied) continue;
    const bool live = r.conn.has_value() && r.stack > 0;
    stacks[static_cast<std::size_t>(i)] = live ? r.stack : 0;
    funded += live ? 1 : 0;
  }
  if (hold_ || funded < config_.min_players) return false;

  SeatId button = last_button_ ? *last_button_ : config_.seat_count - 1;
  for (int k = 0; k < config_.seat_count; ++k) {
    button = (button + 1) % config_.seat_count;
    const auto& st = stacks[static_cast<std::size_t>(button)];
    if (st && *st > 0) break;
  }
  last_button_ = button;

  const Seed deck_seed{hand_seeds_.next()};
  hand_ = HandState::start(next_hand_id_++, next_config_, stacks, button, shuffle(new_deck(), deck_seed));
  phase_ = Phase::kHandInProgress;
  audit({{"event", "hand_start"}, {"hand_id", hand_->hand_id()}, {"button", button}}, now);
  publish(hand_->events());
  return true;
}

void TableServer::prompt(SeatId seat, TimeMs now) {
  const auto& r = seats_[static_cast<std::size_t>(seat)];
  ++prompt_id_;
  const TimeMs timeout = hand_->config().action_timeout_ms;
  deadline_ = now + timeout;
  send(*r.conn, pr::ActionPrompt{hand_->hand_id(), prompt_id_, hand_->legal_actions(seat), timeout});
}

void TableServer::drive(TimeMs now) {
  while (phase_ == Phase::kHandInProgress && hand_) {
    if (hand_->complete()) {
      finish_hand(now);
      if (!start_hand_if_ready(now)) return;
      continue;
    }
    const SeatId acting = *hand_->acting();
    if (!seats_[static_cast<std::size_t>(acting)].conn) {
      ApplyResult r = hand_->apply_timeout(acting);
      publish(r.events);
      continue;
    }
    prompt(acting, now);
    return;
  }
}

void TableServer::finish_hand(TimeMs now) {
  deadline_.reset();
  ++hands_played_;
  for (SeatId i = 0; i < config_.seat_count; ++i) {
    auto& r = seats_[static_cast<std::size_t>(i)];
    const auto& hs = hand_->seat(i);
    if (r.occupied && hs.status != SeatStatus::kEmpty && hs.status != SeatStatus::kSittingOut) r.stack = hs.stack;
  }
  for (SeatId i = 0; i < config_.seat_count; ++i)
    if (seats_[static_cast<std::size_t>(i)].leaving) free_seat(i, now);
  if (config_.auto_rebuy) {
    for (SeatId i = 0; i < config_.seat_count; ++i) {
      auto& r = seats_[static_cast<std::size_t>(i)];
      if (!r.occupied || r.stack > 0) continue;
      r.stack = next_config_.starting_stack;
      r.bought_in += r.stack;
      audit({{"event", "rebuy"}, {"seat", i}, {"amount", r.stack}}, now);
    }
  }
  audit({{"event", "hand_end"}, {"hand_id", hand_->hand_id()}}, now);
  phase_ = Phase::kIdle;
  if (on_hand_end) on_hand_end(*this);

  if (config_.max_hands > 0 && hands_played_ >= config_.max_hands) {
    shutdown_now("max_hands", now);
    return;
  }
  if (shutdown_pending_) {
    shutdown_now("admin", now);
    return;
  }
  if (pause_pending_) {
    pause_pending_ = false;
    phase_ = Phase::kPaused;
    audit({{"event", "paused"}}, now);
  }
  broadcast_snapshots();
}

void TableServer::shutdown_now(std::string_view reason, TimeMs now) {
  if (finished()) return;
  phase_ = Phase::kShuttingDown;
  deadline_.reset();
  audit({{"event", "shutdown"}, {"reason", reason}}, now);
  std::vector<ConnId> all;
  for (const auto& [conn, s] : sessions_) all.push_back(conn);
  for (ConnId c : all) send_error_and_close(c, "shutdown", std::string(reason));
  for (auto& r : seats_) r.conn.reset();
}

// ---------------------------------------------------------------------------

void TableServer::handle_admin(ConnId conn, const pr::AdminCmd& c, TimeMs now) {
  pr::AdminResult res = run_admin(c, now);
  audit({{"event", "admin_cmd"}, {"cmd", c.cmd}, {"args", c.args}, {"ok", res.ok}, {"detail", res.detail}}, now);
  send(conn, std::move(res));
  if (std::exchange(shutdown_after_reply_, false)) shutdown_now("admin", now);
  // A command may have changed the phase, freed a seat, or ended the session.
  if (finished()) return;
  broadcast_snapshots();
  if (phase_ == Phase::kIdle && start_hand_if_ready(now)) drive(now);
}

void TableServer::hold_hands(bool hold, TimeMs now) {
  hold_ = hold;
  if (!hold && phase_ == Phase::kIdle && start_hand_if_ready(now)) drive(now);
}

pr::AdminResult TableServer::run_admin(const pr::AdminCmd& c, TimeMs now) {
  const bool mid_hand = phase_ == Phase::kHandInProgress;
  const json effective = mid_hand ? "next_hand" : "now";
  auto reject = [](std::string code, std::string detail) {
    return pr::AdminResult{false, {{"error", std::move(code)}, {"detail", std::move(detail)}}};
  };
  auto int_arg = [&](const char* key) -> std::optional<std::int64_t> {
    if (!c.args.is_object() || !c.args.contains(key) || !c.args.at(key).is_number_integer()) return std::nullopt;
    return c.args.at(key).get<std::int64_t>();
  };
  auto apply_config = [&](TableConfig candidate) -> pr::AdminResult {
    try {
      candidate.validate();
    } catch (const std::invalid_argument& e) {
      return reject("invalid_argument", e.what());
    }
    next_config_ = candidate;
    return {true, {{"config", pr::to_json(next_config_)}, {"effective", effective}}};
  };

  if (c.cmd == "get_status") return {true, status_json()};
  if (c.cmd == "set_blinds") {
    const auto sb = int_arg("sb"), bb = int_arg("bb");
    if (!sb || !bb) return reject("invalid_argument", "sb and bb integers required");
    TableConfig t = next_config_;
    t.small_blind = *sb;
    t.big_blind = *bb;
    return apply_config(t);
  }
  if (c.cmd == "set_starting_stack") {
    const auto stack = int_arg("stack");
    if (!stack) return reject("invalid_argument", "stack integer required");
    TableConfig t = next_config_;
    t.starting_stack = *stack;
    return apply_config(t);
  }
  if (c.cmd == "set_timeout") {
    if (!c.args.is_object() || !c.args.contains("seconds") || !c.args.at("seconds").is_number())
      return reject("invalid_argument", "seconds number required");
    const double secs = c.args.at("seconds").get<double>();
    if (!std::isfinite(secs) || secs <= 0 || secs > 86400) return reject("invalid_argument", "seconds out of range");
    TableConfig t = next_config_;
    t.action_timeout_ms = std::max<std::int64_t>(1, std::llround(secs * 1000.0));
    return apply_config(t);
  }
  if (c.cmd == "pause") {
    if (phase_ == Phase::kPaused) return {true, {{"phase", "paused"}, {"effective", "now"}}};
    if (mid_hand) {
      pause_pending_ = true;
    } else {
      phase_ = Phase::kPaused;
    }
    return {true, {{"phase", to_string(phase_)}, {"effective", effective}}};
  }
  if (c.cmd == "resume") {
    pause_pending_ = false;
    if (phase_ == Phase::kPaused) phase_ = Phase::kIdle;
    return {true, {{"phase", to_string(phase_)}, {"effective", "now"}}};
  }
  if (c.cmd == "kick_seat") {
    const auto seat = int_arg("seat");
    if (!seat || *seat < 0 || *seat >= config_.seat_count) return reject("invalid_argument", "seat out of range");
    const auto idx = static_cast<std::size_t>(*seat);
    if (!seats_[idx].occupied) return reject("invalid_argument", "seat is empty");
    if (const auto conn = seats_[idx].conn) {
      send(*conn, pr::Error{"kicked", "removed by admin"});
      sessions_.erase(*conn);
      closes_.push_back(*conn);
    }
    release_seat(static_cast<SeatId>(*seat), now);
    return {true, {{"seat", *seat}, {"effective", seats_[idx].occupied ? "next_hand" : "now"}}};
  }
  if (c.cmd == "set_reveal") {
    if (!c.args.is_object() || !c.args.contains("on") || !c.args.at("on").is_boolean())
      return reject("invalid_argument", "on boolean required");
    reveal_holes_ = c.args.at("on").get<bool>();
    return {true, {{"reveal_holes", reveal_holes_}}};
  }
  if (c.cmd == "shutdown") {
    if (mid_hand) {
      shutdown_pending_ = true;
      return {true, {{"effective", "next_hand"}}};
    }
    shutdown_after_reply_ = true;
    return {true, {{"effective", "now"}}};
  }
  return reject("unknown_command", c.cmd);
}

}  // namespace holotable
