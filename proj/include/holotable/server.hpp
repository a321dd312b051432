#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "holotable/engine.hpp"
#include "holotable/protocol.hpp"

namespace holotable {

using TimeMs = std::int64_t;  // monotonic milliseconds supplied by the caller
using ConnId = std::uint64_t;

struct LockoutPolicy {
  int max_attempts = 3;
  int lock_seconds = 60;
  bool operator==(const LockoutPolicy&) const = default;
};

struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  int port = 0;  // 0 picks an ephemeral port
  std::string pin;
  int seat_count = kMaxSeats;
  TableConfig table;  // seat_count here is overwritten by the field above
  std::optional<Seed> seed;
  bool spawn_clients = false;
  std::string log_dir;  // empty: no log files
  LockoutPolicy lockout;

  int min_players = 2;          // funded seats needed before dealing
  std::int64_t max_hands = 0;   // shut down after this many hands; 0 = unlimited
  bool auto_rebuy = false;      // refill busted seats at the hand boundary
  std::vector<Chips> seat_stacks;  // first buy-in per seat id, defaults to starting_stack
  std::string client_exe;       // spawn mode: executable for the child clients

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  TableConfig table_config() const;

  // Keys mirror the CLI flags: bind, port, pin, seats, sb, bb, stack,
  // timeout (seconds), seed, spawn_clients, log_dir, lockout{max_attempts,
  // lock_seconds}, min_players, max_hands, rebuy, seat_stacks, client_exe.
  // Missing keys keep their current value.
  void merge_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

bool valid_pin_format(std::string_view pin);

struct LockoutState {
  int failed_attempts = 0;
  std::optional<TimeMs> locked_until;
};

enum class GateResult : std::uint8_t { kGranted, kDenied, kLocked };
std::string_view to_string(GateResult r);

struct GateOutcome {
  GateResult result = GateResult::kDenied;
  std::string detail;        // "format", "mismatch", or remaining lock time
  TimeMs retry_after_ms = 0;  // kLocked only
};

class AdminGate {
 public:
  AdminGate(std::string pin, LockoutPolicy policy) : pin_(std::move(pin)), policy_(policy) {}

  // A missing or non-6-digit attempt is denied and counts as a failure.
  GateOutcome attempt(const std::optional<std::string>& pin, TimeMs now);
  const LockoutState& state() const { return state_; }

 private:
  std::string pin_;
  LockoutPolicy policy_;
  LockoutState state_;
};

enum class Phase : std::uint8_t { kIdle, kHandInProgress, kPaused, kShuttingDown };
std::string_view to_string(Phase p);

struct Outbound {
  ConnId conn = 0;
  protocol::Message message;
};

struct SeatRecord {
  bool occupied = false;
  std::optional<ConnId> conn;
  Chips stack = 0;
  Chips bought_in = 0;
  bool leaving = false;  // disconnected mid-hand, freed at the boundary
};

// The table's single event loop, without any I/O. Callers feed it
// connection events and clock ticks in one total order; it answers with
// outbound messages and close requests. Identical input order and seed give
// identical output.
class TableServer {
 public:
  explicit TableServer(ServerConfig config);  // throws std::invalid_argument

  void on_connect(ConnId conn, TimeMs now);
  void on_message(ConnId conn, const protocol::Envelope& env, TimeMs now);
  void on_protocol_error(ConnId conn, const protocol::DecodeError& err, TimeMs now);
  void on_disconnect(ConnId conn, TimeMs now);  // unknown ids are ignored
  void on_tick(TimeMs now);
  void shutdown_now(std::string_view reason, TimeMs now);
  // While held, no hand starts. Releasing starts one if enough seats are ready.
  void hold_hands(bool hold, TimeMs now);

  std::optional<TimeMs> next_deadline() const { return deadline_; }
  std::vector<Outbound> take_outbox();
  // Connections to close once their pending output is written. The server
  // has already forgotten them.
  std::vector<ConnId> take_closes();

  // Every engine event in order; the replayable session log.
  std::function<void(const Event&)> on_engine_event;
  // Operational records (joins, admin commands, rebuys, lockouts).
  std::function<void(const nlohmann::json&)> on_audit;
  // Called after every engine transition with the new state.
  std::function<void(const HandState&)> on_transition;
  // Called once per hand after chips return to the seats.
  std::function<void(const TableServer&)> on_hand_end;

  Phase phase() const { return phase_; }
  bool finished() const { return phase_ == Phase::kShuttingDown; }
  const std::optional<HandState>& hand() const { return hand_; }
  const std::array<SeatRecord, kMaxSeats>& seats() const { return seats_; }
  int seated_count() const;
  std::int64_t hands_played() const { return hands_played_; }
  const ServerConfig& config() const { return config_; }
  const TableConfig& next_table_config() const { return next_config_; }
  const LockoutState& lockout() const { return gate_.state(); }
  Seed seed() const { return seed_; }
  std::optional<ConnId> admin_conn() const { return admin_; }
  std::int64_t admin_logins() const { return admin_logins_; }
  // Per seat: chips held or cashed out minus chips bought in.
  std::array<Chips, kMaxSeats> net_chips() const;

 private:
  struct Session {
    bool greeted = false;
    protocol::Role role = protocol::Role::kSpectator;
    SeatId seat = -1;
  };

  void send(ConnId conn, protocol::Message m);
  void send_error_and_close(ConnId conn, std::string code, std::string detail);
  void close(ConnId conn);
  void audit(nlohmann::json record, TimeMs now);

  void handle_hello(ConnId conn, Session& s, const protocol::Hello& h, TimeMs now);
  void handle_submit(ConnId conn, const Session& s, const protocol::SubmitAction& a, TimeMs now);
  void handle_admin(ConnId conn, const protocol::AdminCmd& c, TimeMs now);
  protocol::AdminResult run_admin(const protocol::AdminCmd& c, TimeMs now);

  protocol::ViewLevel level_of(const Session& s) const;
  protocol::TableMeta table_meta(bool for_admin) const;
  nlohmann::json status_json() const;
  void broadcast_snapshots();
  void publish(const std::vector<Event>& events);

  void release_seat(SeatId seat, TimeMs now);
  void free_seat(SeatId seat, TimeMs now);
  bool start_hand_if_ready(TimeMs now);
  void drive(TimeMs now);
  void finish_hand(TimeMs now);
  void prompt(SeatId seat, TimeMs now);

  ServerConfig config_;
  TableConfig next_config_;
  AdminGate gate_;
  Seed seed_;
  SplitMix64 hand_seeds_;
  Phase phase_ = Phase::kIdle;
  bool pause_pending_ = false;
  bool shutdown_pending_ = false;
  bool reveal_holes_ = false;
  bool shutdown_after_reply_ = false;
  bool hold_ = false;

  std::map<ConnId, Session> sessions_;
  std::optional<ConnId> admin_;
  std::int64_t admin_logins_ = 0;
  std::array<SeatRecord, kMaxSeats> seats_{};
  std::array<Chips, kMaxSeats> settled_net_{};

  std::optional<HandState> hand_;
  std::int64_t hands_played_ = 0;
  std::int64_t next_hand_id_ = 1;
  std::optional<SeatId> last_button_;
  std::int64_t prompt_id_ = 0;
  std::optional<TimeMs> deadline_;

  std::vector<Outbound> outbox_;
  std::vector<ConnId> closes_;
};

}  // namespace holotable
