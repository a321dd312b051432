#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "holotable/engine.hpp"
#include "holotable/net.hpp"
#include "holotable/protocol.hpp"

namespace holotable::ops {

// Process exit statuses shared by the bot and admin clients.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConnect = 2;
inline constexpr int kExitRefused = 3;   // table_full, pin denied or locked
inline constexpr int kExitProtocol = 4;
inline constexpr int kExitSeatMismatch = 5;

enum class Fallback : std::uint8_t { kCheckFold, kCallAny, kRandom };
std::string_view to_string(Fallback f);

struct BotStep {
  std::optional<std::int64_t> hand_id;
  std::optional<Street> street;
  std::optional<Action> action;  // nullopt: leave the prompt unanswered
  bool operator==(const BotStep&) const = default;
};

// File form:
//   {"seat": 0, "fallback": "check_fold" | "call_any" | "random", "random_seed": 7,
//    "steps": [{"when": {"hand_id": 1, "street": "preflop"},
//               "action": {"kind": "raise_to", "amount": 40} | "none"}]}
// Steps are consumed in order; a prompt the head step does not match goes to
// the fallback policy. A rejected step action is retried with the fallback.
struct BotScript {
  std::optional<SeatId> seat;
  std::vector<BotStep> steps;
  Fallback fallback = Fallback::kCheckFold;
  std::uint64_t random_seed = 0;

  static BotScript from_json(const nlohmann::json& j);  // throws std::invalid_argument
  nlohmann::json to_json() const;
  bool operator==(const BotScript&) const = default;
};

// Picks a legal action for the policy; rng is consumed only by kRandom.
Action choose_action(Fallback policy, const std::vector<ActionTemplate>& legal, SplitMix64& rng);

struct BotOptions {
  std::function<void(std::string_view)> tap;  // raw received bytes
  std::function<void(SeatId)> on_seated;
};

struct BotResult {
  int exit_code = kExitOk;
  std::optional<SeatId> seat;
  std::int64_t prompts = 0;
  std::int64_t rejected = 0;
  std::int64_t own_timeouts = 0;
  std::int64_t hands = 0;
  std::string error;
};

// Joins as a seat and answers prompts until the server ends the session.
BotResult run_bot(const std::string& host, int port, const BotScript& script, const BotOptions& options = {});

class AdminDenied : public std::runtime_error {
 public:
  AdminDenied(std::string code, const std::string& detail) : std::runtime_error(detail), code(std::move(code)) {}
  std::string code;  // pin_denied, pin_locked, admin_busy
};

// An authenticated admin connection.
class AdminSession {
 public:
  // Throws AdminDenied, or std::system_error when the server is unreachable.
  AdminSession(const std::string& host, int port, const std::string& pin, int timeout_ms = 5000);
  // Throws std::runtime_error when the connection ends or the reply times out.
  protocol::AdminResult command(const protocol::AdminCmd& cmd, int timeout_ms = 5000);

 private:
  Client client_;
};

// "status", "set-blinds 10 20", "set-stack 500", "set-timeout 15", "pause",
// "resume", "kick 3", "reveal on|off", "shutdown", "raw NAME {json}".
std::variant<protocol::AdminCmd, std::string> parse_shell_command(std::string_view line);
std::string format_status(const nlohmann::json& status);

// Interactive loop; returns a process exit status.
int admin_shell(const std::string& host, int port, const std::string& pin, std::istream& in, std::ostream& out);

struct SimConfig {
  TableConfig table;
  std::int64_t hands = 0;
  std::vector<BotScript> bots;  // 2..6, seated in order
  Seed seed;
  std::string log_dir;
};

struct SimReport {
  std::int64_t hands_played = 0;
  std::vector<Chips> net;  // per seat, in bot order
  std::vector<std::string> violations;
  std::int64_t wall_ms = 0;
  std::string digest;  // SHA-256 of the event log
  std::int64_t events = 0;
  std::int64_t timeouts = 0;  // timeout records in the log
  std::int64_t frames_audited = 0;
  std::int64_t card_tokens_audited = 0;

  Chips net_sum() const;
  nlohmann::json to_json() const;
};

struct SessionResult {
  std::vector<Event> events;
  std::vector<BotResult> bots;
  std::vector<std::string> problems;  // bots that failed or were not seated
  std::int64_t hands_played = 0;
  std::array<Chips, kMaxSeats> net{};
};

// Serves `config` on an ephemeral port and connects the bots one after the
// other, so bot i takes seat i. Returns when the server shuts down, which
// needs config.max_hands > 0 and, for long sessions, auto_rebuy: a bust-out
// below min_players (the bot count) leaves the table idle.
SessionResult run_session(ServerConfig config, const std::vector<BotScript>& bots);

// "random:6", "check_fold:2,random:2", "call_any,random". Random bots get
// seeds derived from `seed` and their position.
std::vector<BotScript> parse_bot_spec(std::string_view spec, std::uint64_t seed);

// Runs an in-process server on an ephemeral port with real socket bots and
// checks every transition, every hand end, and every byte sent to the bots
// and to a recorded spectator.
SimReport simulate(const SimConfig& config);

}  // namespace holotable::ops
