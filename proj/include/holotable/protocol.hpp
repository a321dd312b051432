#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "holotable/engine.hpp"

namespace holotable::protocol {

using json = nlohmann::json;

inline constexpr int kVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = 1u << 20;
inline constexpr std::size_t kLengthPrefixBytes = 4;

enum class Role : std::uint8_t { kSeat, kAdmin, kSpectator };
std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view s);

struct Hello {
  Role role = Role::kSeat;
  std::optional<std::string> pin;
  bool operator==(const Hello&) const = default;
};

struct Welcome {
  Role role = Role::kSeat;
  std::optional<SeatId> seat_id;
  TableConfig table_config;
  bool operator==(const Welcome&) const = default;
};

// Who a snapshot is prepared for.
struct ViewLevel {
  Role role = Role::kSpectator;
  SeatId seat = -1;  // meaningful for Role::kSeat only

  static ViewLevel for_seat(SeatId s) { return {Role::kSeat, s}; }
  static ViewLevel spectator() { return {Role::kSpectator, -1}; }
  static ViewLevel admin() { return {Role::kAdmin, -1}; }
  bool operator==(const ViewLevel&) const = default;
};

struct SeatView {
  SeatId seat_id = 0;
  bool occupied = false;
  bool connected = false;
  Chips stack = 0;
  SeatStatus status = SeatStatus::kEmpty;
  Chips street_committed = 0;
  Chips total_committed = 0;
  // Visible cards, or a count-only marker for cards the viewer may not see.
  std::optional<std::vector<Card>> hole;
  int hidden_cards = 0;
  bool operator==(const SeatView&) const = default;
};

struct SnapshotView {
  ViewLevel level;
  std::int64_t hand_id = 0;
  std::int64_t seq = -1;  // seq of the last event of the hand; -1 before any hand
  std::string phase;
  std::optional<Street> street;  // absent before the first hand
  std::vector<Card> board;
  SeatId button = -1;
  std::optional<SeatId> acting;
  Chips current_bet = 0;
  Chips small_blind = 0;
  Chips big_blind = 0;
  std::vector<Pot> pots;
  std::vector<SeatView> seats;
  std::optional<json> admin;  // configuration and sessions, admin level only
  bool operator==(const SnapshotView&) const = default;
};

struct Snapshot {
  SnapshotView view;
  bool operator==(const Snapshot&) const = default;
};

struct ActionPrompt {
  std::int64_t hand_id = 0;
  std::int64_t prompt_id = 0;
  std::vector<ActionTemplate> legal;
  std::int64_t deadline_ms = 0;
  bool operator==(const ActionPrompt&) const = default;
};

struct SubmitAction {
  Action action;
  std::optional<std::int64_t> prompt_id;
  bool operator==(const SubmitAction&) const = default;
};

struct ActionAck {
  bool accepted = false;
  std::optional<std::string> reason;
  bool operator==(const ActionAck&) const = default;
};

struct AdminCmd {
  std::string cmd;
  json args = json::object();
  bool operator==(const AdminCmd&) const = default;
};

struct AdminResult {
  bool ok = false;
  json detail = json::object();
  bool operator==(const AdminResult&) const = default;
};

struct EventMsg {
  Event record;
  bool operator==(const EventMsg&) const = default;
};

struct Error {
  std::string code;
  std::string detail;
  bool operator==(const Error&) const = default;
};

struct Ping {
  bool operator==(const Ping&) const = default;
};
struct Pong {
  bool operator==(const Pong&) const = default;
};

using Message = std::variant<Hello, Welcome, Snapshot, ActionPrompt, SubmitAction, ActionAck, AdminCmd, AdminResult,
                             EventMsg, Error, Ping, Pong>;

std::string_view type_name(const Message& m);

struct Envelope {
  std::int64_t seq = 0;
  Message message;
  bool operator==(const Envelope&) const = default;
};

enum class DecodeErrorCode : std::uint8_t {
  kFrameTooLarge,
  kBadVersion,
  kMalformedBody,
  kUnknownType,
  kTruncated,
  kBadSequence,
};
std::string_view to_string(DecodeErrorCode c);

struct DecodeError {
  DecodeErrorCode code;
  std::string detail;
};

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON conversions for shared domain values.
json to_json(const Event& e);
Event event_from_json(const json& j);  // throws json::exception / std::invalid_argument
json to_json(const TableConfig& c);
TableConfig table_config_from_json(const json& j);
json to_json(const SnapshotView& v);
SnapshotView snapshot_from_json(const json& j);

// Canonical body text: {"payload":...,"seq":n,"type":"...","v":1} with sorted
// keys and no whitespace, so identical messages give identical bytes.
std::string encode_body(std::int64_t seq, const Message& m);
// Four-byte big-endian length then the body. Throws EncodeError above 1 MiB.
std::string encode(std::int64_t seq, const Message& m);

// Parses one body. Never throws.
std::variant<Envelope, DecodeError> decode_body(std::string_view body);

// Incremental frame reader for one connection direction. Bytes may arrive in
// any split; next() yields complete envelopes in order. After
// frame_too_large the stream cannot resynchronise and the decoder stays failed.
class Decoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }

  // nullopt: need more bytes, or the stream has failed.
  std::optional<std::variant<Envelope, DecodeError>> next();
  // Body already delimited by another framing (WebSocket). Applies the same
  // sequence check as next().
  std::variant<Envelope, DecodeError> accept_body(std::string_view body);
  // Call on end of stream: reports a truncated frame if bytes are pending.
  std::optional<DecodeError> finish() const;

  bool failed() const { return failed_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
  std::optional<std::int64_t> last_seq_;
  bool failed_ = false;
};

// Per-connection outbound sequence numbering.
class Encoder {
 public:
  std::string frame(const Message& m) { return encode(next_seq_++, m); }
  std::string body(const Message& m) { return encode_body(next_seq_++, m); }
  std::int64_t next_seq() const { return next_seq_; }

 private:
  std::int64_t next_seq_ = 1;
};

// ---------------------------------------------------------------------------
// Redaction

struct SeatMeta {
  bool occupied = false;
  bool connected = false;
  Chips stack = 0;  // stack between hands
};

// Table data held outside the engine.
struct TableMeta {
  std::string phase = "idle";
  TableConfig config;
  std::array<SeatMeta, kMaxSeats> seats{};
  json admin_info = json::object();  // sessions, pending config, etc.
  bool reveal_holes_to_admin = false;
};

// Applies the per-role rule: a seat sees its own hole cards, every role sees
// hands revealed at showdown, the admin sees the rest only when reveal is on,
// and everyone else gets a count-only marker. The deck is never included.
SnapshotView redact_for(const HandState* hand, const TableMeta& meta, ViewLevel level);

// Whether an engine event may be forwarded to the given viewer.
bool event_visible_to(const Event& e, ViewLevel level, bool reveal_holes_to_admin);

}  // namespace holotable::protocol
