#include "holotable/protocol.hpp"

#include <limits>
#include <stdexcept>

namespace holotable::protocol {
namespace {

constexpr int kMaxNesting = 64;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad("expected object");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field ") + key);
  return *it;
}

std::int64_t get_int(const json& j, const char* key) {
  const json& v = field(j, key);
  if (v.is_number_unsigned()) {
    if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      bad(std::string("integer out of range: ") + key);
    return static_cast<std::int64_t>(v.get<std::uint64_t>());
  }
  if (!v.is_number_integer()) bad(std::string("expected integer: ") + key);
  return v.get<std::int64_t>();
}

std::optional<std::int64_t> get_opt_int(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_int(j, key);
}

SeatId get_seat(const json& j, const char* key) {
  const auto v = get_int(j, key);
  if (v < 0 || v >= kMaxSeats) bad(std::string("seat out of range: ") + key);
  return static_cast<SeatId>(v);
}

std::optional<SeatId> get_opt_seat(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_seat(j, key);
}

std::string get_string(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("expected string: ") + key);
  return v.get<std::string>();
}

bool get_bool(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean()) bad(std::string("expected boolean: ") + key);
  return v.get<bool>();
}

Card card_from_json(const json& j) {
  if (!j.is_string()) bad("card must be a string");
  auto c = Card::parse(j.get<std::string>());
  if (!c) bad("bad card");
  return *c;
}

json cards_to_json(const std::vector<Card>& cards) {
  json out = json::array();
  for (const auto& c : cards) out.push_back(c.str());
  return out;
}

std::vector<Card> cards_from_json(const json& j) {
  if (!j.is_array()) bad("cards must be an array");
  std::vector<Card> out;
  for (const auto& c : j) out.push_back(card_from_json(c));
  return out;
}

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& s, const std::array<Enum, N>& all) {
  for (Enum e : all)
    if (to_string(e) == s) return e;
  bad("unknown enum value " + s);
}

constexpr std::array<Street, 6> kStreets = {Street::kPreflop, Street::kFlop,     Street::kTurn,
                                            Street::kRiver,   Street::kShowdown, Street::kComplete};
constexpr std::array<SeatStatus, 5> kStatuses = {SeatStatus::kEmpty, SeatStatus::kActive, SeatStatus::kFolded,
                                                 SeatStatus::kAllIn, SeatStatus::kSittingOut};

json to_json(const ActionTemplate& t) { return {{"kind", to_string(t.kind)}, {"min", t.min}, {"max", t.max}}; }

ActionKind action_kind_from(const json& j) {
  auto k = parse_action_kind(get_string(j, "kind"));
  if (!k) bad("unknown action kind");
  return *k;
}

json to_json(const Pot& p) { return {{"amount", p.amount}, {"eligible", p.eligible}}; }

Pot pot_from_json(const json& j) {
  Pot p;
  p.amount = get_int(j, "amount");
  const json& e = field(j, "eligible");
  if (!e.is_array()) bad("eligible must be an array");
  for (const auto& s : e) {
    if (!s.is_number_integer() || s.get<std::int64_t>() < 0 || s.get<std::int64_t>() >= kMaxSeats) bad("bad seat");
    p.eligible.push_back(s.get<SeatId>());
  }
  return p;
}

json to_json(const SeatView& s) {
  json hole;
  if (s.hole) {
    hole = cards_to_json(*s.hole);
  } else if (s.hidden_cards > 0) {
    hole = {{"hidden", s.hidden_cards}};
  }
  return {{"seat_id", s.seat_id},
          {"occupied", s.occupied},
          {"connected", s.connected},
          {"stack", s.stack},
          {"status", to_string(s.status)},
          {"street_committed", s.street_committed},
          {"total_committed", s.total_committed},
          {"hole", hole}};
}

SeatView seat_view_from_json(const json& j) {
  SeatView s;
  s.seat_id = get_seat(j, "seat_id");
  s.occupied = get_bool(j, "occupied");
  s.connected = get_bool(j, "connected");
  s.stack = get_int(j, "stack");
  s.status = parse_enum(get_string(j, "status"), kStatuses);
  s.street_committed = get_int(j, "street_committed");
  s.total_committed = get_int(j, "total_committed");
  const json& hole = field(j, "hole");
  if (hole.is_array()) {
    s.hole = cards_from_json(hole);
  } else if (hole.is_object()) {
    const auto n = get_int(hole, "hidden");
    if (n < 1 || n > 2) bad("bad hidden count");
    s.hidden_cards = static_cast<int>(n);
  } else if (!hole.is_null()) {
    bad("bad hole field");
  }
  return s;
}

json payload_of(const Message& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) {
          json p = {{"role", to_string(v.role)}};
          if (v.pin) p["pin"] = *v.pin;
          return p;
        } else if constexpr (std::is_same_v<T, Welcome>) {
          json p = {{"role", to_string(v.role)}, {"table_config", protocol::to_json(v.table_config)}};
          if (v.seat_id) p["seat_id"] = *v.seat_id;
          return p;
        } else if constexpr (std::is_same_v<T, Snapshot>) {
          return {{"view", protocol::to_json(v.view)}};
        } else if constexpr (std::is_same_v<T, ActionPrompt>) {
          json legal = json::array();
          for (const auto& t : v.legal) legal.push_back(to_json(t));
          return {{"hand_id", v.hand_id}, {"prompt_id", v.prompt_id}, {"legal", legal}, {"deadline_ms", v.deadline_ms}};
        } else if constexpr (std::is_same_v<T, SubmitAction>) {
          json p = {{"action", {{"kind", to_string(v.action.kind)}, {"amount", v.action.amount}}}};
          if (v.prompt_id) p["prompt_id"] = *v.prompt_id;
          return p;
        } else if constexpr (std::is_same_v<T, ActionAck>) {
          json p = {{"accepted", v.accepted}};
          if (v.reason) p["reason"] = *v.reason;
          return p;
        } else if constexpr (std::is_same_v<T, AdminCmd>) {
          return {{"cmd", v.cmd}, {"args", v.args}};
        } else if constexpr (std::is_same_v<T, AdminResult>) {
          return {{"ok", v.ok}, {"detail", v.detail}};
        } else if constexpr (std::is_same_v<T, EventMsg>) {
          return {{"record", protocol::to_json(v.record)}};
        } else if constexpr (std::is_same_v<T, Error>) {
          return {{"code", v.code}, {"detail", v.detail}};
        } else {
          return json::object();
        }
      },
      m);
}

std::optional<Message> message_from(const std::string& type, const json& p) {
  if (!p.is_object()) bad("payload must be an object");
  if (type == "hello") {
    Hello h;
    auto role = parse_role(get_string(p, "role"));
    if (!role) bad("unknown role");
    h.role = *role;
    if (p.contains("pin") && !p.at("pin").is_null()) h.pin = get_string(p, "pin");
    return h;
  }
  if (type == "welcome") {
    Welcome w;
    auto role = parse_role(get_string(p, "role"));
    if (!role) bad("unknown role");
    w.role = *role;
    w.seat_id = get_opt_seat(p, "seat_id");
    w.table_config = table_config_from_json(field(p, "table_config"));
    return w;
  }
  if (type == "snapshot") return Snapshot{snapshot_from_json(field(p, "view"))};
  if (type == "action_prompt") {
    ActionPrompt a;
    a.hand_id = get_int(p, "hand_id");
    a.prompt_id = get_int(p, "prompt_id");
    a.deadline_ms = get_int(p, "deadline_ms");
    const json& legal = field(p, "legal");
    if (!legal.is_array()) bad("legal must be an array");
    for (const auto& t : legal) a.legal.push_back({action_kind_from(t), get_int(t, "min"), get_int(t, "max")});
    return a;
  }
  if (type == "submit_action") {
    SubmitAction s;
    const json& a = field(p, "action");
    s.action.kind = action_kind_from(a);
    s.action.amount = a.contains("amount") ? get_int(a, "amount") : 0;
    s.prompt_id = get_opt_int(p, "prompt_id");
    return s;
  }
  if (type == "action_ack") {
    ActionAck a;
    a.accepted = get_bool(p, "accepted");
    if (p.contains("reason") && !p.at("reason").is_null()) a.reason = get_string(p, "reason");
    return a;
  }
  if (type == "admin_cmd") {
    AdminCmd c;
    c.cmd = get_string(p, "cmd");
    if (p.contains("args")) {
      if (!p.at("args").is_object()) bad("args must be an object");
      c.args = p.at("args");
    }
    return c;
  }
  if (type == "admin_result") {
    AdminResult r;
    r.ok = get_bool(p, "ok");
    if (p.contains("detail")) r.detail = p.at("detail");
    return r;
  }
  if (type == "event") return EventMsg{event_from_json(field(p, "record"))};
  if (type == "error") return Error{get_string(p, "code"), p.contains("detail") ? get_string(p, "detail") : ""};
  if (type == "ping") return Ping{};
  if (type == "pong") return Pong{};
  return std::nullopt;
}

// Rejects bodies nested deeper than kMaxNesting before handing them to the parser.
bool nesting_ok(std::string_view body) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : body) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth > kMaxNesting) return false;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSeat: return "seat";
    case Role::kAdmin: return "admin";
    case Role::kSpectator: return "spectator";
  }
  return "?";
}

std::optional<Role> parse_role(std::string_view s) {
  for (auto r : {Role::kSeat, Role::kAdmin, Role::kSpectator})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

std::string_view type_name(const Message& m) {
  static constexpr std::array<std::string_view, 12> kNames = {
      "hello", "welcome", "snapshot", "action_prompt", "submit_action", "action_ack",
      "admin_cmd", "admin_result", "event", "error", "ping", "pong"};
  return kNames[m.index()];
}

std::string_view to_string(DecodeErrorCode c) {
  switch (c) {
    case DecodeErrorCode::kFrameTooLarge: return "frame_too_large";
    case DecodeErrorCode::kBadVersion: return "bad_version";
    case DecodeErrorCode::kMalformedBody: return "malformed_body";
    case DecodeErrorCode::kUnknownType: return "unknown_type";
    case DecodeErrorCode::kTruncated: return "truncated_frame";
    case DecodeErrorCode::kBadSequence: return "bad_sequence";
  }
  return "?";
}

json to_json(const Event& e) {
  json j = {{"hand_id", e.hand_id}, {"seq", e.seq}, {"type", e.type}};
  if (e.seat) j["seat"] = *e.seat;
  if (e.amount) j["amount"] = *e.amount;
  if (!e.cards.empty()) j["cards"] = cards_to_json(e.cards);
  return j;
}

Event event_from_json(const json& j) {
  Event e;
  e.hand_id = get_int(j, "hand_id");
  e.seq = get_int(j, "seq");
  e.type = get_string(j, "type");
  e.seat = get_opt_seat(j, "seat");
  e.amount = get_opt_int(j, "amount");
  if (j.contains("cards")) e.cards = cards_from_json(j.at("cards"));
  return e;
}

json to_json(const TableConfig& c) {
  return {{"small_blind", c.small_blind},
          {"big_blind", c.big_blind},
          {"starting_stack", c.starting_stack},
          {"seat_count", c.seat_count},
          {"action_timeout_ms", c.action_timeout_ms}};
}

TableConfig table_config_from_json(const json& j) {
  TableConfig c;
  c.small_blind = get_int(j, "small_blind");
  c.big_blind = get_int(j, "big_blind");
  c.starting_stack = get_int(j, "starting_stack");
  c.seat_count = static_cast<int>(get_int(j, "seat_count"));
  c.action_timeout_ms = get_int(j, "action_timeout_ms");
  return c;
}

json to_json(const SnapshotView& v) {
  json j = {{"level", to_string(v.level.role)},
            {"hand_id", v.hand_id},
            {"seq", v.seq},
            {"phase", v.phase},
            {"street", v.street ? json(to_string(*v.street)) : json(nullptr)},
            {"board", cards_to_json(v.board)},
            {"button", v.button},
            {"acting", v.acting ? json(*v.acting) : json(nullptr)},
            {"current_bet", v.current_bet},
            {"small_blind", v.small_blind},
            {"big_blind", v.big_blind}};
  if (v.level.role == Role::kSeat) j["viewer"] = v.level.seat;
  json pots = json::array();
  for (const auto& p : v.pots) pots.push_back(to_json(p));
  j["pots"] = pots;
  json seats = json::array();
  for (const auto& s : v.seats) seats.push_back(to_json(s));
  j["seats"] = seats;
  if (v.admin) j["admin"] = *v.admin;
  return j;
}

SnapshotView snapshot_from_json(const json& j) {
  SnapshotView v;
  auto role = parse_role(get_string(j, "level"));
  if (!role) bad("unknown view level");
  v.level.role = *role;
  if (*role == Role::kSeat) v.level.seat = get_seat(j, "viewer");
  v.hand_id = get_int(j, "hand_id");
  v.seq = get_int(j, "seq");
  v.phase = get_string(j, "phase");
  if (!field(j, "street").is_null()) v.street = parse_enum(get_string(j, "street"), kStreets);
  v.board = cards_from_json(field(j, "board"));
  v.button = static_cast<SeatId>(get_int(j, "button"));
  v.acting = get_opt_seat(j, "acting");
  v.current_bet = get_int(j, "current_bet");
  v.small_blind = get_int(j, "small_blind");
  v.big_blind = get_int(j, "big_blind");
  const json& pots = field(j, "pots");
  if (!pots.is_array()) bad("pots must be an array");
  for (const auto& p : pots) v.pots.push_back(pot_from_json(p));
  const json& seats = field(j, "seats");
  if (!seats.is_array()) bad("seats must be an array");
  for (const auto& s : seats) v.seats.push_back(seat_view_from_json(s));
  if (j.contains("admin")) v.admin = j.at("admin");
  return v;
}

std::string encode_body(std::int64_t seq, const Message& m) {
  const json body = {{"v", kVersion}, {"seq", seq}, {"type", type_name(m)}, {"payload", payload_of(m)}};
  std::string text;
  try {
    text = body.dump(-1, ' ', false, json::error_handler_t::strict);
  } catch (const json::exception& e) {
    throw EncodeError(std::string("cannot encode message: ") + e.what());
  }
  if (text.size() > kMaxFrameBytes) throw EncodeError("frame exceeds 1 MiB");
  return text;
}

std::string encode(std::int64_t seq, const Message& m) {
  const std::string body = encode_body(seq, m);
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(kLengthPrefixBytes + body.size());
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
  out += body;
  return out;
}

std::variant<Envelope, DecodeError> decode_body(std::string_view body) {
  if (body.size() > kMaxFrameBytes) return DecodeError{DecodeErrorCode::kFrameTooLarge, "body exceeds 1 MiB"};
  if (!nesting_ok(body)) return DecodeError{DecodeErrorCode::kMalformedBody, "nesting too deep"};
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return DecodeError{DecodeErrorCode::kMalformedBody, "not a JSON object"};
  try {
    const json& v = field(j, "v");
    if (!v.is_number_integer() || v.get<std::int64_t>() != kVersion)
      return DecodeError{DecodeErrorCode::kBadVersion, "unsupported protocol version"};
    Envelope env;
    env.seq = get_int(j, "seq");
    const std::string type = get_string(j, "type");
    auto msg = message_from(type, field(j, "payload"));
    if (!msg) return DecodeError{DecodeErrorCode::kUnknownType, "unknown message type " + type};
    env.message = std::move(*msg);
    return env;
  } catch (const std::exception& e) {
    return DecodeError{DecodeErrorCode::kMalformedBody, e.what()};
  }
}

std::optional<std::variant<Envelope, DecodeError>> Decoder::next() {
  if (failed_) return std::nullopt;
  if (buffer_.size() < kLengthPrefixBytes) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data());
  const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
  if (n > kMaxFrameBytes) {
    failed_ = true;
    buffer_.clear();
    return std::variant<Envelope, DecodeError>(DecodeError{DecodeErrorCode::kFrameTooLarge, "declared length exceeds 1 MiB"});
  }
  if (buffer_.size() < kLengthPrefixBytes + n) return std::nullopt;
  auto result = accept_body(std::string_view(buffer_).substr(kLengthPrefixBytes, n));
  buffer_.erase(0, kLengthPrefixBytes + n);
  return result;
}

std::variant<Envelope, DecodeError> Decoder::accept_body(std::string_view body) {
  auto result = decode_body(body);
  if (auto* env = std::get_if<Envelope>(&result)) {
    if (last_seq_ && env->seq <= *last_seq_)
      return DecodeError{DecodeErrorCode::kBadSequence, "sequence number did not increase"};
    last_seq_ = env->seq;
  }
  return result;
}

std::optional<DecodeError> Decoder::finish() const {
  if (failed_ || buffer_.empty()) return std::nullopt;
  return DecodeError{DecodeErrorCode::kTruncated, "stream ended inside a frame"};
}

// ---------------------------------------------------------------------------

bool event_visible_to(const Event& e, ViewLevel level, bool reveal_holes_to_admin) {
  if (!e.is_private()) return true;
  if (level.role == Role::kSeat) return e.seat && *e.seat == level.seat;
  if (level.role == Role::kAdmin) return reveal_holes_to_admin;
  return false;
}

SnapshotView redact_for(const HandState* hand, const TableMeta& meta, ViewLevel level) {
  SnapshotView v;
  v.level = level;
  v.phase = meta.phase;
  v.small_blind = meta.config.small_blind;
  v.big_blind = meta.config.big_blind;
  if (hand) {
    v.hand_id = hand->hand_id();
    v.seq = hand->events().empty() ? -1 : hand->events().back().seq;
    v.street = hand->street();
    v.board = hand->board();
    v.button = hand->button();
    v.acting = hand->acting();
    v.current_bet = hand->current_bet();
    v.small_blind = hand->config().small_blind;
    v.big_blind = hand->config().big_blind;
    v.pots = hand->pots();
  }
  const bool admin_sees_all = level.role == Role::kAdmin && meta.reveal_holes_to_admin;
  for (SeatId s = 0; s < meta.config.seat_count && s < kMaxSeats; ++s) {
    const auto& m = meta.seats[static_cast<std::size_t>(s)];
    SeatView sv;
    sv.seat_id = s;
    sv.occupied = m.occupied;
    sv.connected = m.connected;
    sv.stack = m.stack;
    sv.status = m.occupied ? SeatStatus::kSittingOut : SeatStatus::kEmpty;
    if (hand && hand->seat(s).status != SeatStatus::kEmpty && hand->seat(s).status != SeatStatus::kSittingOut) {
      const auto& hs = hand->seat(s);
      sv.occupied = true;
      sv.stack = hs.stack;
      sv.status = hs.status;
      sv.street_committed = hs.street_committed;
      sv.total_committed = hs.total_committed;
      if (hs.hole) {
        const bool own = level.role == Role::kSeat && level.seat == s;
        if (own || hs.shown || admin_sees_all) {
          sv.hole = std::vector<Card>(hs.hole->begin(), hs.hole->end());
        } else {
          sv.hidden_cards = 2;
        }
      }
    } else if (!hand && m.occupied && m.connected && m.stack > 0) {
      sv.status = SeatStatus::kActive;
    }
    v.seats.push_back(std::move(sv));
  }
  if (level.role == Role::kAdmin) {
    json admin = meta.admin_info;
    admin["config"] = to_json(meta.config);
    admin["reveal_holes"] = meta.reveal_holes_to_admin;
    v.admin = std::move(admin);
  }
  return v;
}

}  // namespace holotable::protocol
