#include "holotable/audit.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "holotable/protocol.hpp"

namespace holotable::audit {
namespace {

std::string where(std::int64_t hand, std::int64_t seq) {
  return "hand " + std::to_string(hand) + " seq " + std::to_string(seq) + ": ";
}

struct HandRecord {
  std::vector<Event> events;
};

std::optional<ActionKind> action_of(const std::string& type) {
  if (type == "raise") return ActionKind::kRaiseTo;
  if (type == "fold" || type == "check" || type == "call" || type == "bet") return parse_action_kind(type);
  return std::nullopt;
}

std::optional<std::string> replay_hand(const std::vector<Event>& ev) {
  const std::int64_t id = ev.front().hand_id;
  if (ev.front().type != "hand_start" || !ev.front().seat || !ev.front().amount)
    return where(id, ev.front().seq) + "hand does not begin with hand_start";

  TableConfig cfg;
  cfg.big_blind = *ev.front().amount;
  cfg.seat_count = kMaxSeats;
  cfg.action_timeout_ms = 1;
  SeatStacks stacks{};
  std::vector<const Event*> deals;
  std::vector<Card> board;
  std::optional<Chips> sb_post;
  for (const auto& e : ev) {
    if (e.type == "stack" && e.seat && e.amount && *e.seat >= 0 && *e.seat < kMaxSeats)
      stacks[static_cast<std::size_t>(*e.seat)] = *e.amount;
    if (e.type == "post_sb") sb_post = e.amount;
    if (e.type == "deal_hole") deals.push_back(&e);
    if (e.type == "flop" || e.type == "turn" || e.type == "river") board.insert(board.end(), e.cards.begin(), e.cards.end());
  }
  if (!sb_post) return where(id, 0) + "no small blind post";
  // A short small blind posts its whole stack, so any blind at least that large replays identically.
  cfg.small_blind = std::max<Chips>(*sb_post, 1);
  cfg.starting_stack = cfg.big_blind;

  std::vector<Card> top;
  for (int round = 0; round < 2; ++round)
    for (const Event* d : deals) {
      if (d->cards.size() != 2) return where(id, d->seq) + "deal_hole without two cards";
      top.push_back(d->cards[static_cast<std::size_t>(round)]);
    }
  top.insert(top.end(), board.begin(), board.end());

  std::optional<HandState> h;
  try {
    h = HandState::start(id, cfg, stacks, *ev.front().seat, Deck::stacked(top));
  } catch (const std::exception& e) {
    return where(id, 0) + "cannot restart hand: " + e.what();
  }
  std::size_t pos = 0;
  auto match = [&](const std::vector<Event>& produced) -> std::optional<std::string> {
    for (const auto& p : produced) {
      if (pos >= ev.size()) return where(id, p.seq) + "engine produced " + p.type + " beyond the log";
      if (!(ev[pos] == p))
        return where(id, ev[pos].seq) + "log has " + ev[pos].type + ", engine produced " + p.type;
      ++pos;
    }
    return std::nullopt;
  };
  if (auto m = match(h->events())) return m;

  while (pos < ev.size()) {
    const Event& e = ev[pos];
    if (!e.seat) return where(id, e.seq) + "unexpected " + e.type;
    ApplyResult r;
    if (e.type == "timeout") {
      if (h->acting() != e.seat) return where(id, e.seq) + "timeout for a seat not acting";
      r = h->apply_timeout(*e.seat);
    } else if (auto kind = action_of(e.type)) {
      Action a{*kind, 0};
      if (*kind == ActionKind::kBet || *kind == ActionKind::kRaiseTo) a.amount = e.amount.value_or(0);
      r = h->apply(*e.seat, a);
    } else {
      return where(id, e.seq) + "unexpected " + e.type;
    }
    if (!r.ok()) return where(id, e.seq) + e.type + " rejected on replay: " + std::string(to_string(r.error));
    if (auto m = match(r.events)) return m;
  }
  if (!h->complete()) return where(id, ev.back().seq) + "log ends before the hand completes";
  if (auto v = h->validate()) return where(id, ev.back().seq) + *v;
  return std::nullopt;
}

}  // namespace

std::vector<std::string> replay_verify(const std::vector<Event>& log) {
  std::vector<std::string> out;
  std::size_t i = 0;
  std::set<std::int64_t> seen;
  while (i < log.size()) {
    std::size_t j = i;
    while (j < log.size() && log[j].hand_id == log[i].hand_id) ++j;
    std::vector<Event> hand(log.begin() + static_cast<std::ptrdiff_t>(i), log.begin() + static_cast<std::ptrdiff_t>(j));
    if (!seen.insert(log[i].hand_id).second) out.push_back(where(log[i].hand_id, log[i].seq) + "hand id repeated");
    for (std::size_t k = 0; k < hand.size(); ++k)
      if (hand[k].seq != static_cast<std::int64_t>(k)) {
        out.push_back(where(hand[k].hand_id, hand[k].seq) + "seq gap");
        break;
      }
    if (auto err = replay_hand(hand)) out.push_back(*err);
    i = j;
  }
  return out;
}

std::vector<std::string> check_state(const HandState& h) {
  std::vector<std::string> out;
  const std::int64_t seq = h.events().empty() ? -1 : h.events().back().seq;
  if (auto v = h.validate()) out.push_back(where(h.hand_id(), seq) + *v);
  if (h.total_chips() != h.baseline())
    out.push_back(where(h.hand_id(), seq) + "chips " + std::to_string(h.total_chips()) + " != baseline " +
                  std::to_string(h.baseline()));
  const auto& pots = h.pots();
  for (std::size_t i = 0; i < pots.size(); ++i) {
    if (pots[i].amount <= 0) out.push_back(where(h.hand_id(), seq) + "empty pot");
    if (pots[i].eligible.empty()) out.push_back(where(h.hand_id(), seq) + "pot without eligible seats");
    for (SeatId s : pots[i].eligible)
      if (!h.seat(s).in_hand() && !h.complete()) out.push_back(where(h.hand_id(), seq) + "ineligible seat in pot");
    if (i + 1 < pots.size()) {
      const std::set<SeatId> outer(pots[i].eligible.begin(), pots[i].eligible.end());
      const std::set<SeatId> inner(pots[i + 1].eligible.begin(), pots[i + 1].eligible.end());
      const bool subset = std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
      if (!subset || inner.size() >= outer.size())
        out.push_back(where(h.hand_id(), seq) + "side pot eligibility does not shrink");
    }
  }
  return out;
}

TranscriptAuditor::TranscriptAuditor(std::optional<SeatId> viewer)
    : viewer_(viewer), who_(viewer ? "seat " + std::to_string(*viewer) : std::string("spectator")) {}

void TranscriptAuditor::feed(std::string_view bytes) {
  buffer_.append(bytes);
  std::size_t pos = 0;
  while (pos + protocol::kLengthPrefixBytes <= buffer_.size()) {
    const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + pos);
    const std::size_t n = (std::size_t{p[0]} << 24) | (std::size_t{p[1]} << 16) | (std::size_t{p[2]} << 8) | p[3];
    if (pos + protocol::kLengthPrefixBytes + n > buffer_.size()) break;
    check_frame(std::string_view(buffer_).substr(pos + protocol::kLengthPrefixBytes, n));
    pos += protocol::kLengthPrefixBytes + n;
  }
  buffer_.erase(0, pos);
}

namespace {

bool has_card_token(std::string_view body) {
  for (std::size_t i = 0; i + 3 < body.size(); ++i)
    if (body[i] == '"' && body[i + 3] == '"' && Card::parse(body.substr(i + 1, 2))) return true;
  return false;
}

}  // namespace

void TranscriptAuditor::check_frame(std::string_view body) {
  ++frames_;
  // Every revealing record carries card tokens itself, so frames without
  // any can neither leak nor reveal.
  if (!has_card_token(body)) return;
  const std::string tag = who_ + " frame " + std::to_string(frames_) + ": ";
  auto decoded = protocol::decode_body(body);
  if (!std::holds_alternative<protocol::Envelope>(decoded)) {
    violations_.push_back(tag + "undecodable");
    return;
  }
  const auto& msg = std::get<protocol::Envelope>(decoded).message;
  std::optional<std::int64_t> hand;
  if (const auto* ev = std::get_if<protocol::EventMsg>(&msg)) {
    const Event& e = ev->record;
    hand = e.hand_id;
    const bool own_deal = e.type == "deal_hole" && viewer_ && e.seat == viewer_;
    if (own_deal || e.type == "show" || e.type == "flop" || e.type == "turn" || e.type == "river")
      for (const Card& c : e.cards) revealed_[e.hand_id].insert(c.index());
  } else if (const auto* snap = std::get_if<protocol::Snapshot>(&msg)) {
    hand = snap->view.hand_id;
  }
  // Every quoted two-character string that names a card.
  for (std::size_t i = 0; i + 3 < body.size(); ++i) {
    if (body[i] != '"' || body[i + 3] != '"') continue;
    const auto card = Card::parse(body.substr(i + 1, 2));
    if (!card) continue;
    ++tokens_;
    if (hand && revealed_[*hand].count(card->index())) continue;
    violations_.push_back(tag + card->str() + " not revealed to this viewer" +
                          (hand ? " in hand " + std::to_string(*hand) : std::string()));
  }
}

std::vector<std::string> audit_transcript(std::string_view bytes, std::optional<SeatId> viewer) {
  TranscriptAuditor a(viewer);
  a.feed(bytes);
  return a.violations();
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string log_digest(const std::vector<Event>& log) {
  std::string all;
  for (const auto& e : log) {
    all += protocol::to_json(e).dump();
    all += '\n';
  }
  return sha256_hex(all);
}

}  // namespace holotable::audit
