#include "holotable/engine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace holotable {

void TableConfig::validate() const {
  if (small_blind < 1) throw std::invalid_argument("small blind must be at least 1");
  if (big_blind < small_blind) throw std::invalid_argument("big blind must be at least the small blind");
  if (starting_stack < big_blind) throw std::invalid_argument("starting stack must be at least the big blind");
  if (seat_count < 2 || seat_count > kMaxSeats) throw std::invalid_argument("seat count must be in [2, 6]");
  if (action_timeout_ms <= 0) throw std::invalid_argument("action timeout must be positive");
}

std::string_view to_string(SeatStatus s) {
  switch (s) {
    case SeatStatus::kEmpty: return "empty";
    case SeatStatus::kActive: return "active";
    case SeatStatus::kFolded: return "folded";
    case SeatStatus::kAllIn: return "all_in";
    case SeatStatus::kSittingOut: return "sitting_out";
  }
  return "?";
}

std::string_view to_string(Street s) {
  switch (s) {
    case Street::kPreflop: return "preflop";
    case Street::kFlop: return "flop";
    case Street::kTurn: return "turn";
    case Street::kRiver: return "river";
    case Street::kShowdown: return "showdown";
    case Street::kComplete: return "complete";
  }
  return "?";
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::kFold: return "fold";
    case ActionKind::kCheck: return "check";
    case ActionKind::kCall: return "call";
    case ActionKind::kBet: return "bet";
    case ActionKind::kRaiseTo: return "raise_to";
  }
  return "?";
}

std::optional<ActionKind> parse_action_kind(std::string_view s) {
  for (auto k : {ActionKind::kFold, ActionKind::kCheck, ActionKind::kCall, ActionKind::kBet, ActionKind::kRaiseTo})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::string_view to_string(ActionError e) {
  switch (e) {
    case ActionError::kNone: return "ok";
    case ActionError::kOutOfTurn: return "out_of_turn";
    case ActionError::kIllegal: return "illegal_action";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Pots

std::vector<Pot> build_pots(const std::map<SeatId, Chips>& contributions, const std::set<SeatId>& live) {
  std::vector<Chips> levels;
  for (const auto& [seat, chips] : contributions) {
    if (chips < 0) throw std::invalid_argument("negative contribution");
    if (chips > 0) levels.push_back(chips);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<Pot> pots;
  Chips previous = 0;
  for (Chips level : levels) {
    Pot layer;
    Chips contributors = 0;
    for (const auto& [seat, chips] : contributions) {
      if (chips < level) continue;
      ++contributors;
      if (live.contains(seat)) layer.eligible.push_back(seat);
    }
    layer.amount = (level - previous) * contributors;
    previous = level;
    if (layer.eligible.empty()) {
      if (pots.empty()) throw std::invalid_argument("chips committed but no live contributor");
      pots.back().amount += layer.amount;
    } else {
      pots.push_back(std::move(layer));
    }
  }
  return pots;
}

std::vector<Pot> merge_equal_pots(std::vector<Pot> pots) {
  std::vector<Pot> out;
  for (auto& p : pots) {
    if (!out.empty() && out.back().eligible == p.eligible) {
      out.back().amount += p.amount;
    } else {
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

// Per-pot winners with their shares, in award order.
std::vector<std::vector<std::pair<SeatId, Chips>>> settle_detailed(std::span<const Pot> pots,
                                                                   std::span<const Card> board,
                                                                   std::span<const ShowdownSeat> seats,
                                                                   SeatId button, int seat_count) {
  if (board.size() != 5) throw std::invalid_argument("showdown needs a five-card board");
  std::map<SeatId, HandValue> values;
  std::map<SeatId, bool> folded;
  for (const auto& s : seats) {
    folded[s.seat] = s.folded;
    if (!s.folded) {
      values[s.seat] = best_of_seven(std::span<const Card, 2>(s.hole), std::span<const Card, 5>(board.first<5>()));
    }
  }
  const auto distance = [&](SeatId s) { return ((s - button - 1) % seat_count + seat_count) % seat_count; };

  std::vector<std::vector<std::pair<SeatId, Chips>>> out;
  for (const auto& pot : pots) {
    std::vector<SeatId> winners;
    std::optional<HandValue> best;
    for (SeatId s : pot.eligible) {
      auto it = values.find(s);
      if (it == values.end()) continue;
      if (!best || it->second > *best) {
        best = it->second;
        winners = {s};
      } else if (it->second == *best) {
        winners.push_back(s);
      }
    }
    if (winners.empty()) throw std::invalid_argument("pot has no eligible unfolded seat");
    std::sort(winners.begin(), winners.end(), [&](SeatId a, SeatId b) { return distance(a) < distance(b); });
    const Chips n = static_cast<Chips>(winners.size());
    const Chips share = pot.amount / n;
    Chips odd = pot.amount % n;
    std::vector<std::pair<SeatId, Chips>> awards;
    for (SeatId w : winners) {
      Chips a = share + (odd > 0 ? 1 : 0);
      if (odd > 0) --odd;
      awards.emplace_back(w, a);
    }
    out.push_back(std::move(awards));
  }
  return out;
}

}  // namespace

Payout settle_pots(std::span<const Pot> pots, std::span<const Card> board, std::span<const ShowdownSeat> seats,
                   SeatId button, int seat_count) {
  Payout payout;
  for (const auto& awards : settle_detailed(pots, board, seats, button, seat_count))
    for (const auto& [seat, chips] : awards) payout[seat] += chips;
  return payout;
}

// ---------------------------------------------------------------------------
// HandState

HandState HandState::start(std::int64_t hand_id, const TableConfig& config, const SeatStacks& stacks,
                           SeatId button, Deck deck) {
  config.validate();
  if (deck.cursor() != 0) throw std::invalid_argument("deck must be freshly shuffled");

  HandState h;
  h.hand_id_ = hand_id;
  h.config_ = config;
  h.deck_ = deck;

  std::vector<SeatId> dealt;
  for (SeatId s = 0; s < kMaxSeats; ++s) {
    auto& seat = h.seats_[static_cast<std::size_t>(s)];
    seat.seat_id = s;
    if (!stacks[static_cast<std::size_t>(s)]) continue;
    if (s >= config.seat_count) throw std::invalid_argument("occupied seat beyond seat count");
    const Chips stack = *stacks[static_cast<std::size_t>(s)];
    if (stack < 0) throw std::invalid_argument("negative stack");
    seat.stack = stack;
    seat.status = stack > 0 ? SeatStatus::kActive : SeatStatus::kSittingOut;
    if (stack > 0) dealt.push_back(s);
  }
  if (dealt.size() < 2) throw std::invalid_argument("need at least two funded seats");
  if (button < 0 || button >= config.seat_count || h.seats_[static_cast<std::size_t>(button)].status != SeatStatus::kActive)
    throw std::invalid_argument("button must be a funded seat");
  h.button_ = button;
  for (const auto& seat : h.seats_) h.baseline_ += seat.stack;

  const auto next_dealt = [&](SeatId from) {
    SeatId s = from;
    do {
      s = h.next_seat(s);
    } while (h.seats_[static_cast<std::size_t>(s)].status != SeatStatus::kActive);
    return s;
  };

  h.emit("hand_start", button, config.big_blind);
  for (SeatId s : dealt) h.emit("stack", s, h.seats_[static_cast<std::size_t>(s)].stack);
  if (dealt.size() == 2) {
    h.sb_seat_ = button;
    h.bb_seat_ = next_dealt(button);
  } else {
    h.sb_seat_ = next_dealt(button);
    h.bb_seat_ = next_dealt(h.sb_seat_);
  }
  const Chips sb = std::min(config.small_blind, h.seat(h.sb_seat_).stack);
  h.commit(h.sb_seat_, sb);
  h.emit("post_sb", h.sb_seat_, sb);
  const Chips bb = std::min(config.big_blind, h.seat(h.bb_seat_).stack);
  h.commit(h.bb_seat_, bb);
  h.emit("post_bb", h.bb_seat_, bb);

  // One card at a time, starting left of the button.
  std::vector<SeatId> order;
  for (SeatId s = h.next_seat(button);; s = h.next_seat(s)) {
    if (h.seats_[static_cast<std::size_t>(s)].in_hand()) order.push_back(s);
    if (s == button) break;
  }
  std::array<std::vector<Card>, kMaxSeats> hole_cards;
  for (int round = 0; round < 2; ++round)
    for (SeatId s : order) hole_cards[static_cast<std::size_t>(s)].push_back(h.deck_.deal());
  for (SeatId s : order) {
    const auto& c = hole_cards[static_cast<std::size_t>(s)];
    h.seats_[static_cast<std::size_t>(s)].hole = std::array<Card, 2>{c[0], c[1]};
    h.emit("deal_hole", s, std::nullopt, c);
  }

  h.current_bet_ = config.big_blind;
  h.min_raise_ = config.big_blind;
  h.start_round(h.bb_seat_);
  if (!h.acting_) h.close_round();
  return h;
}

int HandState::count_status(SeatStatus st) const {
  return static_cast<int>(std::count_if(seats_.begin(), seats_.end(), [&](const SeatState& s) { return s.status == st; }));
}

Chips HandState::total_chips() const {
  Chips total = 0;
  for (const auto& s : seats_) total += s.stack + s.street_committed;
  for (const auto& p : pots_) total += p.amount;
  return total;
}

void HandState::emit(std::string type, std::optional<SeatId> seat, std::optional<Chips> amount,
                     std::vector<Card> cards) {
  events_.push_back(Event{hand_id_, static_cast<std::int64_t>(events_.size()), std::move(type), seat, amount,
                          std::move(cards)});
}

void HandState::commit(SeatId s, Chips chips) {
  auto& seat = seats_[static_cast<std::size_t>(s)];
  seat.stack -= chips;
  seat.street_committed += chips;
  seat.total_committed += chips;
  if (seat.stack == 0 && seat.status == SeatStatus::kActive) seat.status = SeatStatus::kAllIn;
}

bool HandState::needs_to_act(SeatId s) const {
  const auto& seat = seats_[static_cast<std::size_t>(s)];
  if (seat.status != SeatStatus::kActive || !needs_action_[static_cast<std::size_t>(s)]) return false;
  if (count_status(SeatStatus::kActive) == 1) {
    Chips highest = 0;
    for (const auto& o : seats_)
      if (o.in_hand()) highest = std::max(highest, o.street_committed);
    if (seat.street_committed >= highest) return false;
  }
  return true;
}

std::optional<SeatId> HandState::next_to_act(SeatId after) const {
  SeatId s = after;
  for (int k = 0; k < seat_count(); ++k) {
    s = next_seat(s);
    if (needs_to_act(s)) return s;
  }
  return std::nullopt;
}

void HandState::start_round(SeatId first_from) {
  for (SeatId s = 0; s < kMaxSeats; ++s) {
    const bool active = seats_[static_cast<std::size_t>(s)].status == SeatStatus::kActive;
    needs_action_[static_cast<std::size_t>(s)] = active;
    can_raise_[static_cast<std::size_t>(s)] = active;
  }
  acting_ = next_to_act(first_from);
}

std::vector<ActionTemplate> HandState::legal_actions(SeatId seat) const {
  if (!acting_ || *acting_ != seat) throw std::logic_error("seat is not acting");
  const auto& s = seats_[static_cast<std::size_t>(seat)];
  const Chips to_call = current_bet_ - s.street_committed;
  std::vector<ActionTemplate> out;
  out.push_back({ActionKind::kFold, 0, 0});
  if (to_call <= 0) {
    out.push_back({ActionKind::kCheck, 0, 0});
  } else {
    const Chips c = std::min(to_call, s.stack);
    out.push_back({ActionKind::kCall, c, c});
  }
  int other_active = 0;
  for (const auto& o : seats_)
    if (o.status == SeatStatus::kActive && o.seat_id != seat) ++other_active;
  if (other_active == 0) return out;
  if (current_bet_ == 0) {
    out.push_back({ActionKind::kBet, std::min(config_.big_blind, s.stack), s.stack});
  } else if (can_raise_[static_cast<std::size_t>(seat)] && s.stack > to_call) {
    const Chips max = s.street_committed + s.stack;
    out.push_back({ActionKind::kRaiseTo, std::min(current_bet_ + min_raise_, max), max});
  }
  return out;
}

std::optional<ActionError> HandState::check_action(SeatId seat, const Action& a) const {
  if (street_ == Street::kComplete || street_ == Street::kShowdown || !acting_ || *acting_ != seat)
    return ActionError::kOutOfTurn;
  for (const auto& t : legal_actions(seat)) {
    if (t.kind != a.kind) continue;
    if (a.kind == ActionKind::kBet || a.kind == ActionKind::kRaiseTo) {
      if (a.amount < t.min || a.amount > t.max) return ActionError::kIllegal;
    }
    return std::nullopt;
  }
  return ActionError::kIllegal;
}

ApplyResult HandState::apply(SeatId seat, Action a) {
  if (auto err = check_action(seat, a)) return {*err, {}};
  const std::size_t mark = events_.size();
  auto& s = seats_[static_cast<std::size_t>(seat)];
  switch (a.kind) {
    case ActionKind::kFold:
      s.status = SeatStatus::kFolded;
      if (!pots_.empty() && count_status(SeatStatus::kActive) + count_status(SeatStatus::kAllIn) > 1) {
        std::map<SeatId, Chips> collected;
        std::set<SeatId> live;
        for (const auto& o : seats_) {
          if (o.total_committed > o.street_committed) collected[o.seat_id] = o.total_committed - o.street_committed;
          if (o.in_hand()) live.insert(o.seat_id);
        }
        pots_ = merge_equal_pots(build_pots(collected, live));
      }
      emit("fold", seat);
      break;
    case ActionKind::kCheck:
      emit("check", seat);
      break;
    case ActionKind::kCall: {
      const Chips c = std::min(current_bet_ - s.street_committed, s.stack);
      commit(seat, c);
      emit("call", seat, c);
      break;
    }
    case ActionKind::kBet:
    case ActionKind::kRaiseTo: {
      commit(seat, a.amount - s.street_committed);
      const Chips increment = a.amount - current_bet_;
      const bool full = increment >= min_raise_;
      if (full) min_raise_ = increment;
      current_bet_ = a.amount;
      for (SeatId o = 0; o < kMaxSeats; ++o) {
        const auto& other = seats_[static_cast<std::size_t>(o)];
        if (o == seat || other.status != SeatStatus::kActive) continue;
        if (full) {
          needs_action_[static_cast<std::size_t>(o)] = true;
          can_raise_[static_cast<std::size_t>(o)] = true;
        } else if (other.street_committed < a.amount) {
          needs_action_[static_cast<std::size_t>(o)] = true;
        }
      }
      emit(a.kind == ActionKind::kBet ? "bet" : "raise", seat, a.amount);
      break;
    }
  }
  needs_action_[static_cast<std::size_t>(seat)] = false;
  can_raise_[static_cast<std::size_t>(seat)] = false;
  after_action(seat);
  return {ActionError::kNone, {events_.begin() + static_cast<std::ptrdiff_t>(mark), events_.end()}};
}

ApplyResult HandState::apply_timeout(SeatId seat) {
  if (street_ == Street::kComplete || !acting_ || *acting_ != seat) return {ActionError::kOutOfTurn, {}};
  const std::size_t mark = events_.size();
  const auto legal = legal_actions(seat);
  const bool can_check =
      std::any_of(legal.begin(), legal.end(), [](const ActionTemplate& t) { return t.kind == ActionKind::kCheck; });
  emit("timeout", seat);
  auto r = apply(seat, Action{can_check ? ActionKind::kCheck : ActionKind::kFold, 0});
  r.events.assign(events_.begin() + static_cast<std::ptrdiff_t>(mark), events_.end());
  return r;
}

void HandState::after_action(SeatId actor) {
  if (count_status(SeatStatus::kActive) + count_status(SeatStatus::kAllIn) == 1) {
    award_fold_out();
    return;
  }
  acting_ = next_to_act(actor);
  if (!acting_) close_round();
}

void HandState::return_uncalled() {
  SeatId top = -1;
  Chips top_amount = 0;
  Chips second = 0;
  for (const auto& s : seats_) {
    if (s.street_committed > top_amount) {
      second = top_amount;
      top_amount = s.street_committed;
      top = s.seat_id;
    } else if (s.street_committed > second) {
      second = s.street_committed;
    }
  }
  if (top < 0 || top_amount <= second) return;
  auto& s = seats_[static_cast<std::size_t>(top)];
  const Chips excess = top_amount - second;
  s.stack += excess;
  s.street_committed -= excess;
  s.total_committed -= excess;
  if (s.status == SeatStatus::kAllIn) s.status = SeatStatus::kActive;
  emit("return", top, excess);
}

void HandState::collect_pots() {
  std::map<SeatId, Chips> contributions;
  std::set<SeatId> live;
  for (const auto& s : seats_) {
    if (s.total_committed > 0) contributions[s.seat_id] = s.total_committed;
    if (s.in_hand()) live.insert(s.seat_id);
  }
  pots_ = merge_equal_pots(build_pots(contributions, live));
  for (auto& s : seats_) s.street_committed = 0;
}

void HandState::close_round() {
  for (;;) {
    return_uncalled();
    collect_pots();
    current_bet_ = 0;
    min_raise_ = config_.big_blind;
    if (street_ == Street::kRiver) {
      showdown();
      return;
    }
    if (street_ == Street::kPreflop) {
      street_ = Street::kFlop;
      std::vector<Card> flop = {deck_.deal(), deck_.deal(), deck_.deal()};
      board_.insert(board_.end(), flop.begin(), flop.end());
      emit("flop", std::nullopt, std::nullopt, flop);
    } else {
      street_ = street_ == Street::kFlop ? Street::kTurn : Street::kRiver;
      const Card c = deck_.deal();
      board_.push_back(c);
      emit(street_ == Street::kTurn ? "turn" : "river", std::nullopt, std::nullopt, {c});
    }
    start_round(button_);
    if (acting_) return;
  }
}

void HandState::award_fold_out() {
  acting_.reset();
  return_uncalled();
  collect_pots();
  const auto winner = std::find_if(seats_.begin(), seats_.end(), [](const SeatState& s) { return s.in_hand(); });
  for (const auto& pot : pots_) {
    winner->stack += pot.amount;
    emit("award", winner->seat_id, pot.amount);
  }
  pots_.clear();
  current_bet_ = 0;
  street_ = Street::kComplete;
  for (auto& seat : seats_)
    if (seat.status == SeatStatus::kAllIn && seat.stack > 0) seat.status = SeatStatus::kActive;
  emit("hand_end");
}

Payout HandState::settle() const {
  if (street_ != Street::kShowdown) throw std::logic_error("settle requires a showdown state");
  std::vector<ShowdownSeat> contenders;
  for (const auto& s : seats_)
    if (s.hole) contenders.push_back({s.seat_id, *s.hole, !s.in_hand()});
  return settle_pots(pots_, board_, contenders, button_, seat_count());
}

void HandState::showdown() {
  street_ = Street::kShowdown;
  acting_.reset();
  for (SeatId s = next_seat(button_), k = 0; k < seat_count(); s = next_seat(s), ++k) {
    auto& seat = seats_[static_cast<std::size_t>(s)];
    if (!seat.in_hand()) continue;
    seat.shown = true;
    emit("show", s, std::nullopt, {seat.hole->begin(), seat.hole->end()});
  }
  std::vector<ShowdownSeat> contenders;
  for (const auto& s : seats_)
    if (s.hole) contenders.push_back({s.seat_id, *s.hole, !s.in_hand()});
  for (const auto& awards : settle_detailed(pots_, board_, contenders, button_, seat_count())) {
    for (const auto& [seat, chips] : awards) {
      seats_[static_cast<std::size_t>(seat)].stack += chips;
      emit("award", seat, chips);
    }
  }
  pots_.clear();
  street_ = Street::kComplete;
  for (auto& seat : seats_)
    if (seat.status == SeatStatus::kAllIn && seat.stack > 0) seat.status = SeatStatus::kActive;
  emit("hand_end");
}

std::optional<std::string> HandState::validate() const {
  const std::size_t b = board_.size();
  switch (street_) {
    case Street::kPreflop:
      if (b != 0) return "preflop board must be empty";
      break;
    case Street::kFlop:
      if (b != 3) return "flop board must have 3 cards";
      break;
    case Street::kTurn:
      if (b != 4) return "turn board must have 4 cards";
      break;
    case Street::kRiver:
    case Street::kShowdown:
      if (b != 5) return "river board must have 5 cards";
      break;
    case Street::kComplete:
      if (b != 0 && b != 3 && b != 4 && b != 5) return "bad board length";
      if (!pots_.empty()) return "completed hand still holds pots";
      break;
  }
  if (total_chips() != baseline_)
    return "chip conservation violated: " + std::to_string(total_chips()) + " != " + std::to_string(baseline_);
  const bool betting = street_ <= Street::kRiver;
  if (!betting && acting_) return "acting seat outside a betting street";
  if (betting && !acting_) return "betting street without an acting seat";
  if (acting_ && seats_[static_cast<std::size_t>(*acting_)].status != SeatStatus::kActive)
    return "acting seat is not active";
  for (const auto& s : seats_) {
    if (s.stack < 0) return "negative stack";
    if (s.street_committed > s.total_committed) return "street commitment exceeds total";
    if (s.status == SeatStatus::kAllIn && s.stack != 0) return "all-in seat holds chips";
    const bool dealt = s.status == SeatStatus::kActive || s.status == SeatStatus::kAllIn || s.status == SeatStatus::kFolded;
    if (dealt != s.hole.has_value()) return "hole cards present iff dealt in";
  }
  for (std::size_t k = 0; k < pots_.size(); ++k) {
    if (pots_[k].eligible.empty()) return "pot without eligible seats";
    if (pots_[k].amount < 0) return "negative pot";
    for (SeatId e : pots_[k].eligible)
      if (!seats_[static_cast<std::size_t>(e)].in_hand()) return "folded seat eligible for a pot";
    if (k > 0) {
      const auto& outer = pots_[k - 1].eligible;
      const auto& inner = pots_[k].eligible;
      if (inner.size() >= outer.size() || !std::includes(outer.begin(), outer.end(), inner.begin(), inner.end()))
        return "pot eligibility does not strictly shrink";
    }
  }
  if (deck_.cursor() != static_cast<int>(b) + 2 * static_cast<int>(std::count_if(seats_.begin(), seats_.end(),
                                                                             [](const SeatState& s) { return s.hole.has_value(); })))
    return "deck cursor does not match dealt cards";
  return std::nullopt;
}

}  // namespace holotable
