#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holotable/card.hpp"
#include "holotable/deck.hpp"
#include "holotable/hand_eval.hpp"

namespace holotable {

using Chips = std::int64_t;
using SeatId = int;

inline constexpr int kMaxSeats = 6;

struct TableConfig {
  Chips small_blind = 5;
  Chips big_blind = 10;
  Chips starting_stack = 1000;
  int seat_count = kMaxSeats;
  std::int64_t action_timeout_ms = 30000;

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
  bool operator==(const TableConfig&) const = default;
};

enum class SeatStatus : std::uint8_t { kEmpty, kActive, kFolded, kAllIn, kSittingOut };
enum class Street : std::uint8_t { kPreflop, kFlop, kTurn, kRiver, kShowdown, kComplete };
enum class ActionKind : std::uint8_t { kFold, kCheck, kCall, kBet, kRaiseTo };

std::string_view to_string(SeatStatus s);
std::string_view to_string(Street s);
std::string_view to_string(ActionKind k);
std::optional<ActionKind> parse_action_kind(std::string_view s);

struct SeatState {
  SeatId seat_id = 0;
  Chips stack = 0;
  SeatStatus status = SeatStatus::kEmpty;
  Chips street_committed = 0;
  Chips total_committed = 0;
  std::optional<std::array<Card, 2>> hole;
  bool shown = false;  // hole cards revealed at showdown

  bool in_hand() const { return status == SeatStatus::kActive || status == SeatStatus::kAllIn; }
};

struct Pot {
  Chips amount = 0;
  std::vector<SeatId> eligible;  // ascending
  bool operator==(const Pot&) const = default;
};

using Payout = std::map<SeatId, Chips>;

struct Action {
  ActionKind kind = ActionKind::kFold;
  Chips amount = 0;  // bet / raise_to: the total street commitment after the action
  bool operator==(const Action&) const = default;
};

// A legal move. For call, min == max == chips added. For bet / raise_to the
// amounts are total street commitments.
struct ActionTemplate {
  ActionKind kind = ActionKind::kFold;
  Chips min = 0;
  Chips max = 0;
  bool operator==(const ActionTemplate&) const = default;
};

// Audit record of one transition. Types: hand_start (seat = button, amount =
// big blind), stack (starting stack of each dealt seat), post_sb, post_bb,
// deal_hole, fold, check, call (chips added), bet / raise (new street total),
// timeout, return (uncalled chips), flop, turn, river, show, award, hand_end.
// Only deal_hole is private to its seat.
struct Event {
  std::int64_t hand_id = 0;
  std::int64_t seq = 0;
  std::string type;
  std::optional<SeatId> seat;
  std::optional<Chips> amount;
  std::vector<Card> cards;

  bool is_private() const { return type == "deal_hole"; }
  bool operator==(const Event&) const = default;
};

enum class ActionError : std::uint8_t { kNone, kOutOfTurn, kIllegal };
std::string_view to_string(ActionError e);

struct ApplyResult {
  ActionError error = ActionError::kNone;
  std::vector<Event> events;  // appended by this call
  bool ok() const { return error == ActionError::kNone; }
};

// Seat occupancy at hand start: nullopt = empty seat, 0 = sitting out.
using SeatStacks = std::array<std::optional<Chips>, kMaxSeats>;

class HandState {
 public:
  // Posts blinds and deals two hole cards to each funded seat. Throws
  // std::invalid_argument for fewer than two funded seats, an unfunded
  // button, or a deck that is partially dealt.
  static HandState start(std::int64_t hand_id, const TableConfig& config, const SeatStacks& seats,
                         SeatId button, Deck deck);

  std::vector<ActionTemplate> legal_actions(SeatId seat) const;  // std::logic_error unless acting
  ApplyResult apply(SeatId seat, Action action);
  // Expired clock for the acting seat: check if legal, otherwise fold.
  ApplyResult apply_timeout(SeatId seat);

  // Payout for a state at showdown; std::logic_error otherwise.
  Payout settle() const;

  // First invariant violation found, if any.
  std::optional<std::string> validate() const;

  std::int64_t hand_id() const { return hand_id_; }
  const TableConfig& config() const { return config_; }
  Street street() const { return street_; }
  const std::vector<Card>& board() const { return board_; }
  SeatId button() const { return button_; }
  SeatId small_blind_seat() const { return sb_seat_; }
  SeatId big_blind_seat() const { return bb_seat_; }
  std::optional<SeatId> acting() const { return acting_; }
  Chips current_bet() const { return current_bet_; }
  Chips min_raise() const { return min_raise_; }
  const std::array<SeatState, kMaxSeats>& seats() const { return seats_; }
  const SeatState& seat(SeatId id) const { return seats_.at(static_cast<std::size_t>(id)); }
  const std::vector<Pot>& pots() const { return pots_; }
  const std::vector<Event>& events() const { return events_; }
  const Deck& deck() const { return deck_; }
  Chips baseline() const { return baseline_; }
  bool complete() const { return street_ == Street::kComplete; }
  Chips total_chips() const;  // stacks + pots + uncollected street commitments

 private:
  HandState() = default;

  int seat_count() const { return config_.seat_count; }
  SeatId next_seat(SeatId from) const { return (from + 1) % seat_count(); }
  int count_status(SeatStatus s) const;
  bool needs_to_act(SeatId s) const;
  std::optional<SeatId> next_to_act(SeatId after) const;
  std::optional<ActionError> check_action(SeatId seat, const Action& a) const;

  void emit(std::string type, std::optional<SeatId> seat = {}, std::optional<Chips> amount = {},
            std::vector<Card> cards = {});
  void commit(SeatId s, Chips chips);
  void start_round(SeatId first_from);
  void after_action(SeatId actor);
  void close_round();
  void return_uncalled();
  void collect_pots();
  void award_fold_out();
  void showdown();

  std::int64_t hand_id_ = 0;
  TableConfig config_;
  Street street_ = Street::kPreflop;
  std::vector<Card> board_;
  SeatId button_ = 0;
  SeatId sb_seat_ = 0;
  SeatId bb_seat_ = 0;
  std::optional<SeatId> acting_;
  Chips current_bet_ = 0;
  Chips min_raise_ = 0;
  std::array<SeatState, kMaxSeats> seats_{};
  std::array<bool, kMaxSeats> needs_action_{};
  std::array<bool, kMaxSeats> can_raise_{};
  std::vector<Pot> pots_;
  Deck deck_;
  Chips baseline_ = 0;
  std::vector<Event> events_;
};

// Layered pot construction over total contributions. Each distinct
// contribution level opens a layer of width (level - previous level) times
// the number of seats at or above it; eligibility is the live contributors
// to that layer. A layer with no live contributor merges into the pot below.
// Throws std::invalid_argument on negative amounts or when chips are present
// but no contributor is live.
std::vector<Pot> build_pots(const std::map<SeatId, Chips>& contributions, const std::set<SeatId>& live);

// Adjacent pots with identical eligibility merged; yields a strictly shrinking chain.
std::vector<Pot> merge_equal_pots(std::vector<Pot> pots);

struct ShowdownSeat {
  SeatId seat = 0;
  std::array<Card, 2> hole;
  bool folded = false;
};

// Awards each pot to the best hand among its eligible unfolded seats. Ties
// split evenly with odd chips dealt one at a time clockwise from the seat
// left of the button.
Payout settle_pots(std::span<const Pot> pots, std::span<const Card> board, std::span<const ShowdownSeat> seats,
                   SeatId button, int seat_count);

}  // namespace holotable
