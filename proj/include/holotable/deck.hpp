#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "holotable/card.hpp"

namespace holotable {

struct Seed {
  std::uint64_t value = 0;
  constexpr bool operator==(const Seed&) const = default;
};

// SplitMix64 (Steele, Lea, Flood 2014). The exact output sequence is part of
// the replay contract: changing it changes every event log.
class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound) by rejection: draws r until r >= (2^64 - bound) % bound,
  // then returns r % bound. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

class Deck {
 public:
  // Canonical order, cursor 0.
  Deck();

  // Fisher-Yates driven by SplitMix64(seed): for i = 51 down to 1, swap(i, below(i + 1)).
  // Throws std::logic_error if any card has been dealt.
  Deck shuffled(Seed seed) const;

  // Deck whose first cards are `top` in order, followed by the remaining cards
  // in canonical order. Throws std::invalid_argument on duplicates.
  static Deck stacked(std::span<const Card> top);

  Card deal();  // throws std::out_of_range when exhausted
  int cursor() const { return cursor_; }
  int remaining() const { return kDeckSize - cursor_; }
  const std::array<Card, kDeckSize>& cards() const { return cards_; }

  bool operator==(const Deck&) const = default;

 private:
  std::array<Card, kDeckSize> cards_;
  int cursor_ = 0;
};

inline Deck new_deck() { return Deck(); }
inline Deck shuffle(const Deck& deck, Seed seed) { return deck.shuffled(seed); }

}  // namespace holotable
