#include "holotable/deck.hpp"

#include <stdexcept>
#include <utility>

namespace holotable {
namespace {

template <std::size_t... I>
constexpr std::array<Card, kDeckSize> canonical_cards(std::index_sequence<I...>) {
  return {Card::from_index(static_cast<int>(I))...};
}

}  // namespace

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

Deck::Deck() : cards_(canonical_cards(std::make_index_sequence<kDeckSize>{})) {}

Deck Deck::shuffled(Seed seed) const {
  if (cursor_ != 0) throw std::logic_error("cannot shuffle a partially dealt deck");
  Deck out = *this;
  SplitMix64 rng(seed.value);
  for (int i = kDeckSize - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(out.cards_[i], out.cards_[j]);
  }
  return out;
}

Deck Deck::stacked(std::span<const Card> top) {
  Deck out;
  std::array<bool, kDeckSize> used{};
  int n = 0;
  for (const auto& c : top) {
    if (used[static_cast<std::size_t>(c.index())]) throw std::invalid_argument("duplicate card " + c.str());
    used[static_cast<std::size_t>(c.index())] = true;
    out.cards_[static_cast<std::size_t>(n++)] = c;
  }
  for (int i = 0; i < kDeckSize; ++i)
    if (!used[static_cast<std::size_t>(i)]) out.cards_[static_cast<std::size_t>(n++)] = Card::from_index(i);
  return out;
}

Card Deck::deal() {
  if (cursor_ >= kDeckSize) throw std::out_of_range("deck exhausted");
  return cards_[cursor_++];
}

}  // namespace holotable
