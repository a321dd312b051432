#pragma once

// Independent reference implementations used only by tests. None of these
// share code paths with the library beyond the Card type.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "holotable/card.hpp"
#include "holotable/engine.hpp"
#include "holotable/hand_eval.hpp"

namespace holotable::oracle {

// Category of a five-card hand from independent predicates.
inline int naive_category(std::span<const Card> five) {
  std::array<int, 5> r{};
  for (int i = 0; i < 5; ++i) r[i] = five[i].rank();
  std::sort(r.begin(), r.end());
  bool flush = true;
  for (int i = 1; i < 5; ++i) flush = flush && five[i].suit() == five[0].suit();
  bool distinct = true;
  for (int i = 1; i < 5; ++i) distinct = distinct && r[i] != r[i - 1];
  const bool run = distinct && r[4] - r[0] == 4;
  const bool wheel = r == std::array<int, 5>{2, 3, 4, 5, 14};
  const bool straight = run || wheel;

  std::map<int, int> counts;
  for (int x : r) ++counts[x];
  std::vector<int> shape;
  for (auto& [rank, n] : counts) shape.push_back(n);
  std::sort(shape.rbegin(), shape.rend());

  if (straight && flush) return 8;
  if (shape[0] == 4) return 7;
  if (shape[0] == 3 && shape[1] == 2) return 6;
  if (flush) return 5;
  if (straight) return 4;
  if (shape[0] == 3) return 3;
  if (shape[0] == 2 && shape[1] == 2) return 2;
  if (shape[0] == 2) return 1;
  return 0;
}

// Max of evaluate5 over all 21 five-card subsets of seven cards.
inline HandValue brute_force_seven(std::span<const Card, 7> seven) {
  HandValue best;
  bool first = true;
  for (int skip_a = 0; skip_a < 7; ++skip_a) {
    for (int skip_b = skip_a + 1; skip_b < 7; ++skip_b) {
      std::vector<Card> five;
      for (int i = 0; i < 7; ++i)
        if (i != skip_a && i != skip_b) five.push_back(seven[i]);
      const HandValue v = evaluate5(five);
      if (first || v > best) best = v;
      first = false;
    }
  }
  return best;
}

// Per-chip pot assignment: chip number k of every contributor lands in the
// pot keyed by the set of seats whose contribution reaches k. Runs of equal
// contributor sets form one pot; a run with no live contributor folds into
// the run below it.
inline std::vector<Pot> per_chip_pots(const std::map<SeatId, Chips>& contributions, const std::set<SeatId>& live) {
  Chips top = 0;
  for (auto& [s, c] : contributions) top = std::max(top, c);
  std::vector<std::pair<std::set<SeatId>, Chips>> runs;  // contributor set, chips
  for (Chips k = 1; k <= top; ++k) {
    std::set<SeatId> reach;
    for (auto& [s, c] : contributions)
      if (c >= k) reach.insert(s);
    if (runs.empty() || runs.back().first != reach) runs.push_back({reach, 0});
    runs.back().second += static_cast<Chips>(reach.size());
  }
  std::vector<Pot> pots;
  for (auto& [reach, chips] : runs) {
    std::vector<SeatId> eligible;
    for (SeatId s : reach)
      if (live.contains(s)) eligible.push_back(s);
    if (eligible.empty()) {
      pots.back().amount += chips;
    } else {
      pots.push_back(Pot{chips, eligible});
    }
  }
  return pots;
}

}  // namespace holotable::oracle
