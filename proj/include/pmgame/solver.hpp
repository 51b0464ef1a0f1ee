#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmgame/board.hpp"
#include "pmgame/graph.hpp"

namespace pmgame {

enum class GameValue { BlueWin = -1, Draw = 0, RedWin = 1 };

inline std::string_view to_string(GameValue v) {
  switch (v) {
    case GameValue::BlueWin:
      return "BlueWin";
    case GameValue::Draw:
      return "Draw";
    case GameValue::RedWin:
      return "RedWin";
  }
  return "?";
}

class SolverBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact minimax for the strong perfect matching game on K_m. Positions are
// (Red edge set, Blue edge set) encoded in base 3, one digit per edge; the
// side to move follows from the counts. Terminal tests use the list of all
// perfect matchings of K_m as edge masks, independent of the board's
// matching code.
class SmallGameSolver {
 public:
  explicit SmallGameSolver(int m, std::uint64_t max_positions = 50'000'000) : m_(m), max_positions_(max_positions) {
    if (m < 2 || m > 6 || m % 2 != 0) {
      throw std::invalid_argument("the exact solver handles K_2, K_4 and K_6");
    }
    for (int u = 0; u < m; ++u) {
      for (int v = u + 1; v < m; ++v) {
        edges_.emplace_back(u, v);
      }
    }
    pow3_.assign(edges_.size() + 1, 1);
    for (std::size_t i = 1; i <= edges_.size(); ++i) {
      pow3_[i] = pow3_[i - 1] * 3;
    }
    enumerate_pms((1U << m) - 1, 0);
  }

  int m() const { return m_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::uint32_t>& perfect_matchings() const { return pms_; }
  std::uint64_t positions() const { return positions_; }

  bool has_pm(std::uint32_t mask) const {
    for (auto pm : pms_) {
      if ((mask & pm) == pm) {
        return true;
      }
    }
    return false;
  }

  // Label of a position the moment `mover` has just claimed an edge.
  std::optional<GameValue> terminal(std::uint32_t red, std::uint32_t blue, Player mover) const {
    if (has_pm(mover == Player::Red ? red : blue)) {
      return mover == Player::Red ? GameValue::RedWin : GameValue::BlueWin;
    }
    if (static_cast<std::size_t>(std::popcount(red | blue)) == edges_.size()) {
      return GameValue::Draw;
    }
    return std::nullopt;
  }

  struct Result {
    GameValue value = GameValue::Draw;
    int plies = 0;  // game length under optimal play
  };

  Result solve() {
    memo_.assign(static_cast<std::size_t>(pow3_.back()), 0);
    positions_ = 0;
    const auto r = search(0, 0, 0);
    return {static_cast<GameValue>(r.value), r.plies};
  }

  // Visits every reachable terminal position once, with one move sequence
  // leading to it. visit(red, blue, mover, moves) is called with the
  // solver's terminal label.
  template <class Visit>
  void for_each_terminal(Visit&& visit) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(pow3_.back()), 0);
    std::vector<Edge> path;
    walk(0, 0, 0, seen, path, visit);
  }

 private:
  struct Packed {
    int value;
    int plies;
  };

  void enumerate_pms(std::uint32_t alive, std::uint32_t chosen) {
    if (alive == 0) {
      pms_.push_back(chosen);
      return;
    }
    const int u = std::countr_zero(alive);
    for (int v = u + 1; v < m_; ++v) {
      if (alive & (1U << v)) {
        enumerate_pms(alive & ~(1U << u) & ~(1U << v), chosen | (1U << index(u, v)));
      }
    }
  }

  int index(int u, int v) const {
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (edges_[i] == Edge(u, v)) {
        return static_cast<int>(i);
      }
    }
    return -1;
  }

  // memo byte: 0 unknown, else (value + 2) | plies << 2
  Packed search(std::uint32_t red, std::uint32_t blue, std::uint64_t code) {
    auto& slot = memo_[static_cast<std::size_t>(code)];
    if (slot != 0) {
      return {(slot & 3) - 2, slot >> 2};
    }
    if (++positions_ > max_positions_) {
      throw SolverBudgetExceeded("position budget of " + std::to_string(max_positions_) + " exceeded");
    }
    const int claimed = std::popcount(red | blue);
    const Player mover = claimed % 2 == 0 ? Player::Red : Player::Blue;
    const int sign = mover == Player::Red ? 1 : -1;
    Packed best{-2, 0};
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const std::uint32_t bit = 1U << i;
      if ((red | blue) & bit) {
        continue;
      }
      const std::uint32_t r2 = mover == Player::Red ? red | bit : red;
      const std::uint32_t b2 = mover == Player::Blue ? blue | bit : blue;
      const std::uint64_t c2 = code + pow3_[i] * (mover == Player::Red ? 1 : 2);
      Packed child;
      if (auto t = terminal(r2, b2, mover)) {
        child = {static_cast<int>(*t), 1};
      } else {
        child = search(r2, b2, c2);
        child.plies += 1;
      }
      if (best.value == -2 || better(child, best, sign)) {
        best = child;
      }
    }
    slot = static_cast<std::uint8_t>((best.value + 2) | (best.plies << 2));
    return best;
  }

  // From the mover's side: higher value; among wins the quickest, among
  // losses the longest.
  static bool better(const Packed& a, const Packed& b, int sign) {
    const int va = a.value * sign;
    const int vb = b.value * sign;
    if (va != vb) {
      return va > vb;
    }
    return va > 0 ? a.plies < b.plies : a.plies > b.plies;
  }

  template <class Visit>
  void walk(std::uint32_t red, std::uint32_t blue, std::uint64_t code, std::vector<std::uint8_t>& seen,
            std::vector<Edge>& path, Visit& visit) {
    if (seen[static_cast<std::size_t>(code)]) {
      return;
    }
    seen[static_cast<std::size_t>(code)] = 1;
    const Player mover = std::popcount(red | blue) % 2 == 0 ? Player::Red : Player::Blue;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const std::uint32_t bit = 1U << i;
      if ((red | blue) & bit) {
        continue;
      }
      const std::uint32_t r2 = mover == Player::Red ? red | bit : red;
      const std::uint32_t b2 = mover == Player::Blue ? blue | bit : blue;
      const std::uint64_t c2 = code + pow3_[i] * (mover == Player::Red ? 1 : 2);
      path.push_back(edges_[i]);
      if (auto t = terminal(r2, b2, mover)) {
        if (!seen[static_cast<std::size_t>(c2)]) {
          seen[static_cast<std::size_t>(c2)] = 1;
          visit(r2, b2, mover, *t, path);
        }
      } else {
        walk(r2, b2, c2, seen, path, visit);
      }
      path.pop_back();
    }
  }

  int m_;
  std::uint64_t max_positions_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> pow3_;
  std::vector<std::uint32_t> pms_;
  std::vector<std::uint8_t> memo_;
  std::uint64_t positions_ = 0;
};

struct SolveReport {
  int m = 0;
  GameValue value = GameValue::Draw;
  int plies = 0;
  std::uint64_t positions = 0;
  std::uint64_t terminals_checked = 0;
  std::uint64_t referee_disagreements = 0;
};

inline nlohmann::json solve_report_to_json(const SolveReport& r) {
  return {{"m", r.m},
          {"value", to_string(r.value)},
          {"plies", r.plies},
          {"positions", r.positions},
          {"terminals_checked", r.terminals_checked},
          {"referee_disagreements", r.referee_disagreements}};
}

// The referee's label for a move sequence: replays it on a Board and reads
// who (if anyone) ended the game with the last claim.
inline std::optional<GameValue> referee_label(const std::shared_ptr<const Graph>& km, const std::vector<Edge>& moves) {
  Board b(km);
  std::optional<GameValue> label;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (label) {
      throw std::logic_error("referee: move after the game ended");
    }
    const Player p = i % 2 == 0 ? Player::Red : Player::Blue;
    b.claim(p, moves[i]);
    if (b.has_perfect_matching(p)) {
      label = p == Player::Red ? GameValue::RedWin : GameValue::BlueWin;
    } else if (b.free_count() == 0) {
      label = GameValue::Draw;
    }
  }
  return label;
}

// Game value of K_m, plus agreement of the referee with the solver's
// terminal test on every reachable terminal position.
inline SolveReport solve_small_strong_game(int m, std::uint64_t max_positions = 50'000'000) {
  SmallGameSolver solver(m, max_positions);
  SolveReport rep;
  rep.m = m;
  const auto r = solver.solve();
  rep.value = r.value;
  rep.plies = r.plies;
  rep.positions = solver.positions();
  const auto km = std::make_shared<const Graph>(complete_graph(m));
  solver.for_each_terminal([&](std::uint32_t, std::uint32_t, Player, GameValue label, const std::vector<Edge>& path) {
    ++rep.terminals_checked;
    if (referee_label(km, path) != label) {
      ++rep.referee_disagreements;
    }
  });
  return rep;
}

}  // namespace pmgame
