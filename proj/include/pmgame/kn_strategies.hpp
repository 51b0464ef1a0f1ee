#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmgame/board.hpp"
#include "pmgame/local_search.hpp"
#include "pmgame/matching.hpp"

namespace pmgame {

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class PreconditionViolated : public StrategyError {
 public:
  using StrategyError::StrategyError;
};
class CaseExhausted : public StrategyError {
 public:
  using StrategyError::StrategyError;
};
class SelectionFailure : public StrategyError {
 public:
  using StrategyError::StrategyError;
};
class NoLegalMove : public StrategyError {
 public:
  using StrategyError::StrategyError;
};

// ---- views of a board restricted to a vertex set H (kept sorted) ----

inline bool in_set(std::span<const Vertex> sorted, Vertex v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

inline std::vector<Vertex> sorted_set(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Number of p-edges from v to other vertices of H.
inline int h_degree(const Board& b, Player p, Vertex v, std::span<const Vertex> h) {
  int d = 0;
  for (auto w : b.neighbors(p, v)) {
    d += in_set(h, w) ? 1 : 0;
  }
  return d;
}

inline std::vector<Edge> edges_inside(const Board& b, Player p, std::span<const Vertex> h) {
  std::vector<Edge> out;
  for (auto v : h) {
    for (auto w : b.neighbors(p, v)) {
      if (v < w && in_set(h, w)) {
        out.emplace_back(v, w);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int max_h_degree(const Board& b, Player p, std::span<const Vertex> h) {
  int best = 0;
  for (auto v : h) {
    best = std::max(best, h_degree(b, p, v, h));
  }
  return best;
}

// e(P[H]) - M(P[H]): moves of p inside H that did not grow p's matching there.
inline int wasted_inside(const Board& b, Player p, std::span<const Vertex> h) {
  const auto e = edges_inside(b, p, h);
  return static_cast<int>(e.size()) - static_cast<int>(max_matching_of_edges(e).size());
}

inline int count_h_distinct(const Board& b, std::span<const Vertex> h_unsorted) {
  const auto h = sorted_set({h_unsorted.begin(), h_unsorted.end()});
  int c = 0;
  for (auto v : h) {
    if (h_degree(b, Player::Blue, v, h) >= 1 && h_degree(b, Player::Red, v, h) == 0) {
      ++c;
    }
  }
  return c;
}

inline bool red_has_pm_of(const Board& b, std::span<const Vertex> h) {
  const auto e = edges_inside(b, Player::Red, h);
  return 2 * max_matching_of_edges(e).size() == h.size() - h.size() % 2;
}

// Red's maximum matching inside H and the H-vertices it leaves exposed.
struct RedCover {
  Matching matching;
  std::vector<Vertex> exposed;
};

inline RedCover red_cover(const Board& b, std::span<const Vertex> h) {
  RedCover rc;
  rc.matching = max_matching_of_edges(edges_inside(b, Player::Red, h));
  std::vector<Vertex> covered;
  for (const auto& e : rc.matching.edges) {
    covered.push_back(e.u);
    covered.push_back(e.v);
  }
  std::sort(covered.begin(), covered.end());
  for (auto v : h) {
    if (!std::binary_search(covered.begin(), covered.end(), v)) {
      rc.exposed.push_back(v);
    }
  }
  return rc;
}

// Exact forced-completion search for Red on H within `budget` more moves.
// Small sets are searched whole; larger ones through regions made of the
// exposed vertices plus the Red matching edges that Blue has touched least,
// which keeps every region within the search's size limit.
inline std::optional<std::pair<Edge, int>> finish_search(const Board& b, std::span<const Vertex> h_unsorted,
                                                         int budget) {
  const auto h = sorted_set({h_unsorted.begin(), h_unsorted.end()});
  if (budget <= 0 || h.size() < 2) {
    return std::nullopt;
  }
  if (h.size() <= 8) {
    CompletionSearch s(b, h);
    return s.find(budget);
  }
  const auto rc = red_cover(b, h);
  if (rc.exposed.size() > 12) {
    return std::nullopt;
  }
  // Matching edges already joined to an exposed vertex by a spare Red edge
  // come first, then those Blue has touched least.
  auto score = [&](const Edge& e) {
    int s = 0;
    for (auto x : rc.exposed) {
      s -= 16 * ((b.owned_by(e.u, x, Player::Red) ? 1 : 0) + (b.owned_by(e.v, x, Player::Red) ? 1 : 0));
      s += (b.owned_by(e.u, x, Player::Blue) ? 1 : 0) + (b.owned_by(e.v, x, Player::Blue) ? 1 : 0);
    }
    return s;
  };
  auto pool = rc.matching.edges;
  std::stable_sort(pool.begin(), pool.end(), [&](const Edge& a, const Edge& c) { return score(a) < score(c); });
  const std::size_t limit = std::min<std::size_t>(h.size(), 12);
  for (std::size_t r = 0; r <= pool.size(); ++r) {
    std::vector<Vertex> region = rc.exposed;
    for (std::size_t i = 0; i < r; ++i) {
      region.push_back(pool[i].u);
      region.push_back(pool[i].v);
    }
    if (region.size() > limit) {
      break;
    }
    CompletionSearch s(b, region, 400'000);
    if (auto hit = s.find(budget)) {
      return hit;
    }
  }
  return std::nullopt;
}

// ---- S^weak: Maker's fast strategy for the perfect matching game on a clique ----

// Contract: from an empty Red position on H, a perfect matching of H (an
// almost perfect one when |H| is odd) within |H|/2 + 1 Red moves
// (floor(|H|/2) when odd). Small sets and endgames are decided by exact
// search; otherwise Red covers Blue-touched vertices first so that Blue's
// blocks cannot pile up on a single exposed vertex.
class SWeak {
 public:
  explicit SWeak(std::vector<Vertex> h, std::optional<int> budget = std::nullopt)
      : h_(sorted_set(std::move(h))),
        budget_(budget ? *budget : static_cast<int>(h_.size() / 2 + (h_.size() % 2 == 0 ? 1 : 0))) {}

  const std::vector<Vertex>& vertices() const { return h_; }
  // Sets up to this size are searched whole on every move (default 8).
  void set_search_limit(std::size_t limit) { search_limit_ = limit; }
  int moves() const { return moves_; }
  int budget() const { return budget_; }
  bool complete(const Board& b) const { return red_has_pm_of(b, h_); }

  Edge next(const Board& b) {
    const Edge e = choose(b);
    ++moves_;
    return e;
  }

 private:
  Edge choose(const Board& b) const {
    const auto rc = red_cover(b, h_);
    const int deficiency = static_cast<int>(h_.size() / 2 - rc.matching.size());
    if (deficiency <= 0) {
      throw NoLegalMove("S^weak: H already matched");
    }
    const int remaining = std::max(budget_ - moves_, deficiency);
    if (h_.size() <= search_limit_ || deficiency <= 2) {
      if (auto hit = finish_search(b, h_, remaining)) {
        return hit->first;
      }
    }
    const auto& x = rc.exposed;
    std::vector<Vertex> touched;
    std::vector<Vertex> fresh;
    for (auto v : x) {
      (h_degree(b, Player::Blue, v, h_) > 0 ? touched : fresh).push_back(v);
    }
    std::stable_sort(touched.begin(), touched.end(), [&](Vertex a, Vertex c) {
      return h_degree(b, Player::Blue, a, h_) > h_degree(b, Player::Blue, c, h_);
    });
    for (std::size_t i = 0; i < touched.size(); ++i) {
      for (std::size_t j = i + 1; j < touched.size(); ++j) {
        if (b.is_free(touched[i], touched[j])) {
          return Edge(touched[i], touched[j]);
        }
      }
      for (auto f : fresh) {
        if (b.is_free(touched[i], f)) {
          return Edge(touched[i], f);
        }
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        if (b.is_free(x[i], x[j])) {
          return Edge(x[i], x[j]);
        }
      }
    }
    // Every edge among exposed vertices is gone: start an augmenting path
    // through a Red matching edge.
    for (auto v : x) {
      for (const auto& m : rc.matching.edges) {
        for (auto [a, c] : {std::pair{m.u, m.v}, std::pair{m.v, m.u}}) {
          if (!b.is_free(v, a)) {
            continue;
          }
          for (auto w : x) {
            if (w != v && b.is_free(c, w)) {
              return Edge(v, a);
            }
          }
        }
      }
    }
    for (auto v : h_) {
      for (auto w : h_) {
        if (v < w && b.is_free(v, w)) {
          return Edge(v, w);
        }
      }
    }
    throw NoLegalMove("S^weak: no free edge inside H");
  }

  std::vector<Vertex> h_;
  int budget_;
  int moves_ = 0;
  std::size_t search_limit_ = 8;
};

// ---- S^a.strong ----

enum class Stage { I, II, III, M, Search, Done };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::I:
      return "I";
    case Stage::II:
      return "II";
    case Stage::III:
      return "III";
    case Stage::M:
      return "M";
    case Stage::Search:
      return "search";
    case Stage::Done:
      return "done";
  }
  return "?";
}

// Red's "almost strong" strategy on a clique H: a perfect matching of H in
// at most |H|/2 + 2 moves without wasting more moves than Blue, provided
// some vertex of H is Blue-touched and Blue owns at most one edge inside H
// when Red starts. j (Red's move index) is read off the board as the number
// of Red edges inside H, so the object can be entered mid-way.
class AStrong {
 public:
  struct Stage3Plan {
    Vertex x = -1, y = -1, u = -1, v = -1, w = -1, z = -1;
    int step = 0;
  };

  explicit AStrong(std::vector<Vertex> h, std::optional<Vertex> trap = std::nullopt)
      : h_(sorted_set(std::move(h))), trap_(trap) {
    if (trap_ && !in_set(h_, *trap_)) {
      throw PreconditionViolated("trap vertex outside H");
    }
  }

  // Entry used after an outside first move on H (S_empty, the dangerous
  // path case, the last board): Red's H-graph is a matching already.
  static AStrong from_stage2(std::vector<Vertex> h, std::optional<Vertex> trap = std::nullopt) {
    AStrong a(std::move(h), trap);
    a.stage_ = Stage::II;
    return a;
  }

  const std::vector<Vertex>& vertices() const { return h_; }
  Stage stage() const { return stage_; }
  std::optional<Vertex> trap() const { return u_is_h_ ? std::nullopt : trap_; }
  const Stage3Plan& plan() const { return plan_; }
  int move_budget() const { return static_cast<int>(h_.size() / 2) + 2; }
  int red_moves(const Board& b) const { return static_cast<int>(edges_inside(b, Player::Red, h_).size()); }
  bool complete(const Board& b) const { return red_has_pm_of(b, h_); }

  // When false, reaching Stage III hands control back to the caller
  // (S_empty runs its own Stage III with importing).
  void set_own_stage3(bool own) { own_stage3_ = own; }
  bool awaiting_stage3() const { return stage_ == Stage::III && !own_stage3_; }

  // Applies the stage transitions that depend on the current position
  // (the Stage-M checkpoint and the switch to Stage III).
  void advance(const Board& b) {
    if (stage_ != Stage::II || h_.size() % 2 == 1) {
      return;
    }
    const int m = static_cast<int>(h_.size());
    const int j = red_moves(b);
    const int checkpoint = m / 4 + 2;
    if (j == checkpoint && checkpoint + 1 <= m / 2 - 1 && max_h_degree(b, Player::Blue, h_) > 1) {
      stage_ = Stage::M;
      weak_.emplace(h_, move_budget() - j);
    } else if (j >= m / 2 - 1) {
      stage_ = Stage::III;
    }
  }

  Edge next(const Board& b) {
    if (h_.size() % 2 == 1) {
      if (!weak_) {
        weak_.emplace(h_);
      }
      stage_ = Stage::M;
      return weak_->next(b);
    }
    if (stage_ == Stage::I) {
      return stage1(b);
    }
    advance(b);
    if (stage_ == Stage::II) {
      return stage2_keep_distinct(b);
    }
    if (stage_ == Stage::M) {
      return weak_->next(b);
    }
    if (stage_ == Stage::III) {
      if (!own_stage3_) {
        throw StrategyError("Stage III belongs to the caller");
      }
      if (auto e = stage3_finish(b)) {
        return *e;
      }
      // No clean six-vertex frame: on small boards Blue's edges at x can
      // touch every Red matching edge. Finish by exact search instead.
      stage_ = Stage::Search;
    }
    if (stage_ == Stage::Search) {
      if (auto hit = finish_search(b, h_, std::max(move_budget() - red_moves(b), 1))) {
        return hit->first;
      }
      throw SelectionFailure("S^a.strong: no forced completion within budget");
    }
    throw NoLegalMove("S^a.strong: H already complete");
  }

  // One Stage-II move: extend the matching by an edge between uncovered
  // vertices so that at most one H-distinct vertex remains.
  Edge stage2_keep_distinct(const Board& b) {
    std::vector<Vertex> distinct;
    std::vector<Vertex> fresh;
    for (auto v : h_) {
      if (h_degree(b, Player::Red, v, h_) > 0) {
        continue;
      }
      (h_degree(b, Player::Blue, v, h_) > 0 ? distinct : fresh).push_back(v);
    }
    if (!distinct.empty()) {
      u_is_h_ = true;
    }
    auto lex_first = [&](std::span<const Vertex> a, std::span<const Vertex> c) -> std::optional<Edge> {
      std::optional<Edge> best;
      for (auto x : a) {
        for (auto y : c) {
          if (x != y && b.is_free(x, y) && (!best || Edge(x, y) < *best)) {
            best = Edge(x, y);
          }
        }
      }
      return best;
    };
    std::optional<Edge> pick;
    switch (distinct.size()) {
      case 0: {
        std::vector<Vertex> u = fresh;
        if (trap_ && !u_is_h_) {
          std::erase(u, *trap_);
        }
        pick = lex_first(u, u);
        break;
      }
      case 1:
        pick = lex_first(fresh, fresh);
        break;
      case 2:
        pick = lex_first(distinct, fresh);
        break;
      default:
        pick = lex_first(distinct, distinct);
        break;
    }
    if (!pick) {
      throw CaseExhausted("Stage II: no edge restores the distinct invariant (D'=" +
                          std::to_string(distinct.size()) + ")");
    }
    return *pick;
  }

  // Stage III: join the last two uncovered vertices x, y directly, or via
  // two Red edges uv, wz whose six vertices carry no Blue edge except xy.
  std::optional<Edge> stage3_finish(const Board& b) {
    if (plan_.step == 0) {
      const auto rc = red_cover(b, h_);
      if (rc.exposed.size() != 2) {
        return std::nullopt;
      }
      Vertex x = rc.exposed[0];
      Vertex y = rc.exposed[1];
      if (b.is_free(x, y)) {
        plan_.x = x;
        plan_.y = y;
        return Edge(x, y);
      }
      // x is the Blue-touched end; y should be the clean one.
      const bool x_trap = trap_ && *trap_ == x;
      const bool y_trap = trap_ && *trap_ == y;
      if (y_trap || (!x_trap && h_degree(b, Player::Blue, y, h_) > h_degree(b, Player::Blue, x, h_))) {
        std::swap(x, y);
      }
      const auto& me = rc.matching.edges;
      for (std::size_t i = 0; i < me.size(); ++i) {
        for (std::size_t k = i + 1; k < me.size(); ++k) {
          const std::vector<Vertex> six{x, y, me[i].u, me[i].v, me[k].u, me[k].v};
          const auto blue = edges_inside(b, Player::Blue, sorted_set(six));
          if (blue.size() == 1 && blue[0] == Edge(x, y)) {
            plan_ = {x, y, me[i].u, me[i].v, me[k].u, me[k].v, 1};
            return Edge(y, plan_.u);
          }
        }
      }
      return std::nullopt;
    }
    if (plan_.step == 1) {
      if (b.is_free(plan_.x, plan_.v)) {
        plan_.step = 3;
        return Edge(plan_.x, plan_.v);
      }
      if (b.is_free(plan_.x, plan_.z)) {
        plan_.step = 2;
        return Edge(plan_.x, plan_.z);
      }
      return std::nullopt;
    }
    if (plan_.step == 2) {
      plan_.step = 3;
      if (b.is_free(plan_.w, plan_.y)) {
        return Edge(plan_.w, plan_.y);
      }
      if (b.is_free(plan_.w, plan_.v)) {
        return Edge(plan_.w, plan_.v);
      }
    }
    return std::nullopt;
  }

 private:
  Edge stage1(const Board& b) {
    const auto blue = edges_inside(b, Player::Blue, h_);
    stage_ = Stage::II;
    if (!blue.empty()) {
      // Case 1: xz next to Blue's edge xy.
      const Vertex x = blue[0].u;
      const Vertex y = blue[0].v;
      u_is_h_ = true;
      for (auto z : h_) {
        if (z != x && z != y && h_degree(b, Player::Blue, z, h_) == 0 && b.is_free(x, z)) {
          return Edge(x, z);
        }
      }
      for (auto z : h_) {
        if (z != x && z != y && b.is_free(x, z)) {
          return Edge(x, z);
        }
      }
      throw PreconditionViolated("Stage I: no free edge at x");
    }
    if (!trap_) {
      for (auto v : h_) {
        if (b.degree(Player::Blue, v) >= 1) {
          trap_ = v;
          break;
        }
      }
    }
    if (!trap_) {
      throw PreconditionViolated("Stage I: no Blue-touched vertex in H");
    }
    for (auto a : h_) {
      for (auto c : h_) {
        if (a < c && a != *trap_ && c != *trap_ && b.is_free(a, c)) {
          return Edge(a, c);
        }
      }
    }
    throw PreconditionViolated("Stage I: E(G[U]) has no free edge");
  }

  std::vector<Vertex> h_;
  std::optional<Vertex> trap_;
  bool u_is_h_ = false;
  bool own_stage3_ = true;
  Stage stage_ = Stage::I;
  Stage3Plan plan_;
  std::optional<SWeak> weak_;
};

}  // namespace pmgame
