#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmgame/board.hpp"
#include "pmgame/kn_strategies.hpp"
#include "pmgame/partition.hpp"

namespace pmgame {

class ConfigurationRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Red could not follow her strategy, or would exceed n/2 + 4t edges.
class Forfeit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RedConfig {
  // Smallest subboard the engine accepts. Cyclic partitions built from
  // cliques of size s have parts of about s/2 vertices.
  int min_part_size = 6;
  bool allow_fallback = true;
};

inline void to_json(nlohmann::json& j, const RedConfig& c) {
  j = nlohmann::json{{"min_part_size", c.min_part_size}, {"allow_fallback", c.allow_fallback}};
}
inline void from_json(const nlohmann::json& j, RedConfig& c) {
  c.min_part_size = j.value("min_part_size", c.min_part_size);
  c.allow_fallback = j.value("allow_fallback", c.allow_fallback);
}

enum class BoardStatus { Inactive, Active, Safe };

inline std::string_view to_string(BoardStatus s) {
  switch (s) {
    case BoardStatus::Inactive:
      return "inactive";
    case BoardStatus::Active:
      return "active";
    case BoardStatus::Safe:
      return "safe";
  }
  return "?";
}

struct Annotation {
  int board = -1;  // 1-based
  std::string strategy;
  std::string stage;
  int distinct = 0;
  bool dangerous = false;
  int w = 0;
  int red_wasted = 0;
  int blue_wasted = 0;
  bool fallback = false;
  bool imported = false;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

inline void to_json(nlohmann::json& j, const Annotation& a) {
  j = nlohmann::json{{"board", a.board},         {"strategy", a.strategy},       {"stage", a.stage},
                     {"distinct", a.distinct},   {"dangerous", a.dangerous},     {"w", a.w},
                     {"red_wasted", a.red_wasted}, {"blue_wasted", a.blue_wasted}, {"fallback", a.fallback},
                     {"imported", a.imported}};
}
inline void from_json(const nlohmann::json& j, Annotation& a) {
  a.board = j.at("board").get<int>();
  a.strategy = j.at("strategy").get<std::string>();
  a.stage = j.at("stage").get<std::string>();
  a.distinct = j.at("distinct").get<int>();
  a.dangerous = j.at("dangerous").get<bool>();
  a.w = j.at("w").get<int>();
  a.red_wasted = j.at("red_wasted").get<int>();
  a.blue_wasted = j.at("blue_wasted").get<int>();
  a.fallback = j.at("fallback").get<bool>();
  a.imported = j.at("imported").get<bool>();
}

struct BoardLedger {
  int index = 0;  // 1-based
  int size = 0;
  std::string strategy;
  bool dangerous = false;
  int w = 0;
  int red_edges = 0;
  int blue_edges = 0;
  int red_wasted = 0;
  int blue_wasted = 0;
  int fallback_moves = 0;

  friend bool operator==(const BoardLedger&, const BoardLedger&) = default;
};

inline void to_json(nlohmann::json& j, const BoardLedger& l) {
  j = nlohmann::json{{"index", l.index},           {"size", l.size},
                     {"strategy", l.strategy},     {"dangerous", l.dangerous},
                     {"w", l.w},                   {"red_edges", l.red_edges},
                     {"blue_edges", l.blue_edges}, {"red_wasted", l.red_wasted},
                     {"blue_wasted", l.blue_wasted}, {"fallback_moves", l.fallback_moves}};
}
inline void from_json(const nlohmann::json& j, BoardLedger& l) {
  l.index = j.at("index").get<int>();
  l.size = j.at("size").get<int>();
  l.strategy = j.at("strategy").get<std::string>();
  l.dangerous = j.at("dangerous").get<bool>();
  l.w = j.at("w").get<int>();
  l.red_edges = j.at("red_edges").get<int>();
  l.blue_edges = j.at("blue_edges").get<int>();
  l.red_wasted = j.at("red_wasted").get<int>();
  l.blue_wasted = j.at("blue_wasted").get<int>();
  l.fallback_moves = j.at("fallback_moves").get<int>();
}

// How Red plays one subboard. Each kind wraps the K_n strategies; any
// strategy error drops the board into an exact completion search on V_i.
struct SubboardPlay {
  enum class Kind { Empty, Trap, Dangerous, WeakFinal, Final22 };

  Kind kind = Kind::Empty;
  std::string stage = "I";

  // Empty / Trap / Final22 (after the switch) / dangerous path case /
  // small dangerous board with Blue's edges a matching
  std::optional<AStrong> astrong;
  // WeakFinal / Final22 without a Blue answer inside E_t
  std::optional<SWeak> weak;
  // Dangerous split
  std::vector<Vertex> half_u, half_w;
  std::optional<AStrong> play_u, play_w;
  bool w_started = false;
  // Empty Stage III
  bool stage3_started = false;
  std::optional<std::pair<Vertex, Vertex>> import_pq;  // (p, q) after cp was claimed
  Vertex import_d = -1;
  // Dangerous board too small to split, Blue already wasted there: S^weak
  bool search_mode = false;
  // Final22
  std::optional<Edge> first_edge;
  bool final22_decided = false;

  bool fallback = false;
  int fallback_moves = 0;
  std::string failure;  // why the strategy gave up, if it did
};

inline std::string_view to_string(SubboardPlay::Kind k) {
  switch (k) {
    case SubboardPlay::Kind::Empty:
      return "empty";
    case SubboardPlay::Kind::Trap:
      return "trap";
    case SubboardPlay::Kind::Dangerous:
      return "dangerous";
    case SubboardPlay::Kind::WeakFinal:
      return "weak_final";
    case SubboardPlay::Kind::Final22:
      return "astrong_final";
  }
  return "?";
}

struct SubboardState {
  int index = 0;  // 0-based
  std::vector<Vertex> vertices;  // sorted
  bool dangerous = false;
  int w = 0;
  int red_edges = 0;
  bool safe = false;
  std::optional<SubboardPlay> play;
  std::vector<Vertex> traps;

  BoardStatus status() const {
    if (safe) {
      return BoardStatus::Safe;
    }
    return red_edges == 0 ? BoardStatus::Inactive : BoardStatus::Active;
  }
};

// Red's full strategy on a cyclically partitioned graph. respond() is pure
// with respect to the board: it returns Red's edge and records its own
// bookkeeping, and the caller claims the edge.
class RedOrchestrator {
 public:
  RedOrchestrator(const Graph& g, const Partition& part, RedConfig cfg = {})
      : cfg_(cfg), n_(g.n()), board_of_(static_cast<std::size_t>(g.n()), -1) {
    if (g.n() % 2 != 0) {
      throw ConfigurationRejected("n must be even");
    }
    if (part.parts.empty()) {
      throw ConfigurationRejected("empty partition");
    }
    for (std::size_t i = 0; i < part.parts.size(); ++i) {
      SubboardState s;
      s.index = static_cast<int>(i);
      s.vertices = sorted_set(part.parts[i]);
      if (static_cast<int>(s.vertices.size()) < cfg_.min_part_size) {
        throw ConfigurationRejected("part " + std::to_string(i + 1) + " has " + std::to_string(s.vertices.size()) +
                                    " vertices, below the minimum of " + std::to_string(cfg_.min_part_size));
      }
      for (auto v : s.vertices) {
        if (v < 0 || v >= n_ || board_of_[static_cast<std::size_t>(v)] != -1) {
          throw ConfigurationRejected("partition is not a disjoint cover");
        }
        board_of_[static_cast<std::size_t>(v)] = static_cast<int>(i);
      }
      boards_.push_back(std::move(s));
    }
    if (std::find(board_of_.begin(), board_of_.end(), -1) != board_of_.end()) {
      throw ConfigurationRejected("partition does not cover every vertex");
    }
    budget_ = n_ / 2 + 4 * t();
  }

  int t() const { return static_cast<int>(boards_.size()); }
  int budget() const { return budget_; }
  int moves_made() const { return moves_made_; }
  const std::vector<SubboardState>& boards() const { return boards_; }
  const Annotation& last_annotation() const { return annotation_; }
  int focus() const { return focus_; }
  int board_of(Vertex v) const { return board_of_[static_cast<std::size_t>(v)]; }
  int total_fallback_moves() const {
    int c = 0;
    for (const auto& b : boards_) {
      c += b.play ? b.play->fallback_moves : 0;
    }
    return c;
  }

  std::vector<std::vector<Vertex>> parts() const {
    std::vector<std::vector<Vertex>> out;
    for (const auto& b : boards_) {
      out.push_back(b.vertices);
    }
    return out;
  }

  // Red's first move: S_empty Stage I on E_1.
  Edge first_move(const Board& board) {
    if (board.claimed_count() != 0) {
      throw std::logic_error("first_move on a non-empty board");
    }
    return play_board(board, 0, std::nullopt);
  }

  // Blue's edge `blue` was just claimed; records the ledger and returns the
  // boards whose w flipped to 1.
  std::vector<int> update_wasted_ledger(const Board& board, const Edge& blue) {
    std::vector<int> flipped;
    const int i = board_of(blue.u);
    if (i < 0 || i != board_of(blue.v)) {
      return flipped;
    }
    auto& s = boards_[static_cast<std::size_t>(i)];
    if (s.w == 0 && wasted_inside(board, Player::Blue, s.vertices) > 0) {
      s.w = 1;
      flipped.push_back(i);
      if (s.status() == BoardStatus::Inactive) {
        s.dangerous = true;
      }
    }
    return flipped;
  }

  // Red's reply to Blue's last edge.
  Edge respond(const Board& board, const Edge& blue) {
    refresh_last(board);
    update_wasted_ledger(board, blue);
    const int hit = board_of(blue.u) == board_of(blue.v) ? board_of(blue.u) : -1;
    if (hit >= 0 && boards_[static_cast<std::size_t>(hit)].dangerous &&
        boards_[static_cast<std::size_t>(hit)].status() != BoardStatus::Safe) {
      auto& s = boards_[static_cast<std::size_t>(hit)];
      if (!s.play) {
        s.play.emplace();
        s.play->kind = SubboardPlay::Kind::Dangerous;
      }
      return play_board(board, hit, blue);
    }
    if (!active_.empty()) {
      return play_board(board, *active_.begin(), blue);
    }
    for (auto& s : boards_) {
      if (s.status() == BoardStatus::Safe) {
        continue;
      }
      if (!s.play) {
        choose_strategy(board, s);
      }
      return play_board(board, s.index, blue);
    }
    throw Forfeit("no board left to play although Red has no perfect matching");
  }

  std::vector<BoardLedger> ledgers(const Board& board) const {
    std::vector<BoardLedger> out;
    for (const auto& s : boards_) {
      BoardLedger l;
      l.index = s.index + 1;
      l.size = static_cast<int>(s.vertices.size());
      l.strategy = s.play ? std::string(to_string(s.play->kind)) : "";
      l.dangerous = s.dangerous;
      l.w = s.w;
      l.red_edges = static_cast<int>(edges_inside(board, Player::Red, s.vertices).size());
      l.blue_edges = static_cast<int>(edges_inside(board, Player::Blue, s.vertices).size());
      l.red_wasted = wasted_inside(board, Player::Red, s.vertices);
      l.blue_wasted = wasted_inside(board, Player::Blue, s.vertices);
      l.fallback_moves = s.play ? s.play->fallback_moves : 0;
      out.push_back(l);
    }
    return out;
  }

  // Red's reasoning for a UI or a transcript: statuses, flags, traps.
  nlohmann::json snapshot() const {
    nlohmann::json boards = nlohmann::json::array();
    for (const auto& s : boards_) {
      boards.push_back({{"index", s.index + 1},
                        {"vertices", s.vertices},
                        {"status", to_string(s.status())},
                        {"dangerous", s.dangerous},
                        {"w", s.w},
                        {"strategy", s.play ? std::string(to_string(s.play->kind)) : ""},
                        {"stage", s.play ? s.play->stage : ""},
                        {"failure", s.play ? s.play->failure : ""},
                        {"traps", s.traps}});
    }
    return {{"moves_made", moves_made_}, {"budget", budget_}, {"focus", focus_ + 1}, {"boards", boards}};
  }

 private:
  void refresh_last(const Board& board) {
    if (last_board_ < 0) {
      return;
    }
    auto& s = boards_[static_cast<std::size_t>(last_board_)];
    s.red_edges = static_cast<int>(edges_inside(board, Player::Red, s.vertices).size());
    if (!s.safe && red_has_pm_of(board, s.vertices)) {
      s.safe = true;
      active_.erase(s.index);
    } else if (s.red_edges > 0 && !s.safe) {
      active_.insert(s.index);
    }
    last_board_ = -1;
  }

  void choose_strategy(const Board& board, SubboardState& s) {
    s.play.emplace();
    auto& p = *s.play;
    const bool last = s.index == t() - 1;
    const int blue_inside = static_cast<int>(edges_inside(board, Player::Blue, s.vertices).size());
    if (!last) {
      p.kind = blue_inside >= 1 ? SubboardPlay::Kind::Trap : SubboardPlay::Kind::Empty;
      return;
    }
    for (auto v : s.vertices) {
      if (board.degree(Player::Blue, v) >= 1) {
        p.kind = SubboardPlay::Kind::Trap;
        return;
      }
    }
    // Case 2.1 / 2.2: does Blue already hold a perfect matching of V \ V_t?
    std::vector<Vertex> rest;
    for (Vertex v = 0; v < n_; ++v) {
      if (board_of(v) != s.index) {
        rest.push_back(v);
      }
    }
    const auto blue = board.edges_of(Player::Blue);
    p.kind = has_perfect_matching_of(blue, rest) ? SubboardPlay::Kind::Final22 : SubboardPlay::Kind::WeakFinal;
  }

  Edge play_board(const Board& board, int i, const std::optional<Edge>& blue) {
    auto& s = boards_[static_cast<std::size_t>(i)];
    if (!s.play) {
      s.play.emplace();
      s.play->kind = SubboardPlay::Kind::Empty;
    }
    annotation_ = Annotation{};
    std::optional<Edge> e;
    if (!s.play->fallback) {
      try {
        e = strategy_move(board, s, blue);
        if (e && !board.is_free(*e)) {
          s.play->failure = "strategy chose a claimed edge";
          e.reset();
        }
      } catch (const StrategyError& err) {
        s.play->failure = err.what();
        e.reset();
      }
      if (!e) {
        if (!cfg_.allow_fallback) {
          throw Forfeit("board " + std::to_string(i + 1) + ": strategy failed and fallback is disabled");
        }
        s.play->fallback = true;
      }
    }
    if (!e) {
      e = search_move(board, s);
      s.play->stage = "fallback";
      ++s.play->fallback_moves;
    }
    if (moves_made_ + 1 > budget_) {
      throw Forfeit("move budget n/2+4t = " + std::to_string(budget_) + " exhausted");
    }
    ++moves_made_;
    focus_ = i;
    last_board_ = board_of(e->u) == board_of(e->v) ? board_of(e->u) : i;
    annotate(board, s, *e);
    return *e;
  }

  void annotate(const Board& board, const SubboardState& s, const Edge& e) {
    annotation_.board = s.index + 1;
    annotation_.strategy = std::string(to_string(s.play->kind));
    annotation_.stage = s.play->stage;
    annotation_.dangerous = s.dangerous;
    annotation_.w = s.w;
    annotation_.fallback = s.play->fallback;
    // distinct count as it stands after Red's edge
    const auto& h = focus_set(s, e);
    int d = 0;
    for (auto v : h) {
      const bool red_touch = h_degree(board, Player::Red, v, h) > 0 || (e.touches(v) && in_set(h, e.other(v)));
      if (!red_touch && h_degree(board, Player::Blue, v, h) > 0) {
        ++d;
      }
    }
    annotation_.distinct = d;
    annotation_.red_wasted = wasted_inside(board, Player::Red, s.vertices);
    annotation_.blue_wasted = wasted_inside(board, Player::Blue, s.vertices);
  }

  const std::vector<Vertex>& focus_set(const SubboardState& s, const Edge& e) const {
    const auto& p = *s.play;
    if (p.kind == SubboardPlay::Kind::Dangerous && !p.half_u.empty()) {
      return in_set(p.half_u, e.u) ? p.half_u : p.half_w;
    }
    return s.vertices;
  }

  std::optional<Edge> strategy_move(const Board& board, SubboardState& s, const std::optional<Edge>& blue) {
    auto& p = *s.play;
    switch (p.kind) {
      case SubboardPlay::Kind::Empty:
        return empty_move(board, s);
      case SubboardPlay::Kind::Trap: {
        if (!p.astrong) {
          const auto blue_inside = edges_inside(board, Player::Blue, s.vertices);
          if (blue_inside.size() > 1) {
            p.kind = SubboardPlay::Kind::Dangerous;
            return dangerous_move(board, s, blue);
          }
          p.astrong.emplace(s.vertices);
        }
        const Edge e = p.astrong->next(board);
        p.stage = std::string(to_string(p.astrong->stage()));
        if (p.astrong->trap()) {
          s.traps = {*p.astrong->trap()};
        }
        return e;
      }
      case SubboardPlay::Kind::Dangerous:
        return dangerous_move(board, s, blue);
      case SubboardPlay::Kind::WeakFinal: {
        if (!p.weak) {
          p.weak.emplace(s.vertices);
        }
        p.stage = "weak";
        return p.weak->next(board);
      }
      case SubboardPlay::Kind::Final22:
        return final22_move(board, s, blue);
    }
    return std::nullopt;
  }

  static std::optional<Edge> smallest_free_edge(const Board& board, std::span<const Vertex> vs) {
    for (std::size_t a = 0; a < vs.size(); ++a) {
      for (std::size_t c = a + 1; c < vs.size(); ++c) {
        if (board.is_free(vs[a], vs[c])) {
          return Edge(vs[a], vs[c]);
        }
      }
    }
    return std::nullopt;
  }

  std::optional<Edge> empty_move(const Board& board, SubboardState& s) {
    auto& p = *s.play;
    if (!p.astrong) {
      // Stage I
      auto ab = smallest_free_edge(board, s.vertices);
      if (!ab) {
        throw NoLegalMove("S_empty: E_i has no free edge");
      }
      p.astrong = AStrong::from_stage2(s.vertices);
      p.astrong->set_own_stage3(false);
      p.stage = "I";
      return ab;
    }
    if (p.import_pq) {
      // second half of the import: dq on the enlarged V_i
      const auto [pv, qv] = *p.import_pq;
      (void)pv;
      p.import_pq.reset();
      p.stage = "import";
      if (board.is_free(p.import_d, qv)) {
        annotation_.imported = true;
        return Edge(p.import_d, qv);
      }
      p.astrong = AStrong::from_stage2(s.vertices);
      p.astrong->advance(board);
      p.stage = "III";
      return p.astrong->next(board);
    }
    if (!p.stage3_started) {
      p.astrong->advance(board);
      if (p.astrong->stage() != Stage::III) {
        const Edge e = p.astrong->next(board);
        p.stage = std::string(to_string(p.astrong->stage()));
        return e;
      }
      p.stage3_started = true;
      p.stage = "III";
      const auto rc = red_cover(board, s.vertices);
      if (rc.exposed.size() == 2 && board.is_free(rc.exposed[0], rc.exposed[1])) {
        return Edge(rc.exposed[0], rc.exposed[1]);
      }
      p.astrong->set_own_stage3(true);
      const bool has_next = s.index + 1 < t();
      if (rc.exposed.size() == 2 && has_next && boards_[static_cast<std::size_t>(s.index + 1)].red_edges == 0) {
        if (auto e = start_import(board, s, rc.exposed[0], rc.exposed[1])) {
          return e;
        }
      }
      return p.astrong->next(board);
    }
    const Edge e = p.astrong->next(board);
    p.stage = std::string(to_string(p.astrong->stage()));
    return e;
  }

  // Picks p, q in V_{i+1} with cp, dq free and e_B(q, V_i) < m_i/4, claims
  // cp and moves p, q into V_i.
  std::optional<Edge> start_import(const Board& board, SubboardState& s, Vertex c0, Vertex d0) {
    auto& nxt = boards_[static_cast<std::size_t>(s.index + 1)];
    if (nxt.vertices.size() < static_cast<std::size_t>(cfg_.min_part_size) + 2 - (cfg_.min_part_size % 2)) {
      if (nxt.vertices.size() < 4) {
        return std::nullopt;
      }
    }
    const int mi = static_cast<int>(s.vertices.size());
    auto blue_to = [&](Vertex q) {
      int c = 0;
      for (auto v : s.vertices) {
        c += board.owned_by(q, v, Player::Blue) ? 1 : 0;
      }
      return c;
    };
    struct Cand {
      int score;
      Vertex c, d, p, q;
    };
    std::optional<Cand> best;
    for (auto [c, d] : {std::pair{c0, d0}, std::pair{d0, c0}}) {
      for (auto p : nxt.vertices) {
        if (!board.is_free(c, p)) {
          continue;
        }
        for (auto q : nxt.vertices) {
          if (q == p || !board.is_free(d, q) || 4 * blue_to(q) >= mi) {
            continue;
          }
          const int score = 4 * blue_to(q) + board.degree(Player::Blue, q) + board.degree(Player::Blue, p);
          if (!best || score < best->score) {
            best = Cand{score, c, d, p, q};
          }
        }
      }
    }
    if (!best) {
      return std::nullopt;
    }
    // V_i := V_i + {p, q}, V_{i+1} := V_{i+1} - {p, q}
    for (auto v : {best->p, best->q}) {
      std::erase(nxt.vertices, v);
      s.vertices.push_back(v);
      board_of_[static_cast<std::size_t>(v)] = s.index;
    }
    s.vertices = sorted_set(s.vertices);
    auto& p = *s.play;
    p.import_pq = std::pair{best->p, best->q};
    p.import_d = best->d;
    p.stage = "import";
    annotation_.imported = true;
    return Edge(best->c, best->p);
  }

  std::optional<Edge> dangerous_move(const Board& board, SubboardState& s, const std::optional<Edge>& blue) {
    auto& p = *s.play;
    if (p.search_mode) {
      return p.weak->next(board);
    }
    if (p.astrong) {
      // path case: xz has been claimed, S^a.strong from Stage II
      const Edge e = p.astrong->next(board);
      p.stage = std::string(to_string(p.astrong->stage()));
      return e;
    }
    if (!p.play_u) {
      const auto blue_inside = edges_inside(board, Player::Blue, s.vertices);
      if (blue_inside.size() == 2) {
        const Edge& a = blue_inside[0];
        const Edge& c = blue_inside[1];
        Vertex mid = -1;
        for (auto v : {a.u, a.v}) {
          if (c.touches(v)) {
            mid = v;
          }
        }
        if (mid >= 0) {
          const Edge xz(a.other(mid), c.other(mid));
          if (board.is_free(xz)) {
            p.astrong = AStrong::from_stage2(s.vertices);
            p.stage = "path";
            return xz;
          }
        }
      }
      if (static_cast<int>(s.vertices.size()) < 2 * kMinHalf) {
        // Too small to split. If Blue has not wasted here yet, her edges are
        // a matching and S^weak's one spare move would be uncovered, so
        // play the trap strategy on the whole board instead.
        if (wasted_inside(board, Player::Blue, s.vertices) == 0) {
          p.astrong.emplace(s.vertices);
          const Edge e = p.astrong->next(board);
          p.stage = std::string(to_string(p.astrong->stage()));
          return e;
        }
        p.search_mode = true;
        p.stage = "weak";
        const int used = static_cast<int>(edges_inside(board, Player::Red, s.vertices).size());
        p.weak.emplace(s.vertices, static_cast<int>(s.vertices.size()) / 2 + 4 - used);
        p.weak->set_search_limit(0);
        return p.weak->next(board);
      }
      if (!split_board(board, s)) {
        throw CaseExhausted("S_dangerous: no admissible split");
      }
      const Edge e = p.play_u->next(board);
      p.stage = "split-U:" + std::string(to_string(p.play_u->stage()));
      return e;
    }
    if (!p.w_started) {
      // fix W's trap: a Blue-touched w with uw not Blue, u being U's distinct or trap vertex
      std::optional<Vertex> u;
      if (p.play_u->trap()) {
        u = p.play_u->trap();
      } else {
        for (auto v : p.half_u) {
          if (h_degree(board, Player::Blue, v, p.half_u) > 0 && h_degree(board, Player::Red, v, p.half_u) == 0) {
            u = v;
            break;
          }
        }
      }
      std::optional<Vertex> w;
      for (auto v : p.half_w) {
        if (board.degree(Player::Blue, v) > 0 && (!u || !board.owned_by(*u, v, Player::Blue))) {
          w = v;
          break;
        }
      }
      p.play_w.emplace(p.half_w, w);
      p.w_started = true;
      s.traps.clear();
      if (u) {
        s.traps.push_back(*u);
      }
      if (w) {
        s.traps.push_back(*w);
      }
    }
    const bool u_done = red_has_pm_of(board, p.half_u);
    const bool w_done = red_has_pm_of(board, p.half_w);
    AStrong* target = nullptr;
    std::string which;
    if (blue && in_set(p.half_u, blue->u) && in_set(p.half_u, blue->v) && !u_done) {
      target = &*p.play_u;
      which = "U";
    } else if (blue && in_set(p.half_w, blue->u) && in_set(p.half_w, blue->v) && !w_done) {
      target = &*p.play_w;
      which = "W";
    } else if (!u_done) {
      target = &*p.play_u;
      which = "U";
    } else {
      target = &*p.play_w;
      which = "W";
    }
    const Edge e = target->next(board);
    p.stage = "split-" + which + ":" + std::string(to_string(target->stage()));
    return e;
  }

  // V_i = U + W with even halves differing by at most two and at most one
  // Blue edge left inside the halves; that edge, if any, goes into U.
  bool split_board(const Board& board, SubboardState& s) {
    const auto& v = s.vertices;
    const int m = static_cast<int>(v.size());
    if (m < 4 || m > 20) {
      return false;
    }
    const auto blue = edges_inside(board, Player::Blue, v);
    std::optional<std::pair<int, std::uint32_t>> best;  // (score, mask of U)
    for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
      if (!(mask & 1U)) {
        continue;  // vertex v[0] always in U (halves are unordered)
      }
      const int us = std::popcount(mask);
      const int ws = m - us;
      if (std::abs(us - ws) > 2 || (m % 2 == 0 && (us % 2 != 0 || ws % 2 != 0))) {
        continue;
      }
      int inside = 0;
      for (const auto& e : blue) {
        const auto ia = std::lower_bound(v.begin(), v.end(), e.u) - v.begin();
        const auto ib = std::lower_bound(v.begin(), v.end(), e.v) - v.begin();
        inside += (((mask >> ia) & 1U) == ((mask >> ib) & 1U)) ? 1 : 0;
      }
      if (inside > 1) {
        continue;
      }
      bool touched_u = false;
      bool touched_w = false;
      for (int k = 0; k < m; ++k) {
        if (board.degree(Player::Blue, v[static_cast<std::size_t>(k)]) > 0) {
          ((mask >> k) & 1U ? touched_u : touched_w) = true;
        }
      }
      if (!touched_u || !touched_w) {
        continue;
      }
      const int score = inside;
      if (!best || score < best->first) {
        best = std::pair{score, mask};
      }
    }
    if (!best) {
      return false;
    }
    std::vector<Vertex> u, w;
    for (int k = 0; k < m; ++k) {
      ((best->second >> k) & 1U ? u : w).push_back(v[static_cast<std::size_t>(k)]);
    }
    if (!edges_inside(board, Player::Blue, w).empty()) {
      std::swap(u, w);
    }
    auto& p = *s.play;
    p.half_u = u;
    p.half_w = w;
    p.play_u.emplace(u);
    return true;
  }

  std::optional<Edge> final22_move(const Board& board, SubboardState& s, const std::optional<Edge>& blue) {
    auto& p = *s.play;
    if (!p.first_edge) {
      auto ab = smallest_free_edge(board, s.vertices);
      if (!ab) {
        throw NoLegalMove("final board: no free edge");
      }
      p.first_edge = ab;
      p.stage = "I";
      return ab;
    }
    if (!p.final22_decided) {
      p.final22_decided = true;
      if (blue && in_set(s.vertices, blue->u) && in_set(s.vertices, blue->v)) {
        p.astrong = AStrong::from_stage2(s.vertices);
      } else {
        std::vector<Vertex> rest;
        for (auto v : s.vertices) {
          if (!p.first_edge->touches(v)) {
            rest.push_back(v);
          }
        }
        p.weak.emplace(rest);
      }
    }
    if (p.astrong) {
      const Edge e = p.astrong->next(board);
      p.stage = std::string(to_string(p.astrong->stage()));
      return e;
    }
    p.stage = "weak";
    return p.weak->next(board);
  }

  // Halves smaller than this leave S^a.strong no room on a split board.
  static constexpr int kMinHalf = 6;

  // Completes V_i by exact search, then greedily.
  Edge search_move(const Board& board, SubboardState& s) {
    const int m = static_cast<int>(s.vertices.size());
    const int used = static_cast<int>(edges_inside(board, Player::Red, s.vertices).size());
    for (int budget = std::max(1, m / 2 + 4 - used); budget <= m; ++budget) {
      if (auto hit = finish_search(board, s.vertices, budget)) {
        return hit->first;
      }
    }
    const auto rc = red_cover(board, s.vertices);
    for (std::size_t a = 0; a < rc.exposed.size(); ++a) {
      for (std::size_t c = a + 1; c < rc.exposed.size(); ++c) {
        if (board.is_free(rc.exposed[a], rc.exposed[c])) {
          return Edge(rc.exposed[a], rc.exposed[c]);
        }
      }
    }
    for (auto x : rc.exposed) {
      for (auto v : s.vertices) {
        if (board.is_free(x, v)) {
          return Edge(x, v);
        }
      }
    }
    if (auto e = smallest_free_edge(board, s.vertices)) {
      return *e;
    }
    throw Forfeit("board " + std::to_string(s.index + 1) + ": no free edge to complete the subboard");
  }

  RedConfig cfg_;
  Vertex n_;
  std::vector<int> board_of_;
  std::vector<SubboardState> boards_;
  std::set<int> active_;
  int budget_ = 0;
  int moves_made_ = 0;
  int focus_ = -1;
  int last_board_ = -1;
  Annotation annotation_;
};

}  // namespace pmgame
