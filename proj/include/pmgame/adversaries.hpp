#pragma once

#include <algorithm>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmgame/board.hpp"
#include "pmgame/kn_strategies.hpp"
#include "pmgame/local_search.hpp"
#include "pmgame/rng.hpp"

namespace pmgame {

class NoFreeEdge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class IllegalScriptedMove : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// Raised by the remote adversary when no move has been supplied yet.
class AwaitingRemote : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// What Blue may know about Red's plan: the subboards in order and the one
// Red is currently working on.
struct AdversaryContext {
  const std::vector<std::vector<Vertex>>* boards = nullptr;
  int focus = -1;
  std::vector<Vertex> target;  // vertex set of Red's current board, sorted
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  virtual std::string name() const = 0;
  virtual Edge next(const Board& board, const AdversaryContext& ctx) = 0;
  virtual nlohmann::json describe() const { return {{"kind", name()}}; }
};

inline Edge uniform_free_edge(const Board& b, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(b.n());
  if (b.free_count() == 0) {
    throw NoFreeEdge("no free edge left");
  }
  // Rejection over vertex pairs is uniform over free edges; fall back to
  // enumeration when free edges are scarce.
  if (b.free_count() * 8 >= b.graph().edge_count()) {
    for (int attempt = 0; attempt < 256; ++attempt) {
      const auto a = static_cast<Vertex>(rng.below(n));
      const auto c = static_cast<Vertex>(rng.below(n));
      if (a != c && b.is_free(a, c)) {
        return Edge(a, c);
      }
    }
  }
  std::vector<Edge> free;
  for (const auto& e : b.graph().edges()) {
    if (b.is_free(e)) {
      free.push_back(e);
    }
  }
  return free[rng.below(free.size())];
}

class RandomBlue final : public Adversary {
 public:
  explicit RandomBlue(std::uint64_t seed) : rng_(seed), seed_(seed) {}
  std::string name() const override { return "random"; }
  Edge next(const Board& b, const AdversaryContext&) override { return uniform_free_edge(b, rng_); }
  nlohmann::json describe() const override { return {{"kind", name()}, {"seed", seed_}}; }

 private:
  Rng rng_;
  std::uint64_t seed_;
};

// Takes an edge that would complete Red's matching of her current board
// whenever one exists; otherwise it blocks among Red-uncovered vertices of
// that board, preferring vertices it already touches (which is what builds
// the double-block lines of the endgame).
class Blocker final : public Adversary {
 public:
  explicit Blocker(std::uint64_t seed) : rng_(seed), seed_(seed) {}
  std::string name() const override { return "blocker"; }
  nlohmann::json describe() const override { return {{"kind", name()}, {"seed", seed_}}; }

  Edge next(const Board& b, const AdversaryContext& ctx) override {
    const auto& t = ctx.target;
    if (t.size() >= 2 && t.size() <= static_cast<std::size_t>(CompletionSearch::kMaxRegion)) {
      CompletionSearch s(b, t);
      const auto done = s.completing_edges();
      if (!done.empty()) {
        return done[rng_.below(done.size())];
      }
    }
    if (t.size() >= 2) {
      const auto rc = red_cover(b, t);
      std::optional<Edge> best;
      int best_score = -1;
      for (std::size_t i = 0; i < rc.exposed.size(); ++i) {
        for (std::size_t j = i + 1; j < rc.exposed.size(); ++j) {
          const Vertex x = rc.exposed[i];
          const Vertex y = rc.exposed[j];
          if (!b.is_free(x, y)) {
            continue;
          }
          const int score = 4 * (h_degree(b, Player::Blue, x, t) + h_degree(b, Player::Blue, y, t)) +
                            static_cast<int>(rng_.below(4));
          if (score > best_score) {
            best_score = score;
            best = Edge(x, y);
          }
        }
      }
      if (best) {
        return *best;
      }
    }
    return uniform_free_edge(b, rng_);
  }

 private:
  Rng rng_;
  std::uint64_t seed_;
};

// Builds Blue's own perfect matching as fast as it can: a random edge
// between two Blue-exposed vertices, half the time taken on Red's board.
class FastMatcher final : public Adversary {
 public:
  explicit FastMatcher(std::uint64_t seed) : rng_(seed), seed_(seed) {}
  std::string name() const override { return "fast_matcher"; }
  nlohmann::json describe() const override { return {{"kind", name()}, {"seed", seed_}}; }

  Edge next(const Board& b, const AdversaryContext& ctx) override {
    auto exposed = [&](Vertex v) { return b.mate(Player::Blue, v) < 0; };
    if (!ctx.target.empty() && rng_.below(2) == 0) {
      std::vector<Edge> local;
      for (std::size_t i = 0; i < ctx.target.size(); ++i) {
        for (std::size_t j = i + 1; j < ctx.target.size(); ++j) {
          const Vertex x = ctx.target[i];
          const Vertex y = ctx.target[j];
          if (b.is_free(x, y) && exposed(x) && exposed(y)) {
            local.emplace_back(x, y);
          }
        }
      }
      if (!local.empty()) {
        return local[rng_.below(local.size())];
      }
    }
    std::vector<Vertex> open;
    for (Vertex v = 0; v < b.n(); ++v) {
      if (exposed(v)) {
        open.push_back(v);
      }
    }
    for (int attempt = 0; attempt < 512 && open.size() >= 2; ++attempt) {
      const Vertex x = open[rng_.below(open.size())];
      const Vertex y = open[rng_.below(open.size())];
      if (b.is_free(x, y)) {
        return Edge(x, y);
      }
    }
    for (std::size_t i = 0; i < open.size(); ++i) {
      for (std::size_t j = i + 1; j < open.size(); ++j) {
        if (b.is_free(open[i], open[j])) {
          return Edge(open[i], open[j]);
        }
      }
    }
    return uniform_free_edge(b, rng_);
  }

 private:
  Rng rng_;
  std::uint64_t seed_;
};

// Attacks subboards ahead of Red with the shapes that make a board
// dangerous: two incident edges, a path of length three, a small star, or
// two disjoint edges later joined through one of their ends.
class VertexAttacker final : public Adversary {
 public:
  explicit VertexAttacker(std::uint64_t seed, std::optional<int> board = std::nullopt,
                          std::optional<Vertex> vertex = std::nullopt)
      : rng_(seed), seed_(seed), fixed_board_(board), fixed_vertex_(vertex) {}
  std::string name() const override { return "vertex_attacker"; }
  nlohmann::json describe() const override {
    nlohmann::json j{{"kind", name()}, {"seed", seed_}};
    if (fixed_board_) {
      j["board"] = *fixed_board_;
    }
    if (fixed_vertex_) {
      j["vertex"] = *fixed_vertex_;
    }
    return j;
  }

  Edge next(const Board& b, const AdversaryContext& ctx) override {
    for (int refill = 0; refill < 8; ++refill) {
      while (!plan_.empty()) {
        const Edge e = plan_.front();
        plan_.pop_front();
        if (b.is_free(e)) {
          return e;
        }
      }
      if (!ctx.boards || ctx.boards->empty()) {
        break;
      }
      plan_attack(ctx);
    }
    return uniform_free_edge(b, rng_);
  }

 private:
  void plan_attack(const AdversaryContext& ctx) {
    const auto& boards = *ctx.boards;
    const int t = static_cast<int>(boards.size());
    int idx;
    if (fixed_board_ && !fixed_used_) {
      idx = std::clamp(*fixed_board_, 0, t - 1);
      fixed_used_ = true;
    } else {
      const int base = std::max(ctx.focus, 0);
      idx = std::min(t - 1, base + 1 + static_cast<int>(rng_.below(3)));
    }
    auto vs = boards[static_cast<std::size_t>(idx)];
    if (vs.size() < 4) {
      return;
    }
    for (std::size_t i = vs.size(); i > 1; --i) {
      std::swap(vs[i - 1], vs[rng_.below(i)]);
    }
    if (fixed_vertex_ && idx == fixed_board_.value_or(-1)) {
      auto it = std::find(vs.begin(), vs.end(), *fixed_vertex_);
      if (it != vs.end()) {
        std::iter_swap(it, vs.begin());
      }
    }
    const Vertex a = vs[0], c = vs[1], d = vs[2], e = vs[3];
    switch (rng_.below(4)) {
      case 0:  // path of length two
        plan_ = {Edge(a, c), Edge(a, d)};
        break;
      case 1:  // path of length three
        plan_ = {Edge(a, c), Edge(d, e), Edge(c, d)};
        break;
      case 2:  // star
        plan_ = {Edge(a, c), Edge(a, d), Edge(a, e)};
        break;
      default:  // disjoint edges, then a link
        plan_ = {Edge(a, c), Edge(d, e), Edge(a, d)};
        break;
    }
  }

  Rng rng_;
  std::uint64_t seed_;
  std::optional<int> fixed_board_;
  std::optional<Vertex> fixed_vertex_;
  bool fixed_used_ = false;
  std::deque<Edge> plan_;
};

class ScriptedBlue final : public Adversary {
 public:
  explicit ScriptedBlue(std::vector<Edge> moves) : moves_(std::move(moves)) {}
  std::string name() const override { return "scripted"; }
  nlohmann::json describe() const override { return {{"kind", name()}, {"moves", moves_}}; }

  Edge next(const Board& b, const AdversaryContext&) override {
    if (cursor_ >= moves_.size()) {
      throw IllegalScriptedMove("script exhausted after " + std::to_string(cursor_) + " moves");
    }
    const Edge e = moves_[cursor_++];
    if (!b.is_free(e)) {
      throw IllegalScriptedMove("scripted move (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                ") is not a free edge");
    }
    return e;
  }
  std::size_t cursor() const { return cursor_; }

 private:
  std::vector<Edge> moves_;
  std::size_t cursor_ = 0;
};

// Moves arrive from outside (the session server); next() hands out the
// oldest pending one.
class RemoteBlue final : public Adversary {
 public:
  explicit RemoteBlue(std::string session) : session_(std::move(session)) {}
  std::string name() const override { return "remote"; }
  nlohmann::json describe() const override { return {{"kind", name()}, {"session", session_}}; }

  void push(const Edge& e) { pending_.push_back(e); }
  bool has_pending() const { return !pending_.empty(); }

  Edge next(const Board&, const AdversaryContext&) override {
    if (pending_.empty()) {
      throw AwaitingRemote("waiting for a move from session " + session_);
    }
    const Edge e = pending_.front();
    pending_.pop_front();
    return e;
  }

 private:
  std::string session_;
  std::deque<Edge> pending_;
};

inline std::unique_ptr<Adversary> make_adversary(const std::string& kind, std::uint64_t seed) {
  if (kind == "random") {
    return std::make_unique<RandomBlue>(seed);
  }
  if (kind == "blocker") {
    return std::make_unique<Blocker>(seed);
  }
  if (kind == "fast_matcher") {
    return std::make_unique<FastMatcher>(seed);
  }
  if (kind == "vertex_attacker") {
    return std::make_unique<VertexAttacker>(seed);
  }
  throw std::invalid_argument("unknown adversary '" + kind + "'");
}

}  // namespace pmgame
