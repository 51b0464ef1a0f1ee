#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmgame/graph.hpp"
#include "pmgame/matching.hpp"

namespace pmgame {

enum class Player { Red, Blue };
enum class Owner { Free, Red, Blue };

inline Owner owner_of(Player p) { return p == Player::Red ? Owner::Red : Owner::Blue; }
inline Player opponent(Player p) { return p == Player::Red ? Player::Blue : Player::Red; }
inline std::string_view to_string(Player p) { return p == Player::Red ? "red" : "blue"; }

inline Player player_from_string(std::string_view s) {
  if (s == "red") {
    return Player::Red;
  }
  if (s == "blue") {
    return Player::Blue;
  }
  throw std::invalid_argument("unknown player '" + std::string(s) + "'");
}

struct Move {
  Player mover;
  Edge edge;
};

class IllegalMove : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Maximum matching of a growing edge set. Adding an edge raises the maximum
// by at most one, and any new augmenting path uses that edge; when one
// endpoint is exposed the path must start there, so a single search usually
// suffices.
class IncrementalMatching {
 public:
  explicit IncrementalMatching(Vertex n) : adj_(static_cast<std::size_t>(n)), matcher_(&adj_) {}

  IncrementalMatching(const IncrementalMatching& o)
      : adj_(o.adj_), matcher_(o.matcher_), size_(o.size_) {
    rebind();
  }
  IncrementalMatching& operator=(const IncrementalMatching& o) {
    if (this != &o) {
      adj_ = o.adj_;
      matcher_ = o.matcher_;
      size_ = o.size_;
      rebind();
    }
    return *this;
  }
  IncrementalMatching(IncrementalMatching&& o) noexcept
      : adj_(std::move(o.adj_)), matcher_(std::move(o.matcher_)), size_(o.size_) {
    rebind();
  }
  IncrementalMatching& operator=(IncrementalMatching&& o) noexcept {
    adj_ = std::move(o.adj_);
    matcher_ = std::move(o.matcher_);
    size_ = o.size_;
    rebind();
    return *this;
  }

  // Returns true iff the maximum matching grew.
  bool add_edge(Vertex u, Vertex v) {
    adj_[static_cast<std::size_t>(u)].push_back(v);
    adj_[static_cast<std::size_t>(v)].push_back(u);
    bool grew = false;
    if (matcher_.exposed(u) && matcher_.exposed(v)) {
      matcher_.set_pair(u, v);
      grew = true;
    } else if (matcher_.exposed(u)) {
      grew = matcher_.augment_from(u);
    } else if (matcher_.exposed(v)) {
      grew = matcher_.augment_from(v);
    } else {
      for (auto root : exposed_in_component(u)) {
        if (matcher_.augment_from(root)) {
          grew = true;
          break;
        }
      }
    }
    if (grew) {
      ++size_;
    }
    return grew;
  }

  std::size_t size() const { return size_; }
  Vertex mate(Vertex v) const { return matcher_.mate(v); }
  const Adjacency& adjacency() const { return adj_; }
  Matching matching() const { return matcher_.matching(); }

 private:
  void rebind() {
    BlossomMatcher fresh(&adj_);
    for (std::size_t i = 0; i < adj_.size(); ++i) {
      const Vertex m = matcher_.mate(static_cast<Vertex>(i));
      if (m > static_cast<Vertex>(i)) {
        fresh.set_pair(static_cast<Vertex>(i), m);
      }
    }
    matcher_ = std::move(fresh);
  }

  std::vector<Vertex> exposed_in_component(Vertex start) const {
    std::vector<Vertex> stack{start};
    std::unordered_map<Vertex, bool> seen{{start, true}};
    std::vector<Vertex> out;
    while (!stack.empty()) {
      const Vertex x = stack.back();
      stack.pop_back();
      if (matcher_.exposed(x)) {
        out.push_back(x);
      }
      for (auto y : adj_[static_cast<std::size_t>(x)]) {
        if (seen.emplace(y, true).second) {
          stack.push_back(y);
        }
      }
    }
    return out;
  }

  Adjacency adj_;
  BlossomMatcher matcher_;
  std::size_t size_ = 0;
};

// Game board: the underlying graph plus per-edge ownership and the ordered
// move history. Red's and Blue's graphs are kept as adjacency lists with an
// incrementally maintained maximum matching each, so win detection after a
// claim is a single augmenting-path search.
class Board {
 public:
  explicit Board(std::shared_ptr<const Graph> graph)
      : graph_(std::move(graph)), red_(graph_->n()), blue_(graph_->n()),
        red_deg_(static_cast<std::size_t>(graph_->n()), 0),
        blue_deg_(static_cast<std::size_t>(graph_->n()), 0) {}

  const Graph& graph() const { return *graph_; }
  std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
  Vertex n() const { return graph_->n(); }

  Owner owner(const Edge& e) const {
    auto it = owner_.find(e.key());
    return it == owner_.end() ? Owner::Free : it->second;
  }
  bool is_free(const Edge& e) const { return graph_->has_edge(e) && owner(e) == Owner::Free; }
  bool is_free(Vertex a, Vertex b) const { return a != b && is_free(Edge(a, b)); }
  bool owned_by(const Edge& e, Player p) const { return owner(e) == owner_of(p); }
  bool owned_by(Vertex a, Vertex b, Player p) const { return a != b && owned_by(Edge(a, b), p); }

  // Claims e for p. Throws IllegalMove unless e is a free edge of the graph.
  // Returns true iff p's maximum matching grew.
  bool claim(Player p, const Edge& e) {
    if (!graph_->has_edge(e)) {
      throw IllegalMove("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not in the graph");
    }
    if (owner(e) != Owner::Free) {
      throw IllegalMove("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is already claimed");
    }
    owner_.emplace(e.key(), owner_of(p));
    history_.push_back({p, e});
    auto& deg = p == Player::Red ? red_deg_ : blue_deg_;
    ++deg[static_cast<std::size_t>(e.u)];
    ++deg[static_cast<std::size_t>(e.v)];
    return (p == Player::Red ? red_ : blue_).add_edge(e.u, e.v);
  }

  const std::vector<Move>& history() const { return history_; }
  std::size_t claimed_count() const { return history_.size(); }
  std::size_t free_count() const { return graph_->edge_count() - history_.size(); }

  std::size_t moves_of(Player p) const {
    std::size_t c = 0;
    for (const auto& m : history_) {
      c += m.mover == p ? 1 : 0;
    }
    return c;
  }

  int degree(Player p, Vertex v) const {
    return (p == Player::Red ? red_deg_ : blue_deg_)[static_cast<std::size_t>(v)];
  }
  const std::vector<Vertex>& neighbors(Player p, Vertex v) const {
    return (p == Player::Red ? red_ : blue_).adjacency()[static_cast<std::size_t>(v)];
  }

  // Partner of v in p's current maximum matching, or -1.
  Vertex mate(Player p, Vertex v) const { return (p == Player::Red ? red_ : blue_).mate(v); }

  std::size_t matching_size(Player p) const { return (p == Player::Red ? red_ : blue_).size(); }
  Matching matching(Player p) const { return (p == Player::Red ? red_ : blue_).matching(); }
  bool has_perfect_matching(Player p) const { return 2 * matching_size(p) == static_cast<std::size_t>(n()); }

  std::vector<Edge> edges_of(Player p) const {
    std::vector<Edge> out;
    for (const auto& m : history_) {
      if (m.mover == p) {
        out.push_back(m.edge);
      }
    }
    return out;
  }

  // True iff the history alternates Red, Blue, Red, ...
  bool alternates() const {
    for (std::size_t i = 0; i < history_.size(); ++i) {
      if (history_[i].mover != (i % 2 == 0 ? Player::Red : Player::Blue)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::shared_ptr<const Graph> graph_;
  std::unordered_map<std::uint64_t, Owner> owner_;
  std::vector<Move> history_;
  IncrementalMatching red_;
  IncrementalMatching blue_;
  std::vector<int> red_deg_;
  std::vector<int> blue_deg_;
};

}  // namespace pmgame
