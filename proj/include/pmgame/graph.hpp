#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pmgame/rng.hpp"

namespace pmgame {

using Vertex = std::int32_t;

// Undirected edge, always stored canonically with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  Edge() = default;
  Edge(Vertex a, Vertex b) : u(std::min(a, b)), v(std::max(a, b)) {}

  bool touches(Vertex x) const { return u == x || v == x; }
  Vertex other(Vertex x) const { return x == u ? v : u; }
  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
  }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const { return std::hash<std::uint64_t>{}(e.key()); }
};

inline void to_json(nlohmann::json& j, const Edge& e) { j = nlohmann::json::array({e.u, e.v}); }
inline void from_json(const nlohmann::json& j, Edge& e) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("edge must be a two-element array");
  }
  e = Edge(j.at(0).get<Vertex>(), j.at(1).get<Vertex>());
}

// Simple undirected graph on vertices 0..n-1 with bitset adjacency rows.
// Dense rows keep adjacency and common-neighbourhood tests O(n/64), which is
// what the clique machinery needs on G(n,p) with constant p.
class Graph {
 public:
  Graph() = default;
  explicit Graph(Vertex n)
      : n_(n), words_((static_cast<std::size_t>(n) + 63) / 64),
        rows_(static_cast<std::size_t>(n) * words_, 0) {
    if (n < 0) {
      throw std::invalid_argument("vertex count must be non-negative");
    }
  }

  Vertex n() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t words_per_row() const { return words_; }

  bool contains(Vertex v) const { return v >= 0 && v < n_; }

  bool has_edge(Vertex a, Vertex b) const {
    if (!contains(a) || !contains(b) || a == b) {
      return false;
    }
    return (row(a)[static_cast<std::size_t>(b) >> 6] >> (b & 63)) & 1U;
  }
  bool has_edge(const Edge& e) const { return has_edge(e.u, e.v); }

  void add_edge(Vertex a, Vertex b) {
    check_vertex(a);
    check_vertex(b);
    if (a == b) {
      throw std::invalid_argument("self-loops are not allowed");
    }
    if (has_edge(a, b)) {
      return;
    }
    set_bit(a, b);
    set_bit(b, a);
    ++edge_count_;
  }

  std::span<const std::uint64_t> row(Vertex v) const {
    return {rows_.data() + static_cast<std::size_t>(v) * words_, words_};
  }

  std::size_t degree(Vertex v) const {
    std::size_t d = 0;
    for (auto w : row(v)) {
      d += static_cast<std::size_t>(std::popcount(w));
    }
    return d;
  }

  template <class F>
  void for_each_neighbor(Vertex v, F&& f) const {
    const auto r = row(v);
    for (std::size_t i = 0; i < words_; ++i) {
      std::uint64_t w = r[i];
      while (w != 0) {
        const int b = std::countr_zero(w);
        f(static_cast<Vertex>(i * 64 + static_cast<std::size_t>(b)));
        w &= w - 1;
      }
    }
  }

  // All edges in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (Vertex u = 0; u < n_; ++u) {
      for_each_neighbor(u, [&](Vertex v) {
        if (u < v) {
          out.emplace_back(u, v);
        }
      });
    }
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.rows_ == b.rows_;
  }

 private:
  void check_vertex(Vertex v) const {
    if (!contains(v)) {
      throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    }
  }
  void set_bit(Vertex a, Vertex b) {
    rows_[static_cast<std::size_t>(a) * words_ + (static_cast<std::size_t>(b) >> 6)] |=
        std::uint64_t{1} << (b & 63);
  }

  Vertex n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> rows_;
  std::size_t edge_count_ = 0;
};

// Binomial random graph: each of the C(n,2) pairs (u<v, visited in
// lexicographic order) consumes one draw from Rng(seed).
inline Graph sample_gnp(Vertex n, double p, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("sample_gnp requires n >= 1");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("sample_gnp requires p in [0,1]");
  }
  Graph g(n);
  Rng rng(seed);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      if (rng.bernoulli(p)) {
        g.add_edge(u, v);
      }
    }
  }
  return g;
}

inline Graph complete_graph(Vertex n) {
  Graph g(n);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = u + 1; v < n; ++v) {
      g.add_edge(u, v);
    }
  }
  return g;
}

inline Graph graph_from_edges(Vertex n, std::span<const Edge> edges) {
  Graph g(n);
  for (const auto& e : edges) {
    g.add_edge(e.u, e.v);
  }
  return g;
}

inline bool is_clique(const Graph& g, std::span<const Vertex> s) {
  for (auto v : s) {
    if (!g.contains(v)) {
      throw std::out_of_range("is_clique: vertex " + std::to_string(v) + " out of range");
    }
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i] == s[j] || !g.has_edge(s[i], s[j])) {
        return false;
      }
    }
  }
  return true;
}

inline nlohmann::json graph_to_json(const Graph& g) {
  return nlohmann::json{{"n", g.n()}, {"edges", g.edges()}};
}

inline Graph graph_from_json(const nlohmann::json& j) {
  const auto n = j.at("n").get<Vertex>();
  Graph g(n);
  for (const auto& e : j.at("edges")) {
    const auto edge = e.get<Edge>();
    if (edge.u == edge.v) {
      throw std::invalid_argument("self-loop in graph JSON");
    }
    g.add_edge(edge.u, edge.v);
  }
  return g;
}

}  // namespace pmgame
