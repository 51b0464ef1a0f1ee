#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pmgame/graph.hpp"

namespace pmgame {

struct Matching {
  std::vector<Edge> edges;

  std::size_t size() const { return edges.size(); }

  // True iff no two edges share an endpoint.
  bool is_valid() const {
    std::unordered_set<Vertex> seen;
    for (const auto& e : edges) {
      if (e.u == e.v || !seen.insert(e.u).second || !seen.insert(e.v).second) {
        return false;
      }
    }
    return true;
  }
};

using Adjacency = std::vector<std::vector<Vertex>>;

// Edmonds' blossom algorithm (single-root search, O(V^3) overall) over an
// adjacency list. State resets only touch the vertices a search reached, so
// repeated searches on a large sparse graph cost time proportional to the
// explored component rather than to n.
class BlossomMatcher {
 public:
  explicit BlossomMatcher(const Adjacency* adj)
      : adj_(adj), n_(adj->size()), mate_(n_, -1), parent_(n_, -1), base_(n_),
        used_(n_, 0), blossom_(n_, 0), lca_mark_(n_, 0) {
    for (std::size_t i = 0; i < n_; ++i) {
      base_[i] = static_cast<Vertex>(i);
    }
  }

  // Call after the adjacency grew by new vertices.
  void resize() {
    const std::size_t n = adj_->size();
    if (n <= n_) {
      return;
    }
    mate_.resize(n, -1);
    parent_.resize(n, -1);
    base_.resize(n);
    for (std::size_t i = n_; i < n; ++i) {
      base_[i] = static_cast<Vertex>(i);
    }
    used_.resize(n, 0);
    blossom_.resize(n, 0);
    lca_mark_.resize(n, 0);
    n_ = n;
  }

  Vertex mate(Vertex v) const { return mate_[static_cast<std::size_t>(v)]; }
  bool exposed(Vertex v) const { return mate(v) < 0; }

  void set_pair(Vertex a, Vertex b) {
    mate_[static_cast<std::size_t>(a)] = b;
    mate_[static_cast<std::size_t>(b)] = a;
  }

  // Searches for an augmenting path from the exposed vertex root and applies
  // it. Returns true iff the matching grew.
  bool augment_from(Vertex root) {
    if (!exposed(root)) {
      return false;
    }
    const Vertex end = find_path(root);
    if (end < 0) {
      reset();
      return false;
    }
    Vertex v = end;
    while (v >= 0) {
      const Vertex pv = parent_[static_cast<std::size_t>(v)];
      const Vertex ppv = mate_[static_cast<std::size_t>(pv)];
      set_pair(v, pv);
      v = ppv;
    }
    reset();
    return true;
  }

  std::size_t matched_pairs() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (mate_[i] > static_cast<Vertex>(i)) {
        ++c;
      }
    }
    return c;
  }

  Matching matching() const {
    Matching m;
    for (std::size_t i = 0; i < n_; ++i) {
      if (mate_[i] > static_cast<Vertex>(i)) {
        m.edges.emplace_back(static_cast<Vertex>(i), mate_[i]);
      }
    }
    return m;
  }

 private:
  void touch(Vertex v) { touched_.push_back(v); }

  void reset() {
    for (auto v : touched_) {
      const auto i = static_cast<std::size_t>(v);
      parent_[i] = -1;
      base_[i] = v;
      used_[i] = 0;
      blossom_[i] = 0;
      lca_mark_[i] = 0;
    }
    touched_.clear();
  }

  Vertex lca(Vertex a, Vertex b) {
    std::vector<Vertex> marked;
    for (;;) {
      a = base_[static_cast<std::size_t>(a)];
      lca_mark_[static_cast<std::size_t>(a)] = 1;
      marked.push_back(a);
      if (mate_[static_cast<std::size_t>(a)] < 0) {
        break;
      }
      a = parent_[static_cast<std::size_t>(mate_[static_cast<std::size_t>(a)])];
    }
    for (;;) {
      b = base_[static_cast<std::size_t>(b)];
      if (lca_mark_[static_cast<std::size_t>(b)]) {
        break;
      }
      b = parent_[static_cast<std::size_t>(mate_[static_cast<std::size_t>(b)])];
    }
    for (auto v : marked) {
      lca_mark_[static_cast<std::size_t>(v)] = 0;
    }
    return b;
  }

  void mark_path(Vertex v, Vertex b, Vertex child) {
    while (base_[static_cast<std::size_t>(v)] != b) {
      const Vertex mv = mate_[static_cast<std::size_t>(v)];
      blossom_[static_cast<std::size_t>(base_[static_cast<std::size_t>(v)])] = 1;
      blossom_[static_cast<std::size_t>(base_[static_cast<std::size_t>(mv)])] = 1;
      touch(base_[static_cast<std::size_t>(v)]);
      touch(base_[static_cast<std::size_t>(mv)]);
      parent_[static_cast<std::size_t>(v)] = child;
      touch(v);
      child = mv;
      v = parent_[static_cast<std::size_t>(mv)];
    }
  }

  Vertex find_path(Vertex root) {
    std::vector<Vertex> queue{root};
    std::vector<Vertex> tree{root};
    used_[static_cast<std::size_t>(root)] = 1;
    touch(root);
    std::size_t head = 0;
    while (head < queue.size()) {
      const Vertex v = queue[head++];
      for (const Vertex to : (*adj_)[static_cast<std::size_t>(v)]) {
        const auto ti = static_cast<std::size_t>(to);
        if (base_[static_cast<std::size_t>(v)] == base_[ti] || mate_[static_cast<std::size_t>(v)] == to) {
          continue;
        }
        if (to == root || (mate_[ti] >= 0 && parent_[static_cast<std::size_t>(mate_[ti])] >= 0)) {
          const Vertex cur = lca(v, to);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (auto i : tree) {
            const auto ii = static_cast<std::size_t>(i);
            if (blossom_[static_cast<std::size_t>(base_[ii])]) {
              base_[ii] = cur;
              if (!used_[ii]) {
                used_[ii] = 1;
                queue.push_back(i);
              }
            }
          }
          for (auto i : tree) {
            blossom_[static_cast<std::size_t>(i)] = 0;
          }
        } else if (parent_[ti] < 0) {
          parent_[ti] = v;
          touch(to);
          tree.push_back(to);
          if (mate_[ti] < 0) {
            return to;
          }
          const Vertex m = mate_[ti];
          used_[static_cast<std::size_t>(m)] = 1;
          touch(m);
          tree.push_back(m);
          queue.push_back(m);
        }
      }
    }
    return -1;
  }

  const Adjacency* adj_;
  std::size_t n_;
  std::vector<Vertex> mate_;
  std::vector<Vertex> parent_;
  std::vector<Vertex> base_;
  std::vector<char> used_;
  std::vector<char> blossom_;
  std::vector<char> lca_mark_;
  std::vector<Vertex> touched_;
};

// Exact maximum-cardinality matching of the graph on vertices 0..n-1 spanned
// by the given edges.
inline Matching max_matching(Vertex n, std::span<const Edge> edges) {
  Adjacency adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    if (e.u < 0 || e.v >= n || e.u == e.v) {
      throw std::out_of_range("max_matching: edge out of range");
    }
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  BlossomMatcher bm(&adj);
  for (const auto& e : edges) {
    if (bm.exposed(e.u) && bm.exposed(e.v)) {
      bm.set_pair(e.u, e.v);
    }
  }
  for (Vertex v = 0; v < n; ++v) {
    if (bm.exposed(v) && !adj[static_cast<std::size_t>(v)].empty()) {
      bm.augment_from(v);
    }
  }
  return bm.matching();
}

inline Matching max_matching(const Graph& g) {
  const auto edges = g.edges();
  return max_matching(g.n(), edges);
}

// Maximum matching of an edge set over arbitrary vertex labels.
inline Matching max_matching_of_edges(std::span<const Edge> edges) {
  std::unordered_map<Vertex, Vertex> local;
  std::vector<Vertex> global;
  auto id = [&](Vertex v) {
    auto [it, inserted] = local.try_emplace(v, static_cast<Vertex>(global.size()));
    if (inserted) {
      global.push_back(v);
    }
    return it->second;
  };
  std::vector<Edge> mapped;
  mapped.reserve(edges.size());
  for (const auto& e : edges) {
    mapped.emplace_back(id(e.u), id(e.v));
  }
  auto m = max_matching(static_cast<Vertex>(global.size()), mapped);
  for (auto& e : m.edges) {
    e = Edge(global[static_cast<std::size_t>(e.u)], global[static_cast<std::size_t>(e.v)]);
  }
  std::sort(m.edges.begin(), m.edges.end());
  return m;
}

// True iff the edges with both endpoints in target contain a matching that
// covers every vertex of target.
inline bool has_perfect_matching_of(std::span<const Edge> edges, std::span<const Vertex> target) {
  if (target.size() % 2 != 0) {
    throw std::invalid_argument("has_perfect_matching_of: odd target size");
  }
  if (target.empty()) {
    return true;
  }
  std::unordered_set<Vertex> in(target.begin(), target.end());
  std::vector<Edge> inside;
  for (const auto& e : edges) {
    if (in.count(e.u) && in.count(e.v)) {
      inside.push_back(e);
    }
  }
  return max_matching_of_edges(inside).size() * 2 == in.size();
}

// Hopcroft-Karp over left vertices 0..L-1 and right vertices 0..R-1.
// Returns match_left (right index or -1 for each left vertex).
inline std::vector<int> bipartite_max_matching(int left, int right,
                                               const std::vector<std::vector<int>>& adj) {
  constexpr int kInf = 1 << 30;
  std::vector<int> match_l(static_cast<std::size_t>(left), -1);
  std::vector<int> match_r(static_cast<std::size_t>(right), -1);
  std::vector<int> dist(static_cast<std::size_t>(left));

  auto bfs = [&]() {
    std::queue<int> q;
    bool found = false;
    for (int l = 0; l < left; ++l) {
      if (match_l[static_cast<std::size_t>(l)] < 0) {
        dist[static_cast<std::size_t>(l)] = 0;
        q.push(l);
      } else {
        dist[static_cast<std::size_t>(l)] = kInf;
      }
    }
    while (!q.empty()) {
      const int l = q.front();
      q.pop();
      for (int r : adj[static_cast<std::size_t>(l)]) {
        const int l2 = match_r[static_cast<std::size_t>(r)];
        if (l2 < 0) {
          found = true;
        } else if (dist[static_cast<std::size_t>(l2)] == kInf) {
          dist[static_cast<std::size_t>(l2)] = dist[static_cast<std::size_t>(l)] + 1;
          q.push(l2);
        }
      }
    }
    return found;
  };

  std::function<bool(int)> dfs = [&](int l) {
    for (int r : adj[static_cast<std::size_t>(l)]) {
      const int l2 = match_r[static_cast<std::size_t>(r)];
      if (l2 < 0 || (dist[static_cast<std::size_t>(l2)] == dist[static_cast<std::size_t>(l)] + 1 && dfs(l2))) {
        match_l[static_cast<std::size_t>(l)] = r;
        match_r[static_cast<std::size_t>(r)] = l;
        return true;
      }
    }
    dist[static_cast<std::size_t>(l)] = kInf;
    return false;
  };

  while (bfs()) {
    for (int l = 0; l < left; ++l) {
      if (match_l[static_cast<std::size_t>(l)] < 0) {
        dfs(l);
      }
    }
  }
  return match_l;
}

// Matching that saturates every left vertex, as (left index, right index)
// pairs ordered by left index, or nullopt when Hall's condition fails.
inline std::optional<std::vector<std::pair<int, int>>> bipartite_saturating_matching(
    int left, int right, const std::vector<std::vector<int>>& adj) {
  if (left > right) {
    return std::nullopt;
  }
  const auto match_l = bipartite_max_matching(left, right, adj);
  std::vector<std::pair<int, int>> out;
  for (int l = 0; l < left; ++l) {
    if (match_l[static_cast<std::size_t>(l)] < 0) {
      return std::nullopt;
    }
    out.emplace_back(l, match_l[static_cast<std::size_t>(l)]);
  }
  return out;
}

// Perfect matching between two equal-size vertex sets, where adjacent(l, r)
// decides the bipartite edges. Returns nullopt when none exists.
inline std::optional<Matching> bipartite_perfect_matching(
    std::span<const Vertex> left, std::span<const Vertex> right,
    const std::function<bool(Vertex, Vertex)>& adjacent) {
  if (left.size() != right.size()) {
    throw std::invalid_argument("bipartite_perfect_matching: sides differ in size");
  }
  const int k = static_cast<int>(left.size());
  std::vector<std::vector<int>> adj(left.size());
  for (int l = 0; l < k; ++l) {
    for (int r = 0; r < k; ++r) {
      if (adjacent(left[static_cast<std::size_t>(l)], right[static_cast<std::size_t>(r)])) {
        adj[static_cast<std::size_t>(l)].push_back(r);
      }
    }
  }
  auto pairs = bipartite_saturating_matching(k, k, adj);
  if (!pairs) {
    return std::nullopt;
  }
  Matching m;
  for (auto [l, r] : *pairs) {
    m.edges.emplace_back(left[static_cast<std::size_t>(l)], right[static_cast<std::size_t>(r)]);
  }
  return m;
}

}  // namespace pmgame
