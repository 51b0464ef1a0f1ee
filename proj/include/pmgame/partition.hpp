#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pmgame/graph.hpp"
#include "pmgame/matching.hpp"
#include "pmgame/rng.hpp"

namespace pmgame {

struct PartitionConfig {
  int clique_size = 16;  // target size s of the greedy cliques (even)
  int min_subboard_size = 16;
  int max_retries = 8;
  std::uint64_t hamilton_budget = 2'000'000;  // search nodes per attempt

  void validate() const {
    if (clique_size < 4 || clique_size % 2 != 0) {
      throw std::invalid_argument("clique_size must be even and >= 4");
    }
    if (min_subboard_size < 8) {
      throw std::invalid_argument("min_subboard_size must be >= 8");
    }
    if (max_retries < 1) {
      throw std::invalid_argument("max_retries must be >= 1");
    }
  }
};

// max(min_subboard_size, ln^{1/3}(n) rounded up to an even integer).
inline int default_clique_size(Vertex n, int min_subboard_size = 16) {
  const double scale = n > 1 ? std::cbrt(std::log(static_cast<double>(n))) : 1.0;
  const int even = 2 * static_cast<int>(std::ceil(scale / 2.0));
  return std::max(min_subboard_size, even);
}

inline void to_json(nlohmann::json& j, const PartitionConfig& c) {
  j = nlohmann::json{{"clique_size", c.clique_size},
                     {"min_subboard_size", c.min_subboard_size},
                     {"max_retries", c.max_retries},
                     {"hamilton_budget", c.hamilton_budget}};
}
inline void from_json(const nlohmann::json& j, PartitionConfig& c) {
  c.clique_size = j.value("clique_size", c.clique_size);
  c.min_subboard_size = j.value("min_subboard_size", c.min_subboard_size);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.hamilton_budget = j.value("hamilton_budget", c.hamilton_budget);
}

struct PartitionFailure {
  std::string stage;
  std::string detail;
};

inline nlohmann::json failure_to_json(const PartitionFailure& f) {
  return nlohmann::json{{"stage", f.stage}, {"detail", f.detail}};
}

// Where a part came from: the greedy clique it was split from and which half.
struct HalfMark {
  int clique = -1;
  char side = 'L';
};

// Ordered parts V_1..V_t; consecutive parts (cyclically) form cliques.
struct Partition {
  std::vector<std::vector<Vertex>> parts;
  std::vector<HalfMark> half_marks;

  int t() const { return static_cast<int>(parts.size()); }
};

inline nlohmann::json partition_to_json(const Partition& p) {
  return nlohmann::json{{"parts", p.parts}, {"t", p.t()}};
}

inline Partition partition_from_json(const nlohmann::json& j) {
  Partition p;
  p.parts = j.at("parts").get<std::vector<std::vector<Vertex>>>();
  if (j.contains("t") && j.at("t").get<int>() != p.t()) {
    throw std::invalid_argument("partition JSON: t does not match the number of parts");
  }
  return p;
}

using CliqueList = std::vector<std::vector<Vertex>>;

namespace detail {

// Bitset over vertex ids, used for common neighbourhoods of growing cliques.
class VertexSet {
 public:
  explicit VertexSet(std::size_t words) : w_(words, ~std::uint64_t{0}) {}
  void intersect(std::span<const std::uint64_t> row) {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      w_[i] &= row[i];
    }
  }
  bool test(Vertex v) const { return (w_[static_cast<std::size_t>(v) >> 6] >> (v & 63)) & 1U; }

 private:
  std::vector<std::uint64_t> w_;
};

}  // namespace detail

// Greedy clique cover built in rounds. With k = max(1, floor(n/s)) cliques
// and r = ceil(n/k), the first q rounds (q = r-2 when that is even, r-1
// otherwise) seed k singletons and then grow every clique by one vertex of
// the next layer through a perfect matching of the auxiliary bipartite graph
// (clique C ~ x iff x is adjacent to all of C). The leftover vertices L are
// split into halves X, Y, paired across by a bipartite matching, and each
// pair (plus the one unpaired vertex when |L| is odd) joins a distinct clique
// whose members are all adjacent to it, so every clique but at most one has
// even size.
inline std::variant<CliqueList, PartitionFailure> greedy_clique_partition(
    const Graph& g, const PartitionConfig& cfg, std::span<const Vertex> order = {}) {
  cfg.validate();
  const Vertex n = g.n();
  if (n < 4) {
    return PartitionFailure{"greedy", "graph has fewer than 4 vertices"};
  }
  std::vector<Vertex> ord;
  if (order.empty()) {
    ord.resize(static_cast<std::size_t>(n));
    std::iota(ord.begin(), ord.end(), 0);
  } else {
    ord.assign(order.begin(), order.end());
    if (ord.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument("vertex order must be a permutation of V(G)");
    }
  }

  const int s = cfg.clique_size;
  const int k = std::max(1, static_cast<int>(n) / s);
  const int r = (static_cast<int>(n) + k - 1) / k;
  int q = (r - 2) % 2 == 0 ? r - 2 : r - 1;
  q = std::max(q, 2);
  while (q > 0 && q * k > n) {
    q -= 2;
  }
  if (q < 2) {
    return PartitionFailure{"greedy", "clique size too large for the vertex count"};
  }

  CliqueList cliques(static_cast<std::size_t>(k));
  std::vector<detail::VertexSet> common(static_cast<std::size_t>(k), detail::VertexSet(g.words_per_row()));
  auto layer = [&](int round) {
    return std::span<const Vertex>(ord).subspan(static_cast<std::size_t>((round - 1) * k),
                                                static_cast<std::size_t>(k));
  };
  auto add = [&](int c, Vertex v) {
    cliques[static_cast<std::size_t>(c)].push_back(v);
    common[static_cast<std::size_t>(c)].intersect(g.row(v));
  };

  for (int c = 0; c < k; ++c) {
    add(c, layer(1)[static_cast<std::size_t>(c)]);
  }
  for (int round = 2; round <= q; ++round) {
    const auto u = layer(round);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      for (int x = 0; x < k; ++x) {
        if (common[static_cast<std::size_t>(c)].test(u[static_cast<std::size_t>(x)])) {
          adj[static_cast<std::size_t>(c)].push_back(x);
        }
      }
    }
    auto pm = bipartite_saturating_matching(k, k, adj);
    if (!pm) {
      return PartitionFailure{"greedy-round",
                              "no perfect matching in the auxiliary bipartite graph of round " +
                                  std::to_string(round)};
    }
    for (auto [c, x] : *pm) {
      add(c, u[static_cast<std::size_t>(x)]);
    }
  }

  // Parity repair on the leftover vertices.
  const std::span<const Vertex> leftover = std::span<const Vertex>(ord).subspan(static_cast<std::size_t>(q * k));
  if (!leftover.empty()) {
    const std::size_t half = leftover.size() / 2;
    const auto xs = leftover.subspan(0, half);
    const auto ys = leftover.subspan(half);
    std::vector<std::vector<int>> pair_adj(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        if (g.has_edge(xs[i], ys[j])) {
          pair_adj[i].push_back(static_cast<int>(j));
        }
      }
    }
    auto pairing = bipartite_saturating_matching(static_cast<int>(xs.size()), static_cast<int>(ys.size()), pair_adj);
    if (!pairing) {
      return PartitionFailure{"greedy-pairing", "leftover halves admit no saturating matching"};
    }
    std::vector<std::vector<Vertex>> pseudo;
    std::vector<char> y_used(ys.size(), 0);
    for (auto [i, j] : *pairing) {
      pseudo.push_back({xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]});
      y_used[static_cast<std::size_t>(j)] = 1;
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (!y_used[j]) {
        pseudo.push_back({ys[j]});
      }
    }
    if (pseudo.size() > static_cast<std::size_t>(k)) {
      return PartitionFailure{"greedy-pairing", "more pseudo-vertices than cliques"};
    }
    std::vector<std::vector<int>> z_adj(pseudo.size());
    for (std::size_t z = 0; z < pseudo.size(); ++z) {
      for (int c = 0; c < k; ++c) {
        const auto& cn = common[static_cast<std::size_t>(c)];
        if (std::all_of(pseudo[z].begin(), pseudo[z].end(), [&](Vertex v) { return cn.test(v); })) {
          z_adj[z].push_back(c);
        }
      }
    }
    auto attach = bipartite_saturating_matching(static_cast<int>(pseudo.size()), k, z_adj);
    if (!attach) {
      return PartitionFailure{"greedy-last-round", "pseudo-vertices cannot all be attached to cliques"};
    }
    for (auto [z, c] : *attach) {
      for (auto v : pseudo[static_cast<std::size_t>(z)]) {
        add(c, v);
      }
    }
  }

  for (auto& c : cliques) {
    std::sort(c.begin(), c.end());
  }
  return cliques;
}

// Splits a clique into halves (L, R) with ||L|-|R|| <= 2. Both halves are
// even unless is_last, in which case only |L| must be even.
inline std::pair<std::vector<Vertex>, std::vector<Vertex>> even_half_split(std::span<const Vertex> clique,
                                                                           bool is_last) {
  const int m = static_cast<int>(clique.size());
  if (m < 4) {
    throw std::invalid_argument("even_half_split: clique must have at least 4 vertices");
  }
  std::vector<Vertex> sorted(clique.begin(), clique.end());
  std::sort(sorted.begin(), sorted.end());
  int h = -1;
  if (!is_last) {
    if (m % 2 != 0) {
      throw std::invalid_argument("even_half_split: odd clique can only be the last one");
    }
    h = (m / 2) % 2 == 0 ? m / 2 : m / 2 - 1;
  } else {
    for (int cand = 2; cand < m; cand += 2) {
      if (std::abs(2 * cand - m) <= 2) {
        h = cand;
        break;
      }
    }
    if (h < 0) {
      throw std::invalid_argument("even_half_split: no split satisfies the parity constraints");
    }
  }
  std::vector<Vertex> left(sorted.begin(), sorted.begin() + h);
  std::vector<Vertex> right(sorted.begin() + h, sorted.end());
  return {std::move(left), std::move(right)};
}

// Digraph on split cliques: arc i -> j iff every edge between R_i and L_j is
// present in the graph.
struct CliqueDigraph {
  std::vector<std::pair<std::vector<Vertex>, std::vector<Vertex>>> halves;
  std::vector<std::vector<char>> arc;

  int size() const { return static_cast<int>(halves.size()); }
  bool has_arc(int i, int j) const { return arc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0; }
  int out_degree(int i) const {
    return static_cast<int>(std::count(arc[static_cast<std::size_t>(i)].begin(), arc[static_cast<std::size_t>(i)].end(), 1));
  }
};

inline CliqueDigraph build_clique_digraph(const Graph& g,
                                          std::vector<std::pair<std::vector<Vertex>, std::vector<Vertex>>> halves) {
  CliqueDigraph d;
  d.halves = std::move(halves);
  const auto l = d.halves.size();
  d.arc.assign(l, std::vector<char>(l, 0));
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (i == j) {
        continue;
      }
      bool all = true;
      for (auto rv : d.halves[i].second) {
        for (auto lv : d.halves[j].first) {
          if (!g.has_edge(rv, lv)) {
            all = false;
            break;
          }
        }
        if (!all) {
          break;
        }
      }
      d.arc[i][j] = all ? 1 : 0;
    }
  }
  return d;
}

// Directed Hamilton cycle by depth-first backtracking from node 0. At each
// step candidates are tried in increasing order of their remaining out-degree
// (unvisited successors). Gives up after `budget` expansions.
inline std::optional<std::vector<int>> find_hamilton_cycle(const CliqueDigraph& d, std::uint64_t budget = 2'000'000) {
  const int l = d.size();
  if (l == 0) {
    return std::nullopt;
  }
  if (l == 1) {
    return std::vector<int>{0};
  }
  for (int i = 0; i < l; ++i) {
    bool out = false;
    bool in = false;
    for (int j = 0; j < l; ++j) {
      out = out || d.has_arc(i, j);
      in = in || d.has_arc(j, i);
    }
    if (!out || !in) {
      return std::nullopt;
    }
  }

  std::vector<std::vector<int>> succ(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      if (d.has_arc(i, j)) {
        succ[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  std::vector<char> visited(static_cast<std::size_t>(l), 0);
  std::vector<int> path{0};
  visited[0] = 1;
  std::uint64_t expansions = 0;

  auto remaining_out = [&](int v) {
    int c = 0;
    for (int w : succ[static_cast<std::size_t>(v)]) {
      c += visited[static_cast<std::size_t>(w)] ? 0 : 1;
    }
    return c;
  };

  // Iterative DFS; each frame holds its ordered candidate list and cursor.
  struct Frame {
    std::vector<int> cand;
    std::size_t next = 0;
  };
  auto make_frame = [&](int v) {
    Frame f;
    for (int w : succ[static_cast<std::size_t>(v)]) {
      if (!visited[static_cast<std::size_t>(w)]) {
        f.cand.push_back(w);
      }
    }
    std::vector<std::pair<int, int>> keyed;
    keyed.reserve(f.cand.size());
    for (int w : f.cand) {
      keyed.emplace_back(remaining_out(w), w);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      f.cand[i] = keyed[i].second;
    }
    return f;
  };

  std::vector<Frame> stack;
  stack.push_back(make_frame(0));
  while (!stack.empty()) {
    if (static_cast<int>(path.size()) == l) {
      if (d.has_arc(path.back(), 0)) {
        return path;
      }
      visited[static_cast<std::size_t>(path.back())] = 0;
      path.pop_back();
      stack.pop_back();
      continue;
    }
    auto& top = stack.back();
    if (top.next >= top.cand.size() || ++expansions > budget) {
      if (expansions > budget) {
        return std::nullopt;
      }
      stack.pop_back();
      if (path.size() > 1) {
        visited[static_cast<std::size_t>(path.back())] = 0;
        path.pop_back();
      }
      continue;
    }
    const int w = top.cand[top.next++];
    visited[static_cast<std::size_t>(w)] = 1;
    path.push_back(w);
    stack.push_back(make_frame(w));
  }
  return std::nullopt;
}

// Full pipeline: greedy cliques, even half splits, clique digraph, Hamilton
// cycle, then parts L_1, R_1, L_2, R_2, ... in cycle order. The odd clique
// (at most one, only when n is odd) is rotated to the end so its odd half is
// the last part. Attempt 0 uses the identity vertex order; later attempts
// use orders shuffled from retry_seed.
inline std::variant<Partition, PartitionFailure> cyclic_partition(const Graph& g, const PartitionConfig& cfg,
                                                                   std::uint64_t retry_seed = 0) {
  cfg.validate();
  PartitionFailure last{"none", "no attempt made"};
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    std::vector<Vertex> order(static_cast<std::size_t>(g.n()));
    std::iota(order.begin(), order.end(), 0);
    if (attempt > 0) {
      Rng rng(mix_seed(retry_seed, static_cast<std::uint64_t>(attempt)));
      rng.shuffle(order);
    }
    auto greedy = greedy_clique_partition(g, cfg, order);
    if (auto* f = std::get_if<PartitionFailure>(&greedy)) {
      last = *f;
      continue;
    }
    auto cliques = std::get<CliqueList>(std::move(greedy));
    std::stable_partition(cliques.begin(), cliques.end(), [](const auto& c) { return c.size() % 2 == 0; });
    const bool has_odd = !cliques.empty() && cliques.back().size() % 2 != 0;

    std::vector<std::pair<std::vector<Vertex>, std::vector<Vertex>>> halves;
    bool split_ok = true;
    for (std::size_t i = 0; i < cliques.size(); ++i) {
      const bool is_last = has_odd && i + 1 == cliques.size();
      if (cliques[i].size() < 4) {
        last = PartitionFailure{"half-split", "clique of size " + std::to_string(cliques[i].size()) + " cannot be split"};
        split_ok = false;
        break;
      }
      halves.push_back(even_half_split(cliques[i], is_last));
    }
    if (!split_ok) {
      continue;
    }
    const auto digraph = build_clique_digraph(g, std::move(halves));
    auto cycle = find_hamilton_cycle(digraph, cfg.hamilton_budget);
    if (!cycle) {
      last = PartitionFailure{"hamilton-cycle", "no directed Hamilton cycle found in the clique digraph (" +
                                                    std::to_string(digraph.size()) + " nodes)"};
      continue;
    }
    if (has_odd) {
      const int odd_node = digraph.size() - 1;
      auto it = std::find(cycle->begin(), cycle->end(), odd_node);
      std::rotate(cycle->begin(), it + 1, cycle->end());
    }
    Partition part;
    for (int node : *cycle) {
      const auto& [l, r] = digraph.halves[static_cast<std::size_t>(node)];
      part.parts.push_back(l);
      part.half_marks.push_back({node, 'L'});
      part.parts.push_back(r);
      part.half_marks.push_back({node, 'R'});
    }
    return part;
  }
  return last;
}

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const CheckResult* find(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) {
        return &c;
      }
    }
    return nullptr;
  }
  void add(std::string name, bool passed, std::string detail = {}) {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }
};

inline nlohmann::json report_to_json(const VerificationReport& r) {
  auto arr = nlohmann::json::array();
  for (const auto& c : r.checks) {
    arr.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return nlohmann::json{{"ok", r.ok()}, {"checks", arr}};
}

// Checks a partition against the graph. Size bounds are checked when a
// config is supplied: parts are halves of cliques of size s-2..s+2.
inline VerificationReport verify_partition(const Graph& g, const Partition& part,
                                           const std::optional<PartitionConfig>& cfg = std::nullopt) {
  VerificationReport rep;
  const int t = part.t();

  {
    std::vector<int> seen(static_cast<std::size_t>(g.n()), 0);
    bool ok = true;
    std::string detail;
    for (const auto& p : part.parts) {
      for (auto v : p) {
        if (!g.contains(v)) {
          ok = false;
          detail = "vertex " + std::to_string(v) + " out of range";
        } else if (seen[static_cast<std::size_t>(v)]++ > 0) {
          ok = false;
          detail = "vertex " + std::to_string(v) + " appears twice";
        }
      }
    }
    for (Vertex v = 0; ok && v < g.n(); ++v) {
      if (seen[static_cast<std::size_t>(v)] == 0) {
        ok = false;
        detail = "vertex " + std::to_string(v) + " not covered";
      }
    }
    rep.add("disjoint_cover", ok, detail);
  }

  auto safe_clique = [&](const std::vector<Vertex>& s) {
    for (auto v : s) {
      if (!g.contains(v)) {
        return false;
      }
    }
    return is_clique(g, s);
  };

  {
    bool ok = t > 0;
    std::string detail = t > 0 ? "" : "no parts";
    for (int i = 0; i < t && ok; ++i) {
      if (!safe_clique(part.parts[static_cast<std::size_t>(i)])) {
        ok = false;
        detail = "part " + std::to_string(i + 1) + " is not a clique";
      }
    }
    rep.add("cliques", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < t && ok; ++i) {
      const auto& a = part.parts[static_cast<std::size_t>(i)];
      const auto& b = part.parts[static_cast<std::size_t>((i + 1) % t)];
      std::vector<Vertex> u(a);
      if (t > 1) {
        u.insert(u.end(), b.begin(), b.end());
      }
      if (!safe_clique(u)) {
        ok = false;
        detail = "union of parts " + std::to_string(i + 1) + " and " + std::to_string((i + 1) % t + 1) +
                 " is not a clique";
      }
    }
    rep.add("cyclic_unions", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    int odd = 0;
    for (int i = 0; i < t; ++i) {
      if (part.parts[static_cast<std::size_t>(i)].size() % 2 != 0) {
        ++odd;
        if (i != t - 1) {
          ok = false;
          detail = "part " + std::to_string(i + 1) + " has odd size";
        }
      }
    }
    if (g.n() % 2 == 0 && odd > 0) {
      ok = false;
      detail = "odd part present although n is even";
    }
    rep.add("parity", ok, detail);
    rep.add("at_most_one_odd", odd <= 1, odd <= 1 ? "" : std::to_string(odd) + " odd parts");
  }

  if (cfg) {
    const int s = cfg->clique_size;
    const auto lo = static_cast<std::size_t>(std::max(1, (s - 2) / 2 - 1));
    const auto hi = static_cast<std::size_t>((s + 2) / 2 + 1);
    bool ok = true;
    std::string detail;
    for (int i = 0; i < t && ok; ++i) {
      const auto sz = part.parts[static_cast<std::size_t>(i)].size();
      if (sz < lo || sz > hi) {
        ok = false;
        detail = "part " + std::to_string(i + 1) + " has size " + std::to_string(sz);
      }
    }
    rep.add("size_bounds", ok, detail);
  }
  return rep;
}

}  // namespace pmgame
