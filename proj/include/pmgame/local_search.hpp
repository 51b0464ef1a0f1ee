#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pmgame/board.hpp"

namespace pmgame {

// Exact Maker-style completion search on a small vertex region (<= 16
// vertices). Red wants her edges inside the region to contain a matching of
// size floor(|region|/2); Blue may answer anywhere, but a Blue move outside
// the region is a pass, which never helps Blue, so only in-region replies
// are enumerated. Results are memoised per thread across calls.
class CompletionSearch {
 public:
  static constexpr int kMaxRegion = 16;

  struct Bits {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    bool test(int i) const { return i < 64 ? (lo >> i) & 1U : (hi >> (i - 64)) & 1U; }
    void set(int i) {
      if (i < 64) {
        lo |= std::uint64_t{1} << i;
      } else {
        hi |= std::uint64_t{1} << (i - 64);
      }
    }
    Bits with(int i) const {
      Bits b = *this;
      b.set(i);
      return b;
    }
    friend bool operator==(const Bits&, const Bits&) = default;
  };

  CompletionSearch(const Board& board, std::span<const Vertex> region, std::uint64_t node_budget = 3'000'000)
      : node_budget_(node_budget) {
    if (region.size() > static_cast<std::size_t>(kMaxRegion)) {
      throw std::invalid_argument("CompletionSearch: region larger than 16 vertices");
    }
    verts_.assign(region.begin(), region.end());
    std::sort(verts_.begin(), verts_.end());
    const int k = static_cast<int>(verts_.size());
    target_ = k / 2;
    for (auto& row : index_) {
      row.fill(-1);
    }
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const Edge e(verts_[static_cast<std::size_t>(a)], verts_[static_cast<std::size_t>(b)]);
        if (!board.graph().has_edge(e)) {
          continue;
        }
        const int id = static_cast<int>(ends_.size());
        ends_.push_back({a, b});
        index_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = id;
        present_.set(id);
        switch (board.owner(e)) {
          case Owner::Red:
            red_.set(id);
            break;
          case Owner::Blue:
            blue_.set(id);
            break;
          case Owner::Free:
            break;
        }
      }
    }
  }

  int target() const { return target_; }
  int red_matching() const { return mm(red_); }
  int deficiency() const { return target_ - mm(red_); }
  bool exhausted() const { return exhausted_; }

  // Free region edges whose claim completes Red's matching of the region.
  std::vector<Edge> completing_edges() const {
    std::vector<Edge> out;
    for (int id : free_ids(red_, blue_)) {
      if (mm(red_.with(id)) == target_) {
        out.push_back(edge(id));
      }
    }
    return out;
  }

  // Smallest b in [deficiency, max_moves] for which Red, to move, can force
  // completion within b of her moves; returns the first move of such a line.
  std::optional<std::pair<Edge, int>> find(int max_moves) {
    const int d = deficiency();
    for (int b = std::max(d, 1); b <= max_moves; ++b) {
      nodes_ = 0;
      exhausted_ = false;
      int move = -1;
      if (forced(red_, blue_, b, &move) && move >= 0) {
        return std::make_pair(edge(move), b);
      }
      if (exhausted_) {
        break;
      }
    }
    return std::nullopt;
  }

 private:
  struct Key {
    std::uint64_t present_lo, present_hi, red_lo, red_hi, blue_lo, blue_hi;
    int size;
    int budget;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (std::uint64_t x : {k.present_lo, k.present_hi, k.red_lo, k.red_hi, k.blue_lo, k.blue_hi,
                              static_cast<std::uint64_t>(k.size) << 8 | static_cast<std::uint64_t>(k.budget)}) {
        h ^= x + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      }
      return static_cast<std::size_t>(h);
    }
  };
  using Memo = std::unordered_map<Key, bool, KeyHash>;

  static Memo& memo() {
    thread_local Memo m;
    if (m.size() > 4'000'000) {
      m.clear();
    }
    return m;
  }

  Edge edge(int id) const {
    const auto [a, b] = ends_[static_cast<std::size_t>(id)];
    return Edge(verts_[static_cast<std::size_t>(a)], verts_[static_cast<std::size_t>(b)]);
  }

  std::vector<int> free_ids(const Bits& red, const Bits& blue) const {
    std::vector<int> out;
    for (int id = 0; id < static_cast<int>(ends_.size()); ++id) {
      if (!red.test(id) && !blue.test(id)) {
        out.push_back(id);
      }
    }
    return out;
  }

  // Maximum matching size of the Red edges in `red`, by branching on the
  // lowest non-isolated vertex; a vertex of degree one is always matched to
  // its neighbour, which keeps the sparse Red graphs nearly linear.
  int mm(const Bits& red) const {
    std::array<std::uint32_t, kMaxRegion> adj{};
    for (int id = 0; id < static_cast<int>(ends_.size()); ++id) {
      if (red.test(id)) {
        const auto [a, b] = ends_[static_cast<std::size_t>(id)];
        adj[static_cast<std::size_t>(a)] |= 1U << b;
        adj[static_cast<std::size_t>(b)] |= 1U << a;
      }
    }
    const std::uint32_t all = verts_.size() >= 32 ? ~0U : (1U << verts_.size()) - 1;
    return mm_rec(adj, all);
  }

  static int mm_rec(const std::array<std::uint32_t, kMaxRegion>& adj, std::uint32_t s) {
    int v = -1;
    std::uint32_t nb = 0;
    std::uint32_t rest = s;
    while (rest != 0) {
      const int c = std::countr_zero(rest);
      rest &= rest - 1;
      const std::uint32_t cn = adj[static_cast<std::size_t>(c)] & s;
      if (cn != 0) {
        v = c;
        nb = cn;
        if (std::popcount(cn) == 1) {
          break;
        }
      } else {
        s &= ~(1U << c);
      }
    }
    if (v < 0) {
      return 0;
    }
    if (std::popcount(nb) == 1) {
      const int u = std::countr_zero(nb);
      return 1 + mm_rec(adj, s & ~(1U << v) & ~(1U << u));
    }
    const int bound = std::popcount(s) / 2;
    int best = mm_rec(adj, s & ~(1U << v));
    while (nb != 0 && best < bound) {
      const int u = std::countr_zero(nb);
      nb &= nb - 1;
      best = std::max(best, 1 + mm_rec(adj, s & ~(1U << v) & ~(1U << u)));
    }
    return best;
  }

  bool forced(const Bits& red, const Bits& blue, int b, int* first_move) {
    const int cur = mm(red);
    if (cur == target_) {
      return true;
    }
    if (b <= 0 || target_ - cur > b) {
      return false;
    }
    Key key{present_.lo, present_.hi, red.lo, red.hi, blue.lo, blue.hi, static_cast<int>(verts_.size()), b};
    if (first_move == nullptr) {
      auto it = memo().find(key);
      if (it != memo().end()) {
        return it->second;
      }
    }
    if (++nodes_ > node_budget_) {
      exhausted_ = true;
      return false;
    }

    const auto frees = free_ids(red, blue);
    std::vector<std::pair<int, int>> cands;  // (rank, id): augmenting moves first
    for (int id : frees) {
      const int after = mm(red.with(id));
      if (after == target_) {
        if (first_move != nullptr) {
          *first_move = id;
        }
        memo()[key] = true;
        return true;
      }
      if (target_ - after <= b - 1) {
        cands.emplace_back(after > cur ? 0 : 1, id);
      }
    }
    bool result = false;
    if (b >= 2) {
      std::stable_sort(cands.begin(), cands.end());
      for (const auto& [rank, id] : cands) {
        const Bits red2 = red.with(id);
        if (b == 2) {
          // Blue blocks one completing edge; Red needs two.
          int completing = 0;
          for (int f : frees) {
            if (f != id && mm(red2.with(f)) == target_) {
              ++completing;
            }
          }
          if (completing >= 2) {
            result = true;
          }
        } else if (forced(red2, blue, b - 1, nullptr)) {
          bool all = true;
          for (int f : frees) {
            if (f == id) {
              continue;
            }
            if (!forced(red2, blue.with(f), b - 1, nullptr)) {
              all = false;
              break;
            }
            if (exhausted_) {
              return false;
            }
          }
          result = all;
        }
        if (exhausted_) {
          return false;
        }
        if (result) {
          if (first_move != nullptr) {
            *first_move = id;
          }
          break;
        }
      }
    }
    if (!exhausted_) {
      memo()[key] = result;
    }
    return result;
  }

  std::vector<Vertex> verts_;
  std::vector<std::pair<int, int>> ends_;
  std::array<std::array<int, kMaxRegion>, kMaxRegion> index_{};
  Bits present_;
  Bits red_;
  Bits blue_;
  int target_ = 0;
  std::uint64_t node_budget_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
};

}  // namespace pmgame
