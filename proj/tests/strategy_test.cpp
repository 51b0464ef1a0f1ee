#include <gtest/gtest.h>

#include <functional>
#include <unordered_set>

#include "pmgame/adversaries.hpp"
#include "pmgame/kn_strategies.hpp"
#include "test_support.hpp"

namespace pmgame {
namespace {

using testing::exhaustive_blue_tree;
using testing::range_vertices;
using testing::shared_complete;

using testing::sweak_move;

TEST(CountHDistinct, Definition) {
  Board b(shared_complete(6));
  const auto h = range_vertices(0, 6);
  EXPECT_EQ(count_h_distinct(b, h), 0);
  b.claim(Player::Blue, Edge(0, 1));
  EXPECT_EQ(count_h_distinct(b, h), 2);
  Board p(shared_complete(6));
  p.claim(Player::Blue, Edge(0, 1));  // path 0-1-2
  p.claim(Player::Blue, Edge(1, 2));
  p.claim(Player::Red, Edge(0, 3));
  EXPECT_EQ(count_h_distinct(p, h), 2);
}

TEST(CountHDistinct, IgnoresEdgesLeavingH) {
  Board b(shared_complete(8));
  b.claim(Player::Blue, Edge(0, 7));
  EXPECT_EQ(count_h_distinct(b, range_vertices(0, 4)), 0);
}

TEST(SWeak, TwoVerticesTakesTheEdge) {
  Board b(shared_complete(2));
  SWeak s(range_vertices(0, 2));
  EXPECT_EQ(s.next(b), Edge(0, 1));
}

void check_sweak_exhaustive(Vertex m) {
  Board b(shared_complete(m));
  const auto h = range_vertices(0, m);
  std::unordered_set<std::uint64_t> seen;
  testing::TreeStats st;
  exhaustive_blue_tree(
      b, 0, m / 2 + 1, [&](const Board& x) { return sweak_move(x, h); },
      [&](const Board& x) { return red_has_pm_of(x, h); }, seen, st);
  EXPECT_TRUE(st.ok) << "K_" << m << " worst line needs " << st.worst_moves;
  EXPECT_LE(st.worst_moves, m / 2 + 1);
}

TEST(SWeak, ExhaustiveK6) { check_sweak_exhaustive(6); }
TEST(SWeak, ExhaustiveK8) { check_sweak_exhaustive(8); }

void check_sweak_random(Vertex m, int trials) {
  const auto h = range_vertices(0, m);
  for (int t = 0; t < trials; ++t) {
    Rng rng(mix_seed(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t)));
    Board b(shared_complete(m));
    SWeak s(h);
    int moves = 0;
    while (!red_has_pm_of(b, h)) {
      b.claim(Player::Red, s.next(b));
      ++moves;
      if (red_has_pm_of(b, h)) {
        break;
      }
      std::vector<Edge> free;
      for (const auto& e : b.graph().edges()) {
        if (b.is_free(e)) {
          free.push_back(e);
        }
      }
      ASSERT_FALSE(free.empty());
      b.claim(Player::Blue, free[rng.below(free.size())]);
    }
    ASSERT_LE(moves, m / 2 + 1) << "m=" << m << " trial " << t;
  }
}

TEST(SWeak, RandomOpponentUpTo20) {
  for (Vertex m = 6; m <= 20; m += 2) {
    check_sweak_random(m, 100);
  }
}

// Can the first player own a perfect matching of K_m within `moves` of her
// own moves against every reply? Plain minimax over edge owners.
bool maker_forces_pm(Vertex m, int moves) {
  const auto k = complete_graph(m);
  const auto edges = k.edges();
  const auto all = range_vertices(0, m);
  std::vector<int> owner(edges.size(), 0);
  std::function<bool(int)> maker = [&](int left) -> bool {
    if (left == 0) {
      return false;
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (owner[i] != 0) {
        continue;
      }
      owner[i] = 1;
      std::vector<Edge> mine;
      for (std::size_t j = 0; j < edges.size(); ++j) {
        if (owner[j] == 1) {
          mine.push_back(edges[j]);
        }
      }
      bool win = has_perfect_matching_of(mine, all);
      if (!win) {
        win = true;
        bool any = false;
        for (std::size_t j = 0; j < edges.size() && win; ++j) {
          if (owner[j] == 0) {
            any = true;
            owner[j] = 2;
            win = maker(left - 1);
            owner[j] = 0;
          }
        }
        win = win && any;
      }
      owner[i] = 0;
      if (win) {
        return true;
      }
    }
    return false;
  };
  return maker(moves);
}

TEST(SWeak, BareK4CannotBeForcedInThree) {
  // Blue answers ab with cd and then blocks each matching Red starts, so on
  // a bare K_4 Red gets no perfect matching at all. The bound needs room.
  EXPECT_FALSE(maker_forces_pm(4, 3));
  EXPECT_FALSE(maker_forces_pm(4, 6));
  EXPECT_TRUE(maker_forces_pm(6, 4));
}

TEST(SWeak, K4InsideLargerBoardVsRandom) {
  const auto g = shared_complete(32);
  const auto h = range_vertices(0, 4);
  for (int t = 0; t < 200; ++t) {
    Rng rng(mix_seed(4, static_cast<std::uint64_t>(t)));
    Board b(g);
    SWeak s(h);
    int moves = 0;
    while (true) {
      b.claim(Player::Red, s.next(b));
      ++moves;
      if (s.complete(b)) {
        break;
      }
      ASSERT_LT(moves, 3) << "trial " << t;
      b.claim(Player::Blue, uniform_free_edge(b, rng));
    }
    EXPECT_LE(moves, 3);
  }
}

// ---- almost-strong strategy on H = {0..15} inside K_24 ----

class AStrongTest : public ::testing::Test {
 protected:
  std::shared_ptr<const Graph> g = shared_complete(24);
  std::vector<Vertex> h = range_vertices(0, 16);
  Board b{g};

  void red(AStrong& a, Edge expect) {
    const Edge e = a.next(b);
    EXPECT_EQ(e, expect);
    b.claim(Player::Red, e);
  }
  void blue(Edge e) { b.claim(Player::Blue, e); }
  // Red matching (0,1), (2,3), ..., covering 0..2k-1.
  void red_pairs(int k) {
    for (int i = 0; i < k; ++i) {
      b.claim(Player::Red, Edge(2 * i, 2 * i + 1));
    }
  }
};

TEST_F(AStrongTest, StageOneCaseOneTakesEdgeAtX) {
  blue({3, 7});
  AStrong a(h);
  red(a, {0, 3});
  EXPECT_EQ(a.stage(), Stage::II);
  EXPECT_EQ(count_h_distinct(b, h), 1);
}

TEST_F(AStrongTest, StageOneCaseTwoAvoidsTrap) {
  blue({5, 20});
  AStrong a(h);
  red(a, {0, 1});
  ASSERT_TRUE(a.trap());
  EXPECT_EQ(*a.trap(), 5);
  EXPECT_EQ(a.stage(), Stage::II);
}

TEST_F(AStrongTest, StageOneNeedsATouchedVertex) {
  blue({17, 20});
  AStrong a(h);
  EXPECT_THROW(a.next(b), PreconditionViolated);
  EXPECT_THROW(AStrong(h, 30), PreconditionViolated);
}

TEST_F(AStrongTest, StageTwoNoNewDistinct) {
  blue({5, 20});
  AStrong a(h);
  red(a, {0, 1});
  blue({17, 18});
  red(a, {2, 3});
  EXPECT_EQ(count_h_distinct(b, h), 0);
  EXPECT_EQ(*a.trap(), 5);
}

TEST_F(AStrongTest, StageTwoThreeDistinctBackToOne) {
  blue({3, 7});
  AStrong a(h);
  red(a, {0, 3});
  ASSERT_EQ(count_h_distinct(b, h), 1);  // u = 7
  blue({8, 9});
  ASSERT_EQ(count_h_distinct(b, h), 3);
  red(a, {7, 8});
  EXPECT_EQ(count_h_distinct(b, h), 1);
}

TEST_F(AStrongTest, StageTwoTwoDistinctLeavesOne) {
  blue({5, 20});
  AStrong a(h);
  red(a, {0, 1});
  blue({8, 9});
  ASSERT_EQ(count_h_distinct(b, h), 2);
  red(a, {2, 8});
  EXPECT_EQ(count_h_distinct(b, h), 1);
  EXPECT_FALSE(a.trap());  // U is all of H from here on
}

TEST_F(AStrongTest, StageThreeFreeEdge) {
  blue({14, 20});
  red_pairs(7);
  auto a = AStrong::from_stage2(h);
  red(a, {14, 15});
  EXPECT_EQ(a.stage(), Stage::III);
  EXPECT_TRUE(a.complete(b));
}

TEST_F(AStrongTest, StageThreeBlockedGoesRound) {
  red_pairs(7);
  blue({14, 15});
  auto a = AStrong::from_stage2(h);
  red(a, {0, 15});  // yu
  blue({20, 21});
  red(a, {1, 14});  // xv
  EXPECT_TRUE(a.complete(b));
  EXPECT_EQ(a.red_moves(b), 9);
}

TEST_F(AStrongTest, StageThreeDoubleBlock) {
  for (int branch = 0; branch < 2; ++branch) {
    b = Board(g);
    red_pairs(7);
    blue({14, 15});
    auto a = AStrong::from_stage2(h);
    red(a, {0, 15});  // yu
    blue({1, 14});    // xv gone
    red(a, {3, 14});  // xz
    if (branch == 0) {
      blue({2, 15});   // wy gone
      red(a, {1, 2});  // wv
    } else {
      blue({1, 2});     // wv gone
      red(a, {2, 15});  // wy
    }
    EXPECT_TRUE(a.complete(b)) << branch;
    EXPECT_EQ(a.red_moves(b), 10);
  }
}

TEST_F(AStrongTest, CheckpointSwitchesToStageM) {
  red_pairs(6);
  blue({12, 13});
  blue({12, 14});
  auto a = AStrong::from_stage2(h);
  const Edge e = a.next(b);
  EXPECT_EQ(a.stage(), Stage::M);
  EXPECT_EQ(red_cover(b, h).exposed.size(), 4U);  // |I_H| = 16/2 - 4
  EXPECT_TRUE(b.is_free(e));
}

TEST_F(AStrongTest, StageMPlayoutsFinishInBudget) {
  for (int t = 0; t < 200; ++t) {
    Rng rng(mix_seed(16, static_cast<std::uint64_t>(t)));
    b = Board(g);
    red_pairs(6);
    blue({12, 13});
    blue({12, 14});
    auto a = AStrong::from_stage2(h);
    while (!a.complete(b)) {
      b.claim(Player::Red, a.next(b));
      if (a.complete(b)) {
        break;
      }
      b.claim(Player::Blue, uniform_free_edge(b, rng));
    }
    EXPECT_LE(a.red_moves(b), 9) << "trial " << t;
  }
}

TEST_F(AStrongTest, QuietBlueGivesEightMoves) {
  for (int t = 0; t < 50; ++t) {
    Rng rng(mix_seed(8, static_cast<std::uint64_t>(t)));
    b = Board(g);
    const auto x = static_cast<Vertex>(rng.below(16));
    blue({x, static_cast<Vertex>((x + 1 + rng.below(15)) % 16)});
    AStrong a(h);
    while (!a.complete(b)) {
      b.claim(Player::Red, a.next(b));
      if (a.complete(b)) {
        break;
      }
      Edge f;
      do {
        f = uniform_free_edge(b, rng);
      } while (f.v < 16);
      b.claim(Player::Blue, f);
    }
    EXPECT_EQ(a.red_moves(b), 8);
    EXPECT_EQ(wasted_inside(b, Player::Red, h), 0);
  }
}

class TrapBoardPlayouts : public ::testing::TestWithParam<testing::TrapBlue> {};

TEST_P(TrapBoardPlayouts, BoundWasteAndDistinctInvariant) {
  int searched = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto o = testing::trap_board_playout(GetParam(), seed);
    ASSERT_TRUE(o.completed) << "seed " << seed << ": " << o.error;
    EXPECT_LE(o.red_moves, 10) << "seed " << seed;
    EXPECT_LE(o.red_wasted, o.blue_wasted_global) << "seed " << seed;
    if (seed % 2 == 0) {
      // Blue opened inside H, so every trap hit is visible on H itself.
      EXPECT_LE(o.red_wasted, o.blue_wasted_h) << "seed " << seed;
    }
    EXPECT_EQ(o.distinct_violations, 0) << "seed " << seed;
    EXPECT_EQ(o.persistence_violations, 0) << "seed " << seed;
    searched += o.searched ? 1 : 0;
  }
  RecordProperty("searched", searched);
}

TEST_P(TrapBoardPlayouts, BareBoardWasteCountedOnTheBoard) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto o = testing::trap_board_playout(GetParam(), seed, 16, 0);
    ASSERT_TRUE(o.completed) << "seed " << seed << ": " << o.error;
    EXPECT_LE(o.red_moves, 10) << "seed " << seed;
    EXPECT_LE(o.red_wasted, o.blue_wasted_h) << "seed " << seed;
    EXPECT_EQ(o.blue_wasted_h, o.blue_wasted_global) << "seed " << seed;
    EXPECT_EQ(o.distinct_violations + o.persistence_violations, 0) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Opponents, TrapBoardPlayouts,
                         ::testing::Values(testing::TrapBlue::Random, testing::TrapBlue::Blocker,
                                           testing::TrapBlue::FastMatcher, testing::TrapBlue::Probe),
                         [](const auto& info) { return std::string(testing::trap_blue_name(info.param)); });

}  // namespace
}  // namespace pmgame
