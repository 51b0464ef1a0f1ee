// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// line fails. `acceptance --seeds N` widens the game batch.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <unistd.h>

#include "CLI11.hpp"
#include "pmgame/pmgame.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace pmgame;
using testing::TrapBlue;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- game batch: criteria 1, 2, 6 and the clean half of 9 ----

struct BatchOutcome {
  BatchStats stats;
  std::vector<fs::path> small_transcripts;  // n = 1024, used for mutation checks
};

BatchOutcome game_batch(int seeds, const fs::path& dir) {
  BatchConfig cfg;
  cfg.n = {1024, 2048, 4096};
  cfg.p = {0.97, 0.99};
  cfg.adversaries = {"random", "blocker", "fast_matcher", "vertex_attacker"};
  for (int s = 1; s <= seeds; ++s) {
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  cfg.clique_size = 16;
  cfg.threads = 0;
  cfg.verify_partitions = true;
  cfg.verify_transcripts = true;
  cfg.transcript_dir = dir.string();
  BatchOutcome out{simulate_batch(cfg), {}};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().starts_with("game_n1024_")) {
      out.small_transcripts.push_back(entry.path());
    }
  }
  std::sort(out.small_transcripts.begin(), out.small_transcripts.end());
  return out;
}

void check_batch(const BatchStats& st) {
  const auto& recs = st.records;
  int over_budget = 0;
  int won = 0;
  for (const auto& r : recs) {
    if (r.winner == Winner::Red) {
      ++won;
      over_budget += r.red_moves > r.budget ? 1 : 0;
    }
  }
  report(1, "end-to-end win", st.games() >= 200 && st.partition_rate() >= 0.95 && st.ok() && st.forfeits() == 0 &&
                                  st.seconds <= 600,
         fmt("%d games, partition rate %.3f, Red won %d/%d partitioned, %d forfeits, %d fallback moves, %.1fs",
             st.games(), st.partition_rate(), st.red_wins(), st.partitioned(), st.forfeits(), st.fallback_moves(),
             st.seconds));
  const auto slack = st.min_slack();
  report(2, "move budget n/2+4t", won > 0 && over_budget == 0,
         fmt("%d of %d won games over budget, min slack %d", over_budget, won, slack ? *slack : -1));
}

void check_partitions(const BatchStats& st) {
  int verified = 0;
  for (const auto& r : st.records) {
    verified += r.partition_verified.has_value() ? 1 : 0;
  }
  report(6, "partition correctness", verified == st.partitioned() && st.partition_verify_failures() == 0,
         fmt("%d partitions verified, %d failed", verified, st.partition_verify_failures()));
}

// ---- criteria 3 and 4: trap-board playouts ----

void check_trap_boards() {
  const TrapBlue kinds[] = {TrapBlue::Random, TrapBlue::Blocker, TrapBlue::FastMatcher, TrapBlue::Probe};
  int playouts = 0;
  int incomplete = 0;
  int over_moves = 0;
  int waste_bad = 0;
  int embedded_h_only_bad = 0;
  int worst = 0;
  int distinct = 0;
  int persistence = 0;
  for (const auto kind : kinds) {
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
      // bare K_16 boards, waste counted on the board
      for (const Vertex outside : {Vertex{0}, Vertex{8}}) {
        const auto o = testing::trap_board_playout(kind, seed, 16, outside);
        ++playouts;
        incomplete += o.completed ? 0 : 1;
        over_moves += o.red_moves > 10 ? 1 : 0;
        worst = std::max(worst, o.red_moves);
        // Inside K_24 Blue's opening edge may leave the board, so the trap
        // hit is only visible in Blue's whole graph.
        const int blue_waste = outside == 0 ? o.blue_wasted_h : o.blue_wasted_global;
        waste_bad += o.red_wasted > blue_waste ? 1 : 0;
        embedded_h_only_bad += outside != 0 && o.red_wasted > o.blue_wasted_h ? 1 : 0;
        distinct += o.distinct_violations;
        persistence += o.persistence_violations;
      }
    }
  }
  report(3, "trap-board bound", playouts >= 500 && incomplete == 0 && over_moves == 0 && waste_bad == 0,
         fmt("%d playouts (random, blocker, fast_matcher, double-block probe), worst %d moves, %d incomplete, "
             "%d waste violations; embedded boards with Blue waste counted on the board only: %d exceed",
             playouts, worst, incomplete, waste_bad, embedded_h_only_bad));
  report(4, "H-distinct invariant", distinct == 0 && persistence == 0,
         fmt("%d matching/count violations, %d persistence violations", distinct, persistence));
}

// ---- criterion 5 ----

void check_sweak() {
  int lines = 0;
  int bad = 0;
  int worst_excess = -100;
  for (Vertex m = 6; m <= 20; m += 2) {
    const auto h = testing::range_vertices(0, m);
    for (int t = 0; t < 200; ++t) {
      Rng rng(mix_seed(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t)));
      Board b(testing::shared_complete(m));
      SWeak s(h);
      int moves = 0;
      while (true) {
        b.claim(Player::Red, s.next(b));
        ++moves;
        if (red_has_pm_of(b, h) || moves > m) {
          break;
        }
        b.claim(Player::Blue, uniform_free_edge(b, rng));
      }
      ++lines;
      const bool ok = red_has_pm_of(b, h) && moves <= m / 2 + 1;
      bad += ok ? 0 : 1;
      worst_excess = std::max(worst_excess, moves - (m / 2 + 1));
    }
  }
  std::uint64_t tree_lines = 0;
  bool tree_ok = true;
  for (const Vertex m : {Vertex{6}, Vertex{8}}) {
    const auto h = testing::range_vertices(0, m);
    Board b(testing::shared_complete(m));
    std::unordered_set<std::uint64_t> seen;
    testing::TreeStats st;
    testing::exhaustive_blue_tree(
        b, 0, m / 2 + 1, [&](const Board& x) { return testing::sweak_move(x, h); },
        [&](const Board& x) { return red_has_pm_of(x, h); }, seen, st);
    tree_ok = tree_ok && st.ok && st.worst_moves <= m / 2 + 1;
    tree_lines += st.lines_completed;
  }
  report(5, "weak-game bound m/2+1", bad == 0 && tree_ok,
         fmt("%d random lines on K_6..K_20 (%d over, worst excess %d), exhaustive K_6/K_8 %s over %llu lines",
             lines, bad, worst_excess, tree_ok ? "ok" : "FAILED", static_cast<unsigned long long>(tree_lines)));
}

// ---- criterion 7 ----

void check_matching() {
  int cases = 0;
  int agree = 0;
  auto compare = [&](Vertex n, const std::vector<Edge>& e, int expected) {
    ++cases;
    const auto m = max_matching(n, e);
    agree += static_cast<int>(m.size()) == expected && m.is_valid() ? 1 : 0;
  };
  Rng rng(20240);
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<Vertex>(1 + rng.below(10));
    const double p = static_cast<double>(rng.below(1001)) / 1000.0;
    const auto g = sample_gnp(n, std::max(p, 1e-3), rng());
    compare(n, g.edges(), testing::brute_matching_size(n, g.edges()));
  }
  for (Vertex n = 1; n <= 10; ++n) {
    std::vector<Edge> path;
    for (Vertex i = 0; i + 1 < n; ++i) {
      path.emplace_back(i, i + 1);
    }
    compare(n, path, n / 2);
  }
  compare(4, complete_graph(4).edges(), 2);
  std::vector<Edge> petersen;
  for (int i = 0; i < 5; ++i) {
    petersen.emplace_back(i, (i + 1) % 5);
    petersen.emplace_back(5 + i, 5 + (i + 2) % 5);
    petersen.emplace_back(i, i + 5);
  }
  compare(10, petersen, 5);
  report(7, "matching oracle", agree == cases, fmt("%d/%d instances agree (1000 random, n <= 10, plus named)", agree, cases));
}

// ---- criterion 8 ----

void check_solver() {
  std::string detail;
  bool ok = true;
  for (const Vertex m : {Vertex{2}, Vertex{4}, Vertex{6}}) {
    const auto r = solve_small_strong_game(m);
    ok = ok && r.value != GameValue::BlueWin && r.referee_disagreements == 0 && r.terminals_checked > 0;
    detail += fmt("K_%d %s (%llu terminals, %llu disagreements), ", m, std::string(to_string(r.value)).c_str(),
                  static_cast<unsigned long long>(r.terminals_checked),
                  static_cast<unsigned long long>(r.referee_disagreements));
  }
  detail.resize(detail.size() - 2);
  report(8, "small-board solver", ok, detail);
}

// ---- criterion 9 ----

void check_replay(const BatchStats& st, const std::vector<fs::path>& small) {
  int checked = 0;
  for (const auto& r : st.records) {
    checked += r.transcript_clean.has_value() ? 1 : 0;
  }
  Rng rng(77);
  int mutations = 0;
  int caught = 0;
  for (const auto& path : small) {
    const auto text = read_file(path);
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
      lines.push_back(l);
    }
    if (lines.size() < 3) {
      continue;
    }
    for (int k = 0; k < 4; ++k) {
      auto copy = lines;
      auto& line = copy[1 + rng.below(copy.size() - 2)];
      const auto pos = rng.below(line.size());
      line[pos] = static_cast<char>(line[pos] ^ (1 << rng.below(7)));
      std::string joined;
      for (const auto& l : copy) {
        joined += l + "\n";
      }
      ++mutations;
      caught += verify_transcript(joined).clean() ? 0 : 1;
    }
  }
  report(9, "replay determinism",
         checked == st.partitioned() && st.unclean_transcripts() == 0 && mutations > 0 && caught == mutations,
         fmt("%d transcripts replayed, %d unclean; %d/%d single-bit move mutations flagged", checked,
             st.unclean_transcripts(), caught, mutations));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance run");
  int seeds = 10;
  app.add_option("--seeds", seeds, "seeds per (n, p, adversary) cell")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const auto dir = fs::temp_directory_path() / ("pmgame_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto batch = game_batch(seeds, dir);
  check_batch(batch.stats);
  check_trap_boards();
  check_sweak();
  check_partitions(batch.stats);
  check_matching();
  check_solver();
  check_replay(batch.stats, batch.small_transcripts);
  fs::remove_all(dir);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
