#include <gtest/gtest.h>

#include <sstream>

#include "pmgame/pmgame.hpp"

namespace pmgame {
namespace {

GameConfig config(Vertex n, double p, std::uint64_t seed, const std::string& adversary) {
  GameConfig c;
  c.n = n;
  c.p = p;
  c.seed = seed;
  c.adversary = adversary;
  return c;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    out.push_back(l);
  }
  return out;
}

// Re-chains the hashes so only the semantic checks can catch an edit.
std::string rehash(std::vector<nlohmann::json> lines) {
  std::string prev;
  std::string out;
  for (auto& l : lines) {
    l.erase("hash");
    prev = chain_hash(prev, l);
    l["hash"] = prev;
    out += l.dump() + "\n";
  }
  return out;
}

std::vector<nlohmann::json> parse_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  for (const auto& l : split_lines(text)) {
    out.push_back(nlohmann::json::parse(l));
  }
  return out;
}

const Transcript& sample_game() {
  static const Transcript tr = *run_game(config(1024, 0.97, 5, "blocker")).transcript;
  return tr;
}

TEST(Winner, StringRoundTrip) {
  for (auto w : {Winner::Red, Winner::Blue, Winner::Draw, Winner::Forfeit}) {
    EXPECT_EQ(winner_from_string(to_string(w)), w);
  }
  EXPECT_THROW(winner_from_string("nobody"), std::invalid_argument);
}

TEST(Game, RedWinsAndWinnerFiresOnTheFirstMatchingPly) {
  for (const char* kind : {"random", "blocker", "fast_matcher", "vertex_attacker"}) {
    const auto run = run_game(config(1024, 0.97, 2, kind));
    ASSERT_TRUE(run.transcript);
    const auto& tr = *run.transcript;
    EXPECT_EQ(tr.result.winner, Winner::Red) << kind << ": " << tr.result.reason;
    EXPECT_LE(tr.result.red_moves, tr.result.budget);
    // Shadow pass: recompute both matchings from scratch after every ply.
    const auto g = graph_from_header(tr.header);
    std::vector<Edge> red;
    std::vector<Edge> blue;
    int first_pm = -1;
    for (const auto& m : tr.moves) {
      (m.mover == Player::Red ? red : blue).push_back(m.edge);
      ASSERT_TRUE(g->has_edge(m.edge));
      const auto& mine = m.mover == Player::Red ? red : blue;
      if (first_pm < 0 && 2 * max_matching(g->n(), mine).size() == static_cast<std::size_t>(g->n())) {
        first_pm = m.ply;
      }
    }
    EXPECT_EQ(first_pm, tr.moves.back().ply) << kind;
    EXPECT_EQ(tr.moves.back().mover, Player::Red);
    EXPECT_EQ(tr.result.red_moves + tr.result.blue_moves, static_cast<int>(tr.moves.size()));
  }
}

// Blue's fast matcher once seeded an 8-vertex board with a matching and
// won by a single move on these seeds.
TEST(Game, FastMatcherSeedsThatOnceBeatRed) {
  for (std::uint64_t seed : {10, 25}) {
    const auto tr = *run_game(config(1024, 0.97, seed, "fast_matcher")).transcript;
    EXPECT_EQ(tr.result.winner, Winner::Red) << "seed " << seed;
    EXPECT_LE(tr.result.red_wasted_total, tr.result.blue_wasted_total) << "seed " << seed;
  }
}

TEST(Game, TurnOrderAndLegalityAreEnforced) {
  auto pg = std::get<PreparedGame>(prepare_game(config(512, 0.99, 1, "random")));
  Game game(pg.graph, pg.partition, {}, pg.header);
  EXPECT_THROW(game.blue_turn(Edge(0, 1)), IllegalMove);
  game.red_turn();
  const Edge red_edge = game.moves().back().edge;
  EXPECT_THROW(game.blue_turn(red_edge), IllegalMove);
  EXPECT_EQ(game.moves().size(), 1U);
  EXPECT_THROW(game.red_turn(), IllegalMove);
  game.resign(Player::Blue);
  EXPECT_EQ(game.winner(), Winner::Red);
  EXPECT_EQ(game.reason(), "blue resigned");
  EXPECT_THROW(game.resign(Player::Red), std::logic_error);
  EXPECT_TRUE(verify_transcript(transcript_to_string(game.transcript())).clean());
}

TEST(Game, SameSeedSameTranscript) {
  const auto a = run_game(config(1024, 0.99, 11, "vertex_attacker"));
  const auto b = run_game(config(1024, 0.99, 11, "vertex_attacker"));
  EXPECT_EQ(transcript_to_string(*a.transcript), transcript_to_string(*b.transcript));
}

TEST(Game, ScriptedReplayOfBlueReproducesTheGame) {
  const auto& tr = sample_game();
  std::vector<Edge> blue_moves;
  for (const auto& m : tr.moves) {
    if (m.mover == Player::Blue) {
      blue_moves.push_back(m.edge);
    }
  }
  const auto g = graph_from_header(tr.header);
  const auto part = partition_from_json(tr.header.at("partition"));
  ScriptedBlue scripted(blue_moves);
  const auto again = play_game(g, part, {}, scripted, tr.header);
  ASSERT_EQ(again.moves.size(), tr.moves.size());
  for (std::size_t i = 0; i < tr.moves.size(); ++i) {
    EXPECT_EQ(again.moves[i].edge, tr.moves[i].edge);
    EXPECT_EQ(again.moves[i].annotation, tr.moves[i].annotation);
  }
  EXPECT_EQ(again.result, tr.result);
}

TEST(Game, OddVertexCountIsRejected) {
  EXPECT_THROW(prepare_game(config(1023, 0.99, 1, "random")), ConfigurationRejected);
}

TEST(Transcript, LayoutAndHashes) {
  const auto lines = parse_lines(transcript_to_string(sample_game()));
  ASSERT_GE(lines.size(), 3U);
  const auto& h = lines.front();
  EXPECT_EQ(h.at("type"), "header");
  for (const char* key : {"n", "p", "seed", "graph", "partition", "config", "versions"}) {
    EXPECT_TRUE(h.contains(key)) << key;
  }
  EXPECT_EQ(h.at("versions").at("format"), 1);
  EXPECT_EQ(lines.back().at("type"), "result");
  EXPECT_EQ(lines[1].at("mover"), "red");
  EXPECT_TRUE(lines[1].at("annotation").is_object());
  EXPECT_TRUE(lines[2].at("annotation").is_null());
  std::string prev;
  for (auto l : lines) {
    const auto stated = l.at("hash").get<std::string>();
    l.erase("hash");
    EXPECT_EQ(stated, hex64(fnv1a(l.dump(), fnv1a(prev))));
    prev = stated;
  }
}

TEST(VerifyTranscript, CleanOnUntamperedGames) {
  const auto text = transcript_to_string(sample_game());
  const auto rep = verify_transcript(text);
  EXPECT_TRUE(rep.clean()) << report_to_json(rep).dump();
  EXPECT_EQ(rep.plies, static_cast<int>(sample_game().moves.size()));
  EXPECT_EQ(rep.winner, Winner::Red);
}

TEST(VerifyTranscript, ExplicitGraphSource) {
  const auto& tr = sample_game();
  auto header = tr.header;
  const auto g = graph_from_header(header);
  header["graph"] = graph_to_json(*g);
  header["graph"]["kind"] = "explicit";
  const Transcript copy{header, tr.moves, tr.result};
  EXPECT_TRUE(verify_transcript(transcript_to_string(copy)).clean());
}

TEST(VerifyTranscript, DuplicateClaimIsFlagged) {
  auto lines = parse_lines(transcript_to_string(sample_game()));
  // Blue's second move re-claims Red's first edge.
  lines[4]["edge"] = lines[1]["edge"];
  const auto rep = verify_transcript(rehash(lines));
  ASSERT_FALSE(rep.clean());
  EXPECT_NE(rep.issues.front().find("not a free edge"), std::string::npos) << rep.issues.front();
}

TEST(VerifyTranscript, LedgerOffByOneIsFlagged) {
  auto lines = parse_lines(transcript_to_string(sample_game()));
  for (int delta : {1, -1}) {
    auto copy = lines;
    auto& ledger = copy.back()["per_board_ledgers"][0];
    ledger["blue_wasted"] = ledger["blue_wasted"].get<int>() + delta;
    const auto rep = verify_transcript(rehash(copy));
    ASSERT_FALSE(rep.clean());
    EXPECT_EQ(rep.issues.front(), "per-board ledger mismatch");
  }
  auto copy = lines;
  copy.back()["red_wasted_total"] = copy.back()["red_wasted_total"].get<int>() + 1;
  EXPECT_FALSE(verify_transcript(rehash(copy)).clean());
}

TEST(VerifyTranscript, AlteredRedMoveIsFlaggedEvenWhenRehashed) {
  auto lines = parse_lines(transcript_to_string(sample_game()));
  const auto g = graph_from_header(lines.front());
  // Red's third move swapped for some other edge that is free at that point.
  Board b(g);
  for (int i = 1; i < 5; ++i) {
    b.claim(i % 2 == 1 ? Player::Red : Player::Blue, lines[static_cast<std::size_t>(i)]["edge"].get<Edge>());
  }
  const Edge original = lines[5]["edge"].get<Edge>();
  for (const auto& e : g->edges()) {
    if (b.is_free(e) && e != original) {
      lines[5]["edge"] = e;
      break;
    }
  }
  const auto rep = verify_transcript(rehash(lines));
  ASSERT_FALSE(rep.clean());
  EXPECT_NE(rep.issues.front().find("Red's move differs"), std::string::npos);
}

TEST(VerifyTranscript, EverySingleBitFlipInAMoveIsFlagged) {
  const auto text = transcript_to_string(sample_game());
  const auto lines = split_lines(text);
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    auto copy = lines;
    const auto li = 1 + static_cast<std::size_t>(rng.below(copy.size() - 2));
    auto& line = copy[li];
    const auto pos = static_cast<std::size_t>(rng.below(line.size()));
    line[pos] = static_cast<char>(line[pos] ^ (1 << rng.below(7)));
    std::string joined;
    for (const auto& l : copy) {
      joined += l + "\n";
    }
    ASSERT_FALSE(verify_transcript(joined).clean()) << "line " << li << " byte " << pos;
  }
}

TEST(VerifyTranscript, StructuralDamage) {
  const auto lines = split_lines(transcript_to_string(sample_game()));
  EXPECT_FALSE(verify_transcript(std::string("not json\n")).clean());
  EXPECT_FALSE(verify_transcript(lines.front() + "\n").clean());
  std::string truncated;
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    truncated += lines[i] + "\n";
  }
  EXPECT_FALSE(verify_transcript(truncated).clean());
  // Dropping a Blue/Red pair and re-chaining breaks the ply sequence.
  auto parsed = parse_lines(transcript_to_string(sample_game()));
  parsed.erase(parsed.begin() + 3, parsed.begin() + 5);
  EXPECT_FALSE(verify_transcript(rehash(parsed)).clean());
}

TEST(GameResult, JsonRoundTrip) {
  const auto& r = sample_game().result;
  const nlohmann::json j = r;
  EXPECT_EQ(j.get<GameResult>(), r);
  EXPECT_EQ(j.at("winner"), "red");
}

// ---- batches ----

TEST(Batch, EmptyConfigGivesEmptyTable) {
  const auto stats = simulate_batch(nlohmann::json::object().get<BatchConfig>());
  EXPECT_EQ(stats.games(), 0);
  EXPECT_TRUE(stats.ok());
  EXPECT_EQ(stats_to_json(stats).at("games"), 0);
}

TEST(Batch, SparseGraphsAreSkipped) {
  const auto cfg = nlohmann::json::parse(R"({"n":[64],"p":[0.2],"seeds":{"first":1,"count":5},
                                             "adversaries":["random"]})")
                       .get<BatchConfig>();
  const auto stats = simulate_batch(cfg);
  EXPECT_EQ(stats.games(), 5);
  EXPECT_EQ(stats.partitioned(), 0);
  EXPECT_DOUBLE_EQ(stats.partition_rate(), 0.0);
  EXPECT_TRUE(stats.ok());
  for (const auto& r : stats.records) {
    EXPECT_FALSE(r.partition_failure.empty());
  }
}

TEST(Batch, SmallRunIsCleanAndOrdered) {
  BatchConfig cfg;
  cfg.n = {1024};
  cfg.p = {0.99};
  cfg.seeds = {1, 2};
  cfg.adversaries = {"random", "blocker"};
  cfg.threads = 2;
  cfg.verify_transcripts = true;
  const auto stats = simulate_batch(cfg);
  ASSERT_EQ(stats.games(), 4);
  EXPECT_EQ(stats.red_wins(), 4);
  EXPECT_EQ(stats.forfeits(), 0);
  EXPECT_EQ(stats.unclean_transcripts(), 0);
  EXPECT_EQ(stats.partition_verify_failures(), 0);
  EXPECT_EQ(stats.records[0].seed, 1U);
  EXPECT_EQ(stats.records[1].adversary, "blocker");
  EXPECT_EQ(stats.records[3].seed, 2U);
  EXPECT_GE(*stats.min_slack(), 0);
}

// ---- exact solver ----

TEST(Solver, K2RedWinsAtOnce) {
  const auto r = solve_small_strong_game(2);
  EXPECT_EQ(r.value, GameValue::RedWin);
  EXPECT_EQ(r.plies, 1);
  EXPECT_EQ(r.referee_disagreements, 0U);
}

TEST(Solver, K4IsADraw) {
  const auto r = solve_small_strong_game(4);
  EXPECT_EQ(r.value, GameValue::Draw);
  EXPECT_GT(r.terminals_checked, 0U);
  EXPECT_EQ(r.referee_disagreements, 0U);
}

TEST(Solver, K6RedDoesNotLose) {
  const auto r = solve_small_strong_game(6);
  EXPECT_NE(r.value, GameValue::BlueWin);
  EXPECT_GT(r.terminals_checked, 100000U);
  EXPECT_EQ(r.referee_disagreements, 0U);
}

TEST(Solver, RejectsOtherSizesAndTinyBudgets) {
  EXPECT_THROW(SmallGameSolver(8), std::invalid_argument);
  EXPECT_THROW(SmallGameSolver(3), std::invalid_argument);
  SmallGameSolver tiny(6, 100);
  EXPECT_THROW(tiny.solve(), SolverBudgetExceeded);
}

TEST(Solver, TerminalTestMatchesTheReferee) {
  SmallGameSolver s(4);
  // Red 01, 23 is a perfect matching of K_4.
  const auto km = std::make_shared<const Graph>(complete_graph(4));
  const std::vector<Edge> line{Edge(0, 1), Edge(0, 2), Edge(2, 3)};
  EXPECT_EQ(referee_label(km, line), GameValue::RedWin);
  std::uint32_t red = 0;
  std::uint32_t blue = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const auto idx = static_cast<std::uint32_t>(
        std::find(s.edges().begin(), s.edges().end(), line[i]) - s.edges().begin());
    (i % 2 == 0 ? red : blue) |= 1U << idx;
  }
  EXPECT_EQ(s.terminal(red, blue, Player::Red), GameValue::RedWin);
}

}  // namespace
}  // namespace pmgame
