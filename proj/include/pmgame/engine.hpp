#pragma once

#include <chrono>
#include <cstdio>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "pmgame/adversaries.hpp"
#include "pmgame/board.hpp"
#include "pmgame/graph.hpp"
#include "pmgame/matching.hpp"
#include "pmgame/orchestrator.hpp"
#include "pmgame/partition.hpp"

namespace pmgame {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kTranscriptFormat = 1;

enum class Winner { Red, Blue, Draw, Forfeit };

inline std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::Red:
      return "red";
    case Winner::Blue:
      return "blue";
    case Winner::Draw:
      return "draw";
    case Winner::Forfeit:
      return "forfeit";
  }
  return "?";
}

inline Winner winner_from_string(std::string_view s) {
  if (s == "red") {
    return Winner::Red;
  }
  if (s == "blue") {
    return Winner::Blue;
  }
  if (s == "draw") {
    return Winner::Draw;
  }
  if (s == "forfeit") {
    return Winner::Forfeit;
  }
  throw std::invalid_argument("unknown winner '" + std::string(s) + "'");
}

struct GameResult {
  Winner winner = Winner::Draw;
  int red_moves = 0;
  int blue_moves = 0;
  int red_wasted_total = 0;  // e(R) - M(R) over the whole graph
  int blue_wasted_total = 0;
  int budget = 0;  // n/2 + 4t
  int t = 0;
  int fallback_moves = 0;
  std::string reason;
  std::vector<BoardLedger> per_board_ledgers;

  friend bool operator==(const GameResult&, const GameResult&) = default;
};

inline void to_json(nlohmann::json& j, const GameResult& r) {
  j = nlohmann::json{{"winner", to_string(r.winner)},
                     {"red_moves", r.red_moves},
                     {"blue_moves", r.blue_moves},
                     {"red_wasted_total", r.red_wasted_total},
                     {"blue_wasted_total", r.blue_wasted_total},
                     {"budget", r.budget},
                     {"t", r.t},
                     {"fallback_moves", r.fallback_moves},
                     {"reason", r.reason},
                     {"per_board_ledgers", r.per_board_ledgers}};
}
inline void from_json(const nlohmann::json& j, GameResult& r) {
  r.winner = winner_from_string(j.at("winner").get<std::string>());
  r.red_moves = j.at("red_moves").get<int>();
  r.blue_moves = j.at("blue_moves").get<int>();
  r.red_wasted_total = j.at("red_wasted_total").get<int>();
  r.blue_wasted_total = j.at("blue_wasted_total").get<int>();
  r.budget = j.at("budget").get<int>();
  r.t = j.at("t").get<int>();
  r.fallback_moves = j.at("fallback_moves").get<int>();
  r.reason = j.at("reason").get<std::string>();
  r.per_board_ledgers = j.at("per_board_ledgers").get<std::vector<BoardLedger>>();
}

struct TranscriptMove {
  int ply = 0;
  Player mover = Player::Red;
  Edge edge;
  std::optional<Annotation> annotation;  // Red moves only
};

// header: {n, p, seed, graph, partition, config, versions}. `graph` is either
// {"kind":"gnp","seed":...} (regenerated on replay) or {"kind":"explicit",
// "n":..., "edges":[...]}.
struct Transcript {
  nlohmann::json header;
  std::vector<TranscriptMove> moves;
  GameResult result;
};

inline int global_wasted(const Board& b, Player p) {
  return static_cast<int>(b.moves_of(p)) - static_cast<int>(b.matching_size(p));
}

// ---- transcript lines and the hash chain ----

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Each line carries "hash" = fnv1a(previous hash + line dumped without its
// hash field), so editing any line breaks the chain from there on.
inline std::string chain_hash(const std::string& prev, const nlohmann::json& line_without_hash) {
  return hex64(fnv1a(line_without_hash.dump(), fnv1a(prev)));
}

inline nlohmann::json move_line(const TranscriptMove& m) {
  nlohmann::json j{{"type", "move"}, {"ply", m.ply}, {"mover", to_string(m.mover)}, {"edge", m.edge}};
  j["annotation"] = m.annotation ? nlohmann::json(*m.annotation) : nlohmann::json(nullptr);
  return j;
}

inline std::vector<nlohmann::json> transcript_lines(const Transcript& tr) {
  std::vector<nlohmann::json> lines;
  auto header = tr.header;
  header["type"] = "header";
  lines.push_back(std::move(header));
  for (const auto& m : tr.moves) {
    lines.push_back(move_line(m));
  }
  nlohmann::json res = tr.result;
  res["type"] = "result";
  lines.push_back(std::move(res));
  std::string prev;
  for (auto& l : lines) {
    l.erase("hash");
    prev = chain_hash(prev, l);
    l["hash"] = prev;
  }
  return lines;
}

inline void write_transcript(std::ostream& os, const Transcript& tr) {
  for (const auto& l : transcript_lines(tr)) {
    os << l.dump() << '\n';
  }
}

inline std::string transcript_to_string(const Transcript& tr) {
  std::ostringstream os;
  write_transcript(os, tr);
  return os.str();
}

// ---- game setup ----

struct GameConfig {
  Vertex n = 1024;
  double p = 0.99;
  std::uint64_t seed = 1;
  std::string adversary = "random";
  PartitionConfig partition;
  RedConfig red;
};

inline void to_json(nlohmann::json& j, const GameConfig& c) {
  j = nlohmann::json{{"n", c.n},
                     {"p", c.p},
                     {"seed", c.seed},
                     {"adversary", c.adversary},
                     {"partition", c.partition},
                     {"red", c.red}};
}
inline void from_json(const nlohmann::json& j, GameConfig& c) {
  c.n = j.value("n", c.n);
  c.p = j.value("p", c.p);
  c.seed = j.value("seed", c.seed);
  c.adversary = j.value("adversary", c.adversary);
  if (j.contains("partition")) {
    c.partition = j.at("partition").get<PartitionConfig>();
  }
  if (j.contains("red")) {
    c.red = j.at("red").get<RedConfig>();
  }
}

// Sub-seeds derived from the game seed.
inline std::uint64_t graph_seed(std::uint64_t seed) { return mix_seed(seed, 0); }
inline std::uint64_t partition_seed(std::uint64_t seed) { return mix_seed(seed, 1); }
inline std::uint64_t adversary_seed(std::uint64_t seed) { return mix_seed(seed, 2); }

struct PreparedGame {
  std::shared_ptr<const Graph> graph;
  Partition partition;
  nlohmann::json header;
};

inline nlohmann::json versions_json() { return {{"pmgame", kVersion}, {"format", kTranscriptFormat}}; }

inline nlohmann::json make_header(const GameConfig& cfg, const nlohmann::json& graph_source, const Partition& part,
                                  const nlohmann::json& adversary) {
  return nlohmann::json{{"n", cfg.n},
                        {"p", cfg.p},
                        {"seed", cfg.seed},
                        {"graph", graph_source},
                        {"partition", partition_to_json(part)},
                        {"config", {{"partition", cfg.partition}, {"red", cfg.red}, {"adversary", adversary}}},
                        {"versions", versions_json()}};
}

// Samples G(n,p) and partitions it. A failed partition is returned as such;
// the caller decides whether that skips the game.
inline std::variant<PreparedGame, PartitionFailure> prepare_game(const GameConfig& cfg) {
  if (cfg.n % 2 != 0) {
    throw ConfigurationRejected("n must be even");
  }
  auto g = std::make_shared<const Graph>(sample_gnp(cfg.n, cfg.p, graph_seed(cfg.seed)));
  auto part = cyclic_partition(*g, cfg.partition, partition_seed(cfg.seed));
  if (auto* f = std::get_if<PartitionFailure>(&part)) {
    return *f;
  }
  PreparedGame pg;
  pg.graph = std::move(g);
  pg.partition = std::get<Partition>(std::move(part));
  pg.header = make_header(cfg, {{"kind", "gnp"}, {"seed", graph_seed(cfg.seed)}}, pg.partition, nullptr);
  return pg;
}

// ---- the referee ----

// One game in progress. Red moves first; after every claim the mover's
// perfect matching is checked, and the game ends at the first one, at board
// exhaustion, or when Red forfeits.
class Game {
 public:
  Game(std::shared_ptr<const Graph> g, const Partition& part, RedConfig red, nlohmann::json header)
      : board_(g), red_(*g, part, red), header_(std::move(header)) {
    parts_ = red_.parts();
  }

  const Board& board() const { return board_; }
  const RedOrchestrator& red() const { return red_; }
  const nlohmann::json& header() const { return header_; }
  bool over() const { return winner_.has_value(); }
  std::optional<Winner> winner() const { return winner_; }
  Player to_move() const { return board_.claimed_count() % 2 == 0 ? Player::Red : Player::Blue; }
  const std::vector<TranscriptMove>& moves() const { return moves_; }
  const std::string& reason() const { return reason_; }

  AdversaryContext context() const {
    AdversaryContext ctx;
    ctx.boards = &parts_;
    ctx.focus = red_.focus();
    if (ctx.focus >= 0) {
      ctx.target = parts_[static_cast<std::size_t>(ctx.focus)];
    }
    return ctx;
  }

  // Plays Red's move. A forfeit ends the game; it is a result, not an error.
  void red_turn() {
    require(Player::Red);
    Edge e;
    try {
      e = board_.claimed_count() == 0 ? red_.first_move(board_) : red_.respond(board_, moves_.back().edge);
    } catch (const Forfeit& f) {
      finish(Winner::Forfeit, f.what());
      return;
    } catch (const StrategyError& f) {
      finish(Winner::Forfeit, f.what());
      return;
    }
    if (!board_.is_free(e)) {
      finish(Winner::Forfeit, "strategy chose a claimed edge");
      return;
    }
    apply(Player::Red, e, red_.last_annotation());
    if (red_.last_annotation().imported) {
      parts_ = red_.parts();
    }
  }

  // Claims Blue's edge. Throws IllegalMove (state unchanged) if it is not free.
  void blue_turn(const Edge& e) {
    require(Player::Blue);
    if (!board_.is_free(e)) {
      throw IllegalMove("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not a free edge");
    }
    apply(Player::Blue, e, std::nullopt);
  }

  void play_blue(Adversary& blue) {
    Edge e;
    try {
      e = blue.next(board_, context());
    } catch (const NoFreeEdge&) {
      finish(Winner::Draw, "");
      return;
    }
    blue_turn(e);
  }

  // The remote side may give up; the game ends with the other side winning.
  void resign(Player p) {
    if (over()) {
      throw std::logic_error("game is over");
    }
    finish(p == Player::Red ? Winner::Blue : Winner::Red, std::string(to_string(p)) + " resigned");
  }

  GameResult result() const {
    GameResult r;
    r.winner = winner_.value_or(Winner::Draw);
    r.red_moves = static_cast<int>(board_.moves_of(Player::Red));
    r.blue_moves = static_cast<int>(board_.moves_of(Player::Blue));
    r.red_wasted_total = global_wasted(board_, Player::Red);
    r.blue_wasted_total = global_wasted(board_, Player::Blue);
    r.budget = red_.budget();
    r.t = red_.t();
    r.fallback_moves = red_.total_fallback_moves();
    r.reason = reason_;
    r.per_board_ledgers = red_.ledgers(board_);
    return r;
  }

  Transcript transcript() const { return Transcript{header_, moves_, result()}; }

 private:
  void require(Player p) const {
    if (over()) {
      throw std::logic_error("game is over");
    }
    if (to_move() != p) {
      throw IllegalMove(std::string("it is ") + std::string(to_string(to_move())) + "'s turn");
    }
  }

  void apply(Player p, const Edge& e, std::optional<Annotation> ann) {
    board_.claim(p, e);
    moves_.push_back({static_cast<int>(board_.claimed_count()), p, e, std::move(ann)});
    if (board_.has_perfect_matching(p)) {
      finish(p == Player::Red ? Winner::Red : Winner::Blue, "");
    } else if (board_.free_count() == 0) {
      finish(Winner::Draw, "");
    }
  }

  void finish(Winner w, std::string reason) {
    winner_ = w;
    reason_ = std::move(reason);
  }

  Board board_;
  RedOrchestrator red_;
  nlohmann::json header_;
  std::vector<std::vector<Vertex>> parts_;
  std::vector<TranscriptMove> moves_;
  std::optional<Winner> winner_;
  std::string reason_;
};

inline Transcript play_game(std::shared_ptr<const Graph> g, const Partition& part, const RedConfig& red,
                            Adversary& blue, nlohmann::json header) {
  header["config"]["adversary"] = blue.describe();
  Game game(std::move(g), part, red, std::move(header));
  while (!game.over()) {
    if (game.to_move() == Player::Red) {
      game.red_turn();
    } else {
      game.play_blue(blue);
    }
  }
  return game.transcript();
}

// Samples, partitions and plays one game; nullopt holds the partition failure.
struct GameRun {
  std::optional<Transcript> transcript;
  std::optional<PartitionFailure> partition_failure;
  double seconds = 0;
};

inline GameRun run_game(const GameConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  GameRun run;
  auto prepared = prepare_game(cfg);
  if (auto* f = std::get_if<PartitionFailure>(&prepared)) {
    run.partition_failure = *f;
  } else {
    auto& pg = std::get<PreparedGame>(prepared);
    auto blue = make_adversary(cfg.adversary, adversary_seed(cfg.seed));
    run.transcript = play_game(pg.graph, pg.partition, cfg.red, *blue, pg.header);
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

// ---- verification ----

struct TranscriptReport {
  std::vector<std::string> issues;
  int plies = 0;
  std::optional<Winner> winner;

  bool clean() const { return issues.empty(); }
  void flag(std::string s) { issues.push_back(std::move(s)); }
};

inline nlohmann::json report_to_json(const TranscriptReport& r) {
  return {{"clean", r.clean()},
          {"plies", r.plies},
          {"winner", r.winner ? nlohmann::json(to_string(*r.winner)) : nlohmann::json(nullptr)},
          {"issues", r.issues}};
}

inline std::shared_ptr<const Graph> graph_from_header(const nlohmann::json& h) {
  const auto& src = h.at("graph");
  const auto kind = src.at("kind").get<std::string>();
  if (kind == "gnp") {
    return std::make_shared<const Graph>(
        sample_gnp(h.at("n").get<Vertex>(), h.at("p").get<double>(), src.at("seed").get<std::uint64_t>()));
  }
  if (kind == "explicit") {
    return std::make_shared<const Graph>(graph_from_json(src));
  }
  throw std::invalid_argument("unknown graph kind '" + kind + "'");
}

// Replays a JSON-lines transcript: hash chain, structure, legality and
// alternation, Red's moves and annotations recomputed by a fresh
// orchestrator, and the result recomputed from the replayed board.
inline TranscriptReport verify_transcript(std::istream& in) {
  TranscriptReport rep;
  std::vector<nlohmann::json> lines;
  std::string raw;
  std::string prev;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (raw.empty()) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const std::exception& e) {
      rep.flag("line " + std::to_string(lineno) + ": malformed JSON");
      return rep;
    }
    if (!j.is_object() || !j.contains("hash") || !j.at("hash").is_string()) {
      rep.flag("line " + std::to_string(lineno) + ": missing hash");
      return rep;
    }
    const auto stated = j.at("hash").get<std::string>();
    j.erase("hash");
    const auto expect = chain_hash(prev, j);
    if (stated != expect) {
      rep.flag("line " + std::to_string(lineno) + ": hash chain broken");
    }
    prev = stated;
    lines.push_back(std::move(j));
  }
  if (lines.size() < 2 || lines.front().value("type", "") != "header" || lines.back().value("type", "") != "result") {
    rep.flag("transcript must start with a header line and end with a result line");
    return rep;
  }
  try {
    const auto& header = lines.front();
    auto g = graph_from_header(header);
    const auto part = partition_from_json(header.at("partition"));
    const auto red_cfg = header.at("config").at("red").get<RedConfig>();
    Game game(g, part, red_cfg, header);
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
      const auto& l = lines[i];
      const std::string at = "ply " + std::to_string(i);
      if (l.value("type", "") != "move") {
        rep.flag(at + ": expected a move line");
        return rep;
      }
      if (l.at("ply").get<int>() != static_cast<int>(i)) {
        rep.flag(at + ": ply number " + l.at("ply").dump());
      }
      if (game.over()) {
        rep.flag(at + ": move after the game ended");
        return rep;
      }
      const Player mover = player_from_string(l.at("mover").get<std::string>());
      const Edge e = l.at("edge").get<Edge>();
      if (mover != game.to_move()) {
        rep.flag(at + ": turn order violated");
        return rep;
      }
      if (!game.board().is_free(e)) {
        rep.flag(at + ": edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not a free edge");
        return rep;
      }
      if (mover == Player::Blue) {
        if (!l.at("annotation").is_null()) {
          rep.flag(at + ": Blue move carries an annotation");
        }
        game.blue_turn(e);
        continue;
      }
      game.red_turn();
      if (game.moves().size() != i) {
        rep.flag(at + ": Red forfeits on replay (" + game.reason() + ")");
        return rep;
      }
      const auto& replayed = game.moves().back();
      if (replayed.edge != e) {
        rep.flag(at + ": Red's move differs on replay");
        return rep;
      }
      if (l.at("annotation").is_null() || nlohmann::json(*replayed.annotation) != l.at("annotation")) {
        rep.flag(at + ": annotation mismatch");
      }
    }
    rep.plies = static_cast<int>(lines.size()) - 2;
    if (!game.over()) {
      // A game stops early on a resignation, or on a Red forfeit that the
      // replay reproduces.
      const auto reason = lines.back().value("reason", "");
      if (reason == "blue resigned" || reason == "red resigned") {
        game.resign(reason == "blue resigned" ? Player::Blue : Player::Red);
      } else if (game.to_move() == Player::Red) {
        game.red_turn();
      }
      if (!game.over()) {
        rep.flag("transcript ends before the game is over");
        return rep;
      }
    }
    auto stated = lines.back();
    stated.erase("type");
    const GameResult recomputed = game.result();
    rep.winner = recomputed.winner;
    GameResult given;
    try {
      given = stated.get<GameResult>();
    } catch (const std::exception& e) {
      rep.flag(std::string("result line malformed: ") + e.what());
      return rep;
    }
    if (given.winner != recomputed.winner) {
      rep.flag("winner mismatch");
    }
    if (given.red_moves != recomputed.red_moves || given.blue_moves != recomputed.blue_moves) {
      rep.flag("move counts mismatch");
    }
    if (given.red_wasted_total != recomputed.red_wasted_total ||
        given.blue_wasted_total != recomputed.blue_wasted_total) {
      rep.flag("wasted totals mismatch");
    }
    if (given.per_board_ledgers != recomputed.per_board_ledgers) {
      rep.flag("per-board ledger mismatch");
    }
    if (given != recomputed && rep.clean()) {
      rep.flag("result mismatch");
    }
    // independent recount of the final matchings
    const auto& b = game.board();
    for (Player p : {Player::Red, Player::Blue}) {
      const auto m = max_matching(b.n(), b.edges_of(p));
      if (m.size() != b.matching_size(p)) {
        rep.flag("matching oracle disagrees with the board");
      }
    }
  } catch (const std::exception& e) {
    rep.flag(std::string("replay failed: ") + e.what());
  }
  return rep;
}

inline TranscriptReport verify_transcript(const std::string& text) {
  std::istringstream in(text);
  return verify_transcript(in);
}

}  // namespace pmgame
