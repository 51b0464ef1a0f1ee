#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "pmgame/engine.hpp"

namespace pmgame {

// Interactive games in which the remote party plays Blue. Every request is a
// JSON object with a "type"; every reply is one JSON object:
//
//   new_game  {n, p, seed, include_graph?}          -> state (Red has moved)
//   move      {session, edge:[u,v]}                  -> state | game_over | error
//   state     {session}                              -> state | game_over
//   what_if   {session, edge:[u,v]}                  -> what_if
//   snapshot  {session, ply}                         -> snapshot
//   resign    {session}                              -> game_over
//
// Errors are {"type":"error","code":...,"message":...}; codes are
// BAD_REQUEST, UNKNOWN_SESSION, ILLEGAL_MOVE, NOT_YOUR_TURN, GAME_OVER,
// PARTITION_FAILED, CONFIG_REJECTED and SESSION_ABORTED. An illegal move
// leaves the game unchanged; after max_violations of them the session is
// dropped.
struct SessionLimits {
  Vertex max_n = 4096;
  int max_violations = 5;
  std::size_t max_sessions = 64;
};

class SessionManager {
 public:
  explicit SessionManager(SessionLimits limits = {}) : limits_(limits) {}

  nlohmann::json handle(const nlohmann::json& msg) {
    try {
      if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
        return error("BAD_REQUEST", "message must be an object with a string \"type\"");
      }
      const auto type = msg.at("type").get<std::string>();
      if (type == "new_game") {
        return new_game(msg);
      }
      auto s = find(msg);
      if (!s) {
        return error("UNKNOWN_SESSION", "no session " + msg.value("session", std::string("<missing>")));
      }
      std::lock_guard lock(s->mu);
      struct MarkFinished {
        Session& s;
        ~MarkFinished() { s.finished = s.game->over(); }
      } mark{*s};
      if (type == "move") {
        return move(*s, msg);
      }
      if (type == "state") {
        return s->game->over() ? game_over(*s) : state(*s, false);
      }
      if (type == "what_if") {
        return what_if(*s, msg);
      }
      if (type == "snapshot") {
        return snapshot(*s, msg);
      }
      if (type == "resign") {
        if (!s->game->over()) {
          s->game->resign(Player::Blue);
        }
        return game_over(*s);
      }
      return error("BAD_REQUEST", "unknown message type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
      return error("BAD_REQUEST", e.what());
    }
  }

  std::size_t session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

 private:
  struct Session {
    std::string id;
    std::mutex mu;
    std::unique_ptr<Game> game;
    int violations = 0;
    std::atomic<bool> finished{false};
  };

  static nlohmann::json error(const std::string& code, const std::string& message) {
    return {{"type", "error"}, {"code", code}, {"message", message}};
  }

  std::shared_ptr<Session> find(const nlohmann::json& msg) {
    if (!msg.contains("session") || !msg.at("session").is_string()) {
      return nullptr;
    }
    std::lock_guard lock(mu_);
    auto it = sessions_.find(msg.at("session").get<std::string>());
    return it == sessions_.end() ? nullptr : it->second;
  }

  nlohmann::json new_game(const nlohmann::json& msg) {
    GameConfig cfg;
    cfg.n = msg.value("n", Vertex{512});
    cfg.p = msg.value("p", 0.99);
    cfg.seed = msg.value("seed", std::uint64_t{1});
    if (msg.contains("clique_size")) {
      cfg.partition.clique_size = msg.at("clique_size").get<int>();
    }
    if (cfg.n < 2 || cfg.n > limits_.max_n) {
      return error("CONFIG_REJECTED", "n must be between 2 and " + std::to_string(limits_.max_n));
    }
    if (!(cfg.p > 0.0 && cfg.p <= 1.0)) {
      return error("CONFIG_REJECTED", "p must lie in (0, 1]");
    }
    std::variant<PreparedGame, PartitionFailure> prepared;
    try {
      prepared = prepare_game(cfg);
    } catch (const std::exception& e) {
      return error("CONFIG_REJECTED", e.what());
    }
    if (auto* f = std::get_if<PartitionFailure>(&prepared)) {
      return {{"type", "error"}, {"code", "PARTITION_FAILED"}, {"message", f->detail}, {"stage", f->stage}};
    }
    auto& pg = std::get<PreparedGame>(prepared);
    auto s = std::make_shared<Session>();
    {
      std::lock_guard lock(mu_);
      s->id = "s" + std::to_string(++next_id_);
    }
    pg.header["config"]["adversary"] = RemoteBlue(s->id).describe();
    try {
      s->game = std::make_unique<Game>(pg.graph, pg.partition, cfg.red, pg.header);
    } catch (const ConfigurationRejected& e) {
      return error("CONFIG_REJECTED", e.what());
    }
    s->game->red_turn();
    s->finished = s->game->over();
    auto reply = s->finished ? game_over(*s) : state(*s, msg.value("include_graph", true));
    std::lock_guard lock(mu_);
    if (sessions_.size() >= limits_.max_sessions) {
      // evict the oldest finished session, if any
      for (auto it = sessions_.begin(); it != sessions_.end(); ++it) {
        if (it->second->finished) {
          sessions_.erase(it);
          break;
        }
      }
      if (sessions_.size() >= limits_.max_sessions) {
        return error("CONFIG_REJECTED", "too many open sessions");
      }
    }
    sessions_[s->id] = s;
    return reply;
  }

  void drop(const std::string& id) {
    std::lock_guard lock(mu_);
    sessions_.erase(id);
  }

  nlohmann::json violation(Session& s, const std::string& code, const std::string& message) {
    if (++s.violations >= limits_.max_violations) {
      drop(s.id);
      return {{"type", "error"},
              {"code", "SESSION_ABORTED"},
              {"message", "session aborted after " + std::to_string(s.violations) + " protocol violations"},
              {"last", {{"code", code}, {"message", message}}}};
    }
    auto e = error(code, message);
    e["violations"] = s.violations;
    return e;
  }

  nlohmann::json move(Session& s, const nlohmann::json& msg) {
    auto& g = *s.game;
    if (g.over()) {
      return violation(s, "GAME_OVER", "the game is over");
    }
    if (g.to_move() != Player::Blue) {
      return violation(s, "NOT_YOUR_TURN", "Red is to move");
    }
    Edge e;
    try {
      e = msg.at("edge").get<Edge>();
    } catch (const std::exception& ex) {
      return violation(s, "BAD_REQUEST", std::string("bad edge: ") + ex.what());
    }
    if (e.u < 0 || e.v >= g.board().n() || !g.board().is_free(e)) {
      return violation(s, "ILLEGAL_MOVE",
                       "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not a free edge of G");
    }
    g.blue_turn(e);
    if (!g.over()) {
      g.red_turn();
    }
    return g.over() ? game_over(s) : state(s, false);
  }

  static nlohmann::json claimed_edges(const Board& b, std::size_t plies) {
    auto arr = nlohmann::json::array();
    const auto& h = b.history();
    for (std::size_t i = 0; i < std::min(plies, h.size()); ++i) {
      arr.push_back({{"edge", h[i].edge}, {"owner", to_string(h[i].mover)}});
    }
    return arr;
  }

  static nlohmann::json state(const Session& s, bool include_graph) {
    const auto& g = *s.game;
    const auto& b = g.board();
    nlohmann::json j{{"type", "state"},
                     {"session", s.id},
                     {"ply", b.claimed_count()},
                     {"to_move", g.over() ? "none" : std::string(to_string(g.to_move()))},
                     {"partition", g.red().parts()},
                     {"claimed", claimed_edges(b, b.claimed_count())},
                     {"red", g.red().snapshot()},
                     {"ledgers", g.red().ledgers(b)},
                     {"totals",
                      {{"red_moves", b.moves_of(Player::Red)},
                       {"blue_moves", b.moves_of(Player::Blue)},
                       {"red_wasted", global_wasted(b, Player::Red)},
                       {"blue_wasted", global_wasted(b, Player::Blue)},
                       {"red_matching", b.matching_size(Player::Red)},
                       {"blue_matching", b.matching_size(Player::Blue)},
                       {"budget", g.red().budget()}}}};
    if (!g.moves().empty()) {
      const auto* last_red = &g.moves().back();
      for (auto it = g.moves().rbegin(); it != g.moves().rend(); ++it) {
        if (it->mover == Player::Red) {
          last_red = &*it;
          break;
        }
      }
      if (last_red->mover == Player::Red) {
        j["last_red_move"] = move_line(*last_red);
      }
    }
    if (include_graph) {
      j["graph"] = graph_to_json(b.graph());
    }
    return j;
  }

  static nlohmann::json game_over(const Session& s) {
    const auto tr = s.game->transcript();
    auto lines = nlohmann::json::array();
    for (auto& l : transcript_lines(tr)) {
      lines.push_back(std::move(l));
    }
    auto st = state(s, false);
    return {{"type", "game_over"}, {"session", s.id}, {"result", tr.result}, {"state", st}, {"transcript", lines}};
  }

  // Would Blue's claim of this edge be wasted? Globally: it does not grow
  // Blue's maximum matching. On its board: it raises e(B_i) - M(B_i).
  static nlohmann::json what_if(const Session& s, const nlohmann::json& msg) {
    const auto& g = *s.game;
    const Edge e = msg.at("edge").get<Edge>();
    nlohmann::json j{{"type", "what_if"}, {"session", s.id}, {"edge", e}};
    const auto& b = g.board();
    const bool legal = e.u >= 0 && e.v < b.n() && b.is_free(e);
    j["legal"] = legal;
    if (!legal) {
      return j;
    }
    Board trial = b;
    const bool grew = trial.claim(Player::Blue, e);
    j["wasted"] = !grew;
    const int bu = g.red().board_of(e.u);
    if (bu >= 0 && bu == g.red().board_of(e.v)) {
      const auto& vs = g.red().boards()[static_cast<std::size_t>(bu)].vertices;
      j["board"] = bu + 1;
      j["board_wasted"] = wasted_inside(trial, Player::Blue, vs) > wasted_inside(b, Player::Blue, vs);
    } else {
      j["board"] = nullptr;
      j["board_wasted"] = false;
    }
    return j;
  }

  // Board after the first `ply` claims, replayed from the move list.
  static nlohmann::json snapshot(const Session& s, const nlohmann::json& msg) {
    const auto& b = s.game->board();
    const auto ply = std::min<std::size_t>(msg.at("ply").get<std::size_t>(), b.claimed_count());
    Board replay(b.graph_ptr());
    for (std::size_t i = 0; i < ply; ++i) {
      replay.claim(b.history()[i].mover, b.history()[i].edge);
    }
    return {{"type", "snapshot"},
            {"session", s.id},
            {"ply", ply},
            {"claimed", claimed_edges(replay, ply)},
            {"red_matching", replay.matching_size(Player::Red)},
            {"blue_matching", replay.matching_size(Player::Blue)}};
  }

  SessionLimits limits_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 0;
};

// HTTP transport: POST /session with one protocol message as the body, the
// reply as the response body. GET /health answers {"ok":true}.
class SessionServer {
 public:
  explicit SessionServer(SessionLimits limits = {}) : manager_(limits) {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    server_.Options("/session", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"ok":true})", "application/json");
    });
    server_.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json reply;
      try {
        reply = manager_.handle(nlohmann::json::parse(req.body));
      } catch (const nlohmann::json::parse_error& e) {
        reply = {{"type", "error"}, {"code", "BAD_REQUEST"}, {"message", e.what()}};
      }
      res.set_content(reply.dump(), "application/json");
    });
  }

  // Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      return server_.bind_to_any_port(host);
    }
    return server_.bind_to_port(host, port) ? port : -1;
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }
  SessionManager& manager() { return manager_; }

 private:
  SessionManager manager_;
  httplib::Server server_;
};

// Blocks serving sessions on host:port until the server is stopped.
inline bool serve_session(const std::string& host, int port, SessionLimits limits = {}) {
  SessionServer server(limits);
  if (server.bind(host, port) < 0) {
    return false;
  }
  return server.listen_after_bind();
}

}  // namespace pmgame
