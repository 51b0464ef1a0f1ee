#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "pmgame/session.hpp"

namespace pmgame {
namespace {

using nlohmann::json;

struct Client {
  SessionManager mgr;
  std::string id;
  std::vector<Edge> edges;
  std::set<Edge> claimed;

  json open(Vertex n = 512, std::uint64_t seed = 3) {
    auto r = mgr.handle({{"type", "new_game"}, {"n", n}, {"p", 0.99}, {"seed", seed}});
    if (r.at("type") == "state") {
      id = r.at("session");
      edges = r.at("graph").at("edges").get<std::vector<Edge>>();
      track(r);
    }
    return r;
  }
  void track(const json& state) {
    for (const auto& c : state.at("claimed")) {
      claimed.insert(c.at("edge").get<Edge>());
    }
  }
  json send(json msg) {
    msg["session"] = id;
    return mgr.handle(msg);
  }
  Edge free_edge(std::size_t skip = 0) const {
    for (const auto& e : edges) {
      if (!claimed.contains(e) && skip-- == 0) {
        return e;
      }
    }
    throw std::logic_error("no free edge");
  }
};

TEST(Session, NewGameReturnsPartitionAndRedsFirstMove) {
  Client c;
  const auto r = c.open();
  ASSERT_EQ(r.at("type"), "state") << r.dump();
  EXPECT_EQ(r.at("ply"), 1);
  EXPECT_EQ(r.at("to_move"), "blue");
  EXPECT_EQ(r.at("claimed").size(), 1U);
  EXPECT_EQ(r.at("claimed")[0].at("owner"), "red");
  EXPECT_EQ(r.at("last_red_move").at("mover"), "red");
  int total = 0;
  for (const auto& part : r.at("partition")) {
    EXPECT_EQ(part.size() % 2, 0U);
    total += static_cast<int>(part.size());
  }
  EXPECT_EQ(total, 512);
  EXPECT_EQ(r.at("graph").at("n"), 512);
  EXPECT_EQ(r.at("totals").at("red_moves"), 1);
  EXPECT_EQ(c.mgr.session_count(), 1U);
}

TEST(Session, IllegalMoveLeavesStateUntouched) {
  Client c;
  c.open();
  const auto before = c.send({{"type", "state"}});
  const Edge taken = *c.claimed.begin();
  const auto r = c.send({{"type", "move"}, {"edge", taken}});
  EXPECT_EQ(r.at("code"), "ILLEGAL_MOVE");
  EXPECT_EQ(r.at("violations"), 1);
  EXPECT_EQ(c.send({{"type", "state"}}), before);
  // out of range and malformed edges count as violations too
  EXPECT_EQ(c.send({{"type", "move"}, {"edge", {0, 9999}}}).at("code"), "ILLEGAL_MOVE");
  EXPECT_EQ(c.send({{"type", "move"}, {"edge", "x"}}).at("code"), "BAD_REQUEST");
  EXPECT_EQ(c.send({{"type", "state"}}), before);
}

TEST(Session, FifthViolationAbortsTheSession) {
  Client c;
  c.open();
  const Edge taken = *c.claimed.begin();
  for (int i = 1; i < 5; ++i) {
    EXPECT_EQ(c.send({{"type", "move"}, {"edge", taken}}).at("violations"), i);
  }
  const auto r = c.send({{"type", "move"}, {"edge", taken}});
  EXPECT_EQ(r.at("code"), "SESSION_ABORTED");
  EXPECT_EQ(c.mgr.session_count(), 0U);
  EXPECT_EQ(c.send({{"type", "state"}}).at("code"), "UNKNOWN_SESSION");
}

TEST(Session, WhatIfReportsWasteWithoutPlaying) {
  Client c;
  c.open();
  const auto before = c.send({{"type", "state"}});
  const Edge e = c.free_edge();
  auto r = c.send({{"type", "what_if"}, {"edge", e}});
  EXPECT_TRUE(r.at("legal").get<bool>());
  EXPECT_FALSE(r.at("wasted").get<bool>());  // Blue owns nothing yet
  EXPECT_EQ(c.send({{"type", "state"}}), before);
  c.track(c.send({{"type", "move"}, {"edge", e}}));
  // a free edge touching e cannot grow Blue's one-edge matching
  const Edge again = *c.claimed.begin();
  EXPECT_FALSE(c.send({{"type", "what_if"}, {"edge", again}}).at("legal").get<bool>());
  for (const auto& f : c.edges) {
    if (!c.claimed.contains(f) && (f.u == e.u || f.v == e.u || f.u == e.v || f.v == e.v)) {
      r = c.send({{"type", "what_if"}, {"edge", f}});
      EXPECT_TRUE(r.at("wasted").get<bool>()) << r.dump();
      break;
    }
  }
}

TEST(Session, SnapshotReplaysAPrefix) {
  Client c;
  c.open();
  for (int i = 0; i < 3; ++i) {
    c.track(c.send({{"type", "move"}, {"edge", c.free_edge()}}));
  }
  const auto s2 = c.send({{"type", "snapshot"}, {"ply", 2}});
  EXPECT_EQ(s2.at("ply"), 2);
  ASSERT_EQ(s2.at("claimed").size(), 2U);
  EXPECT_EQ(s2.at("claimed")[0].at("owner"), "red");
  EXPECT_EQ(s2.at("claimed")[1].at("owner"), "blue");
  EXPECT_EQ(s2.at("red_matching"), 1);
  const auto all = c.send({{"type", "snapshot"}, {"ply", 1000000}});
  EXPECT_EQ(all.at("ply"), 7);
  EXPECT_EQ(all.at("claimed"), c.send({{"type", "state"}}).at("claimed"));
}

TEST(Session, FullGameEndsWithACleanTranscript) {
  Client c;
  c.open(512, 8);
  json r;
  for (int i = 0; i < 100000; ++i) {
    r = c.send({{"type", "move"}, {"edge", c.free_edge(static_cast<std::size_t>(i) % 7)}});
    if (r.at("type") != "state") {
      break;
    }
    c.track(r);
  }
  ASSERT_EQ(r.at("type"), "game_over") << r.dump();
  EXPECT_EQ(r.at("result").at("winner"), "red");
  std::string text;
  for (const auto& l : r.at("transcript")) {
    text += l.dump() + "\n";
  }
  const auto rep = verify_transcript(text);
  EXPECT_TRUE(rep.clean()) << report_to_json(rep).dump();
  EXPECT_EQ(r.at("transcript")[0].at("config").at("adversary"), RemoteBlue(c.id).describe());
  EXPECT_EQ(c.send({{"type", "move"}, {"edge", c.free_edge()}}).at("code"), "GAME_OVER");
  EXPECT_EQ(c.send({{"type", "state"}}).at("type"), "game_over");
}

TEST(Session, ResignEndsTheGame) {
  Client c;
  c.open();
  const auto r = c.send({{"type", "resign"}});
  EXPECT_EQ(r.at("type"), "game_over");
  EXPECT_EQ(r.at("result").at("winner"), "red");
  EXPECT_EQ(r.at("result").at("reason"), "blue resigned");
}

TEST(Session, BadRequests) {
  SessionManager m;
  EXPECT_EQ(m.handle(json::array()).at("code"), "BAD_REQUEST");
  EXPECT_EQ(m.handle({{"type", 3}}).at("code"), "BAD_REQUEST");
  EXPECT_EQ(m.handle({{"type", "move"}}).at("code"), "UNKNOWN_SESSION");
  EXPECT_EQ(m.handle({{"type", "new_game"}, {"n", 511}}).at("code"), "CONFIG_REJECTED");
  EXPECT_EQ(m.handle({{"type", "new_game"}, {"n", 100000}}).at("code"), "CONFIG_REJECTED");
  EXPECT_EQ(m.handle({{"type", "new_game"}, {"p", 0.0}}).at("code"), "CONFIG_REJECTED");
  const auto f = m.handle({{"type", "new_game"}, {"n", 64}, {"p", 0.2}});
  EXPECT_EQ(f.at("code"), "PARTITION_FAILED");
  EXPECT_TRUE(f.contains("stage"));
  EXPECT_EQ(m.session_count(), 0U);
}

TEST(Session, SessionCapEvictsFinishedGamesOnly) {
  SessionManager m(SessionLimits{4096, 5, 2});
  const auto a = m.handle({{"type", "new_game"}, {"n", 256}});
  m.handle({{"type", "new_game"}, {"n", 256}});
  EXPECT_EQ(m.handle({{"type", "new_game"}, {"n", 256}}).at("code"), "CONFIG_REJECTED");
  m.handle({{"type", "resign"}, {"session", a.at("session")}});
  EXPECT_EQ(m.handle({{"type", "new_game"}, {"n", 256}}).at("type"), "state");
  EXPECT_EQ(m.session_count(), 2U);
}

TEST(SessionServer, HttpRoundTrip) {
  SessionServer server;
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(json::parse(health->body).at("ok"), true);
  auto res = cli.Post("/session", json{{"type", "new_game"}, {"n", 256}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto r = json::parse(res->body);
  EXPECT_EQ(r.at("type"), "state");
  EXPECT_EQ(server.manager().session_count(), 1U);
  auto bad = cli.Post("/session", "{oops", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(json::parse(bad->body).at("code"), "BAD_REQUEST");
  server.stop();
  t.join();
}

}  // namespace
}  // namespace pmgame
