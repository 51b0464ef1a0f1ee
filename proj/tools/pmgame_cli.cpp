// pmgame: sample graphs, build partitions, play and verify games, run
// batches, solve small boards, and serve interactive sessions.
//
// Exit codes: 0 success, 1 a check failed, 2 usage error.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "pmgame/pmgame.hpp"
#include "pmgame/session.hpp"

namespace {

using namespace pmgame;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) {
    throw UsageError("cannot write " + out);
  }
  f << j.dump(2) << '\n';
}

struct GraphArgs {
  Vertex n = 1024;
  double p = 0.99;
  std::uint64_t seed = 1;
  int clique_size = 16;

  void add(CLI::App* app) {
    app->add_option("--n", n, "number of vertices")->check(CLI::Range(1, 1 << 16));
    app->add_option("--p", p, "edge probability")->check(CLI::Range(0.0, 1.0));
    app->add_option("--seed", seed, "game seed");
    app->add_option("--clique-size", clique_size, "greedy clique size s (even)");
  }
  GameConfig config() const {
    GameConfig c;
    c.n = n;
    c.p = p;
    c.seed = seed;
    c.partition.clique_size = clique_size;
    return c;
  }
};

int cmd_sample(const GraphArgs& ga, const std::string& out) {
  const auto g = sample_gnp(ga.n, ga.p, graph_seed(ga.seed));
  auto j = graph_to_json(g);
  j["p"] = ga.p;
  j["seed"] = ga.seed;
  j["edge_count"] = g.edge_count();
  emit(j, out);
  return kOk;
}

int cmd_partition(const GraphArgs& ga, const std::string& out) {
  const auto cfg = ga.config();
  const auto g = sample_gnp(cfg.n, cfg.p, graph_seed(cfg.seed));
  auto part = cyclic_partition(g, cfg.partition, partition_seed(cfg.seed));
  if (auto* f = std::get_if<PartitionFailure>(&part)) {
    emit({{"ok", false}, {"failure", failure_to_json(*f)}}, out);
    std::cerr << "partition failed at " << f->stage << ": " << f->detail << '\n';
    return kFailed;
  }
  const auto& p = std::get<Partition>(part);
  const auto rep = verify_partition(g, p, cfg.partition);
  emit({{"ok", rep.ok()}, {"partition", partition_to_json(p)}, {"verification", report_to_json(rep)}}, out);
  return rep.ok() ? kOk : kFailed;
}

int cmd_play(const GraphArgs& ga, const std::string& adversary, const std::string& out, bool quiet) {
  auto cfg = ga.config();
  cfg.adversary = adversary;
  make_adversary(adversary, 0);  // rejects unknown kinds before any work
  auto prepared = prepare_game(cfg);
  if (auto* f = std::get_if<PartitionFailure>(&prepared)) {
    std::cerr << "partition failed at " << f->stage << ": " << f->detail << '\n';
    return kFailed;
  }
  auto& pg = std::get<PreparedGame>(prepared);
  auto blue = make_adversary(adversary, adversary_seed(cfg.seed));
  const auto tr = play_game(pg.graph, pg.partition, cfg.red, *blue, pg.header);
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) {
      throw UsageError("cannot write " + out);
    }
    write_transcript(f, tr);
  }
  if (!quiet) {
    nlohmann::json summary = tr.result;
    summary.erase("per_board_ledgers");
    summary["slack"] = tr.result.budget - tr.result.red_moves;
    std::cout << summary.dump(2) << '\n';
  }
  return tr.result.winner == Winner::Red ? kOk : kFailed;
}

int cmd_batch(const std::string& config_path, const std::string& out, int threads, bool progress) {
  std::ifstream f(config_path);
  if (!f) {
    throw UsageError("cannot read " + config_path);
  }
  BatchConfig cfg;
  try {
    cfg = nlohmann::json::parse(f).get<BatchConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad batch config: ") + e.what());
  }
  for (const auto& a : cfg.adversaries) {
    make_adversary(a, 0);
  }
  if (threads > 0) {
    cfg.threads = threads;
  }
  std::function<void(const GameRecord&)> tick;
  if (progress) {
    tick = [](const GameRecord& r) { std::cerr << record_to_json(r).dump() << '\n'; };
  }
  const auto stats = simulate_batch(cfg, tick);
  auto j = stats_to_json(stats, !out.empty());
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    emit(j, out);
    j.erase("records");
    std::cout << j.dump(2) << '\n';
  }
  const bool checks = stats.ok() && stats.partition_verify_failures() == 0 && stats.unclean_transcripts() == 0;
  return checks ? kOk : kFailed;
}

int cmd_verify(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw UsageError("cannot read " + path);
  }
  const auto rep = verify_transcript(f);
  std::cout << report_to_json(rep).dump(2) << '\n';
  return rep.clean() ? kOk : kFailed;
}

int cmd_solve(int m) {
  const auto rep = solve_small_strong_game(m);
  std::cout << solve_report_to_json(rep).dump(2) << '\n';
  return rep.value != GameValue::BlueWin && rep.referee_disagreements == 0 ? kOk : kFailed;
}

int cmd_serve(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    throw UsageError("--bind expects host:port");
  }
  const auto host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--bind expects host:port");
  }
  SessionServer server;
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << bind << '\n';
    return kFailed;
  }
  std::cerr << "serving sessions on http://" << host << ':' << bound << "/session\n";
  return server.listen_after_bind() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Red's strategy for the strong perfect matching game on G(n,p)"};
  app.require_subcommand(1);

  GraphArgs ga;
  std::string out;
  std::string adversary = "random";
  std::string config_path;
  std::string transcript_path;
  std::string bind = "127.0.0.1:8080";
  int threads = 0;
  int m = 6;
  bool quiet = false;
  bool progress = false;

  auto* sample = app.add_subcommand("sample", "sample G(n,p) and print it as JSON");
  ga.add(sample);
  sample->add_option("--out", out, "output file (default stdout)");

  auto* partition = app.add_subcommand("partition", "build and verify the cyclic clique partition");
  ga.add(partition);
  partition->add_option("--out", out, "output file (default stdout)");

  auto* play = app.add_subcommand("play", "play one game and write its transcript");
  ga.add(play);
  play->add_option("--adversary", adversary, "random | blocker | fast_matcher | vertex_attacker");
  play->add_option("--out", out, "transcript file (JSON lines)");
  play->add_flag("--quiet", quiet, "print nothing");

  auto* batch = app.add_subcommand("batch", "run a batch of games from a JSON config");
  batch->add_option("config", config_path, "batch config file")->required();
  batch->add_option("--out", out, "write full statistics with per-game records here");
  batch->add_option("--threads", threads, "worker threads");
  batch->add_flag("--progress", progress, "print each game as it finishes");

  auto* verify = app.add_subcommand("verify", "replay and check a transcript");
  verify->add_option("transcript", transcript_path, "transcript file")->required();

  auto* solve = app.add_subcommand("solve", "solve the game on K_m exactly (m = 2, 4, 6)");
  solve->add_option("--m", m, "board size")->check(CLI::IsMember({2, 4, 6}));

  auto* serve = app.add_subcommand("serve", "serve interactive sessions over HTTP");
  serve->add_option("--bind", bind, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sample) {
      return cmd_sample(ga, out);
    }
    if (*partition) {
      return cmd_partition(ga, out);
    }
    if (*play) {
      return cmd_play(ga, adversary, out, quiet);
    }
    if (*batch) {
      return cmd_batch(config_path, out, threads, progress);
    }
    if (*verify) {
      return cmd_verify(transcript_path);
    }
    if (*solve) {
      return cmd_solve(m);
    }
    if (*serve) {
      return cmd_serve(bind);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigurationRejected& e) {
    std::cerr << "configuration rejected: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
