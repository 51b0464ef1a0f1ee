#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pmgame/engine.hpp"

namespace pmgame {

struct BatchConfig {
  std::vector<Vertex> n;
  std::vector<double> p;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> adversaries;
  int clique_size = 16;
  RedConfig red;
  int threads = 0;  // 0: hardware concurrency
  bool verify_partitions = true;
  bool verify_transcripts = false;
  std::string transcript_dir;  // empty: transcripts are not written
};

inline void to_json(nlohmann::json& j, const BatchConfig& c) {
  j = nlohmann::json{{"n", c.n},
                     {"p", c.p},
                     {"seeds", c.seeds},
                     {"adversaries", c.adversaries},
                     {"clique_size", c.clique_size},
                     {"red", c.red},
                     {"threads", c.threads},
                     {"verify_partitions", c.verify_partitions},
                     {"verify_transcripts", c.verify_transcripts},
                     {"transcript_dir", c.transcript_dir}};
}

// "seeds" may be a list, or {"first": a, "count": k} for a..a+k-1.
inline void from_json(const nlohmann::json& j, BatchConfig& c) {
  c.n = j.value("n", std::vector<Vertex>{});
  c.p = j.value("p", std::vector<double>{});
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    if (s.is_object()) {
      const auto first = s.value("first", std::uint64_t{1});
      const auto count = s.at("count").get<std::uint64_t>();
      c.seeds.clear();
      for (std::uint64_t i = 0; i < count; ++i) {
        c.seeds.push_back(first + i);
      }
    } else {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    }
  }
  c.adversaries = j.value("adversaries", std::vector<std::string>{});
  c.clique_size = j.value("clique_size", c.clique_size);
  if (j.contains("red")) {
    c.red = j.at("red").get<RedConfig>();
  }
  c.threads = j.value("threads", c.threads);
  c.verify_partitions = j.value("verify_partitions", c.verify_partitions);
  c.verify_transcripts = j.value("verify_transcripts", c.verify_transcripts);
  c.transcript_dir = j.value("transcript_dir", c.transcript_dir);
}

struct GameRecord {
  Vertex n = 0;
  double p = 0;
  std::uint64_t seed = 0;
  std::string adversary;
  bool partition_ok = false;
  std::string partition_failure;
  std::optional<bool> partition_verified;
  std::optional<Winner> winner;
  int red_moves = 0;
  int blue_moves = 0;
  int budget = 0;
  int t = 0;
  int red_wasted = 0;
  int blue_wasted = 0;
  int fallback_moves = 0;
  std::string reason;
  std::optional<bool> transcript_clean;
  std::vector<std::string> transcript_issues;
  double seconds = 0;

  int slack() const { return budget - red_moves; }
};

inline nlohmann::json record_to_json(const GameRecord& r) {
  nlohmann::json j{{"n", r.n},
                   {"p", r.p},
                   {"seed", r.seed},
                   {"adversary", r.adversary},
                   {"partition_ok", r.partition_ok},
                   {"seconds", r.seconds}};
  if (!r.partition_ok) {
    j["partition_failure"] = r.partition_failure;
    return j;
  }
  j["winner"] = r.winner ? nlohmann::json(to_string(*r.winner)) : nlohmann::json(nullptr);
  j["red_moves"] = r.red_moves;
  j["blue_moves"] = r.blue_moves;
  j["budget"] = r.budget;
  j["slack"] = r.slack();
  j["t"] = r.t;
  j["red_wasted"] = r.red_wasted;
  j["blue_wasted"] = r.blue_wasted;
  j["fallback_moves"] = r.fallback_moves;
  if (!r.reason.empty()) {
    j["reason"] = r.reason;
  }
  if (r.partition_verified) {
    j["partition_verified"] = *r.partition_verified;
  }
  if (r.transcript_clean) {
    j["transcript_clean"] = *r.transcript_clean;
    j["transcript_issues"] = r.transcript_issues;
  }
  return j;
}

struct BatchStats {
  std::vector<GameRecord> records;
  double seconds = 0;

  int games() const { return static_cast<int>(records.size()); }
  int partitioned() const { return count([](const auto& r) { return r.partition_ok; }); }
  int red_wins() const { return count([](const auto& r) { return r.winner == Winner::Red; }); }
  int forfeits() const { return count([](const auto& r) { return r.winner == Winner::Forfeit; }); }
  int partition_verify_failures() const {
    return count([](const auto& r) { return r.partition_verified && !*r.partition_verified; });
  }
  int unclean_transcripts() const {
    return count([](const auto& r) { return r.transcript_clean && !*r.transcript_clean; });
  }
  int fallback_moves() const {
    int c = 0;
    for (const auto& r : records) {
      c += r.fallback_moves;
    }
    return c;
  }
  double partition_rate() const { return games() ? static_cast<double>(partitioned()) / games() : 1.0; }
  double red_win_rate() const { return partitioned() ? static_cast<double>(red_wins()) / partitioned() : 1.0; }
  // Red wins every partitioned game.
  bool ok() const { return red_wins() == partitioned(); }

  std::optional<int> min_slack() const {
    std::optional<int> m;
    for (const auto& r : records) {
      if (r.winner == Winner::Red) {
        m = m ? std::min(*m, r.slack()) : r.slack();
      }
    }
    return m;
  }
  int max_red_moves_over_budget() const {
    int worst = 0;
    for (const auto& r : records) {
      if (r.partition_ok) {
        worst = std::max(worst, r.red_moves - r.budget);
      }
    }
    return worst;
  }

  template <class Pred>
  int count(Pred pred) const {
    return static_cast<int>(std::count_if(records.begin(), records.end(), pred));
  }
};

inline nlohmann::json stats_to_json(const BatchStats& s, bool with_records = true) {
  std::vector<int> moves;
  int max_waste_delta = 0;
  bool any_delta = false;
  for (const auto& r : s.records) {
    if (r.partition_ok) {
      moves.push_back(r.red_moves);
      const int d = r.red_wasted - r.blue_wasted;
      max_waste_delta = any_delta ? std::max(max_waste_delta, d) : d;
      any_delta = true;
    }
  }
  std::sort(moves.begin(), moves.end());
  nlohmann::json dist = nullptr;
  if (!moves.empty()) {
    dist = {{"min", moves.front()}, {"median", moves[moves.size() / 2]}, {"max", moves.back()}};
  }
  nlohmann::json j{{"games", s.games()},
                   {"partitioned", s.partitioned()},
                   {"partition_rate", s.partition_rate()},
                   {"red_wins", s.red_wins()},
                   {"red_win_rate", s.red_win_rate()},
                   {"forfeits", s.forfeits()},
                   {"fallback_moves", s.fallback_moves()},
                   {"min_slack", s.min_slack() ? nlohmann::json(*s.min_slack()) : nlohmann::json(nullptr)},
                   {"red_moves", dist},
                   {"max_red_minus_blue_wasted", any_delta ? nlohmann::json(max_waste_delta) : nlohmann::json(nullptr)},
                   {"partition_verify_failures", s.partition_verify_failures()},
                   {"unclean_transcripts", s.unclean_transcripts()},
                   {"seconds", s.seconds},
                   {"ok", s.ok()}};
  if (with_records) {
    auto arr = nlohmann::json::array();
    for (const auto& r : s.records) {
      arr.push_back(record_to_json(r));
    }
    j["records"] = arr;
  }
  return j;
}

inline GameRecord run_batch_game(const BatchConfig& cfg, Vertex n, double p, std::uint64_t seed,
                                 const std::string& adversary) {
  const auto t0 = std::chrono::steady_clock::now();
  GameRecord rec;
  rec.n = n;
  rec.p = p;
  rec.seed = seed;
  rec.adversary = adversary;
  GameConfig gc;
  gc.n = n;
  gc.p = p;
  gc.seed = seed;
  gc.adversary = adversary;
  gc.partition.clique_size = cfg.clique_size;
  gc.red = cfg.red;
  auto prepared = prepare_game(gc);
  if (auto* f = std::get_if<PartitionFailure>(&prepared)) {
    rec.partition_failure = f->stage + ": " + f->detail;
  } else {
    auto& pg = std::get<PreparedGame>(prepared);
    rec.partition_ok = true;
    if (cfg.verify_partitions) {
      rec.partition_verified = verify_partition(*pg.graph, pg.partition, gc.partition).ok();
    }
    auto blue = make_adversary(adversary, adversary_seed(seed));
    const auto tr = play_game(pg.graph, pg.partition, gc.red, *blue, pg.header);
    const auto& r = tr.result;
    rec.winner = r.winner;
    rec.red_moves = r.red_moves;
    rec.blue_moves = r.blue_moves;
    rec.budget = r.budget;
    rec.t = r.t;
    rec.red_wasted = r.red_wasted_total;
    rec.blue_wasted = r.blue_wasted_total;
    rec.fallback_moves = r.fallback_moves;
    rec.reason = r.reason;
    if (cfg.verify_transcripts || !cfg.transcript_dir.empty()) {
      const auto text = transcript_to_string(tr);
      if (cfg.verify_transcripts) {
        const auto rep = verify_transcript(text);
        rec.transcript_clean = rep.clean();
        rec.transcript_issues = rep.issues;
      }
      if (!cfg.transcript_dir.empty()) {
        std::filesystem::create_directories(cfg.transcript_dir);
        const auto name = "game_n" + std::to_string(n) + "_p" + std::to_string(static_cast<int>(p * 1000)) + "_s" +
                          std::to_string(seed) + "_" + adversary + ".jsonl";
        std::ofstream(std::filesystem::path(cfg.transcript_dir) / name) << text;
      }
    }
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// Every (n, p, seed, adversary) combination, on a pool of workers. Records
// come back in combination order whatever the scheduling.
inline BatchStats simulate_batch(const BatchConfig& cfg,
                                 const std::function<void(const GameRecord&)>& on_game = nullptr) {
  struct Job {
    Vertex n;
    double p;
    std::uint64_t seed;
    std::string adversary;
  };
  std::vector<Job> jobs;
  for (auto n : cfg.n) {
    for (auto p : cfg.p) {
      for (auto seed : cfg.seeds) {
        for (const auto& a : cfg.adversaries) {
          jobs.push_back({n, p, seed, a});
        }
      }
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  BatchStats stats;
  stats.records.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& j = jobs[i];
      stats.records[i] = run_batch_game(cfg, j.n, j.p, j.seed, j.adversary);
      if (on_game) {
        std::lock_guard lock(report);
        on_game(stats.records[i]);
      }
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

}  // namespace pmgame
