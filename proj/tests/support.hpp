#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <unistd.h>
#include <vector>

#include "rectune/rectune.hpp"

namespace rectune::testing {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("rectune-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline fs::path data_dir() { return fs::path(RECTUNE_DATA_DIR); }
inline skills::Skill planted_skill() { return skills::load_skill(data_dir() / "skills" / "planted.json"); }
inline sim::Scenario planted_scenario() { return sim::load_scenario(data_dir() / "scenarios" / "planted.json"); }

// A tiny two-parameter skill over the planted scenario's pre-stage weights.
inline skills::Skill small_skill() {
  skills::Skill s;
  s.name = "small";
  s.task_context = "fixture";
  s.requirement.search_space.params["pre.w_ctr"] = ParamSpec{0.0, 1.0, ParamKind::continuous, ParamScale::linear, true};
  s.requirement.search_space.params["pre.w_heart"] = ParamSpec{0.0, 1.0};
  s.north_star.primary = {{"engagement1", Direction::maximize}};
  s.north_star.guardrails = {{"diversity", Direction::maximize, 0.0}};
  s.initial_config.params = {{"pre.w_ctr", 0.5}, {"pre.w_heart", 0.5}};
  return s;
}

struct HandItem {
  int topic;
  std::vector<double> pre;
  std::vector<double> rank;
};

// Request with explicit head scores; item ids follow the vector order.
inline sim::Request hand_request(const std::vector<HandItem>& items, std::vector<std::string> pre_heads = {"a", "b"},
                                 std::vector<std::string> rank_heads = {"a", "b"}) {
  auto ctx = std::make_shared<sim::PoolContext>();
  ctx->seed = 1;
  ctx->pre_heads = std::move(pre_heads);
  ctx->rank_heads = std::move(rank_heads);
  sim::Request r;
  r.request_id = 0;
  r.user_pref = {0.0};
  r.context = ctx;
  for (std::size_t i = 0; i < items.size(); ++i) {
    sim::Item it;
    it.item_id = static_cast<std::int64_t>(i);
    it.topic = items[i].topic;
    it.pre_scores = items[i].pre;
    it.rank_scores = items[i].rank;
    it.latent.click = {0.0};
    it.latent.heart = {0.0};
    r.pool.push_back(std::move(it));
  }
  return r;
}

// ---- independent oracles ----

// O(n^2) survivors under weak dominance, written without sorting.
inline std::vector<std::size_t> brute_pareto(const std::vector<std::vector<double>>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < v.size() && !dominated; ++j) {
      if (i == j) continue;
      bool all_ge = true, any_gt = false;
      for (std::size_t d = 0; d < v[i].size(); ++d) {
        if (v[j][d] < v[i][d]) all_ge = false;
        if (v[j][d] > v[i][d]) any_gt = true;
      }
      dominated = all_ge && any_gt;
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

// Population z-scores, recomputed here rather than borrowed from the library.
inline std::vector<std::vector<double>> oracle_zscore(const std::vector<std::vector<double>>& pts) {
  std::vector<std::vector<double>> z = pts;
  if (pts.empty()) return z;
  for (std::size_t d = 0; d < pts[0].size(); ++d) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p[d];
    mean /= static_cast<double>(pts.size());
    double var = 0.0;
    for (const auto& p : pts) var += (p[d] - mean) * (p[d] - mean);
    const double sd = std::sqrt(var / static_cast<double>(pts.size()));
    for (auto& p : z) p[d] = sd == 0.0 ? 0.0 : (p[d] - mean) / sd;
  }
  return z;
}

inline double oracle_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

// Replays a greedy selection: the first pick must be the max-utility point
// (lowest index on ties) and every later pick must attain the exhaustive
// step-wise max of the min distance to the picks so far. Distances are
// compared with a relative tolerance because the oracle works in Euclidean
// rather than squared distance.
inline bool replay_greedy(const std::vector<std::vector<double>>& pts, const std::vector<double>& util,
                          std::size_t k, const std::vector<std::size_t>& chosen, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  const std::size_t want = std::min(k, pts.size());
  if (chosen.size() != want) return fail("wrong subset size");
  std::size_t seed = 0;
  for (std::size_t i = 0; i < util.size(); ++i)
    if (util[i] > util[seed]) seed = i;
  if (chosen.empty() || chosen[0] != seed) return fail("seed is not the max-utility point");
  const auto z = oracle_zscore(pts);
  std::vector<bool> used(pts.size(), false);
  used[seed] = true;
  for (std::size_t step = 1; step < chosen.size(); ++step) {
    auto min_dist = [&](std::size_t i) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < step; ++s) m = std::min(m, oracle_dist(z[i], z[chosen[s]]));
      return m;
    };
    double best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!used[i]) best = std::max(best, min_dist(i));
    const std::size_t pick = chosen[step];
    if (pick >= pts.size() || used[pick]) return fail("repeated or invalid pick at step " + std::to_string(step));
    const double got = min_dist(pick);
    if (std::abs(got - best) > 1e-9 * std::max(1.0, best))
      return fail("step " + std::to_string(step) + " picked distance " + std::to_string(got) + " < max " +
                  std::to_string(best));
    used[pick] = true;
  }
  return true;
}

}  // namespace rectune::testing
