#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "rectune/config.hpp"
#include "rectune/core/rng.hpp"
#include "rectune/sim/scenario.hpp"

namespace rectune::sim {

inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) noexcept {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

// Shared, immutable per-scenario facts a Request needs to be interpreted.
struct PoolContext {
  std::uint64_t seed = 0;
  std::vector<std::string> pre_heads;
  std::vector<std::string> rank_heads;
  double click_offset = 0.0;
  double heart_offset = 0.0;

  friend bool operator==(const PoolContext&, const PoolContext&) = default;
};

// Hidden per-interaction appeal; only the user model reads it.
struct LatentUtility {
  std::vector<double> click;
  std::vector<double> heart;

  friend bool operator==(const LatentUtility&, const LatentUtility&) = default;
};

struct Item {
  std::int64_t item_id = 0;
  int topic = 0;
  std::vector<double> pre_scores;   // aligned with PoolContext::pre_heads
  std::vector<double> rank_scores;  // aligned with PoolContext::rank_heads
  LatentUtility latent;

  friend bool operator==(const Item&, const Item&) = default;
};

struct Request {
  std::int64_t request_id = 0;
  std::vector<Item> pool;
  std::vector<double> user_pref;
  std::shared_ptr<const PoolContext> context;

  const Item& item(std::int64_t id) const {
    if (id >= 0 && static_cast<std::size_t>(id) < pool.size() && pool[static_cast<std::size_t>(id)].item_id == id)
      return pool[static_cast<std::size_t>(id)];
    auto it = std::find_if(pool.begin(), pool.end(), [id](const Item& x) { return x.item_id == id; });
    if (it == pool.end()) throw ConfigError("item " + std::to_string(id) + " not in request pool");
    return *it;
  }

  double p_click_base(const Item& it) const {
    double dot = 0.0;
    for (std::size_t d = 0; d < user_pref.size(); ++d) dot += user_pref[d] * it.latent.click[d];
    return logistic(dot + context->click_offset);
  }
  double p_heart_given_click(const Item& it) const {
    double dot = 0.0;
    for (std::size_t d = 0; d < user_pref.size(); ++d) dot += user_pref[d] * it.latent.heart[d];
    return logistic(dot + context->heart_offset);
  }

  // Agent-visible view: ids, topics and head scores. Latent state and user
  // preferences are never serialized.
  json to_public_json() const {
    json items = json::array();
    for (const auto& it : pool) {
      json heads = json::object();
      for (std::size_t h = 0; h < context->pre_heads.size(); ++h) heads["pre." + context->pre_heads[h]] = it.pre_scores[h];
      for (std::size_t h = 0; h < context->rank_heads.size(); ++h) heads["rank." + context->rank_heads[h]] = it.rank_scores[h];
      items.push_back({{"item_id", it.item_id}, {"topic", it.topic}, {"heads", heads}});
    }
    return json{{"request_id", request_id}, {"pool", items}};
  }

  friend bool operator==(const Request& a, const Request& b) {
    return a.request_id == b.request_id && a.pool == b.pool && a.user_pref == b.user_pref &&
           (a.context == b.context || (a.context && b.context && *a.context == *b.context));
  }
};

inline std::shared_ptr<const PoolContext> make_context(const Scenario& s) {
  auto ctx = std::make_shared<PoolContext>();
  ctx->seed = s.seed;
  for (const auto& h : s.pre_heads) ctx->pre_heads.push_back(h.name);
  for (const auto& h : s.rank_heads) ctx->rank_heads.push_back(h.name);
  ctx->click_offset = s.click_offset;
  ctx->heart_offset = s.heart_offset;
  return ctx;
}

// Materializes request `request_id` of the scenario's request distribution.
// A pure function of (scenario, request_id).
inline Request generate_request(const Scenario& s, std::int64_t request_id,
                                std::shared_ptr<const PoolContext> ctx = nullptr) {
  if (s.pool_size <= 0) throw ValidationError("degenerate scenario: pool size must be >= 1", "pool_size");
  if (!ctx) ctx = make_context(s);
  const auto rid = static_cast<std::uint64_t>(request_id);

  Request r;
  r.request_id = request_id;
  r.context = std::move(ctx);

  KeyedRng user_rng({s.seed, rid, tag("user")});
  r.user_pref.resize(static_cast<std::size_t>(s.latent_dim));
  for (auto& u : r.user_pref) u = user_rng.normal();

  r.pool.reserve(static_cast<std::size_t>(s.pool_size));
  for (int i = 0; i < s.pool_size; ++i) {
    KeyedRng rng({s.seed, rid, static_cast<std::uint64_t>(i), tag("item")});
    Item it;
    it.item_id = i;
    it.topic = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.topics)));
    it.latent.click.resize(r.user_pref.size());
    it.latent.heart.resize(r.user_pref.size());
    for (auto& v : it.latent.click) v = s.latent_scale * rng.normal();
    for (auto& v : it.latent.heart) v = s.latent_scale * rng.normal();

    const double pc = r.p_click_base(it);
    const double ph = r.p_heart_given_click(it);
    auto truth = [&](HeadTarget t) { return t == HeadTarget::click ? pc : pc * ph; };
    auto noisy = [&](const HeadDef& h) {
      if (h.target == HeadTarget::random) return rng.uniform();
      return logistic(logit(truth(h.target)) + h.noise * rng.normal());
    };

    it.pre_scores.reserve(s.pre_heads.size());
    for (const auto& h : s.pre_heads) it.pre_scores.push_back(noisy(h));

    // Rank heads refine the matching pre head (or their own estimate) toward
    // the truth by the scenario's fidelity.
    it.rank_scores.reserve(s.rank_heads.size());
    for (const auto& h : s.rank_heads) {
      double base = -1.0;
      for (std::size_t k = 0; k < s.pre_heads.size(); ++k)
        if (s.pre_heads[k].name == h.name) base = it.pre_scores[k];
      if (base < 0.0) base = noisy(h);
      const double target = h.target == HeadTarget::random ? base : truth(h.target);
      it.rank_scores.push_back(std::clamp((1.0 - s.rank_fidelity) * base + s.rank_fidelity * target, 0.0, 1.0));
    }
    r.pool.push_back(std::move(it));
  }
  return r;
}

// ---- ranking stages ----

enum class Stage { pre, rank, re };

struct RankedEntry {
  std::int64_t item_id = 0;
  double score = 0.0;
  int topic = 0;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

struct RankedList {
  Stage stage = Stage::pre;
  std::vector<RankedEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

// Descending score, ascending item id.
inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.item_id < b.item_id;
}

namespace detail {

inline std::size_t truncation(const SystemConfig& c, const std::string& name) {
  const double v = c.at(name);
  if (!(v >= 1.0) || v != std::round(v)) throw ConfigError("truncation size must be an integer >= 1", name);
  return static_cast<std::size_t>(v);
}

inline std::vector<double> head_weights(const SystemConfig& c, const std::string& stage,
                                        const std::vector<std::string>& heads) {
  std::vector<double> w;
  w.reserve(heads.size());
  for (const auto& h : heads) w.push_back(c.at(stage + ".w_" + h));
  return w;
}

inline double fuse(const std::vector<double>& weights, const std::vector<double>& scores) noexcept {
  double s = 0.0;
  for (std::size_t h = 0; h < weights.size(); ++h) s += weights[h] * scores[h];
  return s;
}

inline void keep_top(std::vector<RankedEntry>& v, std::size_t k) {
  k = std::min(k, v.size());
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), ranks_before);
  v.resize(k);
}

}  // namespace detail

// Fused score = sum_h pre.w_<h> * head_h, then Top-K1.
inline RankedList run_pre(const Request& request, const SystemConfig& config) {
  const auto w = detail::head_weights(config, "pre", request.context->pre_heads);
  const std::size_t k1 = detail::truncation(config, "pre.K1");
  RankedList out{Stage::pre, {}};
  out.entries.reserve(request.pool.size());
  for (const auto& it : request.pool) out.entries.push_back({it.item_id, detail::fuse(w, it.pre_scores), it.topic});
  detail::keep_top(out.entries, k1);
  return out;
}

inline RankedList run_rank(const RankedList& c1, const Request& request, const SystemConfig& config) {
  const auto w = detail::head_weights(config, "rank", request.context->rank_heads);
  const std::size_t k2 = detail::truncation(config, "rank.K2");
  if (config.has("pre.K1") && static_cast<double>(k2) > config.at("pre.K1"))
    throw ConfigError("rank.K2 exceeds pre.K1 (inconsistent truncation)", "rank.K2");
  RankedList out{Stage::rank, {}};
  out.entries.reserve(c1.size());
  for (const auto& e : c1.entries) {
    const Item& it = request.item(e.item_id);
    out.entries.push_back({it.item_id, detail::fuse(w, it.rank_scores), it.topic});
  }
  detail::keep_top(out.entries, k2);
  return out;
}

// Greedy topic-aware selection. Each step takes the remaining item with the
// highest (score - penalty * already-selected-same-topic), skipping topics at
// the cap. Adjusted scores never increase step over step, so the output stays
// sorted by its (adjusted) score.
inline RankedList run_re(const RankedList& c2, const Request& request, const SystemConfig& config) {
  (void)request;
  const double n_raw = config.at("re.N");
  if (!(n_raw >= 1.0) || n_raw != std::round(n_raw)) throw ConfigError("re.N must be an integer >= 1", "re.N");
  const auto n = static_cast<std::size_t>(n_raw);
  if (config.has("rank.K2") && n_raw > config.at("rank.K2")) throw ConfigError("re.N exceeds rank.K2", "re.N");
  const double penalty = config.at("re.diversity_penalty");
  if (!(penalty >= 0.0)) throw ConfigError("diversity penalty must be >= 0", "re.diversity_penalty");
  const double cap_raw = config.at("re.topic_cap");
  if (!(cap_raw >= 1.0)) throw ConfigError("topic cap must be >= 1", "re.topic_cap");
  const auto cap = static_cast<std::size_t>(std::floor(cap_raw));

  std::unordered_map<int, std::size_t> per_topic;
  std::vector<bool> taken(c2.size(), false);
  RankedList out{Stage::re, {}};
  while (out.size() < n) {
    std::ptrdiff_t best = -1;
    RankedEntry best_entry;
    for (std::size_t i = 0; i < c2.size(); ++i) {
      if (taken[i]) continue;
      const auto& e = c2.entries[i];
      const std::size_t used = per_topic[e.topic];
      if (used >= cap) continue;
      RankedEntry cand{e.item_id, e.score - penalty * static_cast<double>(used), e.topic};
      if (best < 0 || ranks_before(cand, best_entry)) {
        best = static_cast<std::ptrdiff_t>(i);
        best_entry = cand;
      }
    }
    if (best < 0) break;  // cap exhausted every remaining candidate
    taken[static_cast<std::size_t>(best)] = true;
    ++per_topic[best_entry.topic];
    out.entries.push_back(best_entry);
  }
  return out;
}

inline RankedList run_system(const Request& request, const SystemConfig& config) {
  const RankedList c1 = run_pre(request, config);
  const RankedList c2 = run_rank(c1, request, config);
  return run_re(c2, request, config);
}

}  // namespace rectune::sim
