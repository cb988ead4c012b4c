#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rectune/config.hpp"
#include "rectune/core/io.hpp"

namespace rectune::sim {

// What a synthetic model head estimates.
enum class HeadTarget {
  click,   // P(click) of the item for this user
  heart,   // P(click) * P(heart | click)
  random,  // uninformative score
};

struct HeadDef {
  std::string name;
  HeadTarget target = HeadTarget::click;
  double noise = 1.0;  // logit-scale noise of the stage-specific estimate

  friend bool operator==(const HeadDef&, const HeadDef&) = default;
};

enum class MetricKind { clicks, hearts, topic_coverage };

struct MetricDef {
  std::string name;
  MetricKind kind = MetricKind::clicks;

  friend bool operator==(const MetricDef&, const MetricDef&) = default;
};

struct CostModel {
  double c_rank = 1.0;  // per pre-stage survivor scored by the ranker
  double c_re = 10.0;   // per rank-stage survivor processed by the re-ranker
  double c_max = std::numeric_limits<double>::infinity();

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

// Constants of the heuristic Actor backend.
struct HeuristicParams {
  double uniform_prob = 0.25;
  double step_frac = 0.1;
  double nonsensitive_prob = 0.3;

  friend bool operator==(const HeuristicParams&, const HeuristicParams&) = default;
};

struct Scenario {
  std::string name = "default";
  std::uint64_t seed = 0;
  int pool_size = 100;
  int topics = 8;
  int latent_dim = 4;
  double rank_fidelity = 0.8;
  double latent_scale = 0.6;
  double click_offset = -1.0;
  double heart_offset = -1.5;
  std::vector<HeadDef> pre_heads;
  std::vector<HeadDef> rank_heads;
  std::vector<MetricDef> metrics;
  CostModel cost;
  SystemConfig defaults;  // structural parameters not under tuning
  int num_requests = 1000;
  HeuristicParams heuristic;

  // Tuned values override defaults.
  SystemConfig effective(const SystemConfig& tuned) const {
    SystemConfig out = defaults;
    for (const auto& [k, v] : tuned.params) out.params[k] = v;
    return out;
  }

  void validate() const {
    if (pool_size <= 0) throw ValidationError("degenerate scenario: pool size must be >= 1", "pool_size");
    if (topics <= 0) throw ValidationError("topics must be >= 1", "topics");
    if (latent_dim <= 0) throw ValidationError("latent_dim must be >= 1", "latent_dim");
    if (!(rank_fidelity >= 0.0 && rank_fidelity <= 1.0))
      throw ValidationError("rank_fidelity must lie in [0,1]", "rank_fidelity");
    if (pre_heads.empty()) throw ValidationError("at least one pre-stage head required", "heads.pre");
    if (rank_heads.empty()) throw ValidationError("at least one rank-stage head required", "heads.rank");
    if (metrics.empty()) throw ValidationError("metric set is empty", "metrics");
    if (num_requests < 2) throw ValidationError("num_requests must be >= 2", "num_requests");
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline std::vector<MetricDef> default_metrics() {
  return {{"engagement1", MetricKind::clicks},
          {"engagement2", MetricKind::hearts},
          {"diversity", MetricKind::topic_coverage}};
}

// ---- JSON ----

namespace detail {

inline const char* target_name(HeadTarget t) {
  switch (t) {
    case HeadTarget::click: return "click";
    case HeadTarget::heart: return "heart";
    case HeadTarget::random: return "random";
  }
  return "click";
}

inline HeadTarget parse_target(const std::string& s, const std::string& path) {
  if (s == "click") return HeadTarget::click;
  if (s == "heart") return HeadTarget::heart;
  if (s == "random") return HeadTarget::random;
  throw ValidationError("head target must be click|heart|random", path);
}

inline const char* metric_kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::clicks: return "clicks";
    case MetricKind::hearts: return "hearts";
    case MetricKind::topic_coverage: return "topic_coverage";
  }
  return "clicks";
}

inline MetricKind parse_metric_kind(const std::string& s, const std::string& path) {
  if (s == "clicks") return MetricKind::clicks;
  if (s == "hearts") return MetricKind::hearts;
  if (s == "topic_coverage") return MetricKind::topic_coverage;
  throw ValidationError("metric kind must be clicks|hearts|topic_coverage", path);
}

inline std::vector<HeadDef> heads_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError("head list must be an array", path);
  std::vector<HeadDef> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto& h = j[i];
    if (!h.is_object() || !h.contains("name")) throw ValidationError("head needs a name", p);
    out.push_back({h.at("name").get<std::string>(), parse_target(h.value("target", "click"), p + ".target"),
                   h.value("noise", 1.0)});
  }
  return out;
}

inline json heads_to_json(const std::vector<HeadDef>& heads) {
  json a = json::array();
  for (const auto& h : heads) a.push_back({{"name", h.name}, {"target", target_name(h.target)}, {"noise", h.noise}});
  return a;
}

}  // namespace detail

inline json to_json(const Scenario& s) {
  json metrics = json::array();
  for (const auto& m : s.metrics) metrics.push_back({{"name", m.name}, {"kind", detail::metric_kind_name(m.kind)}});
  return json{{"name", s.name},
              {"seed", s.seed},
              {"pool_size", s.pool_size},
              {"topics", s.topics},
              {"latent_dim", s.latent_dim},
              {"rank_fidelity", s.rank_fidelity},
              {"user_model",
               {{"latent_scale", s.latent_scale}, {"click_offset", s.click_offset}, {"heart_offset", s.heart_offset}}},
              {"heads", {{"pre", detail::heads_to_json(s.pre_heads)}, {"rank", detail::heads_to_json(s.rank_heads)}}},
              {"metrics", metrics},
              {"cost", {{"c_rank", s.cost.c_rank}, {"c_re", s.cost.c_re}, {"c_max", s.cost.c_max}}},
              {"defaults", s.defaults.to_json()},
              {"num_requests", s.num_requests},
              {"heuristic",
               {{"uniform_prob", s.heuristic.uniform_prob},
                {"step_frac", s.heuristic.step_frac},
                {"nonsensitive_prob", s.heuristic.nonsensitive_prob}}}};
}

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
  Scenario s;
  try {
    s.name = j.value("name", s.name);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.pool_size = j.at("pool_size").get<int>();
    s.topics = j.at("topics").get<int>();
    s.latent_dim = j.value("latent_dim", s.latent_dim);
    s.rank_fidelity = j.value("rank_fidelity", s.rank_fidelity);
    if (j.contains("user_model")) {
      const auto& u = j["user_model"];
      s.latent_scale = u.value("latent_scale", s.latent_scale);
      s.click_offset = u.value("click_offset", s.click_offset);
      s.heart_offset = u.value("heart_offset", s.heart_offset);
    }
    s.pre_heads = detail::heads_from_json(j.at("heads").at("pre"), "heads.pre");
    s.rank_heads = detail::heads_from_json(j.at("heads").at("rank"), "heads.rank");
    if (j.contains("metrics")) {
      const auto& ms = j["metrics"];
      for (std::size_t i = 0; i < ms.size(); ++i)
        s.metrics.push_back({ms[i].at("name").get<std::string>(),
                             detail::parse_metric_kind(ms[i].at("kind").get<std::string>(),
                                                       "metrics[" + std::to_string(i) + "].kind")});
    } else {
      s.metrics = default_metrics();
    }
    if (j.contains("cost")) {
      const auto& c = j["cost"];
      s.cost.c_rank = c.value("c_rank", s.cost.c_rank);
      s.cost.c_re = c.value("c_re", s.cost.c_re);
      if (c.contains("c_max") && !c["c_max"].is_null()) s.cost.c_max = c["c_max"].get<double>();
    }
    if (j.contains("defaults")) s.defaults = SystemConfig::from_json(j["defaults"]);
    s.num_requests = j.value("num_requests", s.num_requests);
    if (j.contains("heuristic")) {
      const auto& h = j["heuristic"];
      s.heuristic.uniform_prob = h.value("uniform_prob", s.heuristic.uniform_prob);
      s.heuristic.step_frac = h.value("step_frac", s.heuristic.step_frac);
      s.heuristic.nonsensitive_prob = h.value("nonsensitive_prob", s.heuristic.nonsensitive_prob);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario schema violation: ") + e.what());
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const fs::path& path) { return scenario_from_json(read_json(path)); }

inline void save_scenario(const Scenario& s, const fs::path& path) { write_json(path, to_json(s)); }

}  // namespace rectune::sim
