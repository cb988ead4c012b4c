#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rectune/memory/task_record.hpp"
#include "rectune/skillhub/skill.hpp"

namespace rectune::agents {

struct ParamInsight {
  std::optional<double> sensitivity;  // |Pearson(delta_param, delta_utility)| in [0,1]
  std::size_t samples = 0;            // completed tasks considered
  int trend = 0;                      // sign of the correlation

  friend bool operator==(const ParamInsight&, const ParamInsight&) = default;
};

struct InsightReport {
  std::string scope = "self";       // "self" | "cross"
  std::vector<std::string> skills;  // sorted
  std::map<std::string, ParamInsight> params;
  std::vector<skills::KnowledgeEntry> patterns;

  friend bool operator==(const InsightReport&, const InsightReport&) = default;
};

struct InsightOptions {
  std::size_t min_varied = 3;       // sensitivity needs the parameter varied in this many tasks
  std::size_t min_pattern_n = 5;
  double pattern_threshold = 0.5;   // |corr| needed to emit a pattern
};

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Self-learning over one skill's completed tasks: for each parameter, the
// correlation between its range-normalized shift from the initial config and
// the task's utility delta vs control. Strong correlations become monotone
// knowledge entries that forbid moving past the explored frontier in the
// harmful direction.
inline InsightReport insight_self_learn(const skills::Skill& skill, const std::vector<mem::TaskRecord>& tasks,
                                        TimePoint now = {}, const InsightOptions& opt = {}) {
  InsightReport rep;
  rep.skills = {skill.name};

  struct Obs {
    const mem::TaskRecord* task;
    SystemConfig config;
  };
  std::vector<Obs> done;
  for (const auto& t : tasks) {
    if (t.status != mem::TaskStatus::Completed || !t.evaluation) continue;
    try {
      done.push_back({&t, t.config_values()});
    } catch (const ValidationError&) {
    }
  }
  if (done.size() < opt.min_varied) return rep;

  for (const auto& [name, spec] : skill.space().params) {
    std::vector<double> dp, du, seen;
    std::vector<std::string> ids;
    std::size_t varied = 0;
    const double init = skill.initial_config.get_or(name, spec.lower);
    for (const auto& o : done) {
      if (!o.config.has(name)) continue;
      const double d = (o.config.at(name) - init) / spec.range();
      if (d != 0.0) ++varied;
      dp.push_back(d);
      seen.push_back(o.config.at(name));
      du.push_back(o.task->evaluation->raw);
      ids.push_back(o.task->id);
    }
    ParamInsight pi;
    pi.samples = dp.size();
    if (varied >= opt.min_varied) {
      if (auto r = pearson(dp, du)) {
        pi.sensitivity = std::abs(*r);
        pi.trend = *r > 0 ? 1 : (*r < 0 ? -1 : 0);
        if (std::abs(*r) >= opt.pattern_threshold && dp.size() >= opt.min_pattern_n) {
          skills::KnowledgeRule rule;
          rule.parameter = name;
          {
            const bool up_hurts = *r < 0;
            rule.relation = up_hurts ? skills::Relation::monotone_up_hurts : skills::Relation::monotone_down_hurts;
            rule.threshold = up_hurts ? *std::max_element(seen.begin(), seen.end())
                                      : *std::min_element(seen.begin(), seen.end());
            skills::KnowledgeEntry k;
            k.text = up_hurts ? "increasing " + name + " correlates with decreasing utility"
                              : "decreasing " + name + " correlates with decreasing utility";
            k.rule = rule;
            k.provenance = {true, ids};
            k.created_at = now;
            k.confidence = std::abs(*r);
            rep.patterns.push_back(std::move(k));
          }
        }
      }
    }
    rep.params[name] = pi;
  }
  return rep;
}

struct SkillMemory {
  skills::Skill skill;
  std::vector<mem::TaskRecord> tasks;
};

// Map: self-learn per skill (in parallel). Reduce: per parameter name, the
// sample-weighted mean sensitivity and the sample-weighted majority trend;
// patterns deduplicated by (parameter, relation), highest confidence wins.
// Inputs are sorted by skill name first, so the result ignores input order.
inline InsightReport insight_cross_learn(const std::vector<SkillMemory>& memories, TimePoint now = {},
                                         const InsightOptions& opt = {}) {
  if (memories.empty()) throw ValidationError("cross-learning needs at least one skill memory");
  std::vector<const SkillMemory*> sorted;
  for (const auto& m : memories) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->skill.name < b->skill.name; });

  std::vector<std::future<InsightReport>> maps;
  for (const auto* m : sorted)
    maps.push_back(std::async(std::launch::async, [m, now, opt] { return insight_self_learn(m->skill, m->tasks, now, opt); }));
  std::vector<InsightReport> parts;
  for (auto& f : maps) parts.push_back(f.get());

  InsightReport out;
  out.scope = "cross";
  for (const auto* m : sorted) out.skills.push_back(m->skill.name);

  struct Acc {
    double weighted = 0.0;
    double weight = 0.0;
    double vote = 0.0;
    std::size_t samples = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& part : parts) {
    for (const auto& [name, pi] : part.params) {
      Acc& a = acc[name];
      a.samples += pi.samples;
      if (pi.sensitivity) {
        a.weighted += static_cast<double>(pi.samples) * *pi.sensitivity;
        a.weight += static_cast<double>(pi.samples);
        a.vote += static_cast<double>(pi.samples) * pi.trend;
      }
    }
  }
  for (const auto& [name, a] : acc) {
    ParamInsight pi;
    pi.samples = a.samples;
    if (a.weight > 0.0) {
      pi.sensitivity = a.weighted / a.weight;
      pi.trend = a.vote > 0 ? 1 : (a.vote < 0 ? -1 : 0);
    }
    out.params[name] = pi;
  }

  std::map<std::pair<std::string, int>, skills::KnowledgeEntry> best;
  for (const auto& part : parts)
    for (const auto& k : part.patterns) {
      const auto key = std::make_pair(k.rule->parameter, static_cast<int>(k.rule->relation));
      auto it = best.find(key);
      if (it == best.end() || k.confidence > it->second.confidence) best[key] = k;
    }
  for (auto& [key, k] : best) out.patterns.push_back(k);
  return out;
}

// ---- JSON ----

inline json to_json(const InsightReport& r) {
  json params = json::object();
  for (const auto& [name, p] : r.params)
    params[name] = {{"sensitivity", p.sensitivity ? json(*p.sensitivity) : json(nullptr)},
                    {"samples", p.samples},
                    {"trend", p.trend}};
  json patterns = json::array();
  for (const auto& k : r.patterns) patterns.push_back(skills::to_json(k));
  return json{{"scope", r.scope}, {"skills", r.skills}, {"params", params}, {"patterns", patterns}};
}

inline InsightReport insight_report_from_json(const json& j) {
  InsightReport r;
  r.scope = j.at("scope").get<std::string>();
  r.skills = j.at("skills").get<std::vector<std::string>>();
  for (auto& [name, p] : j.at("params").items()) {
    ParamInsight pi;
    if (!p.at("sensitivity").is_null()) pi.sensitivity = p["sensitivity"].get<double>();
    pi.samples = p.at("samples").get<std::size_t>();
    pi.trend = p.at("trend").get<int>();
    r.params[name] = pi;
  }
  const auto& ps = j.at("patterns");
  for (std::size_t i = 0; i < ps.size(); ++i)
    r.patterns.push_back(skills::knowledge_from_json(ps[i], "patterns[" + std::to_string(i) + "]"));
  return r;
}

}  // namespace rectune::agents
