#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rectune/agents/insight.hpp"
#include "rectune/memory/store.hpp"
#include "rectune/skillhub/repository.hpp"

namespace rectune::agents {

struct EvolveOptions {
  std::size_t min_completed = 5;  // bounds only move with this much evidence
  double margin = 0.2;            // fraction of the current width kept around the elite hull
};

struct EvolveResult {
  skills::Skill skill;
  std::size_t knowledge_added = 0;
  std::size_t knowledge_retired = 0;
  std::vector<std::string> marked_sensitive;
  std::vector<std::string> tightened;
};

// New version of `skill`: learned patterns appended (deduplicated by
// parameter and relation), the top quartile of sensitive parameters flagged,
// and bounds moved to the elite hull plus a margin, clipped to the v1 bounds.
inline EvolveResult skill_evolve(const skills::Skill& skill, const InsightReport& report,
                                 const std::vector<mem::TaskRecord>& tasks, const std::vector<mem::TaskRecord>& elites,
                                 const SearchSpace& v1_space, const EvolveOptions& opt = {}) {
  if (report.scope != "self" || report.skills != std::vector<std::string>{skill.name})
    throw ValidationError("insight report scope does not match skill '" + skill.name + "'", "report.scope");
  EvolveResult out{skill, 0, 0, {}, {}};
  skills::Skill& s = out.skill;

  // Learned rules follow the latest evidence: re-supported ones are refreshed
  // in place, unsupported ones retired. Authored entries are never touched.
  using Key = std::pair<std::string, int>;
  auto key_of = [](const skills::KnowledgeEntry& k) { return Key{k.rule->parameter, static_cast<int>(k.rule->relation)}; };
  std::map<Key, const skills::KnowledgeEntry*> fresh;
  for (const auto& k : report.patterns)
    if (k.rule && s.space().contains(k.rule->parameter)) fresh.emplace(key_of(k), &k);
  std::set<Key> known;
  std::vector<skills::KnowledgeEntry> kept;
  for (auto& k : s.domain_knowledge) {
    if (k.rule && k.provenance.learned) {
      auto it = fresh.find(key_of(k));
      if (it == fresh.end()) {
        ++out.knowledge_retired;
        continue;
      }
      k = *it->second;
    }
    if (k.rule) known.insert(key_of(k));
    kept.push_back(std::move(k));
  }
  s.domain_knowledge = std::move(kept);
  for (const auto& [key, k] : fresh) {
    if (!known.insert(key).second) continue;
    s.domain_knowledge.push_back(*k);
    ++out.knowledge_added;
  }

  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [name, pi] : report.params)
    if (pi.sensitivity && s.space().contains(name)) ranked.emplace_back(*pi.sensitivity, name);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t top = (ranked.size() + 3) / 4;
  for (std::size_t i = 0; i < top; ++i) {
    ParamSpec& p = s.requirement.search_space.params.at(ranked[i].second);
    if (!p.sensitive) {
      p.sensitive = true;
      out.marked_sensitive.push_back(ranked[i].second);
    }
  }

  const auto completed = std::count_if(tasks.begin(), tasks.end(),
                                       [](const mem::TaskRecord& t) { return t.status == mem::TaskStatus::Completed; });
  if (static_cast<std::size_t>(completed) >= opt.min_completed && !elites.empty()) {
    std::vector<SystemConfig> pts;
    for (const auto& e : elites) pts.push_back(e.config_values());
    for (auto& [name, p] : s.requirement.search_space.params) {
      const ParamSpec& base = v1_space.at(name);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& c : pts) {
        lo = std::min(lo, c.at(name));
        hi = std::max(hi, c.at(name));
      }
      if (lo < base.lower || hi > base.upper)
        throw StateError("evolution aborted: an elite lies outside the original bounds of '" + name + "'");
      const double width = p.range();
      double nlo = std::max(base.lower, lo - opt.margin * width);
      double nhi = std::min(base.upper, hi + opt.margin * width);
      if (p.kind == ParamKind::integer) {
        nlo = std::floor(nlo);
        nhi = std::ceil(nhi);
      }
      nlo = std::max(base.lower, nlo);
      nhi = std::min(base.upper, nhi);
      if (!(nlo < nhi)) continue;  // degenerate hull: keep the current bounds
      if (lo < nlo || hi > nhi) throw StateError("evolution aborted: new bounds of '" + name + "' would exclude elites");
      // The region follows the elites; it may regrow toward v1 when they sit
      // at its edge, but never past v1.
      if (nlo != p.lower || nhi != p.upper) {
        if (nlo > p.lower || nhi < p.upper) out.tightened.push_back(name);
        p.lower = nlo;
        p.upper = nhi;
      }
    }
    s.initial_config = s.space().clip(s.initial_config);
  }

  ++s.version;
  s.validate();
  return out;
}

// Joint skill over two disjoint skills. Parameters are namespaced
// "<skill>::<param>"; shared guardrails keep the stricter baseline.
inline skills::Skill skill_compose(const skills::Skill& a, const skills::Skill& b) {
  if (a.name == b.name) throw ValidationError("cannot compose a skill with itself", "name");
  skills::Skill s;
  s.name = a.name + "+" + b.name;
  s.version = 1;
  s.task_context = a.task_context + "\n\n" + b.task_context;
  s.requirement.output_schema = a.requirement.output_schema;
  s.requirement.infra_constraints = a.requirement.infra_constraints;
  if (!b.requirement.infra_constraints.empty()) {
    if (!s.requirement.infra_constraints.empty()) s.requirement.infra_constraints += "\n";
    s.requirement.infra_constraints += b.requirement.infra_constraints;
  }

  auto prefixed = [](const skills::Skill& k, const std::string& p) { return k.name + "::" + p; };
  for (const auto* src : {&a, &b}) {
    for (const auto& [name, spec] : src->space().params) s.requirement.search_space.params[prefixed(*src, name)] = spec;
    for (const auto& [name, v] : src->initial_config.params) s.initial_config.params[prefixed(*src, name)] = v;
    for (auto k : src->domain_knowledge) {
      if (k.rule) k.rule->parameter = prefixed(*src, k.rule->parameter);
      s.domain_knowledge.push_back(std::move(k));
    }
    for (const auto& t : src->tools)
      if (std::none_of(s.tools.begin(), s.tools.end(), [&](const auto& x) { return x.id == t.id; })) s.tools.push_back(t);
  }

  std::map<std::string, Direction> primary;
  for (const auto* src : {&a, &b})
    for (const auto& g : src->north_star.primary) {
      auto [it, fresh] = primary.emplace(g.metric, g.direction);
      if (!fresh && it->second != g.direction)
        throw ValidationError("metric '" + g.metric + "' has conflicting directions", "north_star.primary");
    }
  std::map<std::string, Guardrail> guards;
  for (const auto* src : {&a, &b})
    for (const auto& g : src->north_star.guardrails) {
      if (primary.contains(g.metric))
        throw ValidationError("metric '" + g.metric + "' is primary in one skill and a guardrail in the other",
                              "north_star");
      auto [it, fresh] = guards.emplace(g.metric, g);
      if (fresh) continue;
      if (it->second.direction != g.direction)
        throw ValidationError("guardrail '" + g.metric + "' has conflicting directions", "north_star.guardrails");
      // Stricter: the higher floor for maximize, the lower ceiling for minimize.
      if (g.direction == Direction::maximize ? g.baseline > it->second.baseline : g.baseline < it->second.baseline)
        it->second.baseline = g.baseline;
    }
  for (const auto& [m, d] : primary) s.north_star.primary.push_back({m, d});
  for (const auto& [m, g] : guards) s.north_star.guardrails.push_back(g);
  s.validate();
  return s;
}

}  // namespace rectune::agents
