#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rectune/config.hpp"
#include "rectune/core/io.hpp"
#include "rectune/sim/utility.hpp"

namespace rectune::skills {

// Machine-checkable knowledge. Threshold forms bound a parameter directly;
// monotone forms say moving past `threshold` in the stated direction hurts.
enum class Relation { le, ge, monotone_up_hurts, monotone_down_hurts };

inline const char* relation_name(Relation r) {
  switch (r) {
    case Relation::le: return "<=";
    case Relation::ge: return ">=";
    case Relation::monotone_up_hurts: return "monotone_up_hurts";
    case Relation::monotone_down_hurts: return "monotone_down_hurts";
  }
  return "<=";
}

inline Relation parse_relation(const std::string& s, const std::string& path) {
  if (s == "<=" || s == "le") return Relation::le;
  if (s == ">=" || s == "ge") return Relation::ge;
  if (s == "monotone_up_hurts") return Relation::monotone_up_hurts;
  if (s == "monotone_down_hurts") return Relation::monotone_down_hurts;
  throw ValidationError("relation must be <=, >=, monotone_up_hurts or monotone_down_hurts", path);
}

struct KnowledgeRule {
  std::string parameter;
  Relation relation = Relation::le;
  std::optional<double> threshold;
  std::optional<std::string> metric;

  // A rule without a threshold is advisory only.
  bool violated_by(const SystemConfig& c) const {
    if (!threshold || !c.has(parameter)) return false;
    const double v = c.at(parameter);
    switch (relation) {
      case Relation::le:
      case Relation::monotone_up_hurts: return v > *threshold;
      case Relation::ge:
      case Relation::monotone_down_hurts: return v < *threshold;
    }
    return false;
  }

  friend bool operator==(const KnowledgeRule&, const KnowledgeRule&) = default;
};

struct Provenance {
  bool learned = false;
  std::vector<std::string> tasks;  // source task ids for learned entries

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct KnowledgeEntry {
  std::string text;
  std::optional<KnowledgeRule> rule;
  Provenance provenance;
  TimePoint created_at{};
  double confidence = 1.0;

  friend bool operator==(const KnowledgeEntry&, const KnowledgeEntry&) = default;
};

// Declarative handle to a platform endpoint the Online agent may call.
struct ToolDescriptor {
  std::string id;
  std::string description;

  friend bool operator==(const ToolDescriptor&, const ToolDescriptor&) = default;
};

struct Requirement {
  SearchSpace search_space;
  std::string output_schema = "rectune.config.v1";
  std::string infra_constraints;

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

struct Skill {
  std::string name;
  int version = 1;
  std::string task_context;
  Requirement requirement;
  NorthStar north_star;
  SystemConfig initial_config;
  std::vector<KnowledgeEntry> domain_knowledge;
  std::vector<ToolDescriptor> tools;

  const SearchSpace& space() const noexcept { return requirement.search_space; }

  void validate() const {
    if (name.empty()) throw ValidationError("skill name required", "name");
    if (version < 1) throw ValidationError("version must be >= 1", "version");
    requirement.search_space.validate("requirement.search_space");
    if (north_star.primary.empty()) throw ValidationError("at least one primary metric required", "north_star.primary");
    std::set<std::string> primaries;
    for (const auto& p : north_star.primary) primaries.insert(p.metric);
    for (const auto& g : north_star.guardrails)
      if (primaries.contains(g.metric))
        throw ValidationError("metric '" + g.metric + "' is both primary and guardrail", "north_star.guardrails");
    requirement.search_space.validate_config(initial_config, "initial_config");
    const auto metrics = north_star.metric_names();
    for (std::size_t i = 0; i < domain_knowledge.size(); ++i) {
      const auto& k = domain_knowledge[i];
      const std::string path = "domain_knowledge[" + std::to_string(i) + "]";
      if (!(k.confidence >= 0.0 && k.confidence <= 1.0))
        throw ValidationError("confidence must lie in [0,1]", path + ".confidence");
      if (k.provenance.learned && k.provenance.tasks.empty())
        throw ValidationError("learned entries need at least one source task", path + ".provenance");
      if (k.rule) {
        if (!requirement.search_space.contains(k.rule->parameter))
          throw ValidationError("rule references unknown parameter '" + k.rule->parameter + "'", path + ".rule.parameter");
        if (k.rule->metric && std::find(metrics.begin(), metrics.end(), *k.rule->metric) == metrics.end())
          throw ValidationError("rule references unknown metric '" + *k.rule->metric + "'", path + ".rule.metric");
      }
    }
  }

  friend bool operator==(const Skill&, const Skill&) = default;
};

// ---- JSON ----

inline json to_json(const KnowledgeEntry& k) {
  json rule = nullptr;
  if (k.rule) {
    rule = {{"parameter", k.rule->parameter},
            {"relation", relation_name(k.rule->relation)},
            {"threshold", k.rule->threshold ? json(*k.rule->threshold) : json(nullptr)},
            {"metric", k.rule->metric ? json(*k.rule->metric) : json(nullptr)}};
  }
  return json{{"text", k.text},
              {"rule", rule},
              {"provenance", {{"kind", k.provenance.learned ? "learned" : "authored"}, {"tasks", k.provenance.tasks}}},
              {"created_at", format_rfc3339(k.created_at)},
              {"confidence", k.confidence}};
}

inline KnowledgeEntry knowledge_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError("knowledge entry must be an object", path);
  KnowledgeEntry k;
  try {
    k.text = j.at("text").get<std::string>();
    if (j.contains("rule") && !j["rule"].is_null()) {
      const auto& r = j["rule"];
      KnowledgeRule rule;
      rule.parameter = r.at("parameter").get<std::string>();
      rule.relation = parse_relation(r.at("relation").get<std::string>(), path + ".rule.relation");
      if (r.contains("threshold") && !r["threshold"].is_null()) rule.threshold = r["threshold"].get<double>();
      if (r.contains("metric") && !r["metric"].is_null()) rule.metric = r["metric"].get<std::string>();
      k.rule = rule;
    }
    if (j.contains("provenance")) {
      const auto& p = j["provenance"];
      const std::string kind = p.value("kind", "authored");
      if (kind != "authored" && kind != "learned")
        throw ValidationError("provenance kind must be authored|learned", path + ".provenance.kind");
      k.provenance.learned = kind == "learned";
      k.provenance.tasks = p.value("tasks", std::vector<std::string>{});
    }
    if (j.contains("created_at")) k.created_at = parse_rfc3339(j["created_at"].get<std::string>());
    k.confidence = j.value("confidence", 1.0);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("schema violation: ") + e.what(), path);
  }
  return k;
}

inline json to_json(const Skill& s) {
  json knowledge = json::array();
  for (const auto& k : s.domain_knowledge) knowledge.push_back(to_json(k));
  json tools = json::array();
  for (const auto& t : s.tools) tools.push_back({{"id", t.id}, {"description", t.description}});
  return json{{"name", s.name},
              {"version", s.version},
              {"task_context", s.task_context},
              {"requirement",
               {{"search_space", to_json(s.requirement.search_space)},
                {"output_schema", s.requirement.output_schema},
                {"infra_constraints", s.requirement.infra_constraints}}},
              {"north_star", to_json(s.north_star)},
              {"initial_config", s.initial_config.to_json()},
              {"domain_knowledge", knowledge},
              {"tools", tools}};
}

inline Skill skill_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("skill must be a JSON object");
  Skill s;
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ValidationError("required field missing", key);
    return j[key];
  };
  try {
    s.name = need("name").get<std::string>();
    s.version = j.value("version", 1);
    s.task_context = j.value("task_context", "");
    const json& req = need("requirement");
    if (!req.contains("search_space")) throw ValidationError("required field missing", "requirement.search_space");
    s.requirement.search_space = search_space_from_json(req["search_space"], "requirement.search_space");
    s.requirement.output_schema = req.value("output_schema", s.requirement.output_schema);
    s.requirement.infra_constraints = req.value("infra_constraints", "");
    s.north_star = north_star_from_json(need("north_star"));
    s.initial_config = SystemConfig::from_json(need("initial_config"));
    if (j.contains("domain_knowledge")) {
      const auto& ks = j["domain_knowledge"];
      for (std::size_t i = 0; i < ks.size(); ++i)
        s.domain_knowledge.push_back(knowledge_from_json(ks[i], "domain_knowledge[" + std::to_string(i) + "]"));
    }
    if (j.contains("tools"))
      for (const auto& t : j["tools"]) s.tools.push_back({t.at("id").get<std::string>(), t.value("description", "")});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("skill schema violation: ") + e.what());
  }
  s.validate();
  return s;
}

inline Skill load_skill(const fs::path& path) { return skill_from_json(read_json(path)); }

inline void save_skill(const Skill& s, const fs::path& path) {
  s.validate();
  write_json(path, to_json(s));
}

}  // namespace rectune::skills
