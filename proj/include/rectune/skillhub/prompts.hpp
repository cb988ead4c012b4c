#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rectune/memory/task_record.hpp"
#include "rectune/skillhub/skill.hpp"

namespace rectune::skills {

// Section layout reconstructed from the described prompt structure; the exact
// production wording is not known.

namespace detail {

inline std::string num(double v) { return json(v).dump(); }

inline void heading(std::ostringstream& out, const std::string& title) { out << "\n## " << title << "\n"; }

inline void render_rules(std::ostringstream& out, const Skill& skill) {
  if (skill.domain_knowledge.empty()) {
    out << "(none)\n";
    return;
  }
  for (const auto& k : skill.domain_knowledge) {
    out << "- " << k.text;
    if (k.rule) {
      out << " [rule: " << k.rule->parameter << " " << relation_name(k.rule->relation);
      if (k.rule->threshold) out << " " << num(*k.rule->threshold);
      out << "]";
    }
    out << " (" << (k.provenance.learned ? "learned" : "authored") << ", confidence " << num(k.confidence) << ")\n";
  }
}

}  // namespace detail

inline constexpr std::size_t kPromptHistoryCap = 10;

// Actor prompt: context, parameter table, north star, knowledge, elite
// history (newest first), output contract, then user-injected arguments.
inline std::string render_actor_prompt(const Skill& skill, const std::vector<mem::TaskRecord>& elites,
                                       std::size_t batch_size, const std::map<std::string, std::string>& extra_args = {},
                                       std::size_t history_cap = kPromptHistoryCap) {
  std::ostringstream out;
  out << "# Actor: propose system configurations for skill '" << skill.name << "' (v" << skill.version << ")\n";

  detail::heading(out, "Task context");
  out << (skill.task_context.empty() ? "(none)" : skill.task_context) << "\n";
  if (!skill.requirement.infra_constraints.empty())
    out << "Infrastructure constraints: " << skill.requirement.infra_constraints << "\n";

  detail::heading(out, "Parameters");
  out << "| name | lower | upper | kind | scale | sensitive | current |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& [name, p] : skill.space().params) {
    out << "| " << name << " | " << detail::num(p.lower) << " | " << detail::num(p.upper) << " | "
        << (p.kind == ParamKind::integer ? "integer" : "continuous") << " | "
        << (p.scale == ParamScale::log ? "log" : "linear") << " | " << (p.sensitive ? "yes" : "no") << " | "
        << (skill.initial_config.has(name) ? detail::num(skill.initial_config.at(name)) : "-") << " |\n";
  }

  detail::heading(out, "North-star metrics");
  for (const auto& p : skill.north_star.primary)
    out << "- primary: " << p.metric << " (" << direction_name(p.direction) << ")\n";
  for (const auto& g : skill.north_star.guardrails)
    out << "- guardrail: " << g.metric << (g.direction == Direction::maximize ? " >= " : " <= ")
        << detail::num(g.baseline) << "\n";

  detail::heading(out, "Domain knowledge");
  detail::render_rules(out, skill);

  detail::heading(out, "Elite history");
  if (elites.empty()) {
    out << "no prior experiments\n";
  } else {
    std::vector<const mem::TaskRecord*> ordered;
    for (const auto& e : elites) ordered.push_back(&e);
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
      if (a->proposed_time != b->proposed_time) return a->proposed_time > b->proposed_time;
      return a->id > b->id;
    });
    if (ordered.size() > history_cap) ordered.resize(history_cap);
    for (const auto* e : ordered) {
      out << "- " << e->id << " config=" << e->config;
      if (e->results) {
        out << " deltas:";
        for (const auto& [m, d] : *e->results)
          out << " " << m << "=" << (d.relative_delta_pct ? detail::num(*d.relative_delta_pct) + "%" : "undefined")
              << (d.significant ? "*" : "");
      }
      if (e->evaluation) out << " utility=" << detail::num(e->evaluation->raw);
      out << "\n";
    }
  }

  detail::heading(out, "Instructions");
  out << "Focus on the sensitive parameters first. Stay inside the bounds above.\n";
  out << "Return a JSON array of exactly " << batch_size
      << " objects, each {\"config\": {<parameter>: <number>, ...}, \"explanation\": \"<why this shift>\"}.\n";
  out << "Every config must list every parameter. Explain each parameter shift.\n";

  if (!extra_args.empty()) {
    detail::heading(out, "Extra arguments");
    for (const auto& [k, v] : extra_args) out << k << ": " << v << "\n";
  }
  return out.str();
}

struct PromptProposal {
  std::string config;
  std::string explanation;
};

// Historical failure cases shown to the LLM critic.
struct HistoryDigest {
  std::vector<std::string> failure_cases;
};

inline std::string render_critic_prompt(const Skill& skill, const std::vector<PromptProposal>& proposals,
                                        const HistoryDigest& history) {
  std::ostringstream out;
  out << "# Critic: review proposed configurations for skill '" << skill.name << "' (v" << skill.version << ")\n";

  detail::heading(out, "Task context");
  out << (skill.task_context.empty() ? "(none)" : skill.task_context) << "\n";

  detail::heading(out, "Format requirement");
  out << "Output schema " << skill.requirement.output_schema << ": every parameter of the search space, numeric.\n";
  for (const auto& [name, p] : skill.space().params)
    out << "- " << name << " in [" << detail::num(p.lower) << ", " << detail::num(p.upper) << "]"
        << (p.kind == ParamKind::integer ? " integer" : "") << "\n";

  detail::heading(out, "System guardrails");
  if (skill.north_star.guardrails.empty()) out << "(none)\n";
  for (const auto& g : skill.north_star.guardrails)
    out << "- " << g.metric << (g.direction == Direction::maximize ? " >= " : " <= ") << detail::num(g.baseline) << "\n";

  detail::heading(out, "Instruction constraints");
  detail::render_rules(out, skill);

  if (!history.failure_cases.empty()) {
    detail::heading(out, "Known historical failure cases");
    for (const auto& f : history.failure_cases) out << "- " << f << "\n";
  }

  detail::heading(out, "Proposals");
  for (std::size_t i = 0; i < proposals.size(); ++i)
    out << i << ". config=" << proposals[i].config << "\n   explanation: " << proposals[i].explanation << "\n";

  detail::heading(out, "Instructions");
  out << "Return a JSON array with one object per proposal: {\"index\": <n>, \"approve\": true|false, "
         "\"comment\": \"<reason>\"}.\n";
  return out.str();
}

}  // namespace rectune::skills
