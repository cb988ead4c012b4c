#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rectune/agents/actor.hpp"
#include "rectune/memory/store.hpp"

namespace rectune::agents {

enum class RejectReason { schema, bounds, rule, duplicate, failure_proximity, surplus };

inline const char* reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::schema: return "schema";
    case RejectReason::bounds: return "bounds";
    case RejectReason::rule: return "rule";
    case RejectReason::duplicate: return "duplicate";
    case RejectReason::failure_proximity: return "failure_proximity";
    case RejectReason::surplus: return "surplus";
  }
  return "schema";
}

struct Review {
  bool approved = false;
  std::optional<RejectReason> reason;
  std::string message;
};

struct CriticVerdict {
  std::vector<Review> reviews;        // one per proposal, input order
  std::vector<std::size_t> approved;  // proposal indices, most promising first
  std::string comments;
};

struct CriticOptions {
  double duplicate_tolerance = 1e-6;  // relative L-infinity
  double failure_radius = 0.05;       // relative L-infinity
};

// What the Critic reads from memory.
struct CriticContext {
  std::vector<SystemConfig> history;   // configs already approved / run / completed
  std::vector<SystemConfig> failures;  // completed configs that broke a guardrail
  std::optional<SystemConfig> best_elite;
};

inline bool violated_guardrail(const mem::TaskRecord& r, const NorthStar& ns) {
  if (!r.results) return false;
  for (const auto& g : ns.guardrails) {
    auto it = r.results->find(g.metric);
    if (it == r.results->end() || !it->second.relative_delta_pct || !g.satisfied(*it->second.relative_delta_pct))
      return true;
  }
  return false;
}

inline CriticContext critic_context(const std::vector<mem::TaskRecord>& tasks, const std::vector<mem::TaskRecord>& elites,
                                    const NorthStar& ns) {
  CriticContext ctx;
  for (const auto& t : tasks) {
    using mem::TaskStatus;
    if (t.status != TaskStatus::Approved && t.status != TaskStatus::Running && t.status != TaskStatus::Completed) continue;
    SystemConfig c;
    try {
      c = t.config_values();
    } catch (const ValidationError&) {
      continue;
    }
    ctx.history.push_back(c);
    if (t.status == TaskStatus::Completed && violated_guardrail(t, ns)) ctx.failures.push_back(c);
  }
  if (!elites.empty()) ctx.best_elite = elites.front().config_values();
  return ctx;
}

inline CriticContext critic_context(const mem::MemoryStore& store, const NorthStar& ns, std::size_t elite_limit = 1) {
  return critic_context(store.list_tasks(), store.read_elites(elite_limit), ns);
}

// Rule pipeline: schema -> bounds -> knowledge rules -> duplicate -> failure
// proximity. Survivors are ranked by relative L-infinity distance to the best
// elite (stable; input order without elites) and truncated to `keep`.
inline CriticVerdict critic_review(const std::vector<ProposedCandidate>& proposals, const skills::Skill& skill,
                                   const CriticContext& ctx, std::size_t keep, const CriticOptions& opt = {}) {
  if (keep < 1) throw ValidationError("critic must keep at least one proposal", "keep");
  const SearchSpace& space = skill.space();
  CriticVerdict v;
  v.reviews.resize(proposals.size());
  std::vector<std::size_t> survivors;
  std::vector<SystemConfig> seen = ctx.history;

  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const SystemConfig& c = proposals[i].config;
    Review& r = v.reviews[i];
    r.approved = false;
    const auto issues = space.check(c);
    auto first_issue = [&](auto pred) -> const ConfigIssue* {
      auto it = std::find_if(issues.begin(), issues.end(), pred);
      return it == issues.end() ? nullptr : &*it;
    };
    if (const auto* is = first_issue([](const ConfigIssue& x) {
          return x.kind == ConfigIssueKind::missing || x.kind == ConfigIssueKind::extra ||
                 x.kind == ConfigIssueKind::not_finite;
        })) {
      r.reason = RejectReason::schema;
      r.message = is->parameter + ": " + is->message;
      continue;
    }
    if (const auto* is = first_issue([](const ConfigIssue&) { return true; })) {
      r.reason = RejectReason::bounds;
      r.message = is->parameter + ": " + is->message;
      continue;
    }
    const skills::KnowledgeEntry* broken = nullptr;
    for (const auto& k : skill.domain_knowledge)
      if (k.rule && k.rule->violated_by(c)) {
        broken = &k;
        break;
      }
    if (broken) {
      r.reason = RejectReason::rule;
      r.message = "violates: " + broken->text;
      continue;
    }
    if (std::any_of(seen.begin(), seen.end(),
                    [&](const SystemConfig& h) { return relative_linf(c, h, space) <= opt.duplicate_tolerance; })) {
      r.reason = RejectReason::duplicate;
      r.message = "matches an already tested or approved configuration";
      continue;
    }
    if (std::any_of(ctx.failures.begin(), ctx.failures.end(),
                    [&](const SystemConfig& f) { return relative_linf(c, f, space) <= opt.failure_radius; })) {
      r.reason = RejectReason::failure_proximity;
      r.message = "within " + json(opt.failure_radius).dump() + " of a guardrail-violating configuration";
      continue;
    }
    seen.push_back(c);
    survivors.push_back(i);
  }

  if (ctx.best_elite) {
    std::vector<double> dist(proposals.size(), 0.0);
    for (auto i : survivors) dist[i] = relative_linf(proposals[i].config, *ctx.best_elite, space);
    std::stable_sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  }
  for (std::size_t rank = 0; rank < survivors.size(); ++rank) {
    Review& r = v.reviews[survivors[rank]];
    if (rank < keep) {
      r.approved = true;
      v.approved.push_back(survivors[rank]);
    } else {
      r.reason = RejectReason::surplus;
      r.message = "outranked by closer-to-elite proposals";
    }
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& r : v.reviews)
    if (r.reason) ++counts[reason_name(*r.reason)];
  std::ostringstream cm;
  cm << "approved " << v.approved.size() << " of " << proposals.size();
  if (!counts.empty()) {
    cm << "; rejected:";
    for (const auto& [reason, n] : counts) cm << " " << reason << "=" << n;
  }
  v.comments = cm.str();
  return v;
}

// Optional model pass over an already rule-approved verdict. It can only move
// approved proposals to rejected; any model failure leaves the verdict as is.
inline CriticVerdict llm_critic_pass(CriticVerdict verdict, const std::vector<ProposedCandidate>& proposals,
                                     const skills::Skill& skill, const skills::HistoryDigest& digest,
                                     llm::ChatBackend& backend, const std::string& model) {
  std::vector<skills::PromptProposal> shown;
  for (auto i : verdict.approved) shown.push_back({proposals[i].config.canonical(), proposals[i].explanation});
  if (shown.empty()) return verdict;
  try {
    llm::ChatRequest req;
    req.model = model;
    req.messages = {{llm::Role::system, "You are the Critic agent of a recommendation-system configuration tuner."},
                    {llm::Role::user, skills::render_critic_prompt(skill, shown, digest)}};
    const auto resp = backend.complete(req);
    const auto start = resp.text.find('[');
    if (start == std::string::npos) return verdict;
    const auto end = llm::detail::match_bracket(resp.text, start);
    if (end == std::string::npos) return verdict;
    const json arr = json::parse(resp.text.substr(start, end - start));
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < verdict.approved.size(); ++k) {
      bool approve = true;
      std::string comment;
      for (const auto& e : arr)
        if (e.is_object() && e.value("index", -1) == static_cast<int>(k)) {
          approve = e.value("approve", true);
          comment = e.value("comment", "");
        }
      const std::size_t idx = verdict.approved[k];
      if (approve) {
        keep.push_back(idx);
      } else {
        verdict.reviews[idx] = {false, RejectReason::rule, "model critic: " + comment};
      }
    }
    verdict.approved = std::move(keep);
  } catch (const std::exception&) {
  }
  return verdict;
}

}  // namespace rectune::agents
