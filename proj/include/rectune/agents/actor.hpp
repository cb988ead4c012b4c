#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "rectune/core/rng.hpp"
#include "rectune/llm/extract.hpp"
#include "rectune/memory/task_record.hpp"
#include "rectune/sim/scenario.hpp"
#include "rectune/skillhub/prompts.hpp"

namespace rectune::agents {

enum class Origin { heuristic, llm };

inline const char* origin_name(Origin o) { return o == Origin::llm ? "llm" : "heuristic"; }

struct ProposedCandidate {
  SystemConfig config;
  std::string explanation;
  Origin origin = Origin::heuristic;
};

namespace detail {

inline double to_search(const ParamSpec& p, double v) { return p.scale == ParamScale::log ? std::log(v) : v; }
inline double from_search(const ParamSpec& p, double v) { return p.scale == ParamScale::log ? std::exp(v) : v; }

inline double sample_uniform(const ParamSpec& p, KeyedRng& rng) {
  if (p.kind == ParamKind::integer && p.scale == ParamScale::linear) {
    const auto span = static_cast<std::uint64_t>(p.upper - p.lower) + 1;
    return p.lower + static_cast<double>(rng.below(span));
  }
  return p.clip(from_search(p, rng.uniform(to_search(p, p.lower), to_search(p, p.upper))));
}

inline std::string fmt(double v) { return json(v).dump(); }

}  // namespace detail

// Heuristic Actor. Per slot, with probability uniform_prob draw a uniform
// sample (log-scale parameters in log space); otherwise take the next base
// (round-robin over elites, else the initial config) and perturb it:
// sensitive parameters always, others with probability nonsensitive_prob,
// Gaussian step of step_frac * range, clipped and rounded.
inline std::vector<ProposedCandidate> heuristic_propose(const skills::Skill& skill,
                                                        const std::vector<std::pair<std::string, SystemConfig>>& bases,
                                                        std::size_t batch, std::uint64_t seed,
                                                        const sim::HeuristicParams& hp = {}) {
  if (batch < 1) throw ValidationError("batch size must be >= 1", "batch");
  const SearchSpace& space = skill.space();
  std::vector<ProposedCandidate> out;
  out.reserve(batch);
  std::size_t next_base = 0;
  for (std::size_t slot = 0; slot < batch; ++slot) {
    KeyedRng rng({seed, static_cast<std::uint64_t>(slot), tag("actor")});
    ProposedCandidate cand;
    if (rng.uniform() < hp.uniform_prob) {
      for (const auto& [name, p] : space.params) cand.config.params[name] = detail::sample_uniform(p, rng);
      cand.explanation = "Uniform exploration sample across the full search space.";
      out.push_back(std::move(cand));
      continue;
    }

    std::string base_name = "initial config";
    SystemConfig base = skill.initial_config;
    if (!bases.empty()) {
      base_name = bases[next_base % bases.size()].first;
      base = bases[next_base % bases.size()].second;
      ++next_base;
    }
    base = space.clip(base);

    std::vector<std::string> chosen;
    for (const auto& [name, p] : space.params)
      if (p.sensitive || rng.uniform() < hp.nonsensitive_prob) chosen.push_back(name);
    if (chosen.empty()) {
      auto it = space.params.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.below(space.params.size())));
      chosen.push_back(it->first);
    }

    cand.config = base;
    std::ostringstream why;
    why << "Perturbation of " << base_name << ":";
    for (const auto& name : chosen) {
      const ParamSpec& p = space.at(name);
      const double from = base.get_or(name, p.lower);
      const double width = detail::to_search(p, p.upper) - detail::to_search(p, p.lower);
      const double step = rng.normal(0.0, hp.step_frac * width);
      const double to = p.clip(detail::from_search(p, detail::to_search(p, from) + step));
      cand.config.params[name] = to;
      why << " " << (to > from ? "raise " : to < from ? "lower " : "hold ") << name << " " << detail::fmt(from) << " -> "
          << detail::fmt(to) << (p.sensitive ? " (sensitive)" : "") << ";";
    }
    cand.explanation = why.str();
    out.push_back(std::move(cand));
  }
  return out;
}

inline std::vector<std::pair<std::string, SystemConfig>> elite_bases(const std::vector<mem::TaskRecord>& elites) {
  std::vector<std::pair<std::string, SystemConfig>> out;
  for (const auto& e : elites) out.emplace_back(e.id, e.config_values());
  return out;
}

struct LlmSettings {
  llm::ChatBackend* backend = nullptr;
  std::string model;
  double temperature = 0.2;
  std::map<std::string, std::string> extra_args;
};

// LLM Actor: render the prompt, call the model, parse the JSON array. Short
// answers are padded with heuristic proposals; transport or parse failures
// raise LlmError carrying an excerpt of the raw response.
inline std::vector<ProposedCandidate> llm_propose(const skills::Skill& skill, const std::vector<mem::TaskRecord>& elites,
                                                  std::size_t batch, std::uint64_t seed, const LlmSettings& settings,
                                                  const sim::HeuristicParams& hp = {}) {
  if (!settings.backend) throw ValidationError("llm proposer selected without a backend", "proposer");
  llm::ChatRequest req;
  req.model = settings.model;
  req.temperature = settings.temperature;
  req.messages = {{llm::Role::system, "You are the Actor agent of a recommendation-system configuration tuner."},
                  {llm::Role::user, skills::render_actor_prompt(skill, elites, batch, settings.extra_args)}};
  const llm::ChatResponse resp = settings.backend->complete(req);

  llm::ExtractResult parsed;
  try {
    parsed = llm::extract_json_array(resp.text);
  } catch (const llm::ParseError& e) {
    throw llm::LlmError(std::string(e.what()) + "; response excerpt: " + resp.text.substr(0, 200));
  }
  std::vector<ProposedCandidate> out;
  for (auto& c : parsed.candidates) {
    if (out.size() >= batch) break;
    if (c.explanation.empty()) c.explanation = "(no explanation given by the model)";
    out.push_back({std::move(c.config), std::move(c.explanation), Origin::llm});
  }
  if (out.size() < batch) {
    auto pad = heuristic_propose(skill, elite_bases(elites), batch - out.size(), seed, hp);
    for (auto& p : pad) out.push_back(std::move(p));
  }
  return out;
}

enum class Proposer { heuristic, llm };

inline std::vector<ProposedCandidate> actor_propose(const skills::Skill& skill, const std::vector<mem::TaskRecord>& elites,
                                                    std::size_t batch, Proposer backend, std::uint64_t seed,
                                                    const sim::HeuristicParams& hp = {},
                                                    const LlmSettings& llm_settings = {}) {
  if (backend == Proposer::llm) return llm_propose(skill, elites, batch, seed, llm_settings, hp);
  return heuristic_propose(skill, elite_bases(elites), batch, seed, hp);
}

}  // namespace rectune::agents
