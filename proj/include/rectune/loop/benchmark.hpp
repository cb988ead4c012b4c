#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "rectune/abtest/experiment.hpp"
#include "rectune/agents/actor.hpp"
#include "rectune/skillhub/skill.hpp"

namespace rectune::loop {

struct Scored {
  SystemConfig config;
  UtilityResult utility;
  ab::MetricReport report;
  double cost = 0.0;
};

// Scores configurations exactly as a paired experiment against `control`
// would: same requests, same keyed feedback, same utility and cost check.
class Scorer {
 public:
  Scorer(std::shared_ptr<ab::PoolCache> pools, NorthStar ns, SystemConfig control, std::uint64_t seed, int num_requests,
         unsigned workers = 0)
      : pools_(std::move(pools)),
        ns_(std::move(ns)),
        control_config_(std::move(control)),
        seed_(seed),
        workers_(workers) {
    if (num_requests < 2) throw ValidationError("num_requests must be >= 2", "num_requests");
    requests_ = pools_->requests(seed_, static_cast<std::size_t>(num_requests));
    control_ = ab::detail::summarize(sim::evaluate_samples(scenario(), *requests_, control_config_, workers_));
  }

  const sim::Scenario& scenario() const { return pools_->scenario_for(seed_); }
  const SystemConfig& control() const noexcept { return control_config_; }

  Scored score(const SystemConfig& config) const {
    const auto arm = ab::detail::summarize(sim::evaluate_samples(scenario(), *requests_, config, workers_));
    Scored s;
    s.config = config;
    s.report = ab::compare(control_, arm);
    s.cost = sim::compute_cost(config, scenario());
    s.utility = ab::utility(s.report, ns_, CostCheck{s.cost, scenario().cost.c_max});
    return s;
  }

 private:
  std::shared_ptr<ab::PoolCache> pools_;
  NorthStar ns_;
  SystemConfig control_config_;
  std::uint64_t seed_;
  unsigned workers_;
  std::shared_ptr<const std::vector<sim::Request>> requests_;
  ab::ArmResult control_;
};

// `levels` evenly spaced values per parameter (log-spaced on log scales,
// rounded for integers), full Cartesian product in parameter-name order.
inline std::vector<SystemConfig> grid_points(const SearchSpace& space, int levels) {
  if (levels < 2) throw ValidationError("grid needs at least 2 levels", "levels");
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const auto& [name, p] : space.params) {
    std::vector<double> vals;
    const double lo = agents::detail::to_search(p, p.lower), hi = agents::detail::to_search(p, p.upper);
    for (int i = 0; i < levels; ++i) {
      double v = agents::detail::from_search(p, lo + (hi - lo) * i / (levels - 1));
      if (i == 0) v = p.lower;
      if (i == levels - 1) v = p.upper;
      vals.push_back(p.clip(v));
    }
    axes.emplace_back(name, std::move(vals));
  }
  std::vector<SystemConfig> out(1);
  for (const auto& [name, vals] : axes) {
    std::vector<SystemConfig> next;
    next.reserve(out.size() * vals.size());
    for (const auto& c : out)
      for (double v : vals) {
        SystemConfig d = c;
        d.params[name] = v;
        next.push_back(std::move(d));
      }
    out = std::move(next);
  }
  return out;
}

struct SearchResult {
  std::optional<Scored> best;  // best feasible, nullopt if none
  std::size_t evaluated = 0;
  std::size_t feasible = 0;
};

// Strictly greater feasible utility wins; earlier candidates win ties.
inline void consider(SearchResult& r, Scored s) {
  ++r.evaluated;
  if (!s.utility.feasible) return;
  ++r.feasible;
  if (!r.best || s.utility.value > r.best->utility.value) r.best = std::move(s);
}

inline SearchResult grid_search(const Scorer& scorer, const SearchSpace& space, int levels = 4) {
  SearchResult r;
  for (const auto& c : grid_points(space, levels)) consider(r, scorer.score(c));
  return r;
}

// Uniform random search with the same sampler the Actor uses for exploration.
inline SearchResult random_search(const Scorer& scorer, const SearchSpace& space, std::size_t budget,
                                  std::uint64_t seed) {
  SearchResult r;
  for (std::size_t i = 0; i < budget; ++i) {
    KeyedRng rng({seed, static_cast<std::uint64_t>(i), tag("random-search")});
    SystemConfig c;
    for (const auto& [name, p] : space.params) c.params[name] = agents::detail::sample_uniform(p, rng);
    consider(r, scorer.score(c));
  }
  return r;
}

struct Verification {
  ab::ArmOutcome outcome;
  UtilityResult utility;
  double cost = 0.0;
  bool guardrails_hold = false;
  bool within_budget = false;
};

// One-arm confirmation experiment of `candidate` against `control`.
inline Verification verify(ab::PoolCache& pools, const SearchSpace& space, const NorthStar& ns,
                           const SystemConfig& control, const SystemConfig& candidate, std::uint64_t seed,
                           int num_requests, unsigned workers = 0) {
  ab::ExperimentSpec spec;
  spec.experiment_id = "verify";
  spec.scenario = pools.scenario().name;
  spec.control = control;
  spec.arms = {{"candidate", candidate}};
  spec.num_requests = num_requests;
  spec.seed = seed;
  spec.pending_review = false;
  auto results = ab::run_simulated_experiment(spec, pools, &space, workers);
  Verification v;
  v.outcome = results.at("candidate");
  const sim::Scenario& sc = pools.scenario_for(seed);
  v.cost = sim::compute_cost(candidate, sc);
  v.within_budget = v.cost <= sc.cost.c_max;
  v.guardrails_hold = true;
  for (const auto& g : ns.guardrails) {
    const auto& d = v.outcome.report.at(g.metric).relative_delta_pct;
    if (!d || !g.satisfied(*d)) v.guardrails_hold = false;
  }
  v.utility = ab::utility(v.outcome.report, ns, CostCheck{v.cost, sc.cost.c_max});
  return v;
}

}  // namespace rectune::loop
