#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rectune/loop/loop.hpp"

namespace rectune::loop {

struct StrategySetup {
  skills::Skill skill;
  sim::Scenario scenario;
  std::shared_ptr<ab::PoolCache> pools;  // shared traffic; built from `scenario` when null
  fs::path scratch;                      // one workdir per run is created below it
  int rounds = 20;
  std::size_t batch = 4;
  double fault_rate = 0.0;
  unsigned workers = 0;
};

struct StrategyRun {
  bool critic = true;
  std::uint64_t seed = 0;
  fs::path workdir;
  std::optional<double> best_utility;
  std::optional<mem::TaskRecord> best;
  std::size_t slots = 0;             // rounds * batch
  std::size_t launched = 0;          // arms sent to the platform
  std::size_t wasted = 0;            // undeployable or repeated configs among launched arms
  std::size_t injected = 0;          // fault-injected proposals
  std::size_t injected_launched = 0;
  std::vector<RoundSummary> rounds;

  double effective_budget() const {
    return slots == 0 ? 0.0 : static_cast<double>(launched - wasted) / static_cast<double>(slots);
  }
};

// Full loop in a fresh workdir (heuristic proposer, auto-approve, test clock).
// Critic off means the Actor drafts exactly B proposals and all are launched.
inline StrategyRun run_strategy(const StrategySetup& setup, bool critic, std::uint64_t seed) {
  StrategyRun out;
  out.critic = critic;
  out.seed = seed;
  out.workdir = setup.scratch / ((critic ? "critic-" : "actor-only-") + std::to_string(seed));
  init_workdir(out.workdir, setup.skill, setup.scenario, {true, 1700000000});

  LoopOptions opt;
  opt.batch = setup.batch;
  opt.critic = critic;
  opt.fault_rate = setup.fault_rate;
  opt.seed = seed;
  opt.auto_approve = true;
  opt.workers = setup.workers;
  auto pools = setup.pools ? setup.pools : std::make_shared<ab::PoolCache>(setup.scenario);
  Session session(out.workdir, opt, pools);
  out.rounds = session.run(setup.rounds);
  out.slots = static_cast<std::size_t>(setup.rounds) * setup.batch;
  out.best = session.best();
  if (out.best) out.best_utility = out.best->evaluation->raw;

  std::vector<SystemConfig> measured;
  for (const auto& t : session.store().list_tasks()) {
    if (is_fault_origin(t.origin)) ++out.injected;
    if (t.experiment_id.empty()) continue;
    ++out.launched;
    if (is_fault_origin(t.origin)) ++out.injected_launched;
    if (t.status != mem::TaskStatus::Completed) {
      ++out.wasted;
      continue;
    }
    const SystemConfig c = t.config_values();
    const bool repeat = std::any_of(measured.begin(), measured.end(), [&](const SystemConfig& m) {
      return relative_linf(c, m, session.v1_space()) <= agents::CriticOptions{}.duplicate_tolerance;
    });
    if (repeat) ++out.wasted;
    measured.push_back(c);
  }
  return out;
}

}  // namespace rectune::loop
