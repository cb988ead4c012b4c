#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rectune/abtest/platform.hpp"
#include "rectune/memory/store.hpp"
#include "rectune/skillhub/skill.hpp"

namespace rectune::agents {

struct ExperimentParams {
  std::string experiment_id;
  std::string scenario;
  int num_requests = 1000;
  double traffic_fraction = 0.01;
  std::uint64_t seed = 0;
  bool auto_approve = false;
  bool disjoint_buckets = false;
};

// One arm per approved task against the production control (the latest
// launched config, else the skill's initial config). Without auto-approve the
// spec stays pending review and the records stay Proposed until
// resolve_review() is called.
inline ab::ExperimentSpec online_prepare(mem::MemoryStore& store, const std::vector<std::string>& approved_ids,
                                         const skills::Skill& skill, const ExperimentParams& p,
                                         const std::optional<SystemConfig>& production = std::nullopt) {
  if (approved_ids.empty()) throw ValidationError("no approved candidates to schedule", "approved");
  ab::ExperimentSpec spec;
  spec.experiment_id = p.experiment_id;
  spec.scenario = p.scenario;
  spec.control = production ? *production : skill.initial_config;
  spec.num_requests = p.num_requests;
  spec.traffic_fraction = p.traffic_fraction;
  spec.seed = p.seed;
  spec.disjoint_buckets = p.disjoint_buckets;
  spec.pending_review = !p.auto_approve;
  for (const auto& id : approved_ids) {
    const mem::TaskRecord r = store.read_task(id);
    if (r.status != mem::TaskStatus::Proposed)
      throw StateError("task '" + id + "' is " + mem::status_name(r.status) + ", expected Proposed");
    spec.arms.push_back({id, r.config_values()});
  }
  if (p.auto_approve)
    for (const auto& a : spec.arms) store.update_task(a.arm_id, {.status = mem::TaskStatus::Approved});
  return spec;
}

// Human review gate. Declining rejects every arm's record.
inline std::optional<ab::ExperimentSpec> resolve_review(mem::MemoryStore& store, ab::ExperimentSpec spec, bool approve,
                                                        const std::string& note = {}) {
  for (const auto& a : spec.arms) {
    mem::TaskUpdate u{.status = approve ? mem::TaskStatus::Approved : mem::TaskStatus::Rejected};
    if (!approve) {
      mem::CheckInfo ci = store.read_task(a.arm_id).check_info;
      ci.verdict = "rejected";
      ci.reason = "review";
      ci.message = note.empty() ? "declined at review" : note;
      u.check_info = ci;
    }
    store.update_task(a.arm_id, u);
  }
  if (!approve) return std::nullopt;
  spec.pending_review = false;
  return spec;
}

struct LaunchResult {
  std::optional<std::string> handle;
  std::vector<std::string> deployed;
  std::vector<std::string> undeployable;
};

// Generates the deployable experiment: every approved arm goes Running; arms
// whose config cannot be deployed on `deploy_space` fail immediately and are
// dropped from the submitted spec.
inline LaunchResult online_launch(ab::ExperimentPlatform& platform, mem::MemoryStore& store, ab::ExperimentSpec spec,
                                  const SearchSpace& deploy_space) {
  if (spec.pending_review) throw StateError("experiment '" + spec.experiment_id + "' is awaiting review");
  LaunchResult out;
  std::vector<ab::Arm> arms;
  for (auto& a : spec.arms) {
    store.update_task(a.arm_id, {.status = mem::TaskStatus::Running, .experiment_id = spec.experiment_id});
    const auto issues = deploy_space.check(a.config);
    if (!issues.empty()) {
      store.update_task(a.arm_id, {.status = mem::TaskStatus::Failed,
                                   .failure = "undeployable: " + issues.front().parameter + ": " + issues.front().message});
      out.undeployable.push_back(a.arm_id);
      continue;
    }
    out.deployed.push_back(a.arm_id);
    arms.push_back(std::move(a));
  }
  if (arms.empty()) return out;
  spec.arms = std::move(arms);
  try {
    out.handle = platform.submit(spec);
  } catch (const std::exception& e) {
    for (const auto& id : out.deployed)
      store.update_task(id, {.status = mem::TaskStatus::Failed, .failure = std::string("submit failed: ") + e.what()});
    throw;
  }
  return out;
}

struct CollectContext {
  NorthStar north_star;
  const sim::Scenario* scenario = nullptr;  // for C(config) and C_max; nullptr skips the cost check
  std::size_t elite_capacity = 16;
};

// Pulls per-arm reports once the platform is done, marks records Completed
// with results and utility, then re-prunes the elite archive. A failed
// experiment marks its Running records Failed. Re-collecting is a no-op.
inline std::vector<mem::TaskRecord> online_collect(ab::ExperimentPlatform& platform, const std::string& handle,
                                                   mem::MemoryStore& store, const CollectContext& ctx) {
  std::vector<mem::TaskRecord> out;
  const ab::RunStatus st = platform.status(handle);
  if (st == ab::RunStatus::failed) {
    std::string why = "experiment failed";
    if (auto* sim = dynamic_cast<ab::SimulatedPlatform*>(&platform)) why += ": " + sim->error(handle);
    for (const auto& r : store.list_tasks()) {
      if (r.experiment_id != handle) continue;
      if (r.status == mem::TaskStatus::Running)
        out.push_back(store.update_task(r.id, {.status = mem::TaskStatus::Failed, .failure = why}));
      else
        out.push_back(r);
    }
    return out;
  }
  const auto reports = platform.fetch(handle);  // throws unless done
  for (const auto& [arm, report] : reports) {
    if (!store.has_task(arm)) throw StateError("platform returned unknown arm id '" + arm + "'");
    const mem::TaskRecord r = store.read_task(arm);
    if (r.status == mem::TaskStatus::Completed) {
      out.push_back(r);
      continue;
    }
    std::optional<CostCheck> cost;
    if (ctx.scenario) cost = CostCheck{sim::compute_cost(r.config_values(), *ctx.scenario), ctx.scenario->cost.c_max};
    const UtilityResult u = ab::utility(report, ctx.north_star, cost);
    out.push_back(store.update_task(arm, {.status = mem::TaskStatus::Completed,
                                          .results = report,
                                          .evaluation = mem::Evaluation{cost ? cost->cost : 0.0, u.feasible, u.raw}}));
  }
  mem::prune_memory(store, ctx.north_star, ctx.elite_capacity);
  return out;
}

}  // namespace rectune::agents
