#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rectune/abtest/platform.hpp"
#include "rectune/agents/actor.hpp"
#include "rectune/agents/critic.hpp"
#include "rectune/agents/insight.hpp"
#include "rectune/agents/online.hpp"
#include "rectune/agents/skill_agent.hpp"
#include "rectune/loop/manifest.hpp"
#include "rectune/memory/store.hpp"
#include "rectune/sim/scenario.hpp"
#include "rectune/skillhub/repository.hpp"

namespace rectune::loop {

class Interrupted : public Error {
 public:
  Interrupted() : Error("interrupted") {}
};

// <workdir>/
//   manifest.json  scenario.json
//   skills/<name>/v<N>.json
//   memory/<name>/{tasks/, elites.json, insights.json, experiments/, lock}
//   reports/
struct Workdir {
  fs::path root;

  fs::path manifest() const { return manifest_path(root); }
  fs::path scenario() const { return root / "scenario.json"; }
  fs::path skills() const { return root / "skills"; }
  fs::path memory(const std::string& skill) const { return root / "memory" / skill; }
  fs::path experiments(const std::string& skill) const { return memory(skill) / "experiments"; }
  fs::path reports() const { return root / "reports"; }
};

// Parameters the pipeline reads; a skill may tune any subset of them, the
// scenario defaults supply the rest.
inline std::vector<std::string> pipeline_parameters(const sim::Scenario& s) {
  std::vector<std::string> out{"pre.K1", "rank.K2", "re.N", "re.diversity_penalty", "re.topic_cap"};
  for (const auto& h : s.pre_heads) out.push_back("pre.w_" + h.name);
  for (const auto& h : s.rank_heads) out.push_back("rank.w_" + h.name);
  return out;
}

// Cross-checks a skill against the scenario it will be tuned on.
inline void check_compatible(const skills::Skill& skill, const sim::Scenario& scenario) {
  const auto known = pipeline_parameters(scenario);
  for (const auto& [name, spec] : skill.space().params)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ValidationError("parameter '" + name + "' is not read by the scenario pipeline",
                            "requirement.search_space." + name);
  const SystemConfig eff = scenario.effective(skill.initial_config);
  for (const auto& name : known)
    if (!eff.has(name)) throw ValidationError("no value for pipeline parameter '" + name + "'", "defaults." + name);
  std::set<std::string> metrics;
  for (const auto& m : scenario.metrics) metrics.insert(m.name);
  for (const auto& m : skill.north_star.metric_names())
    if (!metrics.contains(m)) throw ValidationError("metric '" + m + "' is not produced by the scenario", "north_star");
  // One request through the pipeline catches inconsistent truncations.
  sim::Scenario probe = scenario;
  try {
    sim::run_system(sim::generate_request(probe, 0), eff);
  } catch (const ConfigError& e) {
    throw ValidationError(std::string("initial config is not runnable: ") + e.what(), "initial_config");
  }
}

struct InitOptions {
  bool force = false;
  std::optional<std::int64_t> test_clock_epoch;  // deterministic timestamps
};

// Creates the workdir skeleton. Inputs are fully validated before anything is
// written.
inline RunManifest init_workdir(const fs::path& root, const skills::Skill& skill, const sim::Scenario& scenario,
                                const InitOptions& opt = {}) {
  skill.validate();
  scenario.validate();
  check_compatible(skill, scenario);

  const Workdir wd{root};
  if (fs::exists(root) && !fs::is_directory(root)) throw ValidationError("workdir is not a directory", root.string());
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!opt.force) throw ValidationError("workdir is not empty (use --force to reinitialize)", root.string());
    for (const auto& p : {wd.manifest(), wd.scenario(), wd.skills(), root / "memory", wd.reports()}) fs::remove_all(p);
  }
  fs::create_directories(wd.skills());
  fs::create_directories(wd.experiments(skill.name));
  fs::create_directories(wd.memory(skill.name) / "tasks");
  fs::create_directories(wd.reports());

  sim::save_scenario(scenario, wd.scenario());
  skills::SkillRepository(wd.skills()).publish(skill);

  RunManifest m;
  m.workdir = fs::absolute(root).lexically_normal().string();
  m.skill = skill.name;
  m.skill_version = skill.version;
  m.scenario = "scenario.json";
  m.production_config = skill.initial_config;
  if (opt.test_clock_epoch) m.clock = {"test", *opt.test_clock_epoch, 0};
  save_manifest(root, m);
  return m;
}

using Reviewer = std::function<bool(const ab::ExperimentSpec&)>;
using Logger = std::function<void(const std::string&)>;

struct LoopOptions {
  std::size_t batch = 4;
  std::size_t proposal_factor = 1;  // the Actor drafts factor*B, the Critic keeps B
  std::size_t max_passes = 6;       // drafting passes per round while slots stay empty
  agents::Proposer proposer = agents::Proposer::heuristic;
  agents::LlmSettings llm;
  bool auto_approve = false;
  Reviewer reviewer;  // asked per experiment unless auto_approve
  std::uint64_t seed = 0;
  bool critic = true;
  double fault_rate = 0.0;  // fault injection for the ablation harness
  bool evolve = true;
  std::size_t elite_capacity = 16;
  int num_requests = 0;                          // 0: scenario default
  std::optional<std::uint64_t> experiment_seed;  // default: scenario seed
  unsigned workers = 0;
  const std::atomic<bool>* interrupt = nullptr;
  Logger log;
};

// ---- fault injection ----

enum class FaultKind { out_of_bounds, malformed, duplicate };

inline const char* fault_origin(FaultKind k) {
  switch (k) {
    case FaultKind::out_of_bounds: return "fault-out-of-bounds";
    case FaultKind::malformed: return "fault-malformed";
    case FaultKind::duplicate: return "fault-duplicate";
  }
  return "fault";
}

inline bool is_fault_origin(const std::string& origin) { return origin.rfind("fault-", 0) == 0; }

// Replaces each proposal with an invalid one with probability `rate`:
// a value outside the original bounds, a dropped parameter, or a copy of an
// already tested config (else of the previous proposal). Returns the origin
// label per slot, empty for untouched slots.
inline std::vector<std::string> inject_faults(std::vector<agents::ProposedCandidate>& proposals,
                                              const SearchSpace& v1_space, const std::vector<SystemConfig>& history,
                                              double rate, std::uint64_t seed) {
  std::vector<std::string> labels(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    KeyedRng rng({seed, static_cast<std::uint64_t>(i), tag("fault")});
    if (!(rng.uniform() < rate)) continue;
    auto kind = static_cast<FaultKind>(rng.below(3));
    if (kind == FaultKind::duplicate && history.empty() && i == 0) kind = FaultKind::out_of_bounds;
    auto& p = proposals[i];
    auto it = v1_space.params.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(v1_space.params.size())));
    const std::string& name = it->first;
    const ParamSpec& spec = it->second;
    switch (kind) {
      case FaultKind::out_of_bounds:
        p.config.params[name] = rng.uniform() < 0.5 ? spec.upper + 0.25 * spec.range() : spec.lower - 0.25 * spec.range();
        p.explanation = "Push " + name + " past its documented range.";
        break;
      case FaultKind::malformed:
        p.config.params.erase(name);
        p.explanation = "Configuration without " + name + ".";
        break;
      case FaultKind::duplicate:
        p.config = history.empty() ? proposals[i - 1].config : history[rng.below(history.size())];
        p.explanation = "Repeat a configuration that was already proposed.";
        break;
    }
    labels[i] = fault_origin(kind);
  }
  return labels;
}

struct StaleResolution {
  std::size_t failed = 0;
  std::size_t rejected = 0;
};

// The per-workdir driver. Holds the memory lock for its lifetime.
class Session {
 public:
  Session(fs::path root, LoopOptions opt, std::shared_ptr<ab::PoolCache> pools = nullptr)
      : wd_{std::move(root)},
        opt_(std::move(opt)),
        manifest_(load_manifest(wd_.root)),
        scenario_(sim::load_scenario(wd_.scenario())),
        repo_(wd_.skills()),
        store_(mem::MemoryStore::open_writer(wd_.memory(manifest_.skill))),
        clock_(manifest_.clock) {
    if (opt_.batch < 1) throw ValidationError("batch size must be >= 1", "batch");
    if (opt_.proposal_factor < 1) throw ValidationError("proposal factor must be >= 1", "proposal_factor");
    if (opt_.max_passes < 1) throw ValidationError("at least one drafting pass required", "max_passes");
    if (!(opt_.fault_rate >= 0.0 && opt_.fault_rate <= 1.0))
      throw ValidationError("fault rate must lie in [0,1]", "fault_rate");
    const auto versions = repo_.versions(manifest_.skill);
    if (versions.empty()) throw StorageError("workdir has no skill versions for '" + manifest_.skill + "'");
    v1_space_ = repo_.load(manifest_.skill, versions.front()).space();
    if (!pools) pools = std::make_shared<ab::PoolCache>(scenario_);
    if (pools->scenario().name != scenario_.name) throw ValidationError("pool cache built for another scenario", "scenario");
    platform_ = std::make_unique<ab::SimulatedPlatform>(
        pools, v1_space_, ab::SimulatedPlatform::Options{wd_.experiments(manifest_.skill), false, opt_.workers});
  }

  const RunManifest& manifest() const noexcept { return manifest_; }
  const sim::Scenario& scenario() const noexcept { return scenario_; }
  const SearchSpace& v1_space() const noexcept { return v1_space_; }
  const Workdir& workdir() const noexcept { return wd_; }
  mem::MemoryStore& store() noexcept { return store_; }
  ab::SimulatedPlatform& platform() noexcept { return *platform_; }
  skills::Skill skill() const { return repo_.latest(manifest_.skill); }
  TimePoint now() { return clock_.now(); }

  // Records left behind by an interrupted round: Running and Approved end
  // Failed, Proposed ones are Rejected.
  StaleResolution resolve_stale() {
    StaleResolution out;
    for (const auto& r : store_.list_tasks()) {
      using mem::TaskStatus;
      if (r.status == TaskStatus::Approved) store_.update_task(r.id, {.status = TaskStatus::Running});
      if (r.status == TaskStatus::Approved || r.status == TaskStatus::Running) {
        store_.update_task(r.id, {.status = TaskStatus::Failed, .failure = "interrupted before results were collected"});
        ++out.failed;
      } else if (r.status == TaskStatus::Proposed) {
        mem::CheckInfo ci = r.check_info;
        ci.verdict = "rejected";
        ci.reason = "interrupted";
        ci.message = "round interrupted before review";
        store_.update_task(r.id, {.status = TaskStatus::Rejected, .check_info = ci});
        ++out.rejected;
      }
    }
    if (out.failed + out.rejected > 0)
      say("resolved stale records: " + std::to_string(out.failed) + " failed, " + std::to_string(out.rejected) +
          " rejected");
    return out;
  }

  RoundSummary run_round() {
    check_interrupt();
    resolve_stale();
    const int round = manifest_.rounds_completed + 1;
    const std::uint64_t round_seed = stream_key({opt_.seed, static_cast<std::uint64_t>(round), tag("round")});
    const skills::Skill skill = this->skill();
    RoundSummary sum;
    sum.round = round;
    sum.skill_version = skill.version;

    // 1-3. draft, criticize, record. With the critic on, the Actor drafts
    // factor*B per pass and passes repeat (up to max_passes) until B are
    // approved; earlier approvals count as history for duplicate checks.
    const auto elites = store_.read_elites(opt_.elite_capacity);
    std::vector<std::string> approved;
    std::vector<SystemConfig> approved_configs;
    const std::size_t passes = opt_.critic ? opt_.max_passes : 1;
    for (std::size_t pass = 0; pass < passes && approved.size() < opt_.batch; ++pass) {
      const std::size_t keep = opt_.batch - approved.size();
      const std::uint64_t pass_seed = pass == 0 ? round_seed : stream_key({round_seed, pass, tag("pass")});
      auto proposals = propose(skill, elites, opt_.critic ? keep * opt_.proposal_factor : keep, pass_seed);
      std::vector<std::string> faults(proposals.size());
      if (opt_.fault_rate > 0.0) {
        std::vector<SystemConfig> history = approved_configs;
        for (const auto& t : store_.list_tasks())
          if (t.status == mem::TaskStatus::Completed) history.push_back(t.config_values());
        faults = inject_faults(proposals, v1_space_, history, opt_.fault_rate, stream_key({pass_seed, tag("faults")}));
      }
      sum.proposed += proposals.size();

      agents::CriticVerdict verdict;
      if (opt_.critic) {
        auto ctx = agents::critic_context(store_, skill.north_star);
        ctx.history.insert(ctx.history.end(), approved_configs.begin(), approved_configs.end());
        verdict = agents::critic_review(proposals, skill, ctx, keep);
        if (opt_.proposer == agents::Proposer::llm && opt_.llm.backend) {
          skills::HistoryDigest digest;
          for (const auto& f : ctx.failures) digest.failure_cases.push_back(f.canonical());
          verdict =
              agents::llm_critic_pass(std::move(verdict), proposals, skill, digest, *opt_.llm.backend, opt_.llm.model);
        }
      } else {
        verdict.reviews.assign(proposals.size(), {true, std::nullopt, "critic disabled"});
        for (std::size_t i = 0; i < proposals.size(); ++i) verdict.approved.push_back(i);
        verdict.comments = "critic disabled; all proposals forwarded";
      }

      std::vector<std::string> ids(proposals.size());
      std::size_t seq = next_sequence();
      for (std::size_t i = 0; i < proposals.size(); ++i) {
        mem::TaskRecord r;
        r.id = mem::MemoryStore::format_task_id(seq++);
        r.config = proposals[i].config.canonical();
        r.explanation = proposals[i].explanation;
        r.proposed_time = now();
        r.origin = faults[i].empty() ? agents::origin_name(proposals[i].origin) : faults[i];
        r.round = round;
        const auto& rv = verdict.reviews[i];
        r.check_info = {rv.approved ? "approved" : "rejected", rv.reason ? agents::reason_name(*rv.reason) : "",
                        rv.message, verdict.comments};
        store_.write_task(r);
        if (!rv.approved) store_.update_task(r.id, {.status = mem::TaskStatus::Rejected});
        ids[i] = r.id;
      }
      for (auto i : verdict.approved) {
        approved.push_back(ids[i]);
        approved_configs.push_back(proposals[i].config);
      }
      say("round " + std::to_string(round) + " pass " + std::to_string(pass + 1) + ": " + verdict.comments);
    }
    sum.approved = approved.size();

    // 4. review gate, launch, collect
    if (!approved.empty()) {
      const Launched l = launch(approved, skill);
      sum.failed += l.failed;
      sum.arm_count = l.arms;
      if (l.handle) {
        sum.experiment_id = *l.handle;
        for (const auto& r : collect(*l.handle, skill))
          if (r.status == mem::TaskStatus::Failed) ++sum.failed;
      }
    }

    // 5. learn and evolve
    const auto tasks = store_.list_tasks();
    const auto report = agents::insight_self_learn(skill, tasks, now());
    store_.write_insights(agents::to_json(report));
    if (opt_.evolve) {
      try {
        auto evolved = agents::skill_evolve(skill, report, tasks, store_.read_elites(opt_.elite_capacity), v1_space_);
        repo_.publish(evolved.skill);
        sum.skill_version = evolved.skill.version;
      } catch (const StateError& e) {
        say(std::string("evolution skipped: ") + e.what());
      }
    }

    const auto archive = store_.read_archive();
    if (!archive.entries.empty()) {
      sum.best_utility = archive.entries.front().utility;
      sum.best_task_id = archive.entries.front().task_id;
    }
    manifest_.rounds.push_back(sum);
    manifest_.rounds_completed = round;
    manifest_.skill_version = sum.skill_version;
    persist();
    say("round " + std::to_string(round) + ": " + std::to_string(sum.arm_count) + " arms measured, best utility " +
        (sum.best_utility ? json(*sum.best_utility).dump() : std::string("n/a")));
    return sum;
  }

  std::vector<RoundSummary> run(int rounds) {
    if (rounds < 1) throw ValidationError("rounds must be >= 1", "rounds");
    std::vector<RoundSummary> out;
    for (int i = 0; i < rounds; ++i) out.push_back(run_round());
    return out;
  }

  // ---- single steps, for driving a round by hand ----

  // Drafts B proposals for the next round as Proposed records.
  std::vector<mem::TaskRecord> propose_step() {
    const skills::Skill skill = this->skill();
    const int round = manifest_.rounds_completed + 1;
    std::size_t seq = next_sequence();
    const std::uint64_t seed = stream_key({opt_.seed, static_cast<std::uint64_t>(round), seq, tag("propose")});
    std::vector<mem::TaskRecord> out;
    for (auto& p : propose(skill, store_.read_elites(opt_.elite_capacity), opt_.batch, seed)) {
      mem::TaskRecord r;
      r.id = mem::MemoryStore::format_task_id(seq++);
      r.config = p.config.canonical();
      r.explanation = p.explanation;
      r.proposed_time = now();
      r.origin = agents::origin_name(p.origin);
      r.round = round;
      store_.write_task(r);
      out.push_back(r);
    }
    persist();
    return out;
  }

  // Reviews every Proposed record not yet reviewed, keeping at most B.
  std::vector<mem::TaskRecord> critique_step() {
    const skills::Skill skill = this->skill();
    std::vector<mem::TaskRecord> pending;
    for (auto& t : store_.list_tasks())
      if (t.status == mem::TaskStatus::Proposed && t.check_info.verdict.empty()) pending.push_back(std::move(t));
    if (pending.empty()) throw StateError("no proposals awaiting review");
    std::vector<agents::ProposedCandidate> proposals;
    for (const auto& t : pending) {
      agents::ProposedCandidate c;
      try {
        c.config = t.config_values();
      } catch (const ValidationError&) {
        // left empty: the schema check rejects it
      }
      proposals.push_back(std::move(c));
    }
    const auto ctx = agents::critic_context(store_, skill.north_star);
    const auto verdict = agents::critic_review(proposals, skill, ctx, opt_.batch);
    std::vector<mem::TaskRecord> out;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      const auto& rv = verdict.reviews[i];
      mem::TaskUpdate u{.check_info = mem::CheckInfo{rv.approved ? "approved" : "rejected",
                                                     rv.reason ? agents::reason_name(*rv.reason) : "", rv.message,
                                                     verdict.comments}};
      if (!rv.approved) u.status = mem::TaskStatus::Rejected;
      out.push_back(store_.update_task(pending[i].id, u));
    }
    return out;
  }

  // Launches one experiment over the critic-approved Proposed records.
  // Returns the experiment id, nullopt when declined or nothing deployable.
  std::optional<std::string> run_step() {
    std::vector<std::string> approved;
    for (const auto& t : store_.list_tasks())
      if (t.status == mem::TaskStatus::Proposed && t.check_info.verdict == "approved") approved.push_back(t.id);
    if (approved.empty()) throw StateError("no approved proposals (run critique first)");
    const Launched l = launch(approved, skill());
    persist();
    return l.handle;
  }

  // Collects `experiment`, or every experiment that still has Running arms.
  std::vector<mem::TaskRecord> collect_step(const std::optional<std::string>& experiment = std::nullopt) {
    std::set<std::string> handles;
    if (experiment) {
      handles.insert(*experiment);
    } else {
      for (const auto& t : store_.list_tasks())
        if (t.status == mem::TaskStatus::Running && !t.experiment_id.empty()) handles.insert(t.experiment_id);
    }
    std::vector<mem::TaskRecord> out;
    const skills::Skill skill = this->skill();
    for (const auto& h : handles)
      for (auto& r : collect(h, skill)) out.push_back(std::move(r));
    return out;
  }

  agents::InsightReport insight_step() {
    const auto report = agents::insight_self_learn(skill(), store_.list_tasks(), now());
    store_.write_insights(agents::to_json(report));
    persist();
    return report;
  }

  // Evolves the latest skill from the stored insight report.
  agents::EvolveResult evolve_step() {
    const auto stored = store_.read_insights();
    if (!stored) throw StateError("no insight report stored (run insight first)");
    auto evolved = agents::skill_evolve(skill(), agents::insight_report_from_json(*stored), store_.list_tasks(),
                                        store_.read_elites(opt_.elite_capacity), v1_space_);
    repo_.publish(evolved.skill);
    manifest_.skill_version = evolved.skill.version;
    persist();
    return evolved;
  }

  // Best feasible completed task (the recommendation), if any.
  std::optional<mem::TaskRecord> best() const {
    const auto archive = store_.read_archive();
    if (archive.entries.empty()) return std::nullopt;
    return store_.read_task(archive.entries.front().task_id);
  }

 private:
  struct Launched {
    std::optional<std::string> handle;
    std::size_t arms = 0;    // arms that reached the platform
    std::size_t failed = 0;  // undeployable arms
  };

  // Review gate, then submit against the production control and wait.
  Launched launch(const std::vector<std::string>& approved, const skills::Skill& skill) {
    check_interrupt();
    agents::ExperimentParams ep;
    // A crash between submit and the manifest write leaves a mirror behind;
    // never reuse its id.
    std::uint64_t seq = manifest_.experiments + 1;
    while (fs::exists(wd_.experiments(manifest_.skill) / (experiment_id(seq) + ".json"))) ++seq;
    ep.experiment_id = experiment_id(seq);
    ep.scenario = scenario_.name;
    ep.num_requests = opt_.num_requests > 0 ? opt_.num_requests : scenario_.num_requests;
    ep.seed = opt_.experiment_seed.value_or(scenario_.seed);
    ep.auto_approve = opt_.auto_approve;
    auto spec = agents::online_prepare(store_, approved, skill, ep, manifest_.production_config);
    std::optional<ab::ExperimentSpec> cleared = spec;
    if (spec.pending_review) {
      if (!opt_.reviewer) throw ValidationError("experiment needs review but no reviewer is available", "auto_approve");
      cleared = agents::resolve_review(store_, spec, opt_.reviewer(spec));
    }
    Launched out;
    if (!cleared) {
      say(spec.experiment_id + ": declined at review");
      return out;
    }
    const auto launch = agents::online_launch(*platform_, store_, *cleared, v1_space_);
    out.failed = launch.undeployable.size();
    out.arms = launch.deployed.size();
    out.handle = launch.handle;
    if (out.handle) {
      manifest_.experiments = seq;
      platform_->wait(*out.handle);
    }
    return out;
  }

  std::vector<mem::TaskRecord> collect(const std::string& handle, const skills::Skill& skill) {
    return agents::online_collect(*platform_, handle, store_, {skill.north_star, &scenario_, opt_.elite_capacity});
  }

  void persist() {
    manifest_.clock = clock_.state();
    save_manifest(wd_.root, manifest_);
  }

  std::vector<agents::ProposedCandidate> propose(const skills::Skill& skill, const std::vector<mem::TaskRecord>& elites,
                                                 std::size_t want, std::uint64_t seed) {
    if (opt_.proposer == agents::Proposer::llm) {
      if (opt_.llm.backend) {
        try {
          return agents::llm_propose(skill, elites, want, seed, opt_.llm, scenario_.heuristic);
        } catch (const std::exception& e) {
          say(std::string("llm proposer failed, using heuristic: ") + e.what());
        }
      } else {
        say("llm proposer not configured, using heuristic");
      }
    }
    return agents::heuristic_propose(skill, agents::elite_bases(elites), want, seed, scenario_.heuristic);
  }

  std::size_t next_sequence() const {
    const std::string id = store_.next_task_id();
    return std::stoul(id.substr(5));
  }

  static std::string experiment_id(std::uint64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "exp-%04llu", static_cast<unsigned long long>(n));
    return buf;
  }

  void check_interrupt() const {
    if (opt_.interrupt && opt_.interrupt->load()) throw Interrupted();
  }

  void say(const std::string& msg) const {
    if (opt_.log) opt_.log(msg);
  }

  Workdir wd_;
  LoopOptions opt_;
  RunManifest manifest_;
  sim::Scenario scenario_;
  skills::SkillRepository repo_;
  mem::MemoryStore store_;
  ManifestClock clock_;
  SearchSpace v1_space_;
  std::unique_ptr<ab::SimulatedPlatform> platform_;
};

}  // namespace rectune::loop
