#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rectune/config.hpp"
#include "rectune/core/io.hpp"

namespace rectune::loop {

struct RoundSummary {
  int round = 0;
  std::optional<double> best_utility;  // best feasible elite after the round
  std::optional<std::string> best_task_id;
  std::size_t proposed = 0;
  std::size_t approved = 0;  // passed the critic
  std::size_t arm_count = 0;  // arms actually measured
  std::size_t failed = 0;
  std::string experiment_id;  // empty when nothing was launched
  int skill_version = 1;      // version in force after the round

  friend bool operator==(const RoundSummary&, const RoundSummary&) = default;
};

// "system" clocks read wall time; "test" clocks step one second per read from
// `epoch`, and `ticks` is persisted so later invocations continue the sequence.
struct ClockState {
  std::string mode = "system";
  std::int64_t epoch = 0;
  std::int64_t ticks = 0;

  friend bool operator==(const ClockState&, const ClockState&) = default;
};

struct RunManifest {
  std::string workdir;
  std::string skill;
  int skill_version = 1;
  std::string scenario = "scenario.json";
  int rounds_completed = 0;
  std::vector<RoundSummary> rounds;  // append-only
  SystemConfig production_config;    // experiment control
  ClockState clock;
  std::uint64_t experiments = 0;     // experiment id counter

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline json to_json(const RoundSummary& r) {
  return json{{"round", r.round},
              {"best_utility", r.best_utility ? json(*r.best_utility) : json(nullptr)},
              {"best_task_id", r.best_task_id ? json(*r.best_task_id) : json(nullptr)},
              {"proposed", r.proposed},
              {"approved", r.approved},
              {"arm_count", r.arm_count},
              {"failed", r.failed},
              {"experiment_id", r.experiment_id},
              {"skill_version", r.skill_version}};
}

inline RoundSummary round_summary_from_json(const json& j) {
  RoundSummary r;
  r.round = j.at("round").get<int>();
  if (!j.at("best_utility").is_null()) r.best_utility = j["best_utility"].get<double>();
  if (!j.at("best_task_id").is_null()) r.best_task_id = j["best_task_id"].get<std::string>();
  r.proposed = j.value("proposed", std::size_t{0});
  r.approved = j.value("approved", std::size_t{0});
  r.arm_count = j.at("arm_count").get<std::size_t>();
  r.failed = j.value("failed", std::size_t{0});
  r.experiment_id = j.value("experiment_id", "");
  r.skill_version = j.value("skill_version", 1);
  return r;
}

inline json to_json(const RunManifest& m) {
  json rounds = json::array();
  for (const auto& r : m.rounds) rounds.push_back(to_json(r));
  return json{{"workdir", m.workdir},
              {"skill", {{"name", m.skill}, {"version", m.skill_version}}},
              {"scenario", m.scenario},
              {"rounds_completed", m.rounds_completed},
              {"rounds", rounds},
              {"production_config", m.production_config.to_json()},
              {"clock", {{"mode", m.clock.mode}, {"epoch", m.clock.epoch}, {"ticks", m.clock.ticks}}},
              {"experiments", m.experiments}};
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.workdir = j.at("workdir").get<std::string>();
    m.skill = j.at("skill").at("name").get<std::string>();
    m.skill_version = j.at("skill").at("version").get<int>();
    m.scenario = j.at("scenario").get<std::string>();
    m.rounds_completed = j.at("rounds_completed").get<int>();
    for (const auto& r : j.at("rounds")) m.rounds.push_back(round_summary_from_json(r));
    m.production_config = SystemConfig::from_json(j.at("production_config"));
    const auto& c = j.at("clock");
    m.clock = {c.at("mode").get<std::string>(), c.at("epoch").get<std::int64_t>(), c.at("ticks").get<std::int64_t>()};
    m.experiments = j.value("experiments", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest schema violation: ") + e.what(), "manifest");
  }
  if (m.clock.mode != "system" && m.clock.mode != "test")
    throw ValidationError("clock mode must be system|test", "manifest.clock.mode");
  return m;
}

inline fs::path manifest_path(const fs::path& workdir) { return workdir / "manifest.json"; }

inline RunManifest load_manifest(const fs::path& workdir) {
  if (!fs::exists(manifest_path(workdir)))
    throw ValidationError("not an initialized workdir (no manifest.json)", workdir.string());
  return manifest_from_json(read_json(manifest_path(workdir)));
}

inline void save_manifest(const fs::path& workdir, const RunManifest& m, const BeforeRenameHook& hook = {}) {
  write_json(manifest_path(workdir), to_json(m), hook);
}

// Clock bound to the manifest's state; a test clock advances m.clock.ticks.
class ManifestClock {
 public:
  explicit ManifestClock(const ClockState& state)
      : state_(state), ticks_(std::make_shared<std::int64_t>(state.ticks)) {
    clock_ = state.mode == "test" ? stepping_clock(state.epoch, ticks_) : system_clock();
  }

  TimePoint now() const { return clock_(); }
  const Clock& clock() const noexcept { return clock_; }

  ClockState state() const {
    ClockState s = state_;
    s.ticks = *ticks_;
    return s;
  }

 private:
  ClockState state_;
  std::shared_ptr<std::int64_t> ticks_;
  Clock clock_;
};

}  // namespace rectune::loop
