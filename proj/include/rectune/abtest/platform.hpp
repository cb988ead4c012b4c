#pragma once

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "rectune/abtest/experiment.hpp"

namespace rectune::ab {

enum class RunStatus { pending, running, done, failed };

inline const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::pending: return "pending";
    case RunStatus::running: return "running";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "failed";
}

inline RunStatus parse_run_status(const std::string& s) {
  if (s == "pending") return RunStatus::pending;
  if (s == "running") return RunStatus::running;
  if (s == "done") return RunStatus::done;
  if (s == "failed") return RunStatus::failed;
  throw ValidationError("unknown experiment status '" + s + "'");
}

// Lifecycle: submit -> status (pending/running) -> done|failed -> fetch.
// Implementations must be safe for concurrent use.
class ExperimentPlatform {
 public:
  virtual ~ExperimentPlatform() = default;

  virtual std::string submit(const ExperimentSpec& spec) = 0;
  virtual RunStatus status(const std::string& handle) = 0;
  // Valid only once status() == done; throws StateError otherwise.
  virtual std::map<std::string, MetricReport> fetch(const std::string& handle) = 0;
};

// In-process simulated platform. With a directory, each experiment is mirrored
// to <dir>/<experiment-id>.json so another process can status/fetch it.
class SimulatedPlatform final : public ExperimentPlatform {
 public:
  struct Options {
    std::optional<fs::path> dir;
    bool asynchronous = false;
    unsigned workers = 0;
  };

  SimulatedPlatform(sim::Scenario scenario, SearchSpace space, Options options)
      : pools_(std::make_shared<PoolCache>(std::move(scenario))),
        space_(std::move(space)),
        options_(std::move(options)) {}

  SimulatedPlatform(sim::Scenario scenario, SearchSpace space)
      : SimulatedPlatform(std::move(scenario), std::move(space), Options{}) {}

  // Shares generated traffic with other platforms over the same scenario.
  SimulatedPlatform(std::shared_ptr<PoolCache> pools, SearchSpace space, Options options)
      : pools_(std::move(pools)), space_(std::move(space)), options_(std::move(options)) {
    if (!pools_) throw ValidationError("pool cache required");
  }

  std::string submit(const ExperimentSpec& spec) override {
    std::shared_ptr<Job> job;
    {
      std::lock_guard lock(mu_);
      const std::string handle = spec.experiment_id;
      if (handle.empty()) throw ValidationError("experiment id required", "experiment_id");
      if (jobs_.contains(handle) || (options_.dir && fs::exists(file_for(handle))))
        throw StateError("experiment '" + handle + "' already submitted");
      job = std::make_shared<Job>();
      job->spec = spec;
      jobs_[handle] = job;
      persist(*job, RunStatus::pending);
    }
    auto run = [this, job] { execute(*job); };
    if (options_.asynchronous) {
      auto fut = std::async(std::launch::async, run).share();
      std::lock_guard lock(mu_);
      job->done = std::move(fut);
    } else {
      run();
    }
    return spec.experiment_id;
  }

  RunStatus status(const std::string& handle) override {
    std::lock_guard lock(mu_);
    if (auto it = jobs_.find(handle); it != jobs_.end()) return it->second->state;
    return load(handle).state;
  }

  std::map<std::string, MetricReport> fetch(const std::string& handle) override {
    std::map<std::string, MetricReport> out;
    for (const auto& [arm, o] : outcomes(handle)) out[arm] = o.report;
    return out;
  }

  // Full per-arm outcome including the raw arm statistics.
  std::map<std::string, ArmOutcome> outcomes(const std::string& handle) {
    std::lock_guard lock(mu_);
    const Job* job = nullptr;
    Job loaded;
    if (auto it = jobs_.find(handle); it != jobs_.end()) {
      job = it->second.get();
    } else {
      loaded = load(handle);
      job = &loaded;
    }
    if (job->state != RunStatus::done)
      throw StateError("experiment '" + handle + "' is " + status_name(job->state) + ", not done");
    return job->results;
  }

  std::string error(const std::string& handle) {
    std::lock_guard lock(mu_);
    if (auto it = jobs_.find(handle); it != jobs_.end()) return it->second->error;
    return load(handle).error;
  }

  void wait(const std::string& handle) {
    std::shared_future<void> f;
    {
      std::lock_guard lock(mu_);
      if (auto it = jobs_.find(handle); it != jobs_.end()) f = it->second->done;
    }
    if (f.valid()) f.wait();
  }

  const sim::Scenario& scenario() const { return pools_->scenario(); }

 private:
  struct Job {
    ExperimentSpec spec;
    RunStatus state = RunStatus::pending;
    std::map<std::string, ArmOutcome> results;
    std::string error;
    std::shared_future<void> done;
  };

  fs::path file_for(const std::string& handle) const { return *options_.dir / (handle + ".json"); }

  void execute(Job& job) {
    {
      std::lock_guard lock(mu_);
      job.state = RunStatus::running;
      persist(job, RunStatus::running);
    }
    std::map<std::string, ArmOutcome> results;
    std::string error;
    bool ok = true;
    try {
      results = run_simulated_experiment(job.spec, *pools_, &space_, options_.workers);
    } catch (const std::exception& e) {
      ok = false;
      error = e.what();
    }
    std::lock_guard lock(mu_);
    job.results = std::move(results);
    job.error = std::move(error);
    job.state = ok ? RunStatus::done : RunStatus::failed;
    persist(job, job.state);
  }

  void persist(const Job& job, RunStatus st) const {
    if (!options_.dir) return;
    json results = json::object();
    for (const auto& [arm, o] : job.results) results[arm] = to_json(o);
    write_json(file_for(job.spec.experiment_id), json{{"spec", to_json(job.spec)},
                                                       {"status", status_name(st)},
                                                       {"results", results},
                                                       {"error", job.error}});
  }

  Job load(const std::string& handle) const {
    if (!options_.dir || !fs::exists(file_for(handle))) throw StateError("unknown experiment handle '" + handle + "'");
    const json j = read_json(file_for(handle));
    Job job;
    job.spec = experiment_spec_from_json(j.at("spec"));
    job.state = parse_run_status(j.at("status").get<std::string>());
    for (auto& [arm, o] : j.at("results").items()) job.results[arm] = arm_outcome_from_json(o);
    job.error = j.value("error", "");
    return job;
  }

  std::shared_ptr<PoolCache> pools_;
  SearchSpace space_;
  Options options_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
};

}  // namespace rectune::ab
