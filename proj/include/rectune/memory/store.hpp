#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rectune/core/io.hpp"
#include "rectune/memory/diversity.hpp"
#include "rectune/memory/pareto.hpp"
#include "rectune/memory/task_record.hpp"

namespace rectune::mem {

struct EliteEntry {
  std::string task_id;
  std::map<std::string, double> adjusted;  // direction-adjusted metric deltas
  double utility = 0.0;

  friend bool operator==(const EliteEntry&, const EliteEntry&) = default;
};

// Non-dominated, diversity-filtered completed tasks, ordered by utility
// descending (ties: task id ascending).
struct EliteArchive {
  std::size_t capacity = 0;
  std::vector<EliteEntry> entries;

  friend bool operator==(const EliteArchive&, const EliteArchive&) = default;
};

// Partial update applied by update_task.
struct TaskUpdate {
  std::optional<TaskStatus> status{};
  std::optional<ab::MetricReport> results{};
  std::optional<Evaluation> evaluation{};
  std::optional<CheckInfo> check_info{};
  std::optional<std::string> experiment_id{};
  std::optional<std::string> failure{};
};

// One skill's memory directory:
//   tasks/<task-id>.json, elites.json, insights.json, experiments/, lock
// Single writer (advisory lock), any number of readers.
class MemoryStore {
 public:
  static MemoryStore open_writer(const fs::path& dir) { return MemoryStore(dir, true); }
  static MemoryStore open_reader(const fs::path& dir) { return MemoryStore(dir, false); }

  const fs::path& dir() const noexcept { return dir_; }
  fs::path tasks_dir() const { return dir_ / "tasks"; }
  fs::path elites_path() const { return dir_ / "elites.json"; }
  fs::path insights_path() const { return dir_ / "insights.json"; }
  fs::path experiments_dir() const { return dir_ / "experiments"; }
  fs::path lock_path() const { return dir_ / "lock"; }

  // Test hook fired between the temp write and the rename of every file.
  void set_before_rename(BeforeRenameHook hook) { hook_ = std::move(hook); }

  void write_task(const TaskRecord& r) {
    require_writer();
    r.validate();
    if (r.status != TaskStatus::Proposed)
      throw StateError("new task '" + r.id + "' must start in status Proposed");
    if (fs::exists(task_path(r.id))) throw StateError("task id '" + r.id + "' already exists");
    write_json(task_path(r.id), to_json(r), hook_);
  }

  TaskRecord update_task(const std::string& id, const TaskUpdate& delta) {
    require_writer();
    if (!fs::exists(task_path(id))) throw StateError("unknown task id '" + id + "'");
    TaskRecord r = read_task(id);
    if (delta.status && *delta.status != r.status) {
      if (!transition_allowed(r.status, *delta.status))
        throw StateError(std::string("illegal transition ") + status_name(r.status) + " -> " +
                         status_name(*delta.status) + " for task '" + id + "'");
      r.status = *delta.status;
    }
    if (delta.results) r.results = delta.results;
    if (delta.evaluation) r.evaluation = delta.evaluation;
    if (delta.check_info) r.check_info = *delta.check_info;
    if (delta.experiment_id) r.experiment_id = *delta.experiment_id;
    if (delta.failure) r.failure = *delta.failure;
    r.validate();
    write_json(task_path(id), to_json(r), hook_);
    return r;
  }

  TaskRecord read_task(const std::string& id) const { return task_record_from_json(read_json(task_path(id))); }

  bool has_task(const std::string& id) const { return fs::exists(task_path(id)); }

  // All records sorted by id. Leftover temp files from interrupted writes are
  // ignored.
  std::vector<TaskRecord> list_tasks() const {
    std::vector<TaskRecord> out;
    if (!fs::exists(tasks_dir())) return out;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(tasks_dir())) {
      if (!e.is_regular_file() || is_temp_file(e.path()) || e.path().extension() != ".json") continue;
      files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(task_record_from_json(read_json(f)));
    return out;
  }

  std::string next_task_id() const {
    std::size_t max_seq = 0;
    if (fs::exists(tasks_dir())) {
      for (const auto& e : fs::directory_iterator(tasks_dir())) {
        const std::string stem = e.path().stem().string();
        if (stem.rfind("task-", 0) == 0 && !is_temp_file(e.path())) {
          try {
            max_seq = std::max<std::size_t>(max_seq, std::stoul(stem.substr(5)));
          } catch (const std::exception&) {
          }
        }
      }
    }
    return format_task_id(max_seq + 1);
  }

  static std::string format_task_id(std::size_t seq) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "task-%06zu", seq);
    return buf;
  }

  void write_elites(const EliteArchive& a) {
    require_writer();
    json entries = json::array();
    for (const auto& e : a.entries)
      entries.push_back({{"task_id", e.task_id}, {"adjusted", e.adjusted}, {"utility", e.utility}});
    write_json(elites_path(), json{{"capacity", a.capacity}, {"entries", entries}}, hook_);
  }

  EliteArchive read_archive() const {
    EliteArchive a;
    if (!fs::exists(elites_path())) return a;
    const json j = read_json(elites_path());
    a.capacity = j.at("capacity").get<std::size_t>();
    for (const auto& e : j.at("entries"))
      a.entries.push_back({e.at("task_id").get<std::string>(), e.at("adjusted").get<std::map<std::string, double>>(),
                           e.at("utility").get<double>()});
    return a;
  }

  // Elite task records by utility descending, at most `limit`.
  std::vector<TaskRecord> read_elites(std::size_t limit) const {
    std::vector<TaskRecord> out;
    for (const auto& e : read_archive().entries) {
      if (out.size() >= limit) break;
      out.push_back(read_task(e.task_id));
    }
    return out;
  }

  void write_insights(const json& j) {
    require_writer();
    write_json(insights_path(), j, hook_);
  }

  std::optional<json> read_insights() const {
    if (!fs::exists(insights_path())) return std::nullopt;
    return read_json(insights_path());
  }

  bool writable() const noexcept { return lock_.has_value(); }

 private:
  MemoryStore(fs::path dir, bool writer) : dir_(std::move(dir)) {
    if (writer) {
      std::error_code ec;
      fs::create_directories(tasks_dir(), ec);
      if (ec) throw StorageError("cannot create '" + tasks_dir().string() + "': " + ec.message());
      lock_.emplace(lock_path());
    }
  }

  void require_writer() const {
    if (!lock_) throw StateError("memory store opened read-only");
  }

  fs::path task_path(const std::string& id) const { return tasks_dir() / (id + ".json"); }

  fs::path dir_;
  std::optional<FileLock> lock_;
  BeforeRenameHook hook_;
};

// Completed + feasible records -> Pareto filter over direction-adjusted
// north-star deltas -> max-min diversity down to `capacity` -> elites.json.
// Task files are never deleted; pruning only rewrites the elite index.
inline EliteArchive prune_memory(MemoryStore& store, const NorthStar& ns, std::size_t capacity) {
  std::vector<TaskRecord> pool;
  for (auto& r : store.list_tasks()) {
    if (r.status != TaskStatus::Completed || !r.evaluation || !r.evaluation->feasible || !r.results) continue;
    pool.push_back(std::move(r));
  }

  std::vector<std::string> metrics = ns.metric_names();
  std::vector<std::vector<double>> adjusted;
  std::vector<TaskRecord> usable;
  for (auto& r : pool) {
    std::vector<double> v;
    bool ok = true;
    for (const auto& m : metrics) {
      auto it = r.results->find(m);
      if (it == r.results->end() || !it->second.relative_delta_pct) {
        ok = false;
        break;
      }
      v.push_back(sign(ns.direction_of(m)) * *it->second.relative_delta_pct);
    }
    if (!ok) continue;
    adjusted.push_back(std::move(v));
    usable.push_back(std::move(r));
  }

  std::vector<std::size_t> keep = pareto_prune(adjusted);
  if (capacity > 0 && keep.size() > capacity) {
    Points pts;
    std::vector<double> utils;
    for (auto i : keep) {
      pts.push_back(adjusted[i]);
      utils.push_back(usable[i].evaluation->raw);
    }
    std::vector<std::size_t> chosen;
    for (auto local : select_diverse(pts, capacity, utils)) chosen.push_back(keep[local]);
    keep = std::move(chosen);
  } else if (capacity == 0) {
    keep.clear();
  }

  EliteArchive archive;
  archive.capacity = capacity;
  for (auto i : keep) {
    EliteEntry e{usable[i].id, {}, usable[i].evaluation->raw};
    for (std::size_t j = 0; j < metrics.size(); ++j) e.adjusted[metrics[j]] = adjusted[i][j];
    archive.entries.push_back(std::move(e));
  }
  std::sort(archive.entries.begin(), archive.entries.end(), [](const EliteEntry& a, const EliteEntry& b) {
    if (a.utility != b.utility) return a.utility > b.utility;
    return a.task_id < b.task_id;
  });
  store.write_elites(archive);
  return archive;
}

}  // namespace rectune::mem
