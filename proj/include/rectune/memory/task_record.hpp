#pragma once

#include <optional>
#include <string>

#include "rectune/abtest/experiment.hpp"
#include "rectune/config.hpp"
#include "rectune/core/io.hpp"

namespace rectune::mem {

enum class TaskStatus { Proposed, Approved, Rejected, Running, Completed, Failed };

inline const char* status_name(TaskStatus s) {
  switch (s) {
    case TaskStatus::Proposed: return "Proposed";
    case TaskStatus::Approved: return "Approved";
    case TaskStatus::Rejected: return "Rejected";
    case TaskStatus::Running: return "Running";
    case TaskStatus::Completed: return "Completed";
    case TaskStatus::Failed: return "Failed";
  }
  return "Failed";
}

inline TaskStatus parse_task_status(const std::string& s) {
  for (auto st : {TaskStatus::Proposed, TaskStatus::Approved, TaskStatus::Rejected, TaskStatus::Running,
                  TaskStatus::Completed, TaskStatus::Failed})
    if (s == status_name(st)) return st;
  throw ValidationError("unknown task status '" + s + "'", "status");
}

// Proposed -> {Approved, Rejected}; Approved -> Running -> {Completed, Failed}.
inline bool transition_allowed(TaskStatus from, TaskStatus to) {
  switch (from) {
    case TaskStatus::Proposed: return to == TaskStatus::Approved || to == TaskStatus::Rejected;
    case TaskStatus::Approved: return to == TaskStatus::Running;
    case TaskStatus::Running: return to == TaskStatus::Completed || to == TaskStatus::Failed;
    default: return false;
  }
}

// Critic outcome for one proposal.
struct CheckInfo {
  std::string verdict;  // "approved" | "rejected" | "" (not reviewed)
  std::string reason;   // reason code when rejected
  std::string message;
  std::string comments;

  friend bool operator==(const CheckInfo&, const CheckInfo&) = default;
};

// Utility summary computed when results are collected.
struct Evaluation {
  double cost = 0.0;
  bool feasible = false;
  double raw = 0.0;  // sum of direction-adjusted primary deltas

  double value() const noexcept { return feasible ? raw : -std::numeric_limits<double>::infinity(); }

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

struct TaskRecord {
  std::string id;
  std::string config;  // canonical config string
  std::string explanation;
  TimePoint proposed_time{};
  TaskStatus status = TaskStatus::Proposed;
  std::optional<ab::MetricReport> results;
  CheckInfo check_info;
  std::string origin = "heuristic";
  int round = 0;
  std::string experiment_id;
  std::optional<Evaluation> evaluation;
  std::string failure;  // platform error text for Failed records

  SystemConfig config_values() const { return SystemConfig::parse(config); }

  void validate() const {
    if (id.empty()) throw ValidationError("task id required", "id");
    if (results.has_value() != (status == TaskStatus::Completed))
      throw ValidationError("results must be present iff status is Completed", "results");
  }

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

inline json to_json(const TaskRecord& r) {
  json j{{"id", r.id},
         {"config", r.config},
         {"explanation", r.explanation},
         {"proposed_time", format_rfc3339(r.proposed_time)},
         {"status", status_name(r.status)},
         {"results", r.results ? ab::to_json(*r.results) : json(nullptr)},
         {"check_info",
          {{"verdict", r.check_info.verdict},
           {"reason", r.check_info.reason},
           {"message", r.check_info.message},
           {"comments", r.check_info.comments}}},
         {"origin", r.origin},
         {"round", r.round},
         {"experiment_id", r.experiment_id},
         {"failure", r.failure}};
  if (r.evaluation) {
    j["evaluation"] = {{"cost", r.evaluation->cost}, {"feasible", r.evaluation->feasible}, {"raw", r.evaluation->raw}};
  } else {
    j["evaluation"] = nullptr;
  }
  return j;
}

inline TaskRecord task_record_from_json(const json& j) {
  TaskRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.config = j.at("config").get<std::string>();
    r.explanation = j.at("explanation").get<std::string>();
    r.proposed_time = parse_rfc3339(j.at("proposed_time").get<std::string>());
    r.status = parse_task_status(j.at("status").get<std::string>());
    if (!j.at("results").is_null()) r.results = ab::metric_report_from_json(j["results"]);
    const auto& c = j.at("check_info");
    r.check_info = {c.value("verdict", ""), c.value("reason", ""), c.value("message", ""), c.value("comments", "")};
    r.origin = j.value("origin", "heuristic");
    r.round = j.value("round", 0);
    r.experiment_id = j.value("experiment_id", "");
    r.failure = j.value("failure", "");
    if (j.contains("evaluation") && !j["evaluation"].is_null()) {
      const auto& e = j["evaluation"];
      r.evaluation = Evaluation{e.at("cost").get<double>(), e.at("feasible").get<bool>(), e.at("raw").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("task record schema violation: ") + e.what());
  }
  r.validate();
  return r;
}

}  // namespace rectune::mem
