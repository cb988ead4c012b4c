#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rectune/abtest/stats.hpp"
#include "rectune/sim/evaluator.hpp"
#include "rectune/sim/utility.hpp"

namespace rectune::ab {

struct Arm {
  std::string arm_id;
  SystemConfig config;

  friend bool operator==(const Arm&, const Arm&) = default;
};

struct ExperimentSpec {
  std::string experiment_id;
  std::string scenario;  // scenario name the spec was prepared for
  SystemConfig control;
  std::vector<Arm> arms;
  int num_requests = 1000;
  double traffic_fraction = 0.01;
  std::uint64_t seed = 0;  // request population seed
  bool pending_review = true;
  // Disjoint traffic buckets instead of the paired common-random-number design.
  bool disjoint_buckets = false;

  void validate(const SearchSpace* space = nullptr) const {
    if (experiment_id.empty()) throw ValidationError("experiment id required", "experiment_id");
    if (arms.empty()) throw ValidationError("at least one treatment arm required", "arms");
    if (num_requests < 2) throw ValidationError("num_requests must be >= 2", "num_requests");
    if (!(traffic_fraction > 0.0 && traffic_fraction <= 1.0))
      throw ValidationError("traffic fraction must lie in (0,1]", "traffic_fraction");
    std::set<std::string> ids;
    for (const auto& a : arms)
      if (!ids.insert(a.arm_id).second) throw ValidationError("duplicate arm id '" + a.arm_id + "'", "arms");
    if (space) {
      space->validate_config(control, "control");
      for (const auto& a : arms) space->validate_config(a.config, "arms." + a.arm_id);
    }
  }

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

using ArmResult = std::map<std::string, SampleStats>;

struct MetricDelta {
  std::optional<double> relative_delta_pct;  // nullopt = undefined (control mean 0)
  double t = 0.0;
  double p_value = 1.0;
  bool significant = false;

  friend bool operator==(const MetricDelta&, const MetricDelta&) = default;
};

using MetricReport = std::map<std::string, MetricDelta>;

struct ArmOutcome {
  ArmResult control;
  ArmResult arm;
  MetricReport report;

  friend bool operator==(const ArmOutcome&, const ArmOutcome&) = default;
};

inline MetricReport compare(const ArmResult& control, const ArmResult& arm) {
  MetricReport out;
  for (const auto& [m, c] : control) {
    const SampleStats& t = arm.at(m);
    const TTest tt = welch_p(c.mean, c.std, c.n, t.mean, t.std, t.n);
    out[m] = {relative_delta(c.mean, t.mean), tt.t, tt.p, tt.p < kSignificanceLevel};
  }
  return out;
}

// Relative deltas as utility input.
inline std::map<std::string, std::optional<double>> deltas(const MetricReport& r) {
  std::map<std::string, std::optional<double>> out;
  for (const auto& [m, d] : r) out[m] = d.relative_delta_pct;
  return out;
}

inline UtilityResult utility(const MetricReport& r, const NorthStar& ns, std::optional<CostCheck> cost = std::nullopt) {
  return rectune::utility(deltas(r), ns, cost);
}

// Request populations keyed by seed, shared across experiments.
class PoolCache {
 public:
  explicit PoolCache(sim::Scenario scenario) : scenario_(std::move(scenario)) {}

  const sim::Scenario& scenario() const noexcept { return scenario_; }

  std::shared_ptr<const std::vector<sim::Request>> requests(std::uint64_t seed, std::size_t n) {
    std::shared_ptr<sim::RequestPool> pool;
    {
      std::lock_guard lock(mu_);
      auto& slot = pools_[seed];
      if (!slot) {
        sim::Scenario s = scenario_;
        s.seed = seed;
        slot = std::make_shared<sim::RequestPool>(std::move(s));
      }
      pool = slot;
    }
    return pool->first(n);
  }

  const sim::Scenario& scenario_for(std::uint64_t seed) {
    std::lock_guard lock(mu_);
    auto it = pools_.find(seed);
    return it == pools_.end() ? scenario_ : it->second->scenario();
  }

 private:
  sim::Scenario scenario_;
  std::mutex mu_;
  std::map<std::uint64_t, std::shared_ptr<sim::RequestPool>> pools_;
};

namespace detail {

inline ArmResult summarize(const sim::SampleMatrix& s) {
  ArmResult r;
  for (std::size_t m = 0; m < s.metrics.size(); ++m) r[s.metrics[m]] = describe(s.samples[m]);
  return r;
}

}  // namespace detail

// Paired design: control and every arm see the same requests 0..n-1 and the
// same keyed feedback draws. With disjoint_buckets, bucket k (control = 0)
// gets requests [k*n, (k+1)*n).
inline std::map<std::string, ArmOutcome> run_simulated_experiment(const ExperimentSpec& spec, PoolCache& pools,
                                                                  const SearchSpace* space, unsigned workers = 0) {
  if (spec.scenario != pools.scenario().name)
    throw ValidationError("spec prepared for scenario '" + spec.scenario + "' but platform runs '" +
                              pools.scenario().name + "'",
                          "scenario");
  spec.validate(space);

  const auto n = static_cast<std::size_t>(spec.num_requests);
  const std::size_t buckets = spec.disjoint_buckets ? spec.arms.size() + 1 : 1;
  auto all = pools.requests(spec.seed, n * buckets);
  const sim::Scenario& scenario = pools.scenario_for(spec.seed);
  auto bucket = [&](std::size_t k) {
    const std::size_t b = spec.disjoint_buckets ? k : 0;
    return std::vector<sim::Request>(all->begin() + static_cast<std::ptrdiff_t>(b * n),
                                     all->begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
  };

  const auto control_requests = bucket(0);
  const ArmResult control = detail::summarize(sim::evaluate_samples(scenario, control_requests, spec.control, workers));

  std::map<std::string, ArmOutcome> out;
  for (std::size_t k = 0; k < spec.arms.size(); ++k) {
    const auto& arm = spec.arms[k];
    const ArmResult treated = detail::summarize(
        sim::evaluate_samples(scenario, spec.disjoint_buckets ? bucket(k + 1) : control_requests, arm.config, workers));
    out[arm.arm_id] = {control, treated, compare(control, treated)};
  }
  return out;
}

// ---- JSON ----

inline json to_json(const ExperimentSpec& s) {
  json arms = json::array();
  for (const auto& a : s.arms) arms.push_back({{"arm_id", a.arm_id}, {"config", a.config.to_json()}});
  return json{{"experiment_id", s.experiment_id}, {"scenario", s.scenario},
              {"control", s.control.to_json()},   {"arms", arms},
              {"num_requests", s.num_requests},   {"traffic_fraction", s.traffic_fraction},
              {"seed", s.seed},                   {"pending_review", s.pending_review},
              {"disjoint_buckets", s.disjoint_buckets}};
}

inline ExperimentSpec experiment_spec_from_json(const json& j) {
  ExperimentSpec s;
  try {
    s.experiment_id = j.at("experiment_id").get<std::string>();
    s.scenario = j.at("scenario").get<std::string>();
    s.control = SystemConfig::from_json(j.at("control"));
    for (const auto& a : j.at("arms")) s.arms.push_back({a.at("arm_id").get<std::string>(), SystemConfig::from_json(a.at("config"))});
    s.num_requests = j.at("num_requests").get<int>();
    s.traffic_fraction = j.at("traffic_fraction").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.pending_review = j.value("pending_review", true);
    s.disjoint_buckets = j.value("disjoint_buckets", false);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment spec schema violation: ") + e.what());
  }
  return s;
}

inline json to_json(const ArmResult& r) {
  json j = json::object();
  for (const auto& [m, s] : r) j[m] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
  return j;
}

inline ArmResult arm_result_from_json(const json& j) {
  ArmResult r;
  for (auto& [m, s] : j.items()) r[m] = {s.at("mean").get<double>(), s.at("std").get<double>(), s.at("n").get<std::size_t>()};
  return r;
}

inline json to_json(const MetricReport& r) {
  json j = json::object();
  for (const auto& [m, d] : r) {
    j[m] = {{"relative_delta_pct", d.relative_delta_pct ? json(*d.relative_delta_pct) : json(nullptr)},
            {"t", std::isfinite(d.t) ? json(d.t) : json(d.t > 0 ? "inf" : "-inf")},
            {"p_value", d.p_value},
            {"significant", d.significant}};
  }
  return j;
}

inline MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  try {
    for (auto& [m, d] : j.items()) {
      MetricDelta md;
      if (!d.at("relative_delta_pct").is_null()) md.relative_delta_pct = d["relative_delta_pct"].get<double>();
      const auto& t = d.at("t");
      md.t = t.is_string() ? (t.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                            : -std::numeric_limits<double>::infinity())
                           : t.get<double>();
      md.p_value = d.at("p_value").get<double>();
      md.significant = d.at("significant").get<bool>();
      r[m] = md;
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("metric report schema violation: ") + e.what());
  }
  return r;
}

inline json to_json(const ArmOutcome& o) {
  return json{{"control", to_json(o.control)}, {"arm", to_json(o.arm)}, {"report", to_json(o.report)}};
}

inline ArmOutcome arm_outcome_from_json(const json& j) {
  return {arm_result_from_json(j.at("control")), arm_result_from_json(j.at("arm")),
          metric_report_from_json(j.at("report"))};
}

}  // namespace rectune::ab
