#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rectune/sim/pipeline.hpp"

namespace rectune::sim {

struct Outcome {
  bool clicked = false;
  bool hearted = false;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct Feedback {
  std::int64_t request_id = 0;
  std::vector<Outcome> outcomes;  // one per exposed position

  friend bool operator==(const Feedback&, const Feedback&) = default;
};

// DCG-style examination probability for 1-based position p.
inline double position_bias(std::size_t p) noexcept { return 1.0 / std::log2(static_cast<double>(p) + 2.0); }

// Click and heart draws are keyed by (seed, request, item, outcome type), so an
// item shown at the same position under two configurations gets the same
// outcome (common random numbers).
inline Feedback simulate_feedback(const Request& request, const RankedList& list) {
  if (list.empty()) throw ValidationError("cannot simulate feedback for an empty list");
  const std::uint64_t seed = request.context->seed;
  const auto rid = static_cast<std::uint64_t>(request.request_id);
  Feedback fb{request.request_id, {}};
  fb.outcomes.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const Item& it = request.item(list.entries[i].item_id);
    const auto iid = static_cast<std::uint64_t>(it.item_id);
    const double p_click = position_bias(i + 1) * request.p_click_base(it);
    const bool clicked = keyed_uniform({seed, rid, iid, tag("click")}) < p_click;
    const bool hearted = clicked && keyed_uniform({seed, rid, iid, tag("heart")}) < request.p_heart_given_click(it);
    fb.outcomes.push_back({clicked, hearted});
  }
  return fb;
}

// Per-request observation of one metric.
inline double metric_sample(MetricKind kind, const Feedback& fb, const RankedList& list) {
  switch (kind) {
    case MetricKind::clicks: {
      double n = 0;
      for (const auto& o : fb.outcomes) n += o.clicked ? 1.0 : 0.0;
      return n;
    }
    case MetricKind::hearts: {
      double n = 0;
      for (const auto& o : fb.outcomes) n += o.hearted ? 1.0 : 0.0;
      return n;
    }
    case MetricKind::topic_coverage: {
      if (list.empty()) return 0.0;
      std::set<int> topics;
      for (const auto& e : list.entries) topics.insert(e.topic);
      return static_cast<double>(topics.size()) / static_cast<double>(list.size());
    }
  }
  return 0.0;
}

using MetricVector = std::map<std::string, double>;

// Means of the per-request samples: engagement1 = clicks per request,
// engagement2 = hearts per request, diversity = distinct topics / list length.
inline MetricVector compute_metrics(const std::vector<Feedback>& feedbacks, const std::vector<RankedList>& lists,
                                    const std::vector<MetricDef>& defs = default_metrics()) {
  if (feedbacks.empty()) throw ValidationError("no requests to aggregate");
  if (feedbacks.size() != lists.size()) throw ValidationError("feedback and list counts differ");
  MetricVector out;
  for (const auto& d : defs) {
    double sum = 0.0;
    for (std::size_t r = 0; r < feedbacks.size(); ++r) sum += metric_sample(d.kind, feedbacks[r], lists[r]);
    out[d.name] = sum / static_cast<double>(feedbacks.size());
  }
  return out;
}

// K1 * c_rank + K2 * c_re on the effective (defaults + tuned) configuration.
inline double compute_cost(const SystemConfig& config, const Scenario& scenario) {
  const SystemConfig eff = scenario.effective(config);
  return eff.at("pre.K1") * scenario.cost.c_rank + eff.at("rank.K2") * scenario.cost.c_re;
}

}  // namespace rectune::sim
