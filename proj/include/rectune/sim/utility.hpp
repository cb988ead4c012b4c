#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rectune/core/error.hpp"
#include "rectune/core/io.hpp"

namespace rectune {

enum class Direction { maximize, minimize };

inline double sign(Direction d) noexcept { return d == Direction::maximize ? 1.0 : -1.0; }

struct MetricGoal {
  std::string metric;
  Direction direction = Direction::maximize;

  friend bool operator==(const MetricGoal&, const MetricGoal&) = default;
};

// A maximize guardrail requires metric >= baseline, a minimize guardrail
// requires metric <= baseline.
struct Guardrail {
  std::string metric;
  Direction direction = Direction::maximize;
  double baseline = 0.0;

  bool satisfied(double v) const noexcept {
    return direction == Direction::maximize ? v >= baseline : v <= baseline;
  }

  friend bool operator==(const Guardrail&, const Guardrail&) = default;
};

struct NorthStar {
  std::vector<MetricGoal> primary;
  std::vector<Guardrail> guardrails;

  std::vector<std::string> metric_names() const {
    std::vector<std::string> out;
    for (const auto& p : primary) out.push_back(p.metric);
    for (const auto& g : guardrails) out.push_back(g.metric);
    return out;
  }

  Direction direction_of(const std::string& metric) const {
    for (const auto& p : primary)
      if (p.metric == metric) return p.direction;
    for (const auto& g : guardrails)
      if (g.metric == metric) return g.direction;
    throw ValidationError("metric not in north star", metric);
  }

  friend bool operator==(const NorthStar&, const NorthStar&) = default;
};

struct CostCheck {
  double cost = 0.0;
  double c_max = std::numeric_limits<double>::infinity();
};

struct UtilityResult {
  bool feasible = false;
  double raw = 0.0;  // sum of direction-adjusted primaries, regardless of feasibility
  double value = -std::numeric_limits<double>::infinity();  // raw when feasible, -inf otherwise

  friend bool operator==(const UtilityResult&, const UtilityResult&) = default;
};

// Sum of direction-adjusted primary values (uniform weights), feasible iff
// every guardrail holds (inclusive) and cost <= C_max. `values` holds either
// raw metric values or relative deltas; a nullopt entry means "undefined" and
// fails its guardrail.
inline UtilityResult utility(const std::map<std::string, std::optional<double>>& values, const NorthStar& ns,
                             std::optional<CostCheck> cost = std::nullopt) {
  auto lookup = [&](const std::string& m) -> std::optional<double> {
    auto it = values.find(m);
    if (it == values.end()) throw ValidationError("metric absent from input", m);
    return it->second;
  };
  UtilityResult r;
  r.feasible = true;
  for (const auto& p : ns.primary) {
    auto v = lookup(p.metric);
    if (v) r.raw += sign(p.direction) * *v;
    else r.feasible = false;
  }
  for (const auto& g : ns.guardrails) {
    auto v = lookup(g.metric);
    if (!v || !g.satisfied(*v)) r.feasible = false;
  }
  if (cost && !(cost->cost <= cost->c_max)) r.feasible = false;
  r.value = r.feasible ? r.raw : -std::numeric_limits<double>::infinity();
  return r;
}

inline UtilityResult utility(const std::map<std::string, double>& values, const NorthStar& ns,
                             std::optional<CostCheck> cost = std::nullopt) {
  std::map<std::string, std::optional<double>> v(values.begin(), values.end());
  return utility(v, ns, cost);
}

// ---- JSON ----

inline const char* direction_name(Direction d) { return d == Direction::maximize ? "maximize" : "minimize"; }

inline Direction parse_direction(const std::string& s, const std::string& path) {
  if (s == "maximize" || s == "increase") return Direction::maximize;
  if (s == "minimize" || s == "decrease") return Direction::minimize;
  throw ValidationError("direction must be maximize|minimize", path);
}

inline json to_json(const NorthStar& ns) {
  json p = json::array(), g = json::array();
  for (const auto& m : ns.primary) p.push_back({{"metric", m.metric}, {"direction", direction_name(m.direction)}});
  for (const auto& m : ns.guardrails)
    g.push_back({{"metric", m.metric}, {"direction", direction_name(m.direction)}, {"baseline", m.baseline}});
  return json{{"primary", p}, {"guardrails", g}};
}

inline NorthStar north_star_from_json(const json& j, const std::string& path = "north_star") {
  if (!j.is_object()) throw ValidationError("north star must be an object", path);
  NorthStar ns;
  try {
    const auto& p = j.at("primary");
    for (std::size_t i = 0; i < p.size(); ++i)
      ns.primary.push_back({p[i].at("metric").get<std::string>(),
                            parse_direction(p[i].value("direction", "maximize"),
                                            path + ".primary[" + std::to_string(i) + "].direction")});
    if (j.contains("guardrails")) {
      const auto& g = j["guardrails"];
      for (std::size_t i = 0; i < g.size(); ++i)
        ns.guardrails.push_back({g[i].at("metric").get<std::string>(),
                                 parse_direction(g[i].value("direction", "maximize"),
                                                 path + ".guardrails[" + std::to_string(i) + "].direction"),
                                 g[i].value("baseline", 0.0)});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("schema violation: ") + e.what(), path);
  }
  if (ns.primary.empty()) throw ValidationError("at least one primary metric required", path + ".primary");
  std::set<std::string> primaries;
  for (const auto& p : ns.primary) primaries.insert(p.metric);
  for (const auto& g : ns.guardrails)
    if (primaries.contains(g.metric))
      throw ValidationError("metric '" + g.metric + "' is both primary and guardrail", path + ".guardrails");
  return ns;
}

}  // namespace rectune
