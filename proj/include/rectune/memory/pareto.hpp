#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "rectune/core/error.hpp"
#include "rectune/sim/utility.hpp"

namespace rectune::mem {

// Weak Pareto dominance on direction-adjusted (larger is better) vectors:
// a >= b everywhere and a > b somewhere.
inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strictly = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] < b[j]) return false;
    if (a[j] > b[j]) strictly = true;
  }
  return strictly;
}

// Indices (ascending) of the non-dominated candidates. Candidates are visited
// in lexicographically descending order: a dominator always sorts before what
// it dominates, and dominance is transitive, so each candidate only needs to
// be checked against the survivors found so far.
inline std::vector<std::size_t> pareto_prune(const std::vector<std::vector<double>>& adjusted) {
  if (adjusted.empty()) return {};
  const std::size_t dims = adjusted.front().size();
  for (const auto& v : adjusted)
    if (v.size() != dims) throw ValidationError("candidates have mismatched metric counts");

  std::vector<std::size_t> order(adjusted.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return adjusted[a] > adjusted[b]; });

  std::vector<std::size_t> front;
  for (std::size_t idx : order) {
    const bool beaten = std::any_of(front.begin(), front.end(),
                                    [&](std::size_t f) { return dominates(adjusted[f], adjusted[idx]); });
    if (!beaten) front.push_back(idx);
  }
  std::sort(front.begin(), front.end());
  return front;
}

// Named-metric form: every vector must carry exactly the metrics in
// `directions`; values are sign-adjusted before comparison.
inline std::vector<std::size_t> pareto_prune(const std::vector<std::map<std::string, double>>& candidates,
                                             const std::map<std::string, Direction>& directions) {
  std::vector<std::vector<double>> adjusted;
  adjusted.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.size() != directions.size())
      throw ValidationError("candidate " + std::to_string(i) + " has a mismatched metric set");
    std::vector<double> v;
    for (const auto& [m, d] : directions) {
      auto it = c.find(m);
      if (it == c.end()) throw ValidationError("candidate " + std::to_string(i) + " lacks metric '" + m + "'");
      v.push_back(sign(d) * it->second);
    }
    adjusted.push_back(std::move(v));
  }
  return pareto_prune(adjusted);
}

}  // namespace rectune::mem
