#pragma once

#include <algorithm>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "rectune/sim/feedback.hpp"

namespace rectune::sim {

// Lazily generated, shared request population for one scenario. Requests are
// immutable once built, so snapshots can be read from any thread.
class RequestPool {
 public:
  explicit RequestPool(Scenario scenario) : scenario_(std::move(scenario)), context_(make_context(scenario_)) {}

  const Scenario& scenario() const noexcept { return scenario_; }

  std::shared_ptr<const std::vector<Request>> first(std::size_t n, unsigned workers = 0) const {
    std::lock_guard lock(mu_);
    if (cache_ && cache_->size() >= n) return cache_;
    auto fresh = std::make_shared<std::vector<Request>>(n);
    const std::size_t have = cache_ ? cache_->size() : 0;
    for (std::size_t i = 0; i < have; ++i) (*fresh)[i] = (*cache_)[i];
    parallel_for(have, n, workers, [&](std::size_t i) {
      (*fresh)[i] = generate_request(scenario_, static_cast<std::int64_t>(i), context_);
    });
    cache_ = std::move(fresh);
    return cache_;
  }

  // Runs fn(i) for i in [begin, end) on contiguous chunks.
  template <typename Fn>
  static void parallel_for(std::size_t begin, std::size_t end, unsigned workers, Fn&& fn) {
    if (end <= begin) return;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n = end - begin;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
      for (std::size_t i = begin; i < end; ++i) fn(i);
      return;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t lo = begin; lo < end; lo += chunk) {
      const std::size_t hi = std::min(end, lo + chunk);
      jobs.push_back(std::async(std::launch::async, [lo, hi, &fn] {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      }));
    }
    for (auto& j : jobs) j.get();
  }

 private:
  Scenario scenario_;
  std::shared_ptr<const PoolContext> context_;
  mutable std::mutex mu_;
  mutable std::shared_ptr<const std::vector<Request>> cache_;
};

// samples[m][r]: metric m observed on request r.
struct SampleMatrix {
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> samples;
};

inline SampleMatrix evaluate_samples(const Scenario& scenario, const std::vector<Request>& requests,
                                     const SystemConfig& tuned, unsigned workers = 0) {
  const SystemConfig eff = scenario.effective(tuned);
  SampleMatrix out;
  for (const auto& m : scenario.metrics) out.metrics.push_back(m.name);
  out.samples.assign(scenario.metrics.size(), std::vector<double>(requests.size(), 0.0));
  RequestPool::parallel_for(0, requests.size(), workers, [&](std::size_t r) {
    const RankedList list = run_system(requests[r], eff);
    const Feedback fb = simulate_feedback(requests[r], list);
    for (std::size_t m = 0; m < scenario.metrics.size(); ++m)
      out.samples[m][r] = metric_sample(scenario.metrics[m].kind, fb, list);
  });
  return out;
}

// Per-request samples are reduced in request order, so the result does not
// depend on the worker count.
inline MetricVector evaluate(const Scenario& scenario, const std::vector<Request>& requests, const SystemConfig& tuned,
                             unsigned workers = 0) {
  if (requests.empty()) throw ValidationError("no requests to evaluate");
  const SampleMatrix s = evaluate_samples(scenario, requests, tuned, workers);
  MetricVector out;
  for (std::size_t m = 0; m < s.metrics.size(); ++m) {
    double sum = 0.0;
    for (double v : s.samples[m]) sum += v;
    out[s.metrics[m]] = sum / static_cast<double>(requests.size());
  }
  return out;
}

}  // namespace rectune::sim
