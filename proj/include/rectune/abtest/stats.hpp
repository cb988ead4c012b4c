#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "rectune/core/error.hpp"

namespace rectune::ab {

inline constexpr double kSignificanceLevel = 0.05;

struct TTest {
  double t = 0.0;
  double p = 1.0;
};

// Welch two-sample t statistic for b vs a with a two-sided p-value from the
// standard normal approximation. Zero pooled variance is decided exactly:
// p = 1 when the means agree, 0 otherwise.
inline TTest welch_p(double mean_a, double std_a, std::size_t n_a, double mean_b, double std_b, std::size_t n_b) {
  if (n_a < 2 || n_b < 2) throw ValidationError("welch test needs n >= 2 per group");
  const double se2 = std_a * std_a / static_cast<double>(n_a) + std_b * std_b / static_cast<double>(n_b);
  const double diff = mean_b - mean_a;
  if (se2 == 0.0) {
    if (diff == 0.0) return {0.0, 1.0};
    return {std::copysign(std::numeric_limits<double>::infinity(), diff), 0.0};
  }
  const double t = diff / std::sqrt(se2);
  return {t, std::erfc(std::abs(t) / std::sqrt(2.0))};
}

// 100 * (treatment - control) / control; nullopt when the control mean is 0.
inline std::optional<double> relative_delta(double mean_c, double mean_t) {
  if (mean_c == 0.0) return std::nullopt;
  return 100.0 * (mean_t - mean_c) / mean_c;
}

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) standard deviation
  std::size_t n = 0;

  friend bool operator==(const SampleStats&, const SampleStats&) = default;
};

inline SampleStats describe(std::span<const double> xs) {
  SampleStats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace rectune::ab
