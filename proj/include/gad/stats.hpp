#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "gad/errors.hpp"
#include "gad/gnss_model.hpp"

namespace gad {

/// Half-open time window [start_s, start_s + duration_s).
struct Window {
  double start_s = 0.0;
  double duration_s = 1.0;

  bool contains(double t) const { return t >= start_s && t < start_s + duration_s; }
};

struct SummaryStats {
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n-1 denominator)
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

namespace detail {

inline SummaryStats summarize(const std::vector<double>& values) {
  SummaryStats s;
  s.n = values.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  s.min = values.front();
  s.max = values.front();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

}  // namespace detail

/// C/N0 statistics pooled over all signal-present observations in the window.
inline SummaryStats cn0_summary(const RawSeries& series, const Window& window) {
  std::vector<double> values;
  for (const auto& epoch : series.epochs) {
    if (!window.contains(epoch.timestamp_s)) continue;
    for (const auto& o : epoch.observations) {
      if (o.signal_present) values.push_back(o.cn0_dbhz);
    }
  }
  if (values.empty()) throw EmptyWindow("no signal-present observation in window");
  return detail::summarize(values);
}

enum class SatCount { Available, UsedInFix };

/// Statistics over the per-epoch satellite counts S_i (available) or X_i
/// (used in fix) within the window.
inline SummaryStats satcount_summary(const RawSeries& series, const Window& window, SatCount which) {
  std::vector<double> values;
  for (const auto& epoch : series.epochs) {
    if (!window.contains(epoch.timestamp_s)) continue;
    values.push_back(static_cast<double>(which == SatCount::Available ? satellite_count(epoch)
                                                                      : fix_count(epoch)));
  }
  if (values.empty()) throw EmptyWindow("no epochs in window");
  return detail::summarize(values);
}

/// Seconds from the first epoch to the first epoch with X_i > 0; empty when
/// the series never fixes.
inline std::optional<double> time_to_first_fix(const RawSeries& series) {
  if (series.epochs.empty()) return std::nullopt;
  double t0 = series.epochs.front().timestamp_s;
  for (const auto& epoch : series.epochs) {
    if (fix_count(epoch) > 0) return epoch.timestamp_s - t0;
  }
  return std::nullopt;
}

/// Unique satellites with a signal in at least one epoch of the window.
inline int distinct_satellites(const RawSeries& series, const Window& window) {
  std::set<SatelliteKey> keys;
  for (const auto& epoch : series.epochs) {
    if (!window.contains(epoch.timestamp_s)) continue;
    for (const auto& o : epoch.observations) {
      if (o.signal_present) keys.insert(o.key);
    }
  }
  return static_cast<int>(keys.size());
}

/// Empirical CDF: right-continuous step function over a finite sample.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples) {
    if (samples.empty()) throw EmptyInput("ecdf needs at least one value");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
      values_.push_back(samples[i]);
      probs_.push_back(static_cast<double>(i + 1) / n);
    }
  }

  /// P(X <= x)
  double operator()(double x) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return probs_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probabilities() const { return probs_; }

 private:
  std::vector<double> values_;  // sorted, unique
  std::vector<double> probs_;   // cumulative, ends at 1
};

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|,
/// evaluated over the union of sample points.
inline double ks_distance(const Ecdf& a, const Ecdf& b) {
  double d = 0.0;
  for (const auto* vals : {&a.values(), &b.values()}) {
    for (double x : *vals) d = std::max(d, std::abs(a(x) - b(x)));
  }
  return d;
}

}  // namespace gad
