#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gad/errors.hpp"
#include "gad/gnss_model.hpp"
#include "gad/stats.hpp"

namespace gad {

/// One thresholded detection criterion. C/N0 criteria are evaluated after
/// elevation-mask and excluded-svid filtering; count criteria are not.
struct Criterion {
  enum class Kind {
    MaxCn0Below,       // every epoch's max C/N0 is <= threshold (or no signal)
    AvgCn0Below,       // pooled mean C/N0 over the window is < threshold
    DistinctSatsBelow, // distinct signal-present satellites < threshold
    FixSatsBelow,      // max per-epoch fix count < threshold
  };

  Kind kind = Kind::MaxCn0Below;
  double threshold = 30.0;
};

constexpr std::string_view to_string(Criterion::Kind k) {
  switch (k) {
    case Criterion::Kind::MaxCn0Below:
      return "max_cn0_below";
    case Criterion::Kind::AvgCn0Below:
      return "avg_cn0_below";
    case Criterion::Kind::DistinctSatsBelow:
      return "distinct_sats_below";
    case Criterion::Kind::FixSatsBelow:
      return "fix_sats_below";
  }
  return "max_cn0_below";
}

struct DetectorConfig {
  double init_duration_s = 100.0;     // d0: skipped start-up segment
  double measure_duration_s = 100.0;  // dm: evaluated segment
  std::vector<Criterion> criteria = {{Criterion::Kind::MaxCn0Below, 30.0}};
  enum class Combine { All, Any } combine = Combine::All;
  std::optional<double> elevation_mask_deg;  // applied to C/N0 criteria only
  std::set<SatelliteKey> excluded_svids;     // pseudolite exclusion

  void validate() const {
    if (init_duration_s < 0.0) throw InvalidConfig("init duration must be >= 0");
    if (measure_duration_s <= 0.0) throw InvalidConfig("measure duration must be > 0");
    if (criteria.empty()) throw InvalidConfig("at least one criterion required");
    for (const auto& c : criteria) {
      if (!std::isfinite(c.threshold)) throw InvalidConfig("criterion threshold must be finite");
      if ((c.kind == Criterion::Kind::DistinctSatsBelow || c.kind == Criterion::Kind::FixSatsBelow) &&
          c.threshold < 0.0)
        throw InvalidConfig("count threshold must be >= 0");
    }
  }
};

namespace detail {

inline bool cn0_admissible(const SatelliteObservation& o, const DetectorConfig& config) {
  if (!o.signal_present) return false;
  if (config.excluded_svids.count(o.key)) return false;
  if (config.elevation_mask_deg && o.elevation_deg < *config.elevation_mask_deg) return false;
  return true;
}

inline std::optional<double> filtered_epoch_max_cn0(const Epoch& epoch, const DetectorConfig& config) {
  std::optional<double> best;
  for (const auto& o : epoch.observations) {
    if (!cn0_admissible(o, config)) continue;
    if (!best || o.cn0_dbhz > *best) best = o.cn0_dbhz;
  }
  return best;
}

}  // namespace detail

/// Evaluate one criterion over the window. Epochs without any admissible
/// signal satisfy the C/N0 criteria (maximally attenuated).
inline bool evaluate_criterion(const Criterion& criterion, const RawSeries& series, const Window& window,
                               const DetectorConfig& config) {
  switch (criterion.kind) {
    case Criterion::Kind::MaxCn0Below: {
      for (const auto& epoch : series.epochs) {
        if (!window.contains(epoch.timestamp_s)) continue;
        auto m = detail::filtered_epoch_max_cn0(epoch, config);
        if (m && *m > criterion.threshold) return false;
      }
      return true;
    }
    case Criterion::Kind::AvgCn0Below: {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& epoch : series.epochs) {
        if (!window.contains(epoch.timestamp_s)) continue;
        for (const auto& o : epoch.observations) {
          if (!detail::cn0_admissible(o, config)) continue;
          sum += o.cn0_dbhz;
          ++n;
        }
      }
      return n == 0 || sum / static_cast<double>(n) < criterion.threshold;
    }
    case Criterion::Kind::DistinctSatsBelow:
      return distinct_satellites(series, window) < criterion.threshold;
    case Criterion::Kind::FixSatsBelow: {
      int max_fix = 0;
      for (const auto& epoch : series.epochs) {
        if (window.contains(epoch.timestamp_s)) max_fix = std::max(max_fix, fix_count(epoch));
      }
      return max_fix < criterion.threshold;
    }
  }
  return false;
}

/// The measurement window of a series under a config: [t0+d0, t0+d0+dm).
inline Window measurement_window(const RawSeries& series, const DetectorConfig& config) {
  double t0 = series.epochs.empty() ? 0.0 : series.epochs.front().timestamp_s;
  return Window{t0 + config.init_duration_s, config.measure_duration_s};
}

namespace detail {

inline bool combine_criteria(const RawSeries& series, const Window& window, const DetectorConfig& config) {
  bool all = true;
  bool any = false;
  for (const auto& c : config.criteria) {
    bool r = evaluate_criterion(c, series, window, config);
    all = all && r;
    any = any || r;
  }
  return config.combine == DetectorConfig::Combine::All ? all : any;
}

}  // namespace detail

/// Batch detection f_i(R): 1 if the combined criteria hold over the
/// measurement window, 0 otherwise. The initialization segment [0, d0) is
/// never evaluated.
inline int detect(const RawSeries& series, const DetectorConfig& config) {
  config.validate();
  double need = config.init_duration_s + config.measure_duration_s;
  if (series_span_s(series) < need) {
    throw SeriesTooShort("series spans " + std::to_string(series_span_s(series)) + " s, need " +
                         std::to_string(need));
  }
  return detail::combine_criteria(series, measurement_window(series, config), config) ? 1 : 0;
}

/// Two-phase online detection state. Value type: online_step returns the
/// successor state, the input is untouched.
struct DetectionState {
  enum class Phase { Initializing, Measuring, Decided };

  Phase phase = Phase::Initializing;
  double cadence_s = 1.0;  // nominal cadence of the fed stream
  double elapsed_s = 0.0;
  int result = 0;  // meaningful once phase == Decided

  // measurement-window buffer (the per-criterion evidence)
  std::optional<double> start_s;
  double last_s = 0.0;
  std::vector<Epoch> buffered;
};

/// Feed one epoch. Initializing until elapsed >= d0, then buffers epochs;
/// once a full dm is covered, Decided with the result detect() would give
/// on the equivalent batch window.
inline DetectionState online_step(const DetectionState& state, const Epoch& epoch,
                                  const DetectorConfig& config) {
  config.validate();
  if (state.start_s && epoch.timestamp_s <= state.last_s) {
    throw OutOfOrderEpoch("epoch at t=" + std::to_string(epoch.timestamp_s) +
                          " does not advance past t=" + std::to_string(state.last_s));
  }
  if (state.phase == DetectionState::Phase::Decided) return state;

  DetectionState next = state;
  if (!next.start_s) next.start_s = epoch.timestamp_s;
  next.last_s = epoch.timestamp_s;
  const double rel = epoch.timestamp_s - *next.start_s;
  next.elapsed_s = rel + next.cadence_s;

  const double d0 = config.init_duration_s;
  const double dm = config.measure_duration_s;

  auto decide = [&] {
    RawSeries window_series{next.buffered, next.cadence_s};
    Window window{*next.start_s + d0, dm};
    next.result = detail::combine_criteria(window_series, window, config) ? 1 : 0;
    next.phase = DetectionState::Phase::Decided;
    next.buffered.clear();
  };

  if (rel >= d0 + dm) {
    // epoch lies past the measurement window; decide on what is buffered
    decide();
    return next;
  }
  if (rel >= d0) {
    next.phase = DetectionState::Phase::Measuring;
    next.buffered.push_back(epoch);
    if (rel + next.cadence_s >= d0 + dm) decide();
  }
  return next;
}

/// Stepwise attenuation level of f_a(R).
enum class AttenuationLevel { None, Moderate, Strong, Severe };

constexpr std::string_view to_string(AttenuationLevel level) {
  switch (level) {
    case AttenuationLevel::None:
      return "NONE";
    case AttenuationLevel::Moderate:
      return "MODERATE";
    case AttenuationLevel::Strong:
      return "STRONG";
    case AttenuationLevel::Severe:
      return "SEVERE";
  }
  return "NONE";
}

struct AttenuationEstimate {
  AttenuationLevel level = AttenuationLevel::None;
  double metric_dbhz = 0.0;  // mean of per-epoch max C/N0 in the window
};

// deficit -> level step boundaries, dB
inline constexpr double kModerateDeficitDb = 5.0;
inline constexpr double kStrongDeficitDb = 12.0;
inline constexpr double kSevereDeficitDb = 20.0;

/// f_a(R): mean per-epoch max C/N0 over the measurement window (epochs
/// without admissible signal contribute 0), compared against an open-sky
/// baseline and mapped to a stepwise level.
inline AttenuationEstimate estimate_attenuation(const RawSeries& series, const DetectorConfig& config,
                                                double open_sky_baseline_dbhz) {
  config.validate();
  double need = config.init_duration_s + config.measure_duration_s;
  if (series_span_s(series) < need) {
    throw SeriesTooShort("series spans " + std::to_string(series_span_s(series)) + " s, need " +
                         std::to_string(need));
  }
  Window window = measurement_window(series, config);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& epoch : series.epochs) {
    if (!window.contains(epoch.timestamp_s)) continue;
    sum += detail::filtered_epoch_max_cn0(epoch, config).value_or(0.0);
    ++n;
  }
  AttenuationEstimate est;
  est.metric_dbhz = n > 0 ? sum / static_cast<double>(n) : 0.0;
  double deficit = open_sky_baseline_dbhz - est.metric_dbhz;
  if (deficit > kSevereDeficitDb) {
    est.level = AttenuationLevel::Severe;
  } else if (deficit >= kStrongDeficitDb) {
    est.level = AttenuationLevel::Strong;
  } else if (deficit >= kModerateDeficitDb) {
    est.level = AttenuationLevel::Moderate;
  } else {
    est.level = AttenuationLevel::None;
  }
  return est;
}

}  // namespace gad
