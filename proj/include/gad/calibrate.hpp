#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gad/detector.hpp"
#include "gad/errors.hpp"
#include "gad/gnss_model.hpp"
#include "gad/stats.hpp"

namespace gad {

/// Labeled recordings: series taken inside attenuating environments and
/// series taken outside.
struct LabeledDataset {
  std::vector<RawSeries> attenuating;
  std::vector<RawSeries> open;
  std::vector<std::string> attenuating_tags;  // optional, parallel to attenuating
  std::vector<std::string> open_tags;
};

struct CalibrationResult {
  Criterion::Kind metric = Criterion::Kind::MaxCn0Below;
  double threshold = 0.0;
  double margin = 0.0;  // separation gap width; 0 when not separable
  bool separable = false;
  double ks = 0.0;  // KS distance between the two metric distributions
};

/// The scalar a criterion of the given family thresholds, computed over the
/// series' measurement window.
inline double extract_metric(const RawSeries& series, const DetectorConfig& config,
                             Criterion::Kind metric) {
  config.validate();
  double need = config.init_duration_s + config.measure_duration_s;
  if (series_span_s(series) < need) {
    throw SeriesTooShort("series spans " + std::to_string(series_span_s(series)) + " s, need " +
                         std::to_string(need));
  }
  Window window = measurement_window(series, config);
  switch (metric) {
    case Criterion::Kind::MaxCn0Below: {
      double best = 0.0;  // floor for windows with no admissible signal
      for (const auto& epoch : series.epochs) {
        if (!window.contains(epoch.timestamp_s)) continue;
        if (auto m = detail::filtered_epoch_max_cn0(epoch, config)) best = std::max(best, *m);
      }
      return best;
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
      return n > 0 ? sum / static_cast<double>(n) : 0.0;
    }
    case Criterion::Kind::DistinctSatsBelow:
      return static_cast<double>(distinct_satellites(series, window));
    case Criterion::Kind::FixSatsBelow: {
      int max_fix = 0;
      for (const auto& epoch : series.epochs) {
        if (window.contains(epoch.timestamp_s)) max_fix = std::max(max_fix, fix_count(epoch));
      }
      return static_cast<double>(max_fix);
    }
  }
  return 0.0;
}

/// Derive a device-specific threshold from labeled recordings. Attenuating
/// metrics are expected below open-sky metrics; when the classes separate,
/// the threshold is the gap midpoint. Otherwise the KS-optimal split point
/// is reported with margin 0.
inline CalibrationResult derive_threshold(const LabeledDataset& data, const DetectorConfig& config,
                                          Criterion::Kind metric) {
  if (data.attenuating.empty() || data.open.empty()) {
    throw EmptyClass("calibration needs at least one series per class");
  }
  std::vector<double> att, open;
  for (const auto& s : data.attenuating) att.push_back(extract_metric(s, config, metric));
  for (const auto& s : data.open) open.push_back(extract_metric(s, config, metric));

  CalibrationResult result;
  result.metric = metric;
  Ecdf f_att(att), f_open(open);
  result.ks = ks_distance(f_att, f_open);

  double att_max = *std::max_element(att.begin(), att.end());
  double open_min = *std::min_element(open.begin(), open.end());
  if (att_max < open_min) {
    result.separable = true;
    result.threshold = (att_max + open_min) / 2.0;
    result.margin = open_min - att_max;
  } else {
    // KS-optimal split: the union sample point with the largest ECDF gap
    result.separable = false;
    result.margin = 0.0;
    double best_gap = -1.0;
    for (const auto* vals : {&f_att.values(), &f_open.values()}) {
      for (double x : *vals) {
        double gap = std::abs(f_att(x) - f_open(x));
        if (gap > best_gap) {
          best_gap = gap;
          result.threshold = x;
        }
      }
    }
  }
  return result;
}

struct ConfusionCounts {
  int tp = 0;  // attenuating, detected 1
  int fp = 0;  // open, detected 1
  int tn = 0;  // open, detected 0
  int fn = 0;  // attenuating, detected 0
  int skipped = 0;  // series too short for the config
};

/// Run detect over every labeled series and tally the confusion counts.
/// Series too short for the config are skipped and counted.
inline ConfusionCounts evaluate_config(const LabeledDataset& data, const DetectorConfig& config) {
  ConfusionCounts counts;
  auto run = [&](const RawSeries& series, bool attenuating) {
    int r;
    try {
      r = detect(series, config);
    } catch (const SeriesTooShort&) {
      ++counts.skipped;
      return;
    }
    if (attenuating) {
      (r == 1 ? counts.tp : counts.fn)++;
    } else {
      (r == 1 ? counts.fp : counts.tn)++;
    }
  };
  for (const auto& s : data.attenuating) run(s, true);
  for (const auto& s : data.open) run(s, false);
  return counts;
}

}  // namespace gad
