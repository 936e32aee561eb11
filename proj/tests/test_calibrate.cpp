#include <doctest.h>

#include <random>

#include "gad/calibrate.hpp"
#include "gad/synth.hpp"
#include "test_helpers.hpp"

using namespace gad;

namespace {

RawSeries flat_series(int n_epochs, const std::vector<double>& cn0s, int fix_sats = 0) {
  RawSeries series;
  for (int i = 0; i < n_epochs; ++i) {
    Epoch epoch;
    epoch.timestamp_s = i;
    int svid = 1;
    for (std::size_t k = 0; k < cn0s.size(); ++k) {
      bool fixed = static_cast<int>(k) < fix_sats;
      epoch.observations.push_back(
          {{Constellation::Gps, svid++}, cn0s[k], 100, 45, true, fixed, false, false});
    }
    series.epochs.push_back(epoch);
  }
  return series;
}

const DetectorConfig kConfig;  // default thresholds

// metric values chosen per series by scaling one flat profile
RawSeries series_with_max(double max_cn0) { return flat_series(220, {max_cn0 - 8.0, max_cn0}); }

}  // namespace

TEST_CASE("extract_metric families") {
  // epoch maxima vary over time; the MaxCn0 metric is the max of maxima
  RawSeries varying = flat_series(220, {20.0, 22.0});
  varying.epochs[150].observations[1].cn0_dbhz = 28.0;
  varying.epochs[160].observations[1].cn0_dbhz = 25.0;
  CHECK(extract_metric(varying, kConfig, Criterion::Kind::MaxCn0Below) == doctest::Approx(28.0));

  // two disjoint 5-satellite groups inside the window -> 10 distinct
  RawSeries disjoint = flat_series(220, {20, 20, 20, 20, 20});
  for (int i = 110; i < 220; ++i) {
    for (auto& o : disjoint.epochs[i].observations) o.key.svid += 5;
  }
  CHECK(extract_metric(disjoint, kConfig, Criterion::Kind::DistinctSatsBelow) == doctest::Approx(10.0));

  // all-empty window floors at 0 for every family
  RawSeries dead = flat_series(220, {});
  for (auto kind : {Criterion::Kind::MaxCn0Below, Criterion::Kind::AvgCn0Below,
                    Criterion::Kind::DistinctSatsBelow, Criterion::Kind::FixSatsBelow}) {
    CHECK(extract_metric(dead, kConfig, kind) == 0.0);
  }

  CHECK_THROWS_AS(extract_metric(flat_series(100, {20.0}), kConfig, Criterion::Kind::MaxCn0Below),
                  SeriesTooShort);
}

TEST_CASE("derive_threshold: separable classes get the gap midpoint") {
  LabeledDataset data;
  data.attenuating = {series_with_max(26.0), series_with_max(28.0)};
  data.open = {series_with_max(36.0), series_with_max(41.0)};
  auto result = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  CHECK(result.separable);
  CHECK(result.threshold == doctest::Approx(32.0));
  CHECK(result.margin == doctest::Approx(8.0));
  CHECK(result.ks == doctest::Approx(1.0));
}

TEST_CASE("derive_threshold: identical distributions are not separable, ks = 0") {
  LabeledDataset data;
  data.attenuating = {series_with_max(30.0), series_with_max(35.0)};
  data.open = {series_with_max(30.0), series_with_max(35.0)};
  auto result = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  CHECK(!result.separable);
  CHECK(result.margin == 0.0);
  CHECK(result.ks == 0.0);
}

TEST_CASE("derive_threshold: typical field data brackets 30 dB-Hz") {
  LabeledDataset data;
  data.attenuating = {series_with_max(27.0), series_with_max(29.5), series_with_max(25.0)};
  data.open = {series_with_max(35.0), series_with_max(42.0), series_with_max(38.0)};
  auto result = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  CHECK(result.separable);
  // the reported gap (29.5, 35.0) contains the default 30 dB-Hz threshold
  CHECK(result.threshold > 29.5);
  CHECK(result.threshold < 35.0);
  CHECK(result.margin == doctest::Approx(35.0 - 29.5));
}

TEST_CASE("derive_threshold errors and ordering invariance") {
  LabeledDataset empty;
  empty.open = {series_with_max(40.0)};
  CHECK_THROWS_AS(derive_threshold(empty, kConfig, Criterion::Kind::MaxCn0Below), EmptyClass);

  LabeledDataset data;
  data.attenuating = {series_with_max(22.0), series_with_max(27.0), series_with_max(24.0)};
  data.open = {series_with_max(39.0), series_with_max(34.0)};
  auto a = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  std::swap(data.attenuating[0], data.attenuating[2]);
  std::swap(data.open[0], data.open[1]);
  auto b = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  CHECK(a.threshold == b.threshold);
  CHECK(a.margin == b.margin);
  CHECK(a.ks == b.ks);
}

TEST_CASE("ks reported by derive_threshold equals ks_distance of the metric ecdfs") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LabeledDataset data;
  std::vector<double> att_metrics, open_metrics;
  for (int i = 0; i < 6; ++i) {
    double m = 20.0 + unit(rng) * 15.0;
    att_metrics.push_back(m);
    data.attenuating.push_back(series_with_max(m));
    m = 28.0 + unit(rng) * 15.0;
    open_metrics.push_back(m);
    data.open.push_back(series_with_max(m));
  }
  auto result = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  CHECK(result.ks == doctest::Approx(ks_distance(Ecdf(att_metrics), Ecdf(open_metrics))).epsilon(1e-12));
}

TEST_CASE("translation equivariance of the derived C/N0 threshold") {
  LabeledDataset data;
  data.attenuating = {series_with_max(24.0), series_with_max(28.0)};
  data.open = {series_with_max(37.0), series_with_max(40.0)};
  auto base = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);

  const double shift = 3.5;
  for (auto* cls : {&data.attenuating, &data.open}) {
    for (auto& series : *cls) {
      for (auto& epoch : series.epochs) {
        for (auto& o : epoch.observations) o.cn0_dbhz += shift;
      }
    }
  }
  auto shifted = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  CHECK(shifted.threshold == doctest::Approx(base.threshold + shift));
  CHECK(shifted.margin == doctest::Approx(base.margin));
}

TEST_CASE("evaluate_config: separable threshold yields a clean confusion matrix") {
  LabeledDataset data;
  data.attenuating = {series_with_max(26.0), series_with_max(28.0)};
  data.open = {series_with_max(36.0), series_with_max(41.0)};
  auto result = derive_threshold(data, kConfig, Criterion::Kind::MaxCn0Below);
  REQUIRE(result.separable);

  DetectorConfig calibrated = kConfig;
  calibrated.criteria = {{Criterion::Kind::MaxCn0Below, result.threshold}};
  auto counts = evaluate_config(data, calibrated);
  CHECK(counts.tp == 2);
  CHECK(counts.tn == 2);
  CHECK(counts.fp == 0);
  CHECK(counts.fn == 0);
  CHECK(counts.skipped == 0);

  // degenerate threshold below every metric: everything classifies 0
  calibrated.criteria = {{Criterion::Kind::MaxCn0Below, 1.0}};
  counts = evaluate_config(data, calibrated);
  CHECK(counts.tp == 0);
  CHECK(counts.fn == 2);
  CHECK(counts.tn == 2);

  // short series are skipped, not fatal
  data.open.push_back(flat_series(50, {40.0}));
  counts = evaluate_config(data, calibrated);
  CHECK(counts.skipped == 1);
}
