#pragma once

#include <algorithm>
#include <compare>
#include <optional>
#include <string_view>
#include <vector>

namespace gad {

enum class Constellation {
  Gps,
  Glonass,
  Galileo,
  Beidou,
  Qzss,
  Sbas,
  Unknown,
};

constexpr std::string_view to_string(Constellation c) {
  switch (c) {
    case Constellation::Gps:
      return "GPS";
    case Constellation::Glonass:
      return "GLONASS";
    case Constellation::Galileo:
      return "GALILEO";
    case Constellation::Beidou:
      return "BEIDOU";
    case Constellation::Qzss:
      return "QZSS";
    case Constellation::Sbas:
      return "SBAS";
    case Constellation::Unknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

constexpr std::optional<Constellation> constellation_from_string(std::string_view s) {
  if (s == "GPS") return Constellation::Gps;
  if (s == "GLONASS") return Constellation::Glonass;
  if (s == "GALILEO") return Constellation::Galileo;
  if (s == "BEIDOU") return Constellation::Beidou;
  if (s == "QZSS") return Constellation::Qzss;
  if (s == "SBAS") return Constellation::Sbas;
  if (s == "UNKNOWN") return Constellation::Unknown;
  return std::nullopt;
}

/// Identifies one satellite: constellation plus space-vehicle id (svid >= 1).
struct SatelliteKey {
  Constellation constellation = Constellation::Unknown;
  int svid = 1;

  auto operator<=>(const SatelliteKey&) const = default;
};

/// One satellite's raw tuple at a single epoch. cn0_dbhz is 0 whenever
/// signal_present is false; azimuth/elevation may still carry
/// almanac-predicted angles for unacquired satellites.
struct SatelliteObservation {
  SatelliteKey key;
  double cn0_dbhz = 0.0;      // [0, 64]
  double azimuth_deg = 0.0;   // [0, 360)
  double elevation_deg = 0.0; // [-90, 90]
  bool signal_present = false;
  bool used_in_fix = false;
  bool has_almanac = false;
  bool has_ephemeris = false;

  bool operator==(const SatelliteObservation&) const = default;
};

/// All observations at one timestamp (seconds since series start).
struct Epoch {
  double timestamp_s = 0.0;
  std::vector<SatelliteObservation> observations;

  bool operator==(const Epoch&) const = default;
};

/// The ordered measurement record: epochs with strictly increasing
/// timestamps at a nominal sampling cadence.
struct RawSeries {
  std::vector<Epoch> epochs;
  double cadence_s = 1.0;

  bool operator==(const RawSeries&) const = default;
};

/// Number of satellites with a signal at this epoch.
inline int satellite_count(const Epoch& epoch) {
  return static_cast<int>(std::count_if(epoch.observations.begin(), epoch.observations.end(),
                                        [](const SatelliteObservation& o) { return o.signal_present; }));
}

/// Number of satellites used in the fix at this epoch; 0 means no fix.
inline int fix_count(const Epoch& epoch) {
  return static_cast<int>(std::count_if(epoch.observations.begin(), epoch.observations.end(),
                                        [](const SatelliteObservation& o) { return o.used_in_fix; }));
}

/// Maximum C/N0 over signal-present observations; empty when none.
inline std::optional<double> epoch_max_cn0(const Epoch& epoch) {
  std::optional<double> best;
  for (const auto& o : epoch.observations) {
    if (!o.signal_present) continue;
    if (!best || o.cn0_dbhz > *best) best = o.cn0_dbhz;
  }
  return best;
}

/// Covered duration of the series: last minus first timestamp plus one
/// cadence interval (an N-epoch series at 1 Hz spans N seconds).
inline double series_span_s(const RawSeries& series) {
  if (series.epochs.empty()) return 0.0;
  return series.epochs.back().timestamp_s - series.epochs.front().timestamp_s + series.cadence_s;
}

}  // namespace gad
