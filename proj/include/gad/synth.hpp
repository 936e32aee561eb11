#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gad/errors.hpp"
#include "gad/gnss_model.hpp"
#include "gad/ingest.hpp"

namespace gad {

/// Simplified satellite geometry: elevation and azimuth drift linearly over
/// the scenario duration. No orbital mechanics.
struct SatTrack {
  SatelliteKey key;
  double elevation_start_deg = 45.0;  // [-10, 90]; below 0 is not receivable
  double elevation_end_deg = 45.0;
  double azimuth_start_deg = 0.0;
  double azimuth_end_deg = 0.0;
};

struct ChannelModel {
  double open_sky_peak_dbhz = 44.0;      // C/N0 at zenith, unattenuated
  double elevation_exponent = 1.0;       // shape of the elevation roll-off
  double attenuation_db = 0.0;           // uniform environment attenuation
  double sky_visibility_fraction = 1.0;  // (0,1]; rest of the azimuth circle is masked
  double noise_std_dbhz = 1.0;           // per-epoch Gaussian jitter, clamped at 4 sigma
};

struct ReceiverModel {
  double acquisition_threshold_dbhz = 12.0;  // minimum C/N0 for rho = 1
  double tracking_threshold_dbhz = 18.0;     // minimum C/N0 for fix eligibility
  int fix_min_satellites = 4;
  double fix_warmup_s = 45.0;  // continuous eligibility before X_i > 0
};

struct ScenarioSpec {
  std::vector<SatTrack> tracks;
  ChannelModel channel;
  ReceiverModel receiver;
  double duration_s = 420.0;
  double cadence_s = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (duration_s <= 0.0) throw InvalidSpec("duration must be > 0");
    if (cadence_s <= 0.0) throw InvalidSpec("cadence must be > 0");
    if (tracks.empty()) throw InvalidSpec("at least one track required");
    if (channel.attenuation_db < 0.0) throw InvalidSpec("attenuation must be >= 0");
    if (channel.sky_visibility_fraction <= 0.0 || channel.sky_visibility_fraction > 1.0)
      throw InvalidSpec("sky visibility must be in (0, 1]");
    if (channel.noise_std_dbhz < 0.0) throw InvalidSpec("noise std must be >= 0");
    if (receiver.fix_min_satellites < 4) throw InvalidSpec("fix needs at least 4 satellites");
    if (receiver.fix_warmup_s < 0.0) throw InvalidSpec("fix warmup must be >= 0");
    std::set<SatelliteKey> keys;
    for (const auto& t : tracks) {
      if (t.key.svid < 1) throw InvalidSpec("svid must be >= 1");
      if (!keys.insert(t.key).second) throw InvalidSpec("duplicate satellite key in tracks");
      for (double el : {t.elevation_start_deg, t.elevation_end_deg}) {
        if (el < -10.0 || el > 90.0) throw InvalidSpec("track elevation outside [-10, 90]");
      }
    }
  }
};

namespace detail {

// dB offset for elevation: 0 at zenith, rolling off as 20*exp*log10(sin el),
// with the elevation floored at 5 degrees.
inline double elevation_offset_db(double elevation_deg, double exponent) {
  double el = std::max(elevation_deg, 5.0) * std::numbers::pi / 180.0;
  return 20.0 * exponent * std::log10(std::sin(el));
}

inline double wrap_azimuth(double az) {
  az = std::fmod(az, 360.0);
  if (az < 0.0) az += 360.0;
  return az;
}

}  // namespace detail

inline constexpr double kMaskPenaltyDb = 30.0;

/// Generate a labeled synthetic series. Deterministic for a fixed spec
/// (including seed); noise draws happen for every (epoch, track) pair so
/// changing channel parameters never shifts the random stream.
inline RawSeries generate(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  RawSeries series;
  series.cadence_s = spec.cadence_s;

  const std::size_t n_tracks = spec.tracks.size();
  // start of the current continuous fix-eligibility run, per track
  std::vector<std::optional<double>> eligible_since(n_tracks);

  for (double t = 0.0; t < spec.duration_s; t += spec.cadence_s) {
    Epoch epoch;
    epoch.timestamp_s = t;
    double frac = spec.duration_s > spec.cadence_s ? t / (spec.duration_s - spec.cadence_s) : 0.0;
    std::vector<bool> fix_eligible(n_tracks, false);

    for (std::size_t k = 0; k < n_tracks; ++k) {
      const auto& track = spec.tracks[k];
      double jitter = noise(rng) * spec.channel.noise_std_dbhz;
      jitter = std::clamp(jitter, -4.0 * spec.channel.noise_std_dbhz, 4.0 * spec.channel.noise_std_dbhz);

      double el = track.elevation_start_deg + (track.elevation_end_deg - track.elevation_start_deg) * frac;
      double az = detail::wrap_azimuth(track.azimuth_start_deg +
                                       (track.azimuth_end_deg - track.azimuth_start_deg) * frac);

      SatelliteObservation obs;
      obs.key = track.key;
      obs.elevation_deg = std::clamp(el, -90.0, 90.0);
      obs.azimuth_deg = az;
      obs.has_almanac = true;

      if (el >= 0.0) {
        double c = spec.channel.open_sky_peak_dbhz +
                   detail::elevation_offset_db(el, spec.channel.elevation_exponent) -
                   spec.channel.attenuation_db;
        if (az >= 360.0 * spec.channel.sky_visibility_fraction) c -= kMaskPenaltyDb;
        c += jitter;
        c = std::clamp(c, 0.0, 64.0);
        if (c >= spec.receiver.acquisition_threshold_dbhz) {
          obs.signal_present = true;
          obs.cn0_dbhz = c;
          obs.has_ephemeris = true;
          if (c >= spec.receiver.tracking_threshold_dbhz) {
            if (!eligible_since[k]) eligible_since[k] = t;
            if (t - *eligible_since[k] >= spec.receiver.fix_warmup_s) fix_eligible[k] = true;
          } else {
            eligible_since[k].reset();
          }
        } else {
          eligible_since[k].reset();
        }
      } else {
        eligible_since[k].reset();
      }
      epoch.observations.push_back(obs);
    }

    int n_eligible = static_cast<int>(std::count(fix_eligible.begin(), fix_eligible.end(), true));
    if (n_eligible >= spec.receiver.fix_min_satellites) {
      for (std::size_t k = 0; k < n_tracks; ++k) {
        if (fix_eligible[k]) epoch.observations[k].used_in_fix = true;
      }
    }
    series.epochs.push_back(std::move(epoch));
  }
  return series;
}

enum class Preset { OpenSky, UrbanCanyon, IndoorWindow, DeepIndoor };

constexpr std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::OpenSky:
      return "OPEN_SKY";
    case Preset::UrbanCanyon:
      return "URBAN_CANYON";
    case Preset::IndoorWindow:
      return "INDOOR_WINDOW";
    case Preset::DeepIndoor:
      return "DEEP_INDOOR";
  }
  return "OPEN_SKY";
}

constexpr std::optional<Preset> preset_from_string(std::string_view s) {
  if (s == "OPEN_SKY") return Preset::OpenSky;
  if (s == "URBAN_CANYON") return Preset::UrbanCanyon;
  if (s == "INDOOR_WINDOW") return Preset::IndoorWindow;
  if (s == "DEEP_INDOOR") return Preset::DeepIndoor;
  return std::nullopt;
}

namespace detail {

inline std::vector<SatTrack> indoor_tracks() {
  // three satellites peak in the mid 20s dB-Hz behind 16 dB of attenuation;
  // the rest stay low enough that a fourth never tracks continuously
  return {
      {{Constellation::Gps, 5}, 75, 80, 40, 70},
      {{Constellation::Gps, 12}, 60, 65, 120, 150},
      {{Constellation::Glonass, 70}, 55, 50, 200, 230},
      {{Constellation::Gps, 23}, 25, 30, 90, 120},
      {{Constellation::Glonass, 74}, 22, 28, 300, 330},
      {{Constellation::Gps, 31}, 15, 20, 10, 40},
      {{Constellation::Gps, 17}, 28, 24, 250, 280},
  };
}

}  // namespace detail

/// Scenario presets mirroring the qualitative environments: open sky,
/// urban canyon, indoor near a window, deep indoor.
inline ScenarioSpec preset(Preset which) {
  ScenarioSpec spec;
  spec.duration_s = 420.0;
  spec.cadence_s = 1.0;
  switch (which) {
    case Preset::OpenSky:
      spec.tracks = {
          {{Constellation::Gps, 2}, 20, 35, 30, 60},
          {{Constellation::Gps, 6}, 35, 50, 100, 130},
          {{Constellation::Gps, 12}, 55, 40, 170, 200},
          {{Constellation::Gps, 24}, 70, 65, 240, 270},
          {{Constellation::Gps, 29}, 80, 75, 310, 340},
          {{Constellation::Glonass, 68}, 25, 30, 70, 100},
          {{Constellation::Glonass, 73}, 45, 60, 140, 170},
          {{Constellation::Glonass, 80}, 30, 15, 210, 240},
          {{Constellation::Gps, 15}, 65, 55, 280, 310},
      };
      spec.channel = {44.0, 1.0, 0.0, 1.0, 1.0};
      spec.receiver = {12.0, 18.0, 4, 45.0};
      break;
    case Preset::UrbanCanyon:
      // street running east-west: only azimuths within the visible fraction
      // keep sky view; the rest are building-masked
      spec.tracks = {
          {{Constellation::Gps, 2}, 30, 40, 20, 40},
          {{Constellation::Gps, 6}, 45, 55, 60, 80},
          {{Constellation::Gps, 12}, 60, 50, 100, 120},
          {{Constellation::Gps, 24}, 70, 75, 130, 150},
          {{Constellation::Glonass, 68}, 40, 35, 150, 170},
          {{Constellation::Gps, 15}, 55, 60, 40, 60},
          {{Constellation::Gps, 29}, 35, 30, 200, 220},
          {{Constellation::Glonass, 73}, 50, 45, 250, 270},
          {{Constellation::Glonass, 80}, 25, 30, 290, 310},
          {{Constellation::Gps, 31}, 45, 40, 330, 350},
      };
      spec.channel = {44.0, 1.0, 2.0, 0.5, 1.0};
      spec.receiver = {12.0, 18.0, 4, 50.0};
      break;
    case Preset::IndoorWindow:
      spec.tracks = detail::indoor_tracks();
      spec.channel = {43.0, 1.0, 16.0, 1.0, 0.6};
      spec.receiver = {12.0, 22.0, 4, 60.0};
      break;
    case Preset::DeepIndoor:
      spec.tracks = detail::indoor_tracks();
      spec.channel = {43.0, 1.0, 40.0, 1.0, 0.6};
      spec.receiver = {12.0, 22.0, 4, 60.0};
      break;
  }
  return spec;
}

// ---- scenario spec file: plain "key = value" lines, '#' comments ----

inline std::string write_scenario(const ScenarioSpec& spec) {
  std::string out;
  char buf[192];
  auto kv = [&](const char* key, double v) {
    int n = std::snprintf(buf, sizeof(buf), "%s = %g\n", key, v);
    out.append(buf, static_cast<std::size_t>(n));
  };
  kv("duration_s", spec.duration_s);
  kv("cadence_s", spec.cadence_s);
  int n = std::snprintf(buf, sizeof(buf), "seed = %llu\n", static_cast<unsigned long long>(spec.seed));
  out.append(buf, static_cast<std::size_t>(n));
  kv("peak_dbhz", spec.channel.open_sky_peak_dbhz);
  kv("elevation_exponent", spec.channel.elevation_exponent);
  kv("attenuation_db", spec.channel.attenuation_db);
  kv("sky_visibility", spec.channel.sky_visibility_fraction);
  kv("noise_std_dbhz", spec.channel.noise_std_dbhz);
  kv("acquisition_dbhz", spec.receiver.acquisition_threshold_dbhz);
  kv("tracking_dbhz", spec.receiver.tracking_threshold_dbhz);
  kv("fix_min_sats", spec.receiver.fix_min_satellites);
  kv("fix_warmup_s", spec.receiver.fix_warmup_s);
  for (const auto& t : spec.tracks) {
    n = std::snprintf(buf, sizeof(buf), "track = %s,%d,%g,%g,%g,%g\n",
                      std::string(to_string(t.key.constellation)).c_str(), t.key.svid,
                      t.elevation_start_deg, t.elevation_end_deg, t.azimuth_start_deg, t.azimuth_end_deg);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

inline ScenarioSpec parse_scenario(std::istream& in) {
  ScenarioSpec spec;
  spec.tracks.clear();
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidSpec("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string_view key = trim(sv.substr(0, eq));
    std::string_view value = trim(sv.substr(eq + 1));
    auto num = [&]() {
      auto v = detail::parse_double(value);
      if (!v) throw InvalidSpec("line " + std::to_string(line_no) + ": bad number '" + std::string(value) + "'");
      return *v;
    };
    if (key == "duration_s") {
      spec.duration_s = num();
    } else if (key == "cadence_s") {
      spec.cadence_s = num();
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(num());
    } else if (key == "peak_dbhz") {
      spec.channel.open_sky_peak_dbhz = num();
    } else if (key == "elevation_exponent") {
      spec.channel.elevation_exponent = num();
    } else if (key == "attenuation_db") {
      spec.channel.attenuation_db = num();
    } else if (key == "sky_visibility") {
      spec.channel.sky_visibility_fraction = num();
    } else if (key == "noise_std_dbhz") {
      spec.channel.noise_std_dbhz = num();
    } else if (key == "acquisition_dbhz") {
      spec.receiver.acquisition_threshold_dbhz = num();
    } else if (key == "tracking_dbhz") {
      spec.receiver.tracking_threshold_dbhz = num();
    } else if (key == "fix_min_sats") {
      spec.receiver.fix_min_satellites = static_cast<int>(num());
    } else if (key == "fix_warmup_s") {
      spec.receiver.fix_warmup_s = num();
    } else if (key == "track") {
      auto fields = detail::split(value, ',');
      if (fields.size() != 6) {
        throw InvalidSpec("line " + std::to_string(line_no) + ": track needs 6 fields");
      }
      SatTrack track;
      auto constellation = constellation_from_string(trim(fields[0]));
      auto svid = detail::parse_int(trim(fields[1]));
      if (!constellation || !svid) {
        throw InvalidSpec("line " + std::to_string(line_no) + ": bad track identity");
      }
      track.key = {*constellation, *svid};
      double vals[4];
      for (int i = 0; i < 4; ++i) {
        auto v = detail::parse_double(trim(fields[static_cast<std::size_t>(i) + 2]));
        if (!v) throw InvalidSpec("line " + std::to_string(line_no) + ": bad track number");
        vals[i] = *v;
      }
      track.elevation_start_deg = vals[0];
      track.elevation_end_deg = vals[1];
      track.azimuth_start_deg = vals[2];
      track.azimuth_end_deg = vals[3];
      spec.tracks.push_back(track);
    } else {
      throw InvalidSpec("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  spec.validate();
  return spec;
}

}  // namespace gad
