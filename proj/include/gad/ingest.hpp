#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gad/errors.hpp"
#include "gad/gnss_model.hpp"

namespace gad {

inline constexpr std::string_view kGadCsvHeader =
    "t_s,constellation,svid,cn0_dbhz,az_deg,el_deg,rho,chi,alm,eph";

/// Result of parsing a log: the series plus per-line diagnostics.
struct ParseReport {
  RawSeries series;
  std::size_t lines_total = 0;
  std::size_t lines_skipped = 0;
  std::vector<std::pair<std::size_t, std::string>> warnings;  // (line number, reason)
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      break;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<int> parse_int(std::string_view s) {
  int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<bool> parse_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  return std::nullopt;
}

inline std::string_view strip_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

struct CsvRecord {
  double t = 0.0;
  SatelliteObservation obs;
};

// One raw record line -> observation, or a reason why not.
inline std::optional<CsvRecord> parse_csv_record(std::string_view line, std::string& reason) {
  auto fields = split(line, ',');
  if (fields.size() != 10) {
    reason = "expected 10 fields, got " + std::to_string(fields.size());
    return std::nullopt;
  }
  CsvRecord rec;
  auto t = parse_double(fields[0]);
  if (!t || *t < 0.0) {
    reason = "bad timestamp";
    return std::nullopt;
  }
  rec.t = *t;
  auto constellation = constellation_from_string(fields[1]);
  if (!constellation) {
    reason = "unknown constellation token";
    return std::nullopt;
  }
  auto svid = parse_int(fields[2]);
  if (!svid || *svid < 1) {
    reason = "svid must be a positive integer";
    return std::nullopt;
  }
  rec.obs.key = {*constellation, *svid};
  auto cn0 = parse_double(fields[3]);
  auto az = parse_double(fields[4]);
  auto el = parse_double(fields[5]);
  if (!cn0 || *cn0 < 0.0 || *cn0 > 64.0) {
    reason = "cn0 outside [0, 64]";
    return std::nullopt;
  }
  if (!az || *az < 0.0 || *az >= 360.0) {
    reason = "azimuth outside [0, 360)";
    return std::nullopt;
  }
  if (!el || *el < -90.0 || *el > 90.0) {
    reason = "elevation outside [-90, 90]";
    return std::nullopt;
  }
  auto rho = parse_flag(fields[6]);
  auto chi = parse_flag(fields[7]);
  auto alm = parse_flag(fields[8]);
  auto eph = parse_flag(fields[9]);
  if (!rho || !chi || !alm || !eph) {
    reason = "flags must be 0 or 1";
    return std::nullopt;
  }
  rec.obs.cn0_dbhz = *cn0;
  rec.obs.azimuth_deg = *az;
  rec.obs.elevation_deg = *el;
  rec.obs.signal_present = *rho;
  rec.obs.used_in_fix = *chi;
  rec.obs.has_almanac = *alm;
  rec.obs.has_ephemeris = *eph;
  if (rec.obs.used_in_fix && !rec.obs.signal_present) {
    reason = "used_in_fix without signal";
    return std::nullopt;
  }
  if (!rec.obs.signal_present && rec.obs.cn0_dbhz != 0.0) {
    reason = "nonzero cn0 without signal";
    return std::nullopt;
  }
  return rec;
}

inline void sort_and_check_epoch(Epoch& epoch) {
  std::sort(epoch.observations.begin(), epoch.observations.end(),
            [](const SatelliteObservation& a, const SatelliteObservation& b) { return a.key < b.key; });
  for (std::size_t i = 1; i < epoch.observations.size(); ++i) {
    if (epoch.observations[i].key == epoch.observations[i - 1].key) {
      throw DuplicateSatellite(std::string(to_string(epoch.observations[i].key.constellation)) + " svid " +
                               std::to_string(epoch.observations[i].key.svid) + " appears twice at t=" +
                               std::to_string(epoch.timestamp_s));
    }
  }
}

}  // namespace detail

/// Parse the canonical GAD-CSV format. Records sharing a timestamp (within
/// half a cadence interval) form one epoch; observations are sorted by
/// satellite key. Invalid lines are skipped and reported.
inline ParseReport parse_gad_csv(std::istream& in, double cadence_s = 1.0) {
  ParseReport report;
  report.series.cadence_s = cadence_s;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  Epoch current;
  bool have_epoch = false;

  auto flush = [&] {
    if (!have_epoch) return;
    detail::sort_and_check_epoch(current);
    if (!report.series.epochs.empty() && current.timestamp_s <= report.series.epochs.back().timestamp_s) {
      throw NonMonotonicTime("epoch at t=" + std::to_string(current.timestamp_s) +
                             " does not advance past t=" +
                             std::to_string(report.series.epochs.back().timestamp_s));
    }
    report.series.epochs.push_back(std::move(current));
    current = Epoch{};
    have_epoch = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    ++report.lines_total;
    std::string_view sv = detail::strip_cr(line);
    if (sv.empty()) {
      ++report.lines_skipped;
      continue;
    }
    if (sv == kGadCsvHeader) {
      if (!seen_header) {
        seen_header = true;
      } else {
        ++report.lines_skipped;
        report.warnings.emplace_back(line_no, "duplicate header");
      }
      continue;
    }
    std::string reason;
    auto rec = detail::parse_csv_record(sv, reason);
    if (!rec) {
      ++report.lines_skipped;
      report.warnings.emplace_back(line_no, reason);
      continue;
    }
    if (have_epoch && std::abs(rec->t - current.timestamp_s) < cadence_s / 2.0) {
      current.observations.push_back(rec->obs);
    } else {
      flush();
      current.timestamp_s = rec->t;
      current.observations.push_back(rec->obs);
      have_epoch = true;
    }
  }
  flush();
  if (report.series.epochs.empty()) {
    throw EmptyInput("no valid records in " + std::to_string(report.lines_total) + " lines");
  }
  return report;
}

/// Serialize a series to GAD-CSV. Output is byte-deterministic: fixed
/// decimal formatting, observations sorted by (constellation, svid).
inline std::string write_gad_csv(const RawSeries& series) {
  std::string out;
  out += kGadCsvHeader;
  out += '\n';
  char buf[160];
  for (const auto& epoch : series.epochs) {
    std::vector<const SatelliteObservation*> sorted;
    sorted.reserve(epoch.observations.size());
    for (const auto& o : epoch.observations) sorted.push_back(&o);
    std::sort(sorted.begin(), sorted.end(),
              [](const SatelliteObservation* a, const SatelliteObservation* b) { return a->key < b->key; });
    for (const auto* o : sorted) {
      int n = std::snprintf(buf, sizeof(buf), "%.3f,%s,%d,%.1f,%.1f,%.1f,%d,%d,%d,%d\n",
                            epoch.timestamp_s, std::string(to_string(o->key.constellation)).c_str(),
                            o->key.svid, o->cn0_dbhz, o->azimuth_deg, o->elevation_deg,
                            o->signal_present ? 1 : 0, o->used_in_fix ? 1 : 0, o->has_almanac ? 1 : 0,
                            o->has_ephemeris ? 1 : 0);
      out.append(buf, static_cast<std::size_t>(n));
    }
  }
  return out;
}

namespace detail {

inline bool nmea_checksum_ok(std::string_view sentence, std::string_view& payload) {
  if (sentence.size() < 4 || sentence.front() != '$') return false;
  std::size_t star = sentence.rfind('*');
  if (star == std::string_view::npos || star + 3 != sentence.size()) return false;
  unsigned sum = 0;
  for (std::size_t i = 1; i < star; ++i) sum ^= static_cast<unsigned char>(sentence[i]);
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  int hi = hex(sentence[star + 1]);
  int lo = hex(sentence[star + 2]);
  if (hi < 0 || lo < 0) return false;
  if (sum != static_cast<unsigned>(hi * 16 + lo)) return false;
  payload = sentence.substr(1, star - 1);
  return true;
}

inline Constellation constellation_from_talker(std::string_view talker) {
  if (talker == "GP") return Constellation::Gps;
  if (talker == "GL") return Constellation::Glonass;
  if (talker == "GA") return Constellation::Galileo;
  if (talker == "GB" || talker == "BD") return Constellation::Beidou;
  if (talker == "GQ") return Constellation::Qzss;
  return Constellation::Unknown;
}

// hhmmss.sss -> seconds of day
inline std::optional<double> parse_nmea_time(std::string_view f) {
  if (f.size() < 6) return std::nullopt;
  auto hh = parse_int(f.substr(0, 2));
  auto mm = parse_int(f.substr(2, 2));
  auto ss = parse_double(f.substr(4));
  if (!hh || !mm || !ss) return std::nullopt;
  if (*hh > 23 || *mm > 59 || *ss >= 61.0) return std::nullopt;
  return *hh * 3600.0 + *mm * 60.0 + *ss;
}

}  // namespace detail

/// Parse NMEA-0183 sentences. GSV groups supply satellites in view, GSA the
/// fix membership, GGA/RMC the epoch time boundary. Sentences with a bad
/// XOR checksum are skipped and reported.
inline ParseReport parse_nmea(std::istream& in) {
  ParseReport report;
  report.series.cadence_s = 1.0;
  std::string line;
  std::size_t line_no = 0;

  std::map<SatelliteKey, SatelliteObservation> pending_obs;
  std::set<int> fix_svids;
  std::optional<double> pending_time;
  std::optional<double> first_time;

  auto flush = [&] {
    if (pending_obs.empty()) {
      fix_svids.clear();
      pending_time.reset();
      return;
    }
    Epoch epoch;
    if (pending_time) {
      if (!first_time) first_time = *pending_time;
      epoch.timestamp_s = *pending_time - *first_time;
    } else {
      epoch.timestamp_s =
          report.series.epochs.empty() ? 0.0 : report.series.epochs.back().timestamp_s + 1.0;
    }
    for (auto& [key, obs] : pending_obs) {
      if (obs.signal_present && fix_svids.count(key.svid)) obs.used_in_fix = true;
      epoch.observations.push_back(obs);
    }
    if (!report.series.epochs.empty() && epoch.timestamp_s <= report.series.epochs.back().timestamp_s) {
      throw NonMonotonicTime("NMEA epoch time at t=" + std::to_string(epoch.timestamp_s) +
                             " does not advance");
    }
    report.series.epochs.push_back(std::move(epoch));
    pending_obs.clear();
    fix_svids.clear();
    pending_time.reset();
  };

  while (std::getline(in, line)) {
    ++line_no;
    ++report.lines_total;
    std::string_view sv = detail::strip_cr(line);
    if (sv.empty()) {
      ++report.lines_skipped;
      continue;
    }
    std::string_view payload;
    if (!detail::nmea_checksum_ok(sv, payload)) {
      ++report.lines_skipped;
      report.warnings.emplace_back(line_no, "bad or missing checksum");
      continue;
    }
    auto fields = detail::split(payload, ',');
    if (fields.empty() || fields[0].size() != 5) {
      ++report.lines_skipped;
      report.warnings.emplace_back(line_no, "malformed sentence id");
      continue;
    }
    std::string_view talker = fields[0].substr(0, 2);
    std::string_view type = fields[0].substr(2);

    if (type == "GGA" || type == "RMC") {
      flush();
      if (fields.size() > 1) pending_time = detail::parse_nmea_time(fields[1]);
    } else if (type == "GSV") {
      Constellation constellation = detail::constellation_from_talker(talker);
      // 4 satellites per sentence: svid, elevation, azimuth, snr
      for (std::size_t i = 4; i + 3 < fields.size(); i += 4) {
        auto svid = detail::parse_int(fields[i]);
        if (!svid || *svid < 1) continue;
        SatelliteObservation obs;
        obs.key = {constellation, *svid};
        if (auto el = detail::parse_double(fields[i + 1]); el && *el >= -90.0 && *el <= 90.0)
          obs.elevation_deg = *el;
        if (auto az = detail::parse_double(fields[i + 2]); az && *az >= 0.0 && *az < 360.0)
          obs.azimuth_deg = *az;
        // blank SNR: predicted but not tracked
        if (auto snr = detail::parse_double(fields[i + 3]); snr && *snr > 0.0) {
          obs.cn0_dbhz = std::min(*snr, 64.0);
          obs.signal_present = true;
        }
        pending_obs.insert_or_assign(obs.key, obs);
      }
    } else if (type == "GSA") {
      for (std::size_t i = 3; i < fields.size() && i < 15; ++i) {
        if (auto svid = detail::parse_int(fields[i]); svid && *svid >= 1) fix_svids.insert(*svid);
      }
    }
    // other sentence types pass through silently
  }
  flush();
  if (report.series.epochs.empty()) {
    throw EmptyInput("no valid NMEA cycle in " + std::to_string(report.lines_total) + " lines");
  }
  return report;
}

}  // namespace gad
