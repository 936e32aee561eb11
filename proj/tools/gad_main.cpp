// gad: GNSS attenuating-environment detection toolkit.
//
// Subcommands: convert, stats, detect, calibrate, synth. Reports go to
// stdout as JSON; diagnostics go to stderr. Exit codes: 0 ok, 1 I/O,
// 2 parse failure, 3 empty window, 4 series too short, 5 invalid
// config/spec/empty class.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gad/calibrate.hpp"
#include "gad/detector.hpp"
#include "gad/errors.hpp"
#include "gad/gnss_model.hpp"
#include "gad/ingest.hpp"
#include "gad/stats.hpp"
#include "gad/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitParse = 2;
constexpr int kExitEmptyWindow = 3;
constexpr int kExitTooShort = 4;
constexpr int kExitInvalidConfig = 5;

struct ConfigFlags {
  double d0 = 100.0;
  double dm = 100.0;
  std::optional<double> max_cn0;
  std::optional<double> avg_cn0;
  std::optional<double> min_sats;
  std::optional<double> min_fix_sats;
  std::string combine = "all";
  std::optional<double> elev_mask;
  std::string exclude;  // CONST:SVID,CONST:SVID,...

  void add_to(CLI::App& app) {
    app.add_option("--d0", d0, "Initialization duration d0, seconds");
    app.add_option("--dm", dm, "Measurement duration dm, seconds");
    app.add_option("--max-cn0", max_cn0, "Criterion: every epoch max C/N0 <= threshold (dB-Hz)");
    app.add_option("--avg-cn0", avg_cn0, "Criterion: pooled mean C/N0 < threshold (dB-Hz)");
    app.add_option("--min-sats", min_sats, "Criterion: distinct satellites < threshold");
    app.add_option("--min-fix-sats", min_fix_sats, "Criterion: max fix count < threshold");
    app.add_option("--combine", combine, "Criteria combination: all|any")
        ->check(CLI::IsMember({"all", "any"}));
    app.add_option("--elev-mask", elev_mask, "Minimum elevation (deg) for C/N0 criteria");
    app.add_option("--exclude", exclude, "Excluded satellites, e.g. GPS:33,SBAS:120");
  }

  gad::DetectorConfig build() const {
    gad::DetectorConfig config;
    config.init_duration_s = d0;
    config.measure_duration_s = dm;
    config.combine = combine == "any" ? gad::DetectorConfig::Combine::Any
                                      : gad::DetectorConfig::Combine::All;
    config.elevation_mask_deg = elev_mask;
    config.criteria.clear();
    if (max_cn0) config.criteria.push_back({gad::Criterion::Kind::MaxCn0Below, *max_cn0});
    if (avg_cn0) config.criteria.push_back({gad::Criterion::Kind::AvgCn0Below, *avg_cn0});
    if (min_sats) config.criteria.push_back({gad::Criterion::Kind::DistinctSatsBelow, *min_sats});
    if (min_fix_sats) config.criteria.push_back({gad::Criterion::Kind::FixSatsBelow, *min_fix_sats});
    if (config.criteria.empty()) config.criteria.push_back({gad::Criterion::Kind::MaxCn0Below, 30.0});
    if (!exclude.empty()) {
      for (auto part : gad::detail::split(exclude, ',')) {
        auto colon = part.find(':');
        if (colon == std::string_view::npos) throw gad::InvalidConfig("--exclude expects CONST:SVID");
        auto constellation = gad::constellation_from_string(part.substr(0, colon));
        auto svid = gad::detail::parse_int(part.substr(colon + 1));
        if (!constellation || !svid || *svid < 1) throw gad::InvalidConfig("bad --exclude entry");
        config.excluded_svids.insert({*constellation, *svid});
      }
    }
    config.validate();
    return config;
  }
};

json to_json(const gad::SummaryStats& s) {
  return {{"mean", s.mean}, {"std_dev", s.std_dev}, {"min", s.min}, {"max", s.max}, {"n", s.n}};
}

json to_json(const gad::DetectorConfig& config) {
  json criteria = json::array();
  for (const auto& c : config.criteria) {
    criteria.push_back({{"kind", std::string(gad::to_string(c.kind))}, {"threshold", c.threshold}});
  }
  json excluded = json::array();
  for (const auto& key : config.excluded_svids) {
    excluded.push_back(std::string(gad::to_string(key.constellation)) + ":" + std::to_string(key.svid));
  }
  return {{"d0_s", config.init_duration_s},
          {"dm_s", config.measure_duration_s},
          {"criteria", criteria},
          {"combine", config.combine == gad::DetectorConfig::Combine::All ? "all" : "any"},
          {"elev_mask_deg", config.elevation_mask_deg ? json(*config.elevation_mask_deg) : json()},
          {"excluded", excluded},
          {"device_calibrated", false}};
}

gad::ParseReport parse_file(const std::string& path, const std::string& format) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  if (format == "nmea") return gad::parse_nmea(in);
  return gad::parse_gad_csv(in);
}

void print_parse_summary(const gad::ParseReport& report) {
  std::cerr << "parsed " << report.lines_total << " lines, skipped " << report.lines_skipped << "\n";
  for (const auto& [line, reason] : report.warnings) {
    std::cerr << "  line " << line << ": " << reason << "\n";
  }
}

int cmd_convert(const std::string& input, const std::string& format, const std::string& output) {
  gad::ParseReport report = parse_file(input, format);
  print_parse_summary(report);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + output);
  out << gad::write_gad_csv(report.series);
  if (!out) throw std::ios_base::failure("write failed: " + output);
  return kExitOk;
}

int cmd_stats(const std::string& input, const std::string& format, double window_start,
              double window_dur, const std::string& per_epoch_path) {
  gad::ParseReport report = parse_file(input, format);
  print_parse_summary(report);
  const gad::RawSeries& series = report.series;
  double t0 = series.epochs.front().timestamp_s;
  gad::Window window{t0 + window_start, window_dur};

  json doc;
  doc["input"] = input;
  doc["window"] = {{"start_s", window.start_s}, {"duration_s", window.duration_s}};
  // exit 3 only when the window holds no epochs at all
  doc["sat_available"] = to_json(gad::satcount_summary(series, window, gad::SatCount::Available));
  doc["sat_used_in_fix"] = to_json(gad::satcount_summary(series, window, gad::SatCount::UsedInFix));
  try {
    doc["cn0"] = to_json(gad::cn0_summary(series, window));
  } catch (const gad::EmptyWindow&) {
    doc["cn0"] = nullptr;  // epochs present but no signal at all
  }
  doc["distinct_satellites"] = gad::distinct_satellites(series, window);
  auto ttff = gad::time_to_first_fix(series);
  doc["ttff_s"] = ttff ? json(*ttff) : json();

  if (!per_epoch_path.empty()) {
    std::ofstream out(per_epoch_path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + per_epoch_path);
    out << "t_s,s_i,x_i,max_cn0_dbhz\n";
    char buf[96];
    for (const auto& epoch : series.epochs) {
      auto m = gad::epoch_max_cn0(epoch);
      std::snprintf(buf, sizeof(buf), "%.3f,%d,%d,%.1f\n", epoch.timestamp_s,
                    gad::satellite_count(epoch), gad::fix_count(epoch), m.value_or(0.0));
      out << buf;
    }
  }
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

json detect_report(const gad::RawSeries& series, const gad::DetectorConfig& config,
                   std::optional<double> baseline, const std::string& input) {
  gad::Window window = gad::measurement_window(series, config);
  json criteria = json::array();
  bool all = true;
  bool any = false;
  for (const auto& c : config.criteria) {
    bool satisfied = gad::evaluate_criterion(c, series, window, config);
    all = all && satisfied;
    any = any || satisfied;
    criteria.push_back({{"kind", std::string(gad::to_string(c.kind))},
                        {"threshold", c.threshold},
                        {"satisfied", satisfied}});
  }
  int decision = gad::detect(series, config);

  // window metrics, using the same filtering as the C/N0 criteria
  json metrics;
  metrics["max_cn0_dbhz"] = gad::extract_metric(series, config, gad::Criterion::Kind::MaxCn0Below);
  metrics["mean_cn0_dbhz"] = gad::extract_metric(series, config, gad::Criterion::Kind::AvgCn0Below);
  metrics["distinct_satellites"] =
      gad::extract_metric(series, config, gad::Criterion::Kind::DistinctSatsBelow);
  metrics["max_fix_count"] = gad::extract_metric(series, config, gad::Criterion::Kind::FixSatsBelow);

  auto ttff = gad::time_to_first_fix(series);
  json doc;
  doc["input"] = input;
  doc["config"] = to_json(config);
  doc["decision"] = decision;
  doc["criteria"] = criteria;
  doc["window"] = {{"start_s", window.start_s}, {"duration_s", window.duration_s}};
  doc["metrics"] = metrics;
  doc["ttff_s"] = ttff ? json(*ttff) : json();
  if (baseline) {
    auto est = gad::estimate_attenuation(series, config, *baseline);
    doc["attenuation"] = {{"level", std::string(gad::to_string(est.level))},
                          {"metric_dbhz", est.metric_dbhz},
                          {"baseline_dbhz", *baseline}};
  } else {
    doc["attenuation"] = nullptr;
  }
  return doc;
}

// Streaming detection over GAD-CSV records on stdin: one state line per
// epoch, then the final decision.
int cmd_detect_stream(const gad::DetectorConfig& config) {
  gad::DetectionState state;
  std::string line;
  gad::Epoch current;
  bool have_epoch = false;
  const double cadence = 1.0;
  state.cadence_s = cadence;

  auto phase_name = [](gad::DetectionState::Phase p) {
    switch (p) {
      case gad::DetectionState::Phase::Initializing:
        return "initializing";
      case gad::DetectionState::Phase::Measuring:
        return "measuring";
      case gad::DetectionState::Phase::Decided:
        return "decided";
    }
    return "initializing";
  };

  auto feed = [&](const gad::Epoch& epoch) {
    if (state.phase == gad::DetectionState::Phase::Decided) return;
    state = gad::online_step(state, epoch, config);
    json step = {{"t_s", epoch.timestamp_s}, {"phase", phase_name(state.phase)}};
    if (state.phase == gad::DetectionState::Phase::Decided) step["decision"] = state.result;
    std::cout << step.dump() << "\n";
  };

  while (std::getline(std::cin, line)) {
    std::string_view sv = gad::detail::strip_cr(line);
    if (sv.empty() || sv == gad::kGadCsvHeader) continue;
    std::string reason;
    auto rec = gad::detail::parse_csv_record(sv, reason);
    if (!rec) {
      std::cerr << "skipped record: " << reason << "\n";
      continue;
    }
    if (have_epoch && std::abs(rec->t - current.timestamp_s) < cadence / 2.0) {
      current.observations.push_back(rec->obs);
    } else {
      if (have_epoch) feed(current);
      current = gad::Epoch{};
      current.timestamp_s = rec->t;
      current.observations.push_back(rec->obs);
      have_epoch = true;
    }
  }
  if (have_epoch) feed(current);

  if (state.phase != gad::DetectionState::Phase::Decided) {
    std::cerr << "stream ended before a decision (need d0 + dm seconds)\n";
    return kExitTooShort;
  }
  std::cout << json{{"decision", state.result}}.dump() << "\n";
  return kExitOk;
}

int cmd_detect(const std::string& input, const std::string& format, const ConfigFlags& flags,
               std::optional<double> baseline, bool stream) {
  gad::DetectorConfig config = flags.build();
  if (stream) return cmd_detect_stream(config);
  gad::ParseReport report = parse_file(input, format);
  print_parse_summary(report);
  std::cout << detect_report(report.series, config, baseline, input).dump(2) << "\n";
  return kExitOk;
}

gad::Criterion::Kind metric_from_flag(const std::string& name) {
  if (name == "max-cn0") return gad::Criterion::Kind::MaxCn0Below;
  if (name == "avg-cn0") return gad::Criterion::Kind::AvgCn0Below;
  if (name == "min-sats") return gad::Criterion::Kind::DistinctSatsBelow;
  return gad::Criterion::Kind::FixSatsBelow;
}

int cmd_calibrate(const std::string& manifest_path, const std::string& metric_flag,
                  const ConfigFlags& flags) {
  std::ifstream manifest(manifest_path);
  if (!manifest) throw std::ios_base::failure("cannot open " + manifest_path);
  auto base_dir = std::filesystem::path(manifest_path).parent_path();

  gad::LabeledDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    std::string_view sv = gad::detail::strip_cr(line);
    if (sv.empty() || sv.front() == '#') continue;
    auto comma = sv.find(',');
    if (comma == std::string_view::npos) {
      throw gad::InvalidConfig("manifest line " + std::to_string(line_no) + ": expected label,path");
    }
    std::string_view label = sv.substr(0, comma);
    std::filesystem::path path(std::string(sv.substr(comma + 1)));
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    gad::ParseReport report = gad::parse_gad_csv(in);
    if (label == "att") {
      data.attenuating.push_back(std::move(report.series));
    } else if (label == "open") {
      data.open.push_back(std::move(report.series));
    } else {
      throw gad::InvalidConfig("manifest line " + std::to_string(line_no) + ": label must be att or open");
    }
  }

  gad::DetectorConfig config = flags.build();
  gad::Criterion::Kind metric = metric_from_flag(metric_flag);
  gad::CalibrationResult result = gad::derive_threshold(data, config, metric);

  gad::DetectorConfig calibrated = config;
  calibrated.criteria = {{metric, result.threshold}};
  gad::ConfusionCounts counts = gad::evaluate_config(data, calibrated);

  json doc;
  doc["metric"] = std::string(gad::to_string(metric));
  doc["threshold"] = result.threshold;
  doc["margin"] = result.margin;
  doc["separable"] = result.separable;
  doc["ks"] = result.ks;
  doc["confusion"] = {{"tp", counts.tp}, {"fp", counts.fp}, {"tn", counts.tn},
                      {"fn", counts.fn}, {"skipped", counts.skipped}};
  doc["n_attenuating"] = data.attenuating.size();
  doc["n_open"] = data.open.size();
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_synth(const std::string& preset_name, const std::string& spec_path, const std::string& output,
              std::optional<std::uint64_t> seed) {
  gad::ScenarioSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw std::ios_base::failure("cannot open " + spec_path);
    spec = gad::parse_scenario(in);
  } else {
    auto p = gad::preset_from_string(preset_name);
    if (!p) throw gad::InvalidSpec("unknown preset '" + preset_name + "'");
    spec = gad::preset(*p);
  }
  if (seed) spec.seed = *seed;
  gad::RawSeries series = gad::generate(spec);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + output);
  out << gad::write_gad_csv(series);
  if (!out) throw std::ios_base::failure("write failed: " + output);
  std::cout << gad::write_scenario(spec);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS attenuating-environment detection toolkit"};
  app.require_subcommand(1);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a GNSS log to GAD-CSV");
  std::string convert_in, convert_out, convert_format = "gadcsv";
  convert->add_option("input", convert_in, "Input log file")->required();
  convert->add_option("output", convert_out, "Output GAD-CSV file")->required();
  convert->add_option("--format", convert_format, "Input format")->check(CLI::IsMember({"nmea", "gadcsv"}));

  // stats
  auto* stats = app.add_subcommand("stats", "Windowed statistics as JSON");
  std::string stats_in, stats_format = "gadcsv", stats_per_epoch;
  double window_start = 100.0, window_dur = 100.0;
  stats->add_option("input", stats_in, "Input log file")->required();
  stats->add_option("--format", stats_format, "Input format")->check(CLI::IsMember({"nmea", "gadcsv"}));
  stats->add_option("--window-start", window_start, "Window start, seconds from series start");
  stats->add_option("--window-dur", window_dur, "Window duration, seconds");
  stats->add_option("--per-epoch", stats_per_epoch, "Also write per-epoch CSV (t, S_i, X_i, max C/N0)");

  // detect
  auto* detect = app.add_subcommand("detect", "Run the attenuating-environment detector");
  std::string detect_in, detect_format = "gadcsv";
  ConfigFlags detect_flags;
  std::optional<double> baseline;
  bool stream = false;
  detect->add_option("input", detect_in, "Input log file (ignored with --stream)");
  detect->add_option("--format", detect_format, "Input format")->check(CLI::IsMember({"nmea", "gadcsv"}));
  detect_flags.add_to(*detect);
  detect->add_option("--baseline", baseline, "Open-sky baseline (dB-Hz) for the attenuation estimate");
  detect->add_flag("--stream", stream, "Read GAD-CSV records from stdin, one state line per epoch");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Derive a threshold from labeled recordings");
  std::string manifest_path, metric_flag = "max-cn0";
  ConfigFlags calibrate_flags;
  calibrate->add_option("manifest", manifest_path, "Manifest: one 'att,path' or 'open,path' per line")
      ->required();
  calibrate->add_option("--metric", metric_flag, "Criterion family to calibrate")
      ->check(CLI::IsMember({"max-cn0", "avg-cn0", "min-sats", "min-fix-sats"}));
  calibrate_flags.add_to(*calibrate);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic GAD-CSV log");
  std::string preset_name, spec_path, synth_out;
  std::optional<std::uint64_t> seed;
  synth->add_option("output", synth_out, "Output GAD-CSV file")->required();
  synth->add_option("--preset", preset_name,
                    "Preset: OPEN_SKY, URBAN_CANYON, INDOOR_WINDOW, DEEP_INDOOR");
  synth->add_option("--spec", spec_path, "Scenario spec file (key = value lines)");
  synth->add_option("--seed", seed, "Random seed override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert) return cmd_convert(convert_in, convert_format, convert_out);
    if (*stats) return cmd_stats(stats_in, stats_format, window_start, window_dur, stats_per_epoch);
    if (*detect) {
      if (!stream && detect_in.empty()) {
        std::cerr << "error: input file required without --stream\n";
        return kExitInvalidConfig;
      }
      return cmd_detect(detect_in, detect_format, detect_flags, baseline, stream);
    }
    if (*calibrate) return cmd_calibrate(manifest_path, metric_flag, calibrate_flags);
    if (*synth) {
      if (preset_name.empty() == spec_path.empty()) {
        std::cerr << "error: exactly one of --preset or --spec required\n";
        return kExitInvalidConfig;
      }
      return cmd_synth(preset_name, spec_path, synth_out, seed);
    }
  } catch (const gad::EmptyWindow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEmptyWindow;
  } catch (const gad::SeriesTooShort& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTooShort;
  } catch (const gad::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const gad::InvalidSpec& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const gad::EmptyClass& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const gad::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
