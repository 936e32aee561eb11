#include <doctest.h>

#include <random>
#include <sstream>

#include "gad/ingest.hpp"
#include "test_helpers.hpp"

using namespace gad;

namespace {

ParseReport parse_csv_str(const std::string& text) {
  std::istringstream in(text);
  return parse_gad_csv(in);
}

ParseReport parse_nmea_str(const std::string& text) {
  std::istringstream in(text);
  return parse_nmea(in);
}

}  // namespace

TEST_CASE("header-only input is EmptyInput") {
  CHECK_THROWS_AS(parse_csv_str(std::string(kGadCsvHeader) + "\n"), EmptyInput);
  CHECK_THROWS_AS(parse_csv_str(""), EmptyInput);
}

TEST_CASE("two records at t=0 and t=1 give two one-observation epochs") {
  auto report = parse_csv_str(std::string(kGadCsvHeader) +
                              "\n"
                              "0.000,GPS,5,31.5,120.0,45.0,1,1,1,1\n"
                              "1.000,GPS,5,30.5,120.0,45.0,1,1,1,1\n");
  REQUIRE(report.series.epochs.size() == 2);
  CHECK(report.lines_skipped == 0);
  const auto& obs = report.series.epochs[0].observations.at(0);
  CHECK(obs.key == SatelliteKey{Constellation::Gps, 5});
  CHECK(obs.cn0_dbhz == doctest::Approx(31.5));
  CHECK(obs.azimuth_deg == doctest::Approx(120.0));
  CHECK(obs.elevation_deg == doctest::Approx(45.0));
  CHECK(obs.signal_present);
  CHECK(obs.used_in_fix);
  CHECK(report.series.epochs[1].timestamp_s == doctest::Approx(1.0));
}

TEST_CASE("invalid lines are skipped and reported") {
  auto report = parse_csv_str(std::string(kGadCsvHeader) +
                              "\n"
                              "0.000,GPS,5,31.5,120.0,45.0,1,1,1,1\n"
                              "not,a,record\n"
                              "1.000,GPS,0,31.5,120.0,45.0,1,1,1,1\n"    // svid < 1
                              "2.000,GPS,5,70.0,120.0,45.0,1,1,1,1\n"    // cn0 > 64
                              "3.000,GPS,5,20.0,120.0,45.0,0,1,1,1\n"    // fix without signal
                              "4.000,GPS,5,20.0,120.0,45.0,0,0,1,1\n"    // cn0 > 0 with rho=0
                              "5.000,MARS,5,20.0,120.0,45.0,1,0,1,1\n"); // bad constellation
  CHECK(report.series.epochs.size() == 1);
  CHECK(report.lines_skipped == 6);
  CHECK(report.warnings.size() == 6);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(parse_csv_str(std::string(kGadCsvHeader) +
                                "\n"
                                "5.000,GPS,5,31.5,120.0,45.0,1,0,1,1\n"
                                "1.000,GPS,5,31.5,120.0,45.0,1,0,1,1\n"),
                  NonMonotonicTime);
  CHECK_THROWS_AS(parse_csv_str(std::string(kGadCsvHeader) +
                                "\n"
                                "1.000,GPS,5,31.5,120.0,45.0,1,0,1,1\n"
                                "1.000,GPS,5,30.5,121.0,45.0,1,0,1,1\n"),
                  DuplicateSatellite);
}

TEST_CASE("write_gad_csv: empty series and single record") {
  RawSeries empty;
  CHECK(write_gad_csv(empty) == std::string(kGadCsvHeader) + "\n");

  RawSeries series;
  Epoch epoch;
  epoch.timestamp_s = 2.5;
  epoch.observations = {{{Constellation::Galileo, 11}, 24.5, 310.2, 12.0, true, false, true, false}};
  series.epochs.push_back(epoch);
  CHECK(write_gad_csv(series) ==
        std::string(kGadCsvHeader) + "\n2.500,GALILEO,11,24.5,310.2,12.0,1,0,1,0\n");
}

TEST_CASE("round trip: parse_gad_csv(write_gad_csv(S)) == S") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 50; ++i) {
    RawSeries series = testutil::random_series(rng, 8);
    if (series.epochs.empty()) continue;
    // drop epochs with no observations: they have no CSV representation
    std::erase_if(series.epochs, [](const Epoch& e) { return e.observations.empty(); });
    if (series.epochs.empty()) continue;
    std::string text = write_gad_csv(series);
    auto report = parse_csv_str(text);
    CHECK(report.series == series);
    CHECK(report.lines_skipped == 0);
    // byte determinism
    CHECK(write_gad_csv(report.series) == text);
  }
}

TEST_CASE("permutation within an epoch does not change the parsed series") {
  std::mt19937_64 rng(33);
  RawSeries series = testutil::random_series(rng, 6, 8);
  std::erase_if(series.epochs, [](const Epoch& e) { return e.observations.empty(); });
  if (series.epochs.empty()) return;
  std::string text = write_gad_csv(series);

  // shuffle record lines within each timestamp group
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) lines.push_back(line);
  std::string shuffled(kGadCsvHeader);
  shuffled += '\n';
  std::size_t i = 0;
  while (i < lines.size()) {
    std::size_t j = i;
    auto stamp = [](const std::string& l) { return l.substr(0, l.find(',')); };
    while (j < lines.size() && stamp(lines[j]) == stamp(lines[i])) ++j;
    std::shuffle(lines.begin() + i, lines.begin() + j, rng);
    for (std::size_t k = i; k < j; ++k) shuffled += lines[k] + "\n";
    i = j;
  }
  auto a = parse_csv_str(text);
  auto b = parse_csv_str(shuffled);
  CHECK(a.series == b.series);
}

// checksums below were computed with an external XOR script
TEST_CASE("NMEA: GGA + GSV + GSA cycle for 4 GPS satellites") {
  auto report = parse_nmea_str(
      "$GPGGA,120000.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*6B\r\n"
      "$GPGSV,1,1,04,05,60,100,35,07,45,200,30,09,30,300,22,12,15,050,18*7C\r\n"
      "$GPGSA,A,3,05,07,09,12,,,,,,,,,1.8,1.0,1.5*36\r\n");
  REQUIRE(report.series.epochs.size() == 1);
  const Epoch& epoch = report.series.epochs[0];
  CHECK(epoch.timestamp_s == doctest::Approx(0.0));
  REQUIRE(epoch.observations.size() == 4);
  CHECK(satellite_count(epoch) == 4);
  CHECK(fix_count(epoch) == 4);
  // hand-enumerated fields of the first satellite
  const auto& sv5 = epoch.observations[0];
  CHECK(sv5.key == SatelliteKey{Constellation::Gps, 5});
  CHECK(sv5.elevation_deg == doctest::Approx(60.0));
  CHECK(sv5.azimuth_deg == doctest::Approx(100.0));
  CHECK(sv5.cn0_dbhz == doctest::Approx(35.0));
  CHECK(sv5.used_in_fix);
}

TEST_CASE("NMEA: blank SNR means predicted but not tracked") {
  auto report = parse_nmea_str(
      "$GPGGA,120001.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*6A\r\n"
      "$GPGSV,1,1,02,03,40,150,,08,20,250,21*76\r\n");
  REQUIRE(report.series.epochs.size() == 1);
  const Epoch& epoch = report.series.epochs[0];
  REQUIRE(epoch.observations.size() == 2);
  const auto& sv3 = epoch.observations[0];
  CHECK(sv3.key == SatelliteKey{Constellation::Gps, 3});
  CHECK(!sv3.signal_present);
  CHECK(sv3.cn0_dbhz == 0.0);
  CHECK(sv3.elevation_deg == doctest::Approx(40.0));
  CHECK(satellite_count(epoch) == 1);
}

TEST_CASE("NMEA: checksum-invalid stream is EmptyInput") {
  CHECK_THROWS_AS(parse_nmea_str("$GPGSV,1,1,01,05,60,100,35*00\n"
                                 "$GPGGA,120000.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*FF\n"
                                 "garbage line\n"),
                  EmptyInput);
}

TEST_CASE("NMEA: multi-cycle stream with GLONASS talker and relative time") {
  auto report = parse_nmea_str(
      "$GPGGA,120000.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*6B\n"
      "$GPGSV,1,1,04,05,60,100,35,07,45,200,30,09,30,300,22,12,15,050,18*7C\n"
      "$GPGSA,A,3,05,07,09,12,,,,,,,,,1.8,1.0,1.5*36\n"
      "$GPGGA,120001.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*6A\n"
      "$GLGSV,1,1,01,70,55,120,33*50\n"
      "$GPGSA,A,3,08,,,,,,,,,,,,2.5,1.4,2.0*3A\n"
      "$GPRMC,120002.00,A,4807.038,N,01131.000,E,0.0,0.0,260826,,*38\n");
  REQUIRE(report.series.epochs.size() == 2);
  CHECK(report.series.epochs[0].timestamp_s == doctest::Approx(0.0));
  CHECK(report.series.epochs[1].timestamp_s == doctest::Approx(1.0));
  const auto& glonass = report.series.epochs[1].observations.at(0);
  CHECK(glonass.key == SatelliteKey{Constellation::Glonass, 70});
  CHECK(glonass.cn0_dbhz == doctest::Approx(33.0));
  // svid 8 in the GSA does not match any tracked satellite
  CHECK(fix_count(report.series.epochs[1]) == 0);
}

TEST_CASE("NMEA never marks used_in_fix without signal") {
  // satellite 3 has blank SNR but appears in the GSA list
  auto report = parse_nmea_str(
      "$GPGGA,120001.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*6A\n"
      "$GPGSV,1,1,02,03,40,150,,08,20,250,21*76\n");
  for (const auto& epoch : report.series.epochs) {
    for (const auto& o : epoch.observations) {
      CHECK(!(o.used_in_fix && !o.signal_present));
    }
  }
}

TEST_CASE("fuzz: parsers are total over mutated byte input") {
  std::mt19937_64 rng(99);
  std::string base = write_gad_csv(testutil::random_series(rng, 5));
  std::string nmea_base =
      "$GPGGA,120000.00,4807.038,N,01131.000,E,1,04,0.9,545.4,M,46.9,M,,*6B\n"
      "$GPGSV,1,1,04,05,60,100,35,07,45,200,30,09,30,300,22,12,15,050,18*7C\n";
  for (int i = 0; i < 500; ++i) {
    for (std::string* src : {&base, &nmea_base}) {
      std::string mutated = *src;
      int flips = static_cast<int>(rng() % 8 + 1);
      for (int f = 0; f < flips && !mutated.empty(); ++f) {
        mutated[rng() % mutated.size()] = static_cast<char>(rng() % 256);
      }
      try {
        parse_csv_str(mutated);
      } catch (const Error&) {
      }
      try {
        parse_nmea_str(mutated);
      } catch (const Error&) {
      }
    }
  }
}
