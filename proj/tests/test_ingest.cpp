#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "trackfda/error.hpp"
#include "trackfda/ingest.hpp"

using namespace trackfda;
using namespace trackfda::testing;

namespace {

std::vector<StormRecordSet> parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_rsmc(in);
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Parse;
}

std::vector<StormRecordSet> csv_storms(const std::string& text, std::vector<std::string>* warnings = nullptr) {
    std::istringstream in(text);
    return parse_csv(in, warnings);
}

}  // namespace

TEST_CASE("rsmc: fields, scaling and year pivot") {
    std::string text = rsmc_header("5101", 2, "ALPHA") + "\n";
    text += rsmc_line(51, 8, 1, 0, 2, 12.3, 135.7, 1002, 0) + "\n";
    text += rsmc_line(51, 8, 1, 6, 3, 12.9, 134.1, 998, 45, true) + "\n";
    text += rsmc_header("2301", 1, "OMEGA") + "\n";
    text += rsmc_line(23, 9, 30, 18, 6, -5.5, 0.5, 990, 0) + "\n";
    const auto storms = parse_text(text);
    REQUIRE(storms.size() == 2);
    CHECK(storms[0].storm_id == "5101");
    CHECK(storms[0].name == "ALPHA");
    REQUIRE(storms[0].records.size() == 2);
    const auto& r = storms[0].records[1];
    CHECK(r.lat == doctest::Approx(12.9));
    CHECK(r.lon == doctest::Approx(134.1));
    CHECK(r.grade == 3);
    CHECK(r.central_pressure == 998);
    CHECK(r.max_wind == 45);
    CHECK(r.landfall);
    CHECK_FALSE(storms[0].records[0].landfall);
    CHECK(format_timestamp(storms[0].records[0].time) == "1951-08-01T00:00:00Z");
    CHECK(format_timestamp(storms[1].records[0].time) == "2023-09-30T18:00:00Z");
    CHECK(storms[1].records[0].lat == doctest::Approx(-5.5));
}

TEST_CASE("rsmc: blank numeric fields are absent, not zero") {
    std::string line = rsmc_line(99, 1, 1, 0, 2, 10.0, 140.0, 1000, 0);
    line.replace(24, 4, "    ");  // pressure, columns 25-28
    line.replace(33, 3, "   ");   // wind, columns 34-36
    const auto storms = parse_text(rsmc_header("9901", 1, "X") + "\n" + line + "\n");
    REQUIRE(storms.size() == 1);
    CHECK_FALSE(storms[0].records[0].central_pressure.has_value());
    CHECK_FALSE(storms[0].records[0].max_wind.has_value());
    CHECK_FALSE(storms[0].records[0].longest_radius_50kt.has_value());
}

TEST_CASE("rsmc: record count equals the header declaration") {
    std::vector<FixtureStorm> fx;
    for (int i = 0; i < 5; ++i) fx.push_back(straight_storm(std::to_string(1000 + i), std::size_t(3 + 7 * i), 10, 150));
    const auto storms = parse_text(rsmc_text(fx));
    REQUIRE(storms.size() == fx.size());
    for (std::size_t i = 0; i < fx.size(); ++i) CHECK(storms[i].records.size() == fx[i].track.size());
}

TEST_CASE("rsmc: malformed input") {
    CHECK(parse_text("").empty());
    CHECK(kind_of([] { parse_text("66666 0001 abc 0000 0001 0 6 NAME\n"); }) == ErrorKind::Parse);
    try {
        parse_text("66666 0001 abc 0000 0001 0 6 NAME\n");
    } catch (const Error& e) {
        CHECK(e.line() == 1);
    }
    // Declares 3 lines, delivers 2.
    const std::string short_block = rsmc_header("0001", 3, "A") + "\n" + rsmc_line(90, 1, 1, 0, 2, 10, 140, 1000, 0) +
                                    "\n" + rsmc_line(90, 1, 1, 6, 2, 10.5, 139, 1000, 0) + "\n";
    CHECK(kind_of([&] { parse_text(short_block); }) == ErrorKind::Truncation);
    CHECK(kind_of([&] { parse_text(short_block + rsmc_header("0002", 1, "B") + "\n"); }) == ErrorKind::Truncation);
    // Header declaring zero lines: the storm has no records.
    const auto zero = rsmc_header("0003", 0, "C") + "\n";
    const auto k = kind_of([&] { parse_text(zero); });
    CHECK((k == ErrorKind::Truncation || k == ErrorKind::Validation));
    // Unparsable latitude.
    std::string bad = rsmc_line(90, 1, 1, 0, 2, 10, 140, 1000, 0);
    bad.replace(15, 3, "x1y");
    CHECK(kind_of([&] { parse_text(rsmc_header("0004", 1, "D") + "\n" + bad + "\n"); }) == ErrorKind::Parse);
}

TEST_CASE("validation: ranges, ordering and meridian crossing") {
    StormRecordSet s{"X", "", {}};
    CHECK(kind_of([&] { validate_storm(s); }) == ErrorKind::Validation);
    StormRecord a, b;
    a.time = parse_timestamp("2000010100");
    b.time = parse_timestamp("2000010106");
    a.lat = b.lat = 10;
    a.lon = 359.5;
    b.lon = 0.5;
    s.records = {a, b};
    CHECK(kind_of([&] { validate_storm(s); }) == ErrorKind::Validation);
    s.records[1].lon = 359.0;
    CHECK_NOTHROW(validate_storm(s));
    s.records[1].time = a.time;
    CHECK(kind_of([&] { validate_storm(s); }) == ErrorKind::Validation);
    s.records[1].time = b.time;
    s.records[1].lat = 91;
    CHECK(kind_of([&] { validate_storm(s); }) == ErrorKind::Validation);
    s.records[1].lat = 10;
    s.records[1].lon = 360.0;
    CHECK(kind_of([&] { validate_storm(s); }) == ErrorKind::Validation);
}

TEST_CASE("csv: grouping, schema, header-only") {
    const std::string text =
        "storm_id,time,lat,lon\n"
        "A,2001-07-01T00:00:00Z,10,140\nA,2001-07-01T06:00:00Z,10.5,139.5\nA,2001-07-01T12:00:00Z,11,139\n"
        "B,2001-08-01T00:00:00Z,20,130\nB,2001-08-01T06:00:00Z,20.5,129.5\nB,2001-08-01T12:00:00Z,21,129\n";
    const auto storms = csv_storms(text);
    REQUIRE(storms.size() == 2);
    CHECK(storms[0].records.size() == 3);
    CHECK(storms[1].records.size() == 3);
    CHECK(storms[1].storm_id == "B");
    CHECK(csv_storms("storm_id,time,lat,lon\n").empty());
    CHECK(kind_of([] { csv_storms("storm_id,time,lat\nA,2001-07-01T00:00:00Z,10\n"); }) == ErrorKind::Schema);
}

TEST_CASE("csv: out-of-order rows are sorted against a pre-sorted oracle") {
    const std::string sorted =
        "storm_id,time,lat,lon\n"
        "A,2001-07-01T00:00:00Z,10,140\nA,2001-07-01T06:00:00Z,10.5,139.5\nA,2001-07-01T12:00:00Z,11,139\n";
    const std::string shuffled =
        "storm_id,time,lat,lon\n"
        "A,2001-07-01T12:00:00Z,11,139\nA,2001-07-01T00:00:00Z,10,140\nA,2001-07-01T06:00:00Z,10.5,139.5\n";
    std::vector<std::string> warnings;
    const auto oracle = csv_storms(sorted);
    const auto got = csv_storms(shuffled, &warnings);
    CHECK(warnings.size() == 1);
    REQUIRE(got[0].records.size() == oracle[0].records.size());
    for (std::size_t i = 0; i < got[0].records.size(); ++i) {
        CHECK(got[0].records[i].time == oracle[0].records[i].time);
        CHECK(got[0].records[i].lat == oracle[0].records[i].lat);
        CHECK(got[0].records[i].lon == oracle[0].records[i].lon);
    }
    const std::string dup = "storm_id,time,lat,lon\nA,2001-07-01T00:00:00Z,10,140\nA,2001-07-01T00:00:00Z,11,139\n";
    CHECK(kind_of([&] { csv_storms(dup); }) == ErrorKind::Validation);
}

TEST_CASE("csv round trip of parsed rsmc storms") {
    std::vector<FixtureStorm> fx{straight_storm("0101", 12, 15, 140), straight_storm("0102", 9, 25.3, 128.8, -0.1, 0.7)};
    const auto storms = parse_text(rsmc_text(fx));
    std::stringstream buf;
    write_csv(buf, storms);
    const auto back = parse_csv(buf);
    REQUIRE(back.size() == storms.size());
    for (std::size_t s = 0; s < storms.size(); ++s) {
        CHECK(back[s].storm_id == storms[s].storm_id);
        REQUIRE(back[s].records.size() == storms[s].records.size());
        for (std::size_t i = 0; i < storms[s].records.size(); ++i) {
            CHECK(back[s].records[i].time == storms[s].records[i].time);
            CHECK(back[s].records[i].lat == storms[s].records[i].lat);
            CHECK(back[s].records[i].lon == storms[s].records[i].lon);
        }
    }
}

TEST_CASE("filter_min_length composes as max and preserves order") {
    std::vector<StormRecordSet> storms;
    for (std::size_t n : {5, 40, 32, 1, 48, 31, 33}) {
        StormRecordSet s{"S" + std::to_string(n), "", std::vector<StormRecord>(n)};
        storms.push_back(s);
    }
    auto ids = [](const std::vector<StormRecordSet>& v) {
        std::vector<std::string> out;
        for (const auto& s : v) out.push_back(s.storm_id);
        return out;
    };
    CHECK(ids(filter_min_length(storms, 1)) == ids(storms));
    CHECK(ids(filter_min_length(storms, 32)) == std::vector<std::string>{"S40", "S32", "S48", "S33"});
    for (std::size_t a : {1, 5, 32, 33, 48, 60})
        for (std::size_t b : {1, 5, 32, 33, 48, 60})
            CHECK(ids(filter_min_length(filter_min_length(storms, a), b)) ==
                  ids(filter_min_length(storms, std::max(a, b))));
}

TEST_CASE("extract_tail is the raw suffix") {
    StormRecordSet s{"T", "", {}};
    for (int i = 0; i < 50; ++i) {
        StormRecord r;
        r.lat = 10 + 0.1 * i;
        r.lon = 140 - 0.2 * i;
        s.records.push_back(r);
    }
    const auto w = extract_tail(s, 32, 24);
    REQUIRE(w.total_length() == 32);
    CHECK(w.predictor_length == 24);
    CHECK(w.response_length() == 8);
    for (std::size_t j = 0; j < 32; ++j) {
        CHECK(w.lat[j] == s.records[18 + j].lat);  // records 19..50, 1-indexed
        CHECK(w.lon[j] == s.records[18 + j].lon);
    }
    s.records.resize(32);
    CHECK(extract_tail(s, 32, 24).lat.front() == s.records.front().lat);
    s.records.resize(30);
    CHECK(kind_of([&] { extract_tail(s, 32, 24); }) == ErrorKind::Length);
}

TEST_CASE("build_matrices orientation and grid") {
    std::vector<TrajectoryWindow> ws;
    for (int j = 0; j < 3; ++j) {
        TrajectoryWindow w{"W" + std::to_string(j), {}, {}, 24};
        for (int i = 0; i < 32; ++i) {
            w.lat.push_back(j * 100 + i);
            w.lon.push_back(-(j * 100 + i));
        }
        ws.push_back(w);
    }
    const auto m = build_matrices(ws);
    CHECK(m.lat.values.rows() == 32);
    CHECK(m.lat.values.cols() == 3);
    CHECK(m.lat.values(5, 2) == 205);
    CHECK(m.lon.values(31, 0) == -31);
    CHECK(m.lat.storm_ids == std::vector<std::string>{"W0", "W1", "W2"});
    REQUIRE(m.lat.time_grid.size() == 32);
    CHECK(m.lat.time_grid.front() == 0.0);
    CHECK(m.lat.time_grid.back() == 1.0);
    CHECK(m.lat.time_grid[1] == doctest::Approx(1.0 / 31));
    CHECK(build_matrices({ws[0]}).lat.values.cols() == 1);

    const auto back = windows_from_matrices(m, 24);
    CHECK(back[1].lat == ws[1].lat);
    CHECK(back[2].storm_id == "W2");

    auto mixed = ws;
    mixed[1].lat.resize(40, 0.0);
    mixed[1].lon.resize(40, 0.0);
    CHECK(kind_of([&] { build_matrices(mixed); }) == ErrorKind::Shape);

    const auto pg = predictor_grid(32, 24), rg = response_grid(32, 24);
    CHECK(pg.size() == 24);
    CHECK(rg.size() == 8);
    CHECK(pg.back() == doctest::Approx(23.0 / 31));
    CHECK(rg.front() == doctest::Approx(24.0 / 31));
}

TEST_CASE("matrix csv round trip is exact") {
    DatasetMatrix m;
    m.values.resize(4, 2);
    m.values << 0.1, 1.0 / 3, 12.345678901234567, -7, 1e-300, 2, 135.7, 0;
    m.storm_ids = {"a", "b"};
    m.time_grid = normalized_grid(4);
    std::stringstream buf;
    write_matrix_csv(buf, m);
    const auto back = read_matrix_csv(buf);
    CHECK(back.values == m.values);
    CHECK(back.storm_ids == m.storm_ids);
    CHECK(back.time_grid == m.time_grid);
}

TEST_CASE("train_test_split") {
    const auto s = train_test_split(1107, 0.8, 42);
    CHECK(s.train.size() == 885);
    CHECK(s.test.size() == 222);
    const auto s5 = train_test_split(5, 0.8, 1);
    CHECK(s5.train.size() == 4);
    CHECK(s5.test.size() == 1);
    const auto a = train_test_split(10, 0.8, 7), b = train_test_split(10, 0.8, 7);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == 1107);
    CHECK(*all.rbegin() == 1106);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    CHECK(train_test_split(100, 0.8, 1).train != train_test_split(100, 0.8, 2).train);
}

TEST_CASE("timestamps") {
    CHECK(format_timestamp(parse_timestamp("2023-08-31T18:00:00Z")) == "2023-08-31T18:00:00Z");
    CHECK(parse_timestamp("2023083118") == parse_timestamp("2023-08-31T18:00:00Z"));
}
