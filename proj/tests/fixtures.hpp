#pragma once

// Small best-track fixtures written in the RSMC fixed-width layout.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "trackfda/ingest.hpp"

namespace trackfda::testing {

struct FixtureStorm {
    std::string id;
    std::string name;
    int year = 2019;
    std::vector<std::pair<double, double>> track;  // (lat, lon)
};

inline std::string rsmc_header(const std::string& id, std::size_t lines, const std::string& name) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "66666 %-4s %4zu 0000 %-4s 0 6", id.c_str(), lines, id.c_str());
    std::string out(buf);
    out.resize(30, ' ');  // the name field starts at column 31
    std::snprintf(buf, sizeof buf, "%-20s", name.c_str());
    return out + buf + " 20200101";
}

inline std::string rsmc_line(int yy, int mm, int dd, int hh, int grade, double lat, double lon, int pressure,
                             int wind, bool landfall = false) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%02d%02d%02d%02d 002 %1d %03d %04d %04d     %03d", yy, mm, dd, hh, grade,
                  int(std::lround(lat * 10)), int(std::lround(lon * 10)), pressure, wind);
    std::string s(buf);
    if (landfall) {
        s.resize(71, ' ');
        s += '#';
    }
    return s;
}

// Six-hourly records starting at 00Z on the 1st of July.
inline std::string rsmc_text(const std::vector<FixtureStorm>& storms) {
    std::string out;
    for (const auto& s : storms) {
        out += rsmc_header(s.id, s.track.size(), s.name) + "\n";
        for (std::size_t i = 0; i < s.track.size(); ++i) {
            const int hours = int(i) * 6;
            out += rsmc_line(s.year % 100, 7, 1 + hours / 24, hours % 24, 2 + int(i % 4), s.track[i].first,
                             s.track[i].second, 1000 - int(i), 35 + int(i)) +
                   "\n";
        }
    }
    return out;
}

// A straight north-westward track of n points.
inline FixtureStorm straight_storm(const std::string& id, std::size_t n, double lat0, double lon0, double dlat = 0.3,
                                   double dlon = -0.4) {
    FixtureStorm s;
    s.id = id;
    s.name = "STORM" + id;
    for (std::size_t i = 0; i < n; ++i) s.track.emplace_back(lat0 + dlat * double(i), lon0 + dlon * double(i));
    return s;
}

}  // namespace trackfda::testing
