#include "trackfda/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "trackfda/error.hpp"

namespace trackfda {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(const std::string& text) {
    T value{};
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || begin == end) return std::nullopt;
    return value;
}

// 1-based inclusive column range of a fixed-width line, trimmed; empty when
// the line is shorter.
std::string column(const std::string& line, std::size_t first, std::size_t last) {
    if (line.size() < first) return {};
    return trim(std::string_view(line).substr(first - 1, last - first + 1));
}

std::optional<int> optional_int(const std::string& text, const char* what, long line) {
    if (text.empty()) return std::nullopt;
    auto v = parse_number<int>(text);
    if (!v) throw Error(ErrorKind::Parse, std::string("invalid ") + what + " '" + text + "'", line);
    return v;
}

Timestamp make_timestamp(int year, unsigned month, unsigned day, unsigned hour,
                         unsigned minute, unsigned second, long line) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                             std::chrono::day{day}};
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 60)
        throw Error(ErrorKind::Parse, "invalid date/time", line);
    return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
std::string optional_text(const std::optional<T>& v) {
    return v ? std::to_string(*v) : std::string{};
}

}  // namespace

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), long(hms.hours().count()),
                  long(hms.minutes().count()), long(hms.seconds().count()));
    return buf;
}

Timestamp parse_timestamp(const std::string& raw) {
    const std::string text = trim(raw);
    auto num = [&](std::size_t pos, std::size_t len) -> unsigned {
        if (pos + len > text.size()) throw Error(ErrorKind::Parse, "invalid timestamp '" + text + "'");
        auto v = parse_number<unsigned>(text.substr(pos, len));
        if (!v) throw Error(ErrorKind::Parse, "invalid timestamp '" + text + "'");
        return *v;
    };
    if (text.size() == 10 && text.find_first_not_of("0123456789") == std::string::npos) {
        return make_timestamp(int(num(0, 4)), num(4, 2), num(6, 2), num(8, 2), 0, 0, 0);
    }
    // YYYY-MM-DD[T ]HH:MM[:SS][Z]
    if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':')
        throw Error(ErrorKind::Parse, "invalid timestamp '" + text + "'");
    unsigned sec = 0;
    std::size_t end = 16;
    if (text.size() >= 19 && text[16] == ':') {
        sec = num(17, 2);
        end = 19;
    }
    if (end < text.size() && !(end + 1 == text.size() && text[end] == 'Z'))
        throw Error(ErrorKind::Parse, "invalid timestamp '" + text + "'");
    return make_timestamp(int(num(0, 4)), num(5, 2), num(8, 2), num(11, 2), num(14, 2), sec, 0);
}

void validate_storm(const StormRecordSet& storm, long line) {
    const std::string who = "storm " + storm.storm_id;
    if (storm.records.empty()) throw Error(ErrorKind::Validation, who + " has no records", line);
    for (std::size_t i = 0; i < storm.records.size(); ++i) {
        const auto& r = storm.records[i];
        if (!(r.lat >= -90.0 && r.lat <= 90.0))
            throw Error(ErrorKind::Validation, who + ": latitude " + shortest(r.lat) + " out of range", line);
        if (!(r.lon >= 0.0 && r.lon < 360.0))
            throw Error(ErrorKind::Validation, who + ": longitude " + shortest(r.lon) + " outside [0, 360)", line);
        if (i == 0) continue;
        const auto& prev = storm.records[i - 1];
        if (r.time <= prev.time)
            throw Error(ErrorKind::Validation,
                        who + ": timestamps not strictly increasing at " + format_timestamp(r.time), line);
        if (std::abs(r.lon - prev.lon) > 180.0)
            throw Error(ErrorKind::Validation, who + ": track crosses the 0/360 meridian", line);
    }
}

std::vector<StormRecordSet> parse_rsmc(std::istream& in) {
    std::vector<StormRecordSet> storms;
    std::size_t expected = 0;
    long header_line = 0;
    long lineno = 0;

    auto close_storm = [&] {
        if (!storms.empty()) validate_storm(storms.back(), header_line);
    };

    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;

        if (line.rfind("66666", 0) == 0) {
            if (expected > 0)
                throw Error(ErrorKind::Truncation,
                            "storm " + storms.back().storm_id + " ended with " + std::to_string(expected) +
                                " declared data line(s) missing",
                            lineno);
            close_storm();
            const auto tokens = split_ws(line);
            if (tokens.size() < 3) throw Error(ErrorKind::Parse, "header has fewer than 3 fields", lineno);
            const auto count = parse_number<std::size_t>(tokens[2]);
            if (!count) throw Error(ErrorKind::Parse, "non-numeric record count '" + tokens[2] + "'", lineno);
            StormRecordSet storm;
            storm.storm_id = tokens[1];
            storm.name = column(line, 31, 50);
            storm.records.reserve(*count);
            storms.push_back(std::move(storm));
            expected = *count;
            header_line = lineno;
            continue;
        }

        if (expected == 0)
            throw Error(ErrorKind::Parse, "data line outside a declared storm block", lineno);

        const std::string stamp = column(line, 1, 8);
        if (stamp.size() != 8 || stamp.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorKind::Parse, "invalid yymmddhh '" + stamp + "'", lineno);
        const int yy = std::stoi(stamp.substr(0, 2));
        const int year = yy >= 51 ? 1900 + yy : 2000 + yy;

        StormRecord rec;
        rec.time = make_timestamp(year, unsigned(std::stoi(stamp.substr(2, 2))),
                                  unsigned(std::stoi(stamp.substr(4, 2))),
                                  unsigned(std::stoi(stamp.substr(6, 2))), 0, 0, lineno);
        rec.grade = optional_int(column(line, 14, 14), "grade", lineno).value_or(0);
        const auto lat10 = parse_number<int>(column(line, 16, 18));
        const auto lon10 = parse_number<int>(column(line, 20, 23));
        if (!lat10 || !lon10) throw Error(ErrorKind::Parse, "unparsable latitude/longitude", lineno);
        rec.lat = *lat10 / 10.0;
        rec.lon = *lon10 / 10.0;
        rec.central_pressure = optional_int(column(line, 25, 28), "central pressure", lineno);
        rec.max_wind = optional_int(column(line, 34, 36), "maximum wind", lineno);
        rec.dir_longest_50kt = optional_int(column(line, 42, 42), "50kt direction", lineno);
        rec.longest_radius_50kt = optional_int(column(line, 43, 46), "50kt longest radius", lineno);
        rec.shortest_radius_50kt = optional_int(column(line, 48, 51), "50kt shortest radius", lineno);
        rec.dir_longest_30kt = optional_int(column(line, 53, 53), "30kt direction", lineno);
        rec.longest_radius_30kt = optional_int(column(line, 54, 57), "30kt longest radius", lineno);
        rec.shortest_radius_30kt = optional_int(column(line, 59, 62), "30kt shortest radius", lineno);
        rec.landfall = column(line, 72, 72) == "#";
        storms.back().records.push_back(rec);
        --expected;
    }

    if (expected > 0)
        throw Error(ErrorKind::Truncation,
                    "end of input with " + std::to_string(expected) + " declared data line(s) missing for storm " +
                        storms.back().storm_id,
                    lineno);
    close_storm();
    return storms;
}

std::vector<StormRecordSet> parse_csv(std::istream& in, std::vector<std::string>* warnings) {
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!is_blank(line)) break;
    }
    if (is_blank(line)) throw Error(ErrorKind::Schema, "missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Tolerate a UTF-8 byte order mark.
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

    const auto header = split_commas(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
    for (const char* required : {"storm_id", "time", "lat", "lon"})
        if (!col.count(required))
            throw Error(ErrorKind::Schema, std::string("missing required column '") + required + "'", lineno);
    auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
        auto it = col.find(name);
        return it == col.end() ? std::nullopt : std::optional(it->second);
    };
    const auto grade_col = optional_col("grade");
    const auto pressure_col = optional_col("pressure");
    const auto wind_col = optional_col("wind");
    const auto name_col = optional_col("name");

    std::vector<StormRecordSet> storms;
    std::map<std::string, std::size_t> index_of;
    std::vector<long> first_line;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        const auto fields = split_commas(line);
        if (fields.size() != header.size())
            throw Error(ErrorKind::Parse,
                        "expected " + std::to_string(header.size()) + " fields, found " +
                            std::to_string(fields.size()),
                        lineno);
        const std::string& id = fields[col["storm_id"]];
        if (id.empty()) throw Error(ErrorKind::Parse, "empty storm_id", lineno);

        StormRecord rec;
        try {
            rec.time = parse_timestamp(fields[col["time"]]);
        } catch (const Error& e) {
            throw Error(ErrorKind::Parse, "invalid timestamp '" + fields[col["time"]] + "'", lineno);
        }
        const auto lat = parse_number<double>(fields[col["lat"]]);
        const auto lon = parse_number<double>(fields[col["lon"]]);
        if (!lat || !lon) throw Error(ErrorKind::Parse, "unparsable latitude/longitude", lineno);
        rec.lat = *lat;
        rec.lon = *lon;
        if (grade_col) rec.grade = optional_int(fields[*grade_col], "grade", lineno).value_or(0);
        if (pressure_col) rec.central_pressure = optional_int(fields[*pressure_col], "pressure", lineno);
        if (wind_col) rec.max_wind = optional_int(fields[*wind_col], "wind", lineno);

        auto [it, inserted] = index_of.emplace(id, storms.size());
        if (inserted) {
            StormRecordSet storm;
            storm.storm_id = id;
            storms.push_back(std::move(storm));
            first_line.push_back(lineno);
        }
        auto& storm = storms[it->second];
        if (name_col && storm.name.empty()) storm.name = fields[*name_col];
        storm.records.push_back(rec);
    }

    for (std::size_t s = 0; s < storms.size(); ++s) {
        auto& recs = storms[s].records;
        const auto by_time = [](const StormRecord& a, const StormRecord& b) { return a.time < b.time; };
        if (!std::is_sorted(recs.begin(), recs.end(), by_time)) {
            std::stable_sort(recs.begin(), recs.end(), by_time);
            if (warnings) warnings->push_back("storm " + storms[s].storm_id + ": rows sorted by time");
        }
        validate_storm(storms[s], first_line[s]);
    }
    return storms;
}

void write_csv(std::ostream& out, const std::vector<StormRecordSet>& storms) {
    out << "storm_id,time,lat,lon,grade,pressure,wind\n";
    for (const auto& storm : storms) {
        for (const auto& r : storm.records) {
            out << storm.storm_id << ',' << format_timestamp(r.time) << ',' << shortest(r.lat) << ','
                << shortest(r.lon) << ',' << r.grade << ',' << optional_text(r.central_pressure) << ','
                << optional_text(r.max_wind) << '\n';
        }
    }
}

std::vector<StormRecordSet> filter_min_length(const std::vector<StormRecordSet>& storms,
                                              std::size_t min_len) {
    if (min_len < 1) throw Error(ErrorKind::Config, "min_len must be at least 1");
    std::vector<StormRecordSet> out;
    std::copy_if(storms.begin(), storms.end(), std::back_inserter(out),
                 [&](const StormRecordSet& s) { return s.records.size() >= min_len; });
    return out;
}

TrajectoryWindow extract_tail(const StormRecordSet& storm, std::size_t total_len,
                              std::size_t predictor_len) {
    if (predictor_len == 0 || predictor_len >= total_len)
        throw Error(ErrorKind::Config, "predictor length must satisfy 0 < P < L");
    if (storm.records.size() < total_len)
        throw Error(ErrorKind::Length, "storm " + storm.storm_id + " has " +
                                           std::to_string(storm.records.size()) + " records, needs " +
                                           std::to_string(total_len));
    TrajectoryWindow w;
    w.storm_id = storm.storm_id;
    w.predictor_length = predictor_len;
    w.lat.reserve(total_len);
    w.lon.reserve(total_len);
    for (auto it = storm.records.end() - std::ptrdiff_t(total_len); it != storm.records.end(); ++it) {
        w.lat.push_back(it->lat);
        w.lon.push_back(it->lon);
    }
    return w;
}

std::vector<TrajectoryWindow> extract_tails(const std::vector<StormRecordSet>& storms,
                                            std::size_t total_len, std::size_t predictor_len) {
    std::vector<TrajectoryWindow> out;
    out.reserve(storms.size());
    for (const auto& s : storms) out.push_back(extract_tail(s, total_len, predictor_len));
    return out;
}

std::vector<double> normalized_grid(std::size_t total_len) {
    if (total_len < 2) throw Error(ErrorKind::Config, "a window needs at least 2 points");
    std::vector<double> grid(total_len);
    for (std::size_t i = 0; i < total_len; ++i) grid[i] = double(i) / double(total_len - 1);
    return grid;
}

std::vector<double> predictor_grid(std::size_t total_len, std::size_t predictor_len) {
    auto grid = normalized_grid(total_len);
    grid.resize(predictor_len);
    return grid;
}

std::vector<double> response_grid(std::size_t total_len, std::size_t predictor_len) {
    const auto grid = normalized_grid(total_len);
    return {grid.begin() + std::ptrdiff_t(predictor_len), grid.end()};
}

DatasetMatrices build_matrices(const std::vector<TrajectoryWindow>& windows) {
    if (windows.empty()) throw Error(ErrorKind::Shape, "no windows to assemble");
    const std::size_t L = windows.front().total_length();
    const std::size_t P = windows.front().predictor_length;
    for (const auto& w : windows) {
        if (w.lat.size() != L || w.lon.size() != L || w.predictor_length != P)
            throw Error(ErrorKind::Shape, "window " + w.storm_id + " has length " + std::to_string(w.lat.size()) +
                                              "/" + std::to_string(w.predictor_length) + ", expected " +
                                              std::to_string(L) + "/" + std::to_string(P));
    }
    DatasetMatrices m;
    const auto n = Eigen::Index(windows.size());
    m.lat.values.resize(Eigen::Index(L), n);
    m.lon.values.resize(Eigen::Index(L), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& w = windows[std::size_t(j)];
        m.lat.values.col(j) = Eigen::Map<const Eigen::VectorXd>(w.lat.data(), Eigen::Index(L));
        m.lon.values.col(j) = Eigen::Map<const Eigen::VectorXd>(w.lon.data(), Eigen::Index(L));
        m.lat.storm_ids.push_back(w.storm_id);
    }
    m.lat.time_grid = normalized_grid(L);
    m.lon.time_grid = m.lat.time_grid;
    m.lon.storm_ids = m.lat.storm_ids;
    return m;
}

std::vector<TrajectoryWindow> windows_from_matrices(const DatasetMatrices& m, std::size_t predictor_len) {
    if (m.lat.values.rows() != m.lon.values.rows() || m.lat.values.cols() != m.lon.values.cols() ||
        m.lat.storm_ids != m.lon.storm_ids)
        throw Error(ErrorKind::Shape, "latitude and longitude matrices disagree");
    const auto L = std::size_t(m.lat.values.rows());
    if (predictor_len == 0 || predictor_len >= L)
        throw Error(ErrorKind::Config, "predictor length must satisfy 0 < P < L");
    std::vector<TrajectoryWindow> out;
    for (Eigen::Index j = 0; j < m.lat.values.cols(); ++j) {
        TrajectoryWindow w;
        w.storm_id = m.lat.storm_ids[std::size_t(j)];
        w.predictor_length = predictor_len;
        w.lat.assign(m.lat.values.col(j).data(), m.lat.values.col(j).data() + L);
        w.lon.assign(m.lon.values.col(j).data(), m.lon.values.col(j).data() + L);
        out.push_back(std::move(w));
    }
    return out;
}

void write_matrix_csv(std::ostream& out, const DatasetMatrix& matrix) {
    for (std::size_t j = 0; j < matrix.storm_ids.size(); ++j) out << (j ? "," : "") << matrix.storm_ids[j];
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.values.cols(); ++j)
            out << (j ? "," : "") << shortest(matrix.values(i, j));
        out << '\n';
    }
}

DatasetMatrix read_matrix_csv(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw Error(ErrorKind::Schema, "empty matrix file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    DatasetMatrix m;
    m.storm_ids = split_commas(line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        const auto fields = split_commas(line);
        if (fields.size() != m.storm_ids.size())
            throw Error(ErrorKind::Shape, "row has " + std::to_string(fields.size()) + " values for " +
                                              std::to_string(m.storm_ids.size()) + " storms",
                        lineno);
        std::vector<double> row;
        for (const auto& f : fields) {
            auto v = parse_number<double>(f);
            if (!v) throw Error(ErrorKind::Parse, "invalid value '" + f + "'", lineno);
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    m.values.resize(Eigen::Index(rows.size()), Eigen::Index(m.storm_ids.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m.values(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    m.time_grid = normalized_grid(rows.size());
    return m;
}

Split train_test_split(std::size_t n, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::Config, "split ratio must lie in (0, 1)");
    if (n < 2) throw Error(ErrorKind::Config, "a split needs at least 2 items");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    // The epsilon keeps exact products such as 0.8 * 5 from flooring to 3.
    const auto n_train = std::size_t(std::floor(ratio * double(n) + 1e-9));
    Split split;
    split.train.assign(perm.begin(), perm.begin() + std::ptrdiff_t(n_train));
    split.test.assign(perm.begin() + std::ptrdiff_t(n_train), perm.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace trackfda
