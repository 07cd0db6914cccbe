#pragma once

// Best-track ingestion: RSMC Tokyo fixed-width files and a CSV interchange
// format, storm filtering, fixed-length tail windows and the p x n data
// matrices (rows are time points, columns are storms).

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace trackfda {

using Timestamp = std::chrono::sys_seconds;

/// One 6-hourly best-track observation.
struct StormRecord {
    Timestamp time{};
    int grade = 0;
    double lat = 0.0;  // degrees north
    double lon = 0.0;  // degrees east, [0, 360)
    std::optional<int> central_pressure;  // hPa
    std::optional<int> max_wind;          // knots

    // Wind radii in nautical miles. Direction codes follow the RSMC layout.
    std::optional<int> dir_longest_50kt;
    std::optional<int> longest_radius_50kt;
    std::optional<int> shortest_radius_50kt;
    std::optional<int> dir_longest_30kt;
    std::optional<int> longest_radius_30kt;
    std::optional<int> shortest_radius_30kt;

    bool landfall = false;
};

struct StormRecordSet {
    std::string storm_id;
    std::string name;
    std::vector<StormRecord> records;
};

/// Checks the per-storm invariants: non-empty, lat/lon ranges, strictly
/// increasing timestamps, no crossing of the 0/360 meridian.
void validate_storm(const StormRecordSet& storm, long line = 0);

/// Parses an RSMC best-track stream. Header lines start with 66666 and declare
/// the number of data lines that follow.
std::vector<StormRecordSet> parse_rsmc(std::istream& in);

/// Parses the CSV trajectory format (`storm_id,time,lat,lon[,grade,pressure,wind]`).
/// Rows of one storm that are out of time order are stably sorted; a message
/// per affected storm is appended to `warnings` when given.
std::vector<StormRecordSet> parse_csv(std::istream& in,
                                      std::vector<std::string>* warnings = nullptr);

/// Writes storms in the CSV trajectory format accepted by parse_csv.
void write_csv(std::ostream& out, const std::vector<StormRecordSet>& storms);

std::string format_timestamp(Timestamp t);          // 2023-08-31T18:00:00Z
Timestamp parse_timestamp(const std::string& text);  // ISO-8601 or YYYYMMDDHH

std::vector<StormRecordSet> filter_min_length(const std::vector<StormRecordSet>& storms,
                                              std::size_t min_len);

/// Fixed-length trajectory: the first `predictor_length` points form the
/// predictor segment X, the rest the response segment Y.
struct TrajectoryWindow {
    std::string storm_id;
    std::vector<double> lat;
    std::vector<double> lon;
    std::size_t predictor_length = 0;

    std::size_t total_length() const { return lat.size(); }
    std::size_t response_length() const { return lat.size() - predictor_length; }
};

/// The final `total_len` records of a storm, unmodified.
TrajectoryWindow extract_tail(const StormRecordSet& storm, std::size_t total_len,
                              std::size_t predictor_len);

std::vector<TrajectoryWindow> extract_tails(const std::vector<StormRecordSet>& storms,
                                            std::size_t total_len, std::size_t predictor_len);

/// p x n matrix of one coordinate, rows = time points, columns = storms.
struct DatasetMatrix {
    Eigen::MatrixXd values;
    std::vector<double> time_grid;
    std::vector<std::string> storm_ids;
};

/// Observation index i (1-based) of an L-point window mapped affinely onto [0, 1].
std::vector<double> normalized_grid(std::size_t total_len);
/// Normalized grid points of the predictor (first P) or response (last L-P) segment.
std::vector<double> predictor_grid(std::size_t total_len, std::size_t predictor_len);
std::vector<double> response_grid(std::size_t total_len, std::size_t predictor_len);

struct DatasetMatrices {
    DatasetMatrix lat;
    DatasetMatrix lon;
};

DatasetMatrices build_matrices(const std::vector<TrajectoryWindow>& windows);

/// Inverse of build_matrices.
std::vector<TrajectoryWindow> windows_from_matrices(const DatasetMatrices& matrices,
                                                    std::size_t predictor_len);

/// Dataset matrix CSV: first row holds storm ids, then one row per time point.
void write_matrix_csv(std::ostream& out, const DatasetMatrix& matrix);
DatasetMatrix read_matrix_csv(std::istream& in);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded uniform shuffle; the first floor(ratio * n) shuffled indices train.
/// Both index lists are returned in ascending order.
Split train_test_split(std::size_t n, double ratio, std::uint64_t seed);

}  // namespace trackfda
