#pragma once

// Evaluation harness: global and cluster-pair-local forecasting, the
// (k_lat, k_lon) grid, repeated random splits and the trajectory-length study.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "trackfda/basis.hpp"
#include "trackfda/geo.hpp"
#include "trackfda/ingest.hpp"
#include "trackfda/kmeans.hpp"
#include "trackfda/regression.hpp"

namespace trackfda {

struct ExperimentConfig {
    std::size_t total_len = 32;
    std::size_t predictor_len = 24;
    double ratio = 0.8;
    std::uint64_t seed = 42;
    int predictor_basis_dim = 12;  // K_t
    int response_basis_dim = 6;    // K_s
    int basis_order = 4;
    double ridge = 1e-8;      // lambda_B, regression penalty on B
    double fit_ridge = 0.0;   // curve representation ridge
    int k_lat_min = 1;
    int k_lat_max = 10;
    int k_lon_min = 1;
    int k_lon_max = 10;
    int n_repetitions = 10;
    std::size_t min_cluster_size = 15;
    KMeansOptions kmeans;
    int jobs = 1;  // worker threads; never changes results

    std::size_t response_len() const { return total_len - predictor_len; }
    /// Throws a configuration error describing the first violated constraint.
    void validate() const;
};

/// Windows plus everything about them that does not depend on the split:
/// per-storm predictor coefficients, response samples and raw segments.
class ForecastProblem {
public:
    ForecastProblem(std::vector<TrajectoryWindow> windows, ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    const std::vector<TrajectoryWindow>& windows() const { return windows_; }
    std::size_t size() const { return windows_.size(); }

    const BasisSystem& predictor_basis() const { return predictor_basis_; }
    const BasisSystem& response_basis() const { return response_basis_; }
    const std::vector<double>& response_grid() const { return response_grid_; }
    const FoFEstimator& estimator() const { return estimator_; }

    /// K_t x n predictor coefficients and q x n response samples, per coordinate.
    const Eigen::MatrixXd& predictor_coefficients(bool latitude) const { return latitude ? lat_coefs_ : lon_coefs_; }
    const Eigen::MatrixXd& responses(bool latitude) const { return latitude ? lat_y_ : lon_y_; }
    /// n x P raw predictor segments, used for clustering.
    const Eigen::MatrixXd& segments(bool latitude) const { return latitude ? lat_x_ : lon_x_; }

    std::vector<GeoPoint> truth(std::size_t storm) const;

private:
    std::vector<TrajectoryWindow> windows_;
    ExperimentConfig config_;
    BasisSystem predictor_basis_;
    BasisSystem response_basis_;
    std::vector<double> response_grid_;
    FoFEstimator estimator_;
    Eigen::MatrixXd lat_coefs_, lon_coefs_, lat_y_, lon_y_, lat_x_, lon_x_;
};

/// Mean of the index-aligned haversine distances of a forecast.
double trajectory_error(const TrajectoryForecast& forecast, std::span<const GeoPoint> truth);

struct CoordinateModels {
    FoFModel lat;
    FoFModel lon;
};

/// Which model produced a cluster-pair forecast.
enum class ModelSource { Pair, ClusterUnion, Global };

/// Per-coordinate k-means over predictor segments plus regression models for
/// each sufficiently populated cluster pair. Sparse pairs fall back per
/// coordinate to the model of their whole lat (or lon) cluster, then to the
/// global model.
struct ClusteredForecaster {
    KMeansModel lat_clusters;
    KMeansModel lon_clusters;
    CoordinateModels global;
    std::map<std::pair<int, int>, CoordinateModels> pair_models;
    std::map<int, FoFModel> lat_union_models;
    std::map<int, FoFModel> lon_union_models;
    std::size_t min_cluster_size = 15;
    double fit_ridge = 0.0;

    struct Selection {
        const FoFModel* lat;
        const FoFModel* lon;
        ModelSource lat_source;
        ModelSource lon_source;
    };
    Selection select(int lat_cluster, int lon_cluster) const;

    TrajectoryForecast forecast(const TrajectoryWindow& window) const;
};

CoordinateModels fit_global(const ForecastProblem& problem, std::span<const std::size_t> train);

/// Builds the forecaster from training storms given already-fitted clusterings
/// (fitted on exactly those training storms, in the same order).
ClusteredForecaster build_forecaster(const ForecastProblem& problem, std::span<const std::size_t> train,
                                     KMeansModel lat_clusters, KMeansModel lon_clusters,
                                     const CoordinateModels& global);

/// Clusters the training segments with the given seed and builds the forecaster.
ClusteredForecaster fit_clustered(const ForecastProblem& problem, std::span<const std::size_t> train, int k_lat,
                                  int k_lon, std::uint64_t seed);

/// Mean trajectory error (km) over the test storms of the global model.
double evaluate_global(const ForecastProblem& problem, const Split& split);
double evaluate_global(const ForecastProblem& problem, const Split& split, const CoordinateModels& models);

/// Mean trajectory error (km) over the test storms with clustering seed `seed`.
double evaluate_clustered(const ForecastProblem& problem, const Split& split, int k_lat, int k_lon,
                          std::uint64_t seed);
double evaluate_forecaster(const ForecastProblem& problem, const Split& split, const ClusteredForecaster& forecaster);

/// Errors of one split: global model and every (k_lat, k_lon) cell.
struct GridResult {
    std::uint64_t seed = 0;
    double global_km = 0.0;
    Eigen::MatrixXd cells_km;  // rows = k_lon values, cols = k_lat values
};

GridResult grid_search(const ForecastProblem& problem, const Split& split, std::uint64_t seed);

struct ExperimentReport {
    ExperimentConfig config;
    std::size_t dataset_size = 0;
    std::vector<int> k_lat_values;
    std::vector<int> k_lon_values;
    Eigen::MatrixXd mean_km;  // rows = k_lon values, cols = k_lat values
    Eigen::MatrixXd std_km;
    int best_k_lat = 0;
    int best_k_lon = 0;
    double best_km = 0.0;
    double global_mean_km = 0.0;
    double global_std_km = 0.0;
    std::vector<GridResult> repetitions;
};

/// Summarises repetitions: per-cell means and population standard deviations;
/// the best cell minimises the mean (ties go to the smallest (k_lat, k_lon)).
ExperimentReport summarize(const ExperimentConfig& config, std::size_t dataset_size, std::vector<GridResult> reps);

/// Repetition r uses seed + r for both its split and its clusterings.
ExperimentReport repeated_simulation(const ForecastProblem& problem);

struct LengthStudyEntry {
    std::size_t data_min_length = 0;  // storms kept have at least this many records
    std::size_t data_size = 0;
    std::size_t total_len = 0;
    ExperimentReport report;
};

/// For each data length D in `lengths`, keeps storms with >= D records and runs
/// every L <= D from `lengths` with P = L - response_len on that subset.
std::vector<LengthStudyEntry> length_study(const std::vector<StormRecordSet>& storms,
                                           std::vector<std::size_t> lengths, std::size_t response_len,
                                           const ExperimentConfig& config);

}  // namespace trackfda
