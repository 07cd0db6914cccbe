#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace trackfda {

struct TrajectoryWindow;

struct KMeansOptions {
    int max_iter = 100;
    int n_restarts = 10;
};

/// k-means result over P-dimensional points. `centroids` is k x P.
struct KMeansModel {
    int k = 0;
    Eigen::MatrixXd centroids;
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations_run = 0;
    /// Labels of the training points under the returned centroids.
    std::vector<int> labels;
    /// Inertia after each assignment step of the winning restart.
    std::vector<double> inertia_trace;

    Eigen::Index dimension() const { return centroids.cols(); }
};

/// Lloyd's algorithm with k-means++ seeding, best of `n_restarts` by inertia.
/// Restart r draws from its own generator seeded with seed + r. `points` is
/// n x P (one point per row). Runs until no assignment changes or max_iter.
KMeansModel kmeans_fit(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

/// Nearest centroid in squared Euclidean distance, lowest index on ties.
int assign(const KMeansModel& model, const Eigen::Ref<const Eigen::VectorXd>& point);
std::vector<int> assign_all(const KMeansModel& model, const Eigen::MatrixXd& points);

/// One Lloyd step (centroid update, then reassignment) from the model's state.
/// Returns the new labels; used to verify the fixed-point property.
std::vector<int> lloyd_step(const KMeansModel& model, const Eigen::MatrixXd& points);

struct ClusterPairAssignment {
    std::string storm_id;
    int lat_cluster = 0;
    int lon_cluster = 0;

    friend bool operator==(const ClusterPairAssignment&, const ClusterPairAssignment&) = default;
};

/// Predictor segments of the windows as rows: latitude (first) or longitude.
Eigen::MatrixXd predictor_segments(const std::vector<TrajectoryWindow>& windows, bool latitude);

std::vector<ClusterPairAssignment> assign_pairs(const KMeansModel& lat_model, const KMeansModel& lon_model,
                                                const std::vector<TrajectoryWindow>& windows);

}  // namespace trackfda
