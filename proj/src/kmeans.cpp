#include "trackfda/kmeans.hpp"

#include <limits>
#include <random>

#include "trackfda/error.hpp"
#include "trackfda/ingest.hpp"

namespace trackfda {

namespace {

// Plain left-to-right sum so every caller sees identical rounding.
template <typename A, typename B>
double sq_dist(const A& a, const B& b) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double diff = a(j) - b(j);
        d += diff * diff;
    }
    return d;
}

struct Assignment {
    std::vector<int> labels;
    std::vector<double> distances;  // squared distance to the assigned centroid
    double inertia = 0.0;
};

Assignment assign_points(const Eigen::MatrixXd& centroids, const Eigen::MatrixXd& points) {
    Assignment a;
    const auto n = std::size_t(points.rows());
    a.labels.resize(n);
    a.distances.resize(n);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = sq_dist(points.row(i), centroids.row(c));
            if (d < best_d) {
                best_d = d;
                best = int(c);
            }
        }
        a.labels[std::size_t(i)] = best;
        a.distances[std::size_t(i)] = best_d;
        a.inertia += best_d;
    }
    return a;
}

// Centroids as cluster means. An empty cluster takes the point farthest from
// its own (updated) centroid among clusters with more than one member.
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(std::size_t(k), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        sums.row(labels[std::size_t(i)]) += points.row(i);
        ++counts[std::size_t(labels[std::size_t(i)])];
    }
    Eigen::MatrixXd centroids = sums;
    for (int c = 0; c < k; ++c)
        if (counts[std::size_t(c)] > 0) centroids.row(c) /= double(counts[std::size_t(c)]);

    std::vector<bool> taken(std::size_t(points.rows()), false);
    for (int c = 0; c < k; ++c) {
        if (counts[std::size_t(c)] > 0) continue;
        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < points.rows(); ++i) {
            const int owner = labels[std::size_t(i)];
            if (taken[std::size_t(i)] || counts[std::size_t(owner)] < 2) continue;
            const double d = sq_dist(points.row(i), centroids.row(owner));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) continue;
        taken[std::size_t(far)] = true;
        centroids.row(c) = points.row(far);
    }
    return centroids;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centroids(k, points.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centroids.row(0) = points.row(pick(rng));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[std::size_t(i)] = sq_dist(points.row(i), centroids.row(0));

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : d2) total += d;
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            chosen = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[std::size_t(i)];
                if (d2[std::size_t(i)] > 0.0 && acc > target) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) {  // rounding at the tail end of the cumulative sum
                for (Eigen::Index i = n - 1; i >= 0; --i)
                    if (d2[std::size_t(i)] > 0.0) {
                        chosen = i;
                        break;
                    }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.row(c) = points.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i)
            d2[std::size_t(i)] = std::min(d2[std::size_t(i)], sq_dist(points.row(i), centroids.row(c)));
    }
    return centroids;
}

KMeansModel run_once(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int max_iter) {
    std::mt19937_64 rng(seed);
    KMeansModel m;
    m.k = k;
    m.seed = seed;
    m.centroids = kmeanspp_seed(points, k, rng);
    Assignment current = assign_points(m.centroids, points);
    m.inertia_trace.push_back(current.inertia);
    for (int iter = 0; iter < max_iter; ++iter) {
        m.centroids = update_centroids(points, current.labels, k);
        Assignment next = assign_points(m.centroids, points);
        m.inertia_trace.push_back(next.inertia);
        ++m.iterations_run;
        const bool changed = next.labels != current.labels;
        current = std::move(next);
        if (!changed) break;
    }
    m.labels = std::move(current.labels);
    m.inertia = current.inertia;
    return m;
}

}  // namespace

KMeansModel kmeans_fit(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options) {
    if (k < 1) throw Error(ErrorKind::Config, "k must be at least 1");
    if (Eigen::Index(k) > points.rows())
        throw Error(ErrorKind::Config, "k = " + std::to_string(k) + " exceeds the " + std::to_string(points.rows()) +
                                           " points to cluster");
    if (points.cols() < 1) throw Error(ErrorKind::Shape, "points must have at least one coordinate");
    if (options.max_iter < 1 || options.n_restarts < 1)
        throw Error(ErrorKind::Config, "max_iter and n_restarts must be positive");

    KMeansModel best;
    for (int r = 0; r < options.n_restarts; ++r) {
        KMeansModel candidate = run_once(points, k, seed + std::uint64_t(r), options.max_iter);
        if (r == 0 || candidate.inertia < best.inertia) best = std::move(candidate);
    }
    best.seed = seed;
    return best;
}

int assign(const KMeansModel& model, const Eigen::Ref<const Eigen::VectorXd>& point) {
    if (point.size() != model.dimension())
        throw Error(ErrorKind::Shape, "segment length " + std::to_string(point.size()) + " differs from centroid length " +
                                          std::to_string(model.dimension()));
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < model.centroids.rows(); ++c) {
        const double d = sq_dist(point, model.centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = int(c);
        }
    }
    return best;
}

std::vector<int> assign_all(const KMeansModel& model, const Eigen::MatrixXd& points) {
    if (points.cols() != model.dimension())
        throw Error(ErrorKind::Shape, "segment length differs from centroid length");
    return assign_points(model.centroids, points).labels;
}

std::vector<int> lloyd_step(const KMeansModel& model, const Eigen::MatrixXd& points) {
    if (model.labels.size() != std::size_t(points.rows()))
        throw Error(ErrorKind::Shape, "model labels do not match the points");
    return assign_points(update_centroids(points, model.labels, model.k), points).labels;
}

Eigen::MatrixXd predictor_segments(const std::vector<TrajectoryWindow>& windows, bool latitude) {
    if (windows.empty()) return {};
    const std::size_t P = windows.front().predictor_length;
    Eigen::MatrixXd out(Eigen::Index(windows.size()), Eigen::Index(P));
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (w.predictor_length != P) throw Error(ErrorKind::Shape, "windows have different predictor lengths");
        const auto& series = latitude ? w.lat : w.lon;
        for (std::size_t j = 0; j < P; ++j) out(Eigen::Index(i), Eigen::Index(j)) = series[j];
    }
    return out;
}

std::vector<ClusterPairAssignment> assign_pairs(const KMeansModel& lat_model, const KMeansModel& lon_model,
                                                const std::vector<TrajectoryWindow>& windows) {
    std::vector<ClusterPairAssignment> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        if (Eigen::Index(w.predictor_length) != lat_model.dimension() ||
            Eigen::Index(w.predictor_length) != lon_model.dimension())
            throw Error(ErrorKind::Shape, "window " + w.storm_id + " predictor length does not match the cluster models");
        const Eigen::Map<const Eigen::VectorXd> lat(w.lat.data(), Eigen::Index(w.predictor_length));
        const Eigen::Map<const Eigen::VectorXd> lon(w.lon.data(), Eigen::Index(w.predictor_length));
        out.push_back({w.storm_id, assign(lat_model, lat), assign(lon_model, lon)});
    }
    return out;
}

}  // namespace trackfda
