#include "trackfda/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"
#include "trackfda/error.hpp"

namespace trackfda {

namespace {

std::vector<int> k_range(int lo, int hi) {
    std::vector<int> out;
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(Eigen::Index(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = m.row(Eigen::Index(rows[i]));
    return out;
}

std::string cell_context(int k_lat, int k_lon) {
    return "cell (k_lat=" + std::to_string(k_lat) + ", k_lon=" + std::to_string(k_lon) + ")";
}

// Forecast for storm i of the problem from its precomputed coefficients.
std::vector<GeoPoint> forecast_points(const ForecastProblem& problem, std::size_t i, const FoFModel& lat,
                                      const FoFModel& lon) {
    const auto col = Eigen::Index(i);
    const Eigen::VectorXd lat_hat = predict_fof(lat, Eigen::VectorXd(problem.predictor_coefficients(true).col(col)),
                                                problem.response_grid());
    const Eigen::VectorXd lon_hat = predict_fof(lon, Eigen::VectorXd(problem.predictor_coefficients(false).col(col)),
                                                problem.response_grid());
    std::vector<GeoPoint> out;
    out.reserve(std::size_t(lat_hat.size()));
    for (Eigen::Index j = 0; j < lat_hat.size(); ++j) out.push_back({lat_hat(j), lon_hat(j)});
    return out;
}

double storm_error(const ForecastProblem& problem, std::size_t i, const FoFModel& lat, const FoFModel& lon) {
    const auto predicted = forecast_points(problem, i, lat, lon);
    const auto truth = problem.truth(i);
    return mean_haversine(predicted, truth);
}

void require_split(const ForecastProblem& problem, const Split& split) {
    if (split.train.empty() || split.test.empty())
        throw Error(ErrorKind::Config, "train and test sets must both be non-empty");
    for (auto i : split.train)
        if (i >= problem.size()) throw Error(ErrorKind::Shape, "train index out of range");
    for (auto i : split.test)
        if (i >= problem.size()) throw Error(ErrorKind::Shape, "test index out of range");
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
    if (!(predictor_len > 0 && predictor_len < total_len)) fail("predictor length must satisfy 0 < P < L");
    if (response_len() < 2) fail("the response segment needs at least 2 points");
    if (!(ratio > 0.0 && ratio < 1.0)) fail("ratio must lie in (0, 1)");
    if (basis_order < 1) fail("basis order must be at least 1");
    if (predictor_basis_dim < basis_order || response_basis_dim < basis_order)
        fail("basis dimensions must be at least the basis order");
    if (std::size_t(predictor_basis_dim) > predictor_len && fit_ridge == 0.0)
        fail("predictor basis dimension exceeds the predictor length");
    if (std::size_t(response_basis_dim) > response_len()) fail("response basis dimension exceeds the response length");
    if (!(ridge >= 0.0) || !(fit_ridge >= 0.0)) fail("ridge parameters must be non-negative");
    if (k_lat_min < 1 || k_lat_max < k_lat_min || k_lon_min < 1 || k_lon_max < k_lon_min)
        fail("cluster ranges must satisfy 1 <= min <= max");
    if (n_repetitions < 1) fail("n_repetitions must be at least 1");
    if (min_cluster_size < 1) fail("min_cluster_size must be at least 1");
    if (kmeans.max_iter < 1 || kmeans.n_restarts < 1) fail("k-means iterations and restarts must be positive");
    if (jobs < 1) fail("jobs must be at least 1");
}

ForecastProblem::ForecastProblem(std::vector<TrajectoryWindow> windows, ExperimentConfig config)
    : windows_(std::move(windows)),
      config_((config.validate(), config)),
      predictor_basis_(BasisSystem::bspline(0.0, double(config_.predictor_len - 1) / double(config_.total_len - 1),
                                            config_.predictor_basis_dim, config_.basis_order)),
      response_basis_(BasisSystem::bspline(double(config_.predictor_len) / double(config_.total_len - 1), 1.0,
                                           config_.response_basis_dim, config_.basis_order)),
      response_grid_(trackfda::response_grid(config_.total_len, config_.predictor_len)),
      estimator_(predictor_basis_, response_basis_, response_grid_, config_.ridge,
                 WindowShape{config_.total_len, config_.predictor_len}) {
    if (windows_.empty()) throw Error(ErrorKind::Shape, "no trajectories");
    const auto matrices = build_matrices(windows_);
    if (std::size_t(matrices.lat.values.rows()) != config_.total_len ||
        windows_.front().predictor_length != config_.predictor_len)
        throw Error(ErrorKind::Shape, "windows are " + std::to_string(matrices.lat.values.rows()) + "/" +
                                          std::to_string(windows_.front().predictor_length) +
                                          " points but the configuration expects " +
                                          std::to_string(config_.total_len) + "/" +
                                          std::to_string(config_.predictor_len));
    const auto P = Eigen::Index(config_.predictor_len);
    const auto q = Eigen::Index(config_.response_len());
    const CurveFitter fitter(predictor_basis_, predictor_grid(config_.total_len, config_.predictor_len),
                             config_.fit_ridge);
    lat_coefs_ = fitter.fit_columns(matrices.lat.values.topRows(P));
    lon_coefs_ = fitter.fit_columns(matrices.lon.values.topRows(P));
    lat_y_ = matrices.lat.values.bottomRows(q);
    lon_y_ = matrices.lon.values.bottomRows(q);
    lat_x_ = matrices.lat.values.topRows(P).transpose();
    lon_x_ = matrices.lon.values.topRows(P).transpose();
}

std::vector<GeoPoint> ForecastProblem::truth(std::size_t storm) const {
    const auto& w = windows_.at(storm);
    std::vector<GeoPoint> out;
    for (std::size_t j = w.predictor_length; j < w.total_length(); ++j) out.push_back({w.lat[j], w.lon[j]});
    return out;
}

double trajectory_error(const TrajectoryForecast& forecast, std::span<const GeoPoint> truth) {
    return mean_haversine(forecast.points, truth);
}

ClusteredForecaster::Selection ClusteredForecaster::select(int lat_cluster, int lon_cluster) const {
    if (auto it = pair_models.find({lat_cluster, lon_cluster}); it != pair_models.end())
        return {&it->second.lat, &it->second.lon, ModelSource::Pair, ModelSource::Pair};
    Selection s{&global.lat, &global.lon, ModelSource::Global, ModelSource::Global};
    if (auto it = lat_union_models.find(lat_cluster); it != lat_union_models.end()) {
        s.lat = &it->second;
        s.lat_source = ModelSource::ClusterUnion;
    }
    if (auto it = lon_union_models.find(lon_cluster); it != lon_union_models.end()) {
        s.lon = &it->second;
        s.lon_source = ModelSource::ClusterUnion;
    }
    return s;
}

TrajectoryForecast ClusteredForecaster::forecast(const TrajectoryWindow& window) const {
    const auto pairs = assign_pairs(lat_clusters, lon_clusters, {window});
    const auto chosen = select(pairs.front().lat_cluster, pairs.front().lon_cluster);
    return predict_trajectory(*chosen.lat, *chosen.lon, window, fit_ridge);
}

CoordinateModels fit_global(const ForecastProblem& problem, std::span<const std::size_t> train) {
    const auto& est = problem.estimator();
    return {est.fit(problem.predictor_coefficients(true), problem.responses(true), train),
            est.fit(problem.predictor_coefficients(false), problem.responses(false), train)};
}

ClusteredForecaster build_forecaster(const ForecastProblem& problem, std::span<const std::size_t> train,
                                     KMeansModel lat_clusters, KMeansModel lon_clusters,
                                     const CoordinateModels& global) {
    if (lat_clusters.labels.size() != train.size() || lon_clusters.labels.size() != train.size())
        throw Error(ErrorKind::Shape, "cluster labels do not match the training set");
    const auto& est = problem.estimator();
    const auto min_size = problem.config().min_cluster_size;

    std::map<std::pair<int, int>, std::vector<std::size_t>> pair_members;
    std::map<int, std::vector<std::size_t>> lat_members, lon_members;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const int a = lat_clusters.labels[i];
        const int b = lon_clusters.labels[i];
        pair_members[{a, b}].push_back(train[i]);
        lat_members[a].push_back(train[i]);
        lon_members[b].push_back(train[i]);
    }

    ClusteredForecaster f;
    f.min_cluster_size = min_size;
    f.fit_ridge = problem.config().fit_ridge;
    f.global = global;
    for (const auto& [key, members] : pair_members) {
        if (members.size() < min_size) continue;
        f.pair_models.emplace(key, CoordinateModels{
                                       est.fit(problem.predictor_coefficients(true), problem.responses(true), members),
                                       est.fit(problem.predictor_coefficients(false), problem.responses(false), members)});
    }
    for (const auto& [c, members] : lat_members)
        if (members.size() >= min_size)
            f.lat_union_models.emplace(c, est.fit(problem.predictor_coefficients(true), problem.responses(true), members));
    for (const auto& [c, members] : lon_members)
        if (members.size() >= min_size)
            f.lon_union_models.emplace(c,
                                       est.fit(problem.predictor_coefficients(false), problem.responses(false), members));
    f.lat_clusters = std::move(lat_clusters);
    f.lon_clusters = std::move(lon_clusters);
    return f;
}

ClusteredForecaster fit_clustered(const ForecastProblem& problem, std::span<const std::size_t> train, int k_lat,
                                  int k_lon, std::uint64_t seed) {
    const auto& opts = problem.config().kmeans;
    auto lat = kmeans_fit(select_rows(problem.segments(true), train), k_lat, seed, opts);
    auto lon = kmeans_fit(select_rows(problem.segments(false), train), k_lon, seed, opts);
    return build_forecaster(problem, train, std::move(lat), std::move(lon), fit_global(problem, train));
}

double evaluate_global(const ForecastProblem& problem, const Split& split, const CoordinateModels& models) {
    require_split(problem, split);
    double sum = 0.0;
    for (auto i : split.test) sum += storm_error(problem, i, models.lat, models.lon);
    return sum / double(split.test.size());
}

double evaluate_global(const ForecastProblem& problem, const Split& split) {
    require_split(problem, split);
    return evaluate_global(problem, split, fit_global(problem, split.train));
}

double evaluate_forecaster(const ForecastProblem& problem, const Split& split, const ClusteredForecaster& forecaster) {
    require_split(problem, split);
    double sum = 0.0;
    for (auto i : split.test) {
        const auto row = Eigen::Index(i);
        const int a = assign(forecaster.lat_clusters, problem.segments(true).row(row).transpose());
        const int b = assign(forecaster.lon_clusters, problem.segments(false).row(row).transpose());
        const auto chosen = forecaster.select(a, b);
        sum += storm_error(problem, i, *chosen.lat, *chosen.lon);
    }
    return sum / double(split.test.size());
}

double evaluate_clustered(const ForecastProblem& problem, const Split& split, int k_lat, int k_lon,
                          std::uint64_t seed) {
    require_split(problem, split);
    return evaluate_forecaster(problem, split, fit_clustered(problem, split.train, k_lat, k_lon, seed));
}

GridResult grid_search(const ForecastProblem& problem, const Split& split, std::uint64_t seed) {
    require_split(problem, split);
    const auto& cfg = problem.config();
    const auto lat_ks = k_range(cfg.k_lat_min, cfg.k_lat_max);
    const auto lon_ks = k_range(cfg.k_lon_min, cfg.k_lon_max);

    GridResult result;
    result.seed = seed;
    const CoordinateModels global = fit_global(problem, split.train);
    result.global_km = evaluate_global(problem, split, global);

    // One clustering per (coordinate, k), shared by every cell of the grid.
    const Eigen::MatrixXd lat_x = select_rows(problem.segments(true), split.train);
    const Eigen::MatrixXd lon_x = select_rows(problem.segments(false), split.train);
    std::vector<KMeansModel> lat_models(lat_ks.size()), lon_models(lon_ks.size());
    detail::parallel_for(lat_ks.size() + lon_ks.size(), cfg.jobs, [&](std::size_t i) {
        if (i < lat_ks.size())
            lat_models[i] = kmeans_fit(lat_x, lat_ks[i], seed, cfg.kmeans);
        else
            lon_models[i - lat_ks.size()] = kmeans_fit(lon_x, lon_ks[i - lat_ks.size()], seed, cfg.kmeans);
    });

    result.cells_km.resize(Eigen::Index(lon_ks.size()), Eigen::Index(lat_ks.size()));
    detail::parallel_for(lat_ks.size() * lon_ks.size(), cfg.jobs, [&](std::size_t cell) {
        const std::size_t a = cell / lon_ks.size();
        const std::size_t b = cell % lon_ks.size();
        try {
            const auto forecaster = build_forecaster(problem, split.train, lat_models[a], lon_models[b], global);
            result.cells_km(Eigen::Index(b), Eigen::Index(a)) = evaluate_forecaster(problem, split, forecaster);
        } catch (const Error& e) {
            throw Error(e.kind(), cell_context(lat_ks[a], lon_ks[b]) + ": " + e.what());
        }
    });
    return result;
}

ExperimentReport summarize(const ExperimentConfig& config, std::size_t dataset_size, std::vector<GridResult> reps) {
    if (reps.empty()) throw Error(ErrorKind::Config, "no repetitions to summarize");
    ExperimentReport r;
    r.config = config;
    r.dataset_size = dataset_size;
    r.k_lat_values = k_range(config.k_lat_min, config.k_lat_max);
    r.k_lon_values = k_range(config.k_lon_min, config.k_lon_max);
    const auto rows = Eigen::Index(r.k_lon_values.size());
    const auto cols = Eigen::Index(r.k_lat_values.size());
    for (const auto& rep : reps)
        if (rep.cells_km.rows() != rows || rep.cells_km.cols() != cols)
            throw Error(ErrorKind::Shape, "repetition grid does not match the configured cluster ranges");

    const double n = double(reps.size());
    r.mean_km = Eigen::MatrixXd::Zero(rows, cols);
    double global_sum = 0.0;
    for (const auto& rep : reps) {
        r.mean_km += rep.cells_km;
        global_sum += rep.global_km;
    }
    r.mean_km /= n;
    r.global_mean_km = global_sum / n;

    r.std_km = Eigen::MatrixXd::Zero(rows, cols);
    double global_var = 0.0;
    for (const auto& rep : reps) {
        r.std_km += (rep.cells_km - r.mean_km).cwiseAbs2();
        global_var += (rep.global_km - r.global_mean_km) * (rep.global_km - r.global_mean_km);
    }
    r.std_km = (r.std_km / n).cwiseSqrt();
    r.global_std_km = std::sqrt(global_var / n);

    // Lexicographic scan over (k_lat, k_lon) with strict improvement keeps the
    // smallest pair on ties.
    r.best_km = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < cols; ++a)
        for (Eigen::Index b = 0; b < rows; ++b)
            if (r.mean_km(b, a) < r.best_km) {
                r.best_km = r.mean_km(b, a);
                r.best_k_lat = r.k_lat_values[std::size_t(a)];
                r.best_k_lon = r.k_lon_values[std::size_t(b)];
            }
    r.repetitions = std::move(reps);
    return r;
}

ExperimentReport repeated_simulation(const ForecastProblem& problem) {
    const auto& cfg = problem.config();
    std::vector<GridResult> reps;
    for (int rep = 0; rep < cfg.n_repetitions; ++rep) {
        const std::uint64_t seed = cfg.seed + std::uint64_t(rep);
        const Split split = train_test_split(problem.size(), cfg.ratio, seed);
        try {
            reps.push_back(grid_search(problem, split, seed));
        } catch (const Error& e) {
            throw Error(e.kind(), "repetition " + std::to_string(rep) + ": " + e.what());
        }
    }
    return summarize(cfg, problem.size(), std::move(reps));
}

std::vector<LengthStudyEntry> length_study(const std::vector<StormRecordSet>& storms,
                                           std::vector<std::size_t> lengths, std::size_t response_len,
                                           const ExperimentConfig& config) {
    if (lengths.empty()) throw Error(ErrorKind::Config, "no lengths given");
    std::sort(lengths.begin(), lengths.end());
    lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
    for (auto L : lengths)
        if (L <= response_len) throw Error(ErrorKind::Config, "each length must exceed the response length");

    std::vector<LengthStudyEntry> out;
    for (auto data_len : lengths) {
        const auto subset = filter_min_length(storms, data_len);
        for (auto L : lengths) {
            if (L > data_len) break;
            ExperimentConfig cfg = config;
            cfg.total_len = L;
            cfg.predictor_len = L - response_len;
            const ForecastProblem problem(extract_tails(subset, L, cfg.predictor_len), cfg);
            out.push_back({data_len, subset.size(), L, repeated_simulation(problem)});
        }
    }
    return out;
}

}  // namespace trackfda
