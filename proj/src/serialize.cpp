#include "trackfda/serialize.hpp"

#include <cstdio>
#include <ostream>

#include "trackfda/error.hpp"

namespace trackfda {

namespace {

template <typename Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("invalid ") + what + " document: " + e.what());
    }
}

Json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

const char* kind_name(BasisKind kind) { return kind == BasisKind::BSpline ? "bspline" : "fourier"; }

Json shape_to_json(const WindowShape& s) {
    return {{"total_len", s.total_length}, {"predictor_len", s.predictor_length}, {"time_normalization", "unit"}};
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(std::size_t(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    return guarded("matrix", [&] {
        const auto rows = j.at("rows").get<Eigen::Index>();
        const auto cols = j.at("cols").get<Eigen::Index>();
        const auto data = j.at("data").get<std::vector<double>>();
        if (rows < 0 || cols < 0 || Eigen::Index(data.size()) != rows * cols)
            throw Error(ErrorKind::Shape, "matrix data length does not match its dimensions");
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[std::size_t(i * cols + c)];
        return m;
    });
}

Json to_json(const BasisSystem& b) {
    Json j{{"kind", kind_name(b.kind())}, {"dimension", b.dimension()}, {"domain", {b.lo(), b.hi()}}};
    if (b.kind() == BasisKind::BSpline) {
        j["order"] = b.order();
        j["interior_knots"] = b.interior_knots();
    } else {
        j["period"] = b.period();
    }
    return j;
}

BasisSystem basis_from_json(const Json& j) {
    return guarded("basis", [&] {
        const auto kind = j.at("kind").get<std::string>();
        const auto domain = j.at("domain").get<std::vector<double>>();
        if (domain.size() != 2) throw Error(ErrorKind::Schema, "basis domain must have two entries");
        if (kind == "bspline") {
            auto b = BasisSystem::bspline_with_knots(domain[0], domain[1], j.at("order").get<int>(),
                                                     j.at("interior_knots").get<std::vector<double>>());
            if (j.contains("dimension") && j["dimension"].get<int>() != b.dimension())
                throw Error(ErrorKind::Schema, "B-spline dimension disagrees with its knots");
            return b;
        }
        if (kind == "fourier")
            return BasisSystem::fourier(domain[0], domain[1], j.at("dimension").get<int>(), j.at("period").get<double>());
        throw Error(ErrorKind::Schema, "unknown basis kind '" + kind + "'");
    });
}

Json to_json(const CurveBundle& bundle) {
    return {{"type", "curve_bundle"},
            {"basis", to_json(bundle.basis)},
            {"coefficients", matrix_to_json(bundle.coefficients)},
            {"ids", bundle.ids}};
}

CurveBundle curve_bundle_from_json(const Json& j) {
    return guarded("curve bundle", [&] {
        CurveBundle b{basis_from_json(j.at("basis")), matrix_from_json(j.at("coefficients")),
                      j.at("ids").get<std::vector<std::string>>()};
        if (b.coefficients.rows() != b.basis.dimension() || b.coefficients.cols() != Eigen::Index(b.ids.size()))
            throw Error(ErrorKind::Shape, "curve bundle dimensions are inconsistent");
        return b;
    });
}

Json to_json(const FoFModel& m) {
    return {{"type", "fof_model"},
            {"predictor_basis", to_json(m.predictor_basis)},
            {"response_basis", to_json(m.response_basis)},
            {"alpha", vector_to_json(m.alpha)},
            {"beta", matrix_to_json(m.beta)},
            {"predictor_gram", matrix_to_json(m.predictor_gram)},
            {"ridge", m.ridge},
            {"training", shape_to_json(m.shape)}};
}

FoFModel fof_model_from_json(const Json& j) {
    return guarded("regression model", [&] {
        FoFModel m{basis_from_json(j.at("predictor_basis")),
                   basis_from_json(j.at("response_basis")),
                   vector_from_json(j.at("alpha")),
                   matrix_from_json(j.at("beta")),
                   matrix_from_json(j.at("predictor_gram")),
                   j.at("ridge").get<double>(),
                   {}};
        if (j.contains("training")) {
            m.shape.total_length = j["training"].at("total_len").get<std::size_t>();
            m.shape.predictor_length = j["training"].at("predictor_len").get<std::size_t>();
        }
        const auto Ks = m.response_basis.dimension();
        const auto Kt = m.predictor_basis.dimension();
        if (m.alpha.size() != Ks || m.beta.rows() != Ks || m.beta.cols() != Kt || m.predictor_gram.rows() != Kt ||
            m.predictor_gram.cols() != Kt)
            throw Error(ErrorKind::Shape, "regression model dimensions are inconsistent with its bases");
        return m;
    });
}

Json to_json(const KMeansModel& m) {
    return {{"type", "kmeans_model"},  {"k", m.k},
            {"P", m.dimension()},      {"seed", m.seed},
            {"centroids", matrix_to_json(m.centroids)}, {"inertia", m.inertia},
            {"iterations_run", m.iterations_run}};
}

KMeansModel kmeans_model_from_json(const Json& j) {
    return guarded("k-means model", [&] {
        KMeansModel m;
        m.k = j.at("k").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.centroids = matrix_from_json(j.at("centroids"));
        m.inertia = j.at("inertia").get<double>();
        m.iterations_run = j.value("iterations_run", 0);
        if (m.centroids.rows() != m.k || m.centroids.cols() != j.at("P").get<Eigen::Index>())
            throw Error(ErrorKind::Shape, "k-means centroid matrix does not match k and P");
        return m;
    });
}

Json to_json(const ExperimentConfig& c) {
    return {{"total_len", c.total_len},
            {"predictor_len", c.predictor_len},
            {"ratio", c.ratio},
            {"seed", c.seed},
            {"k_t", c.predictor_basis_dim},
            {"k_s", c.response_basis_dim},
            {"basis_order", c.basis_order},
            {"lambda_b", c.ridge},
            {"fit_ridge", c.fit_ridge},
            {"k_lat", {c.k_lat_min, c.k_lat_max}},
            {"k_lon", {c.k_lon_min, c.k_lon_max}},
            {"n_repetitions", c.n_repetitions},
            {"min_cluster_size", c.min_cluster_size},
            {"kmeans_max_iter", c.kmeans.max_iter},
            {"kmeans_restarts", c.kmeans.n_restarts}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    return guarded("experiment configuration", [&] {
        ExperimentConfig c;
        c.total_len = j.at("total_len").get<std::size_t>();
        c.predictor_len = j.at("predictor_len").get<std::size_t>();
        c.ratio = j.at("ratio").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.predictor_basis_dim = j.at("k_t").get<int>();
        c.response_basis_dim = j.at("k_s").get<int>();
        c.basis_order = j.at("basis_order").get<int>();
        c.ridge = j.at("lambda_b").get<double>();
        c.fit_ridge = j.at("fit_ridge").get<double>();
        const auto lat = j.at("k_lat").get<std::vector<int>>();
        const auto lon = j.at("k_lon").get<std::vector<int>>();
        if (lat.size() != 2 || lon.size() != 2) throw Error(ErrorKind::Schema, "cluster ranges need two entries");
        c.k_lat_min = lat[0];
        c.k_lat_max = lat[1];
        c.k_lon_min = lon[0];
        c.k_lon_max = lon[1];
        c.n_repetitions = j.at("n_repetitions").get<int>();
        c.min_cluster_size = j.at("min_cluster_size").get<std::size_t>();
        c.kmeans.max_iter = j.at("kmeans_max_iter").get<int>();
        c.kmeans.n_restarts = j.at("kmeans_restarts").get<int>();
        return c;
    });
}

Json to_json(const ClusteredForecaster& f) {
    Json pairs = Json::array();
    for (const auto& [key, models] : f.pair_models)
        pairs.push_back({{"lat_cluster", key.first},
                         {"lon_cluster", key.second},
                         {"lat_model", to_json(models.lat)},
                         {"lon_model", to_json(models.lon)}});
    Json lat_union = Json::array(), lon_union = Json::array();
    for (const auto& [c, m] : f.lat_union_models) lat_union.push_back({{"cluster", c}, {"model", to_json(m)}});
    for (const auto& [c, m] : f.lon_union_models) lon_union.push_back({{"cluster", c}, {"model", to_json(m)}});
    return {{"type", "clustered_forecaster"},
            {"lat_clusters", to_json(f.lat_clusters)},
            {"lon_clusters", to_json(f.lon_clusters)},
            {"global_lat", to_json(f.global.lat)},
            {"global_lon", to_json(f.global.lon)},
            {"pair_models", pairs},
            {"lat_union_models", lat_union},
            {"lon_union_models", lon_union},
            {"min_cluster_size", f.min_cluster_size},
            {"fit_ridge", f.fit_ridge}};
}

ClusteredForecaster forecaster_from_json(const Json& j) {
    return guarded("forecaster", [&] {
        ClusteredForecaster f;
        f.lat_clusters = kmeans_model_from_json(j.at("lat_clusters"));
        f.lon_clusters = kmeans_model_from_json(j.at("lon_clusters"));
        f.global = {fof_model_from_json(j.at("global_lat")), fof_model_from_json(j.at("global_lon"))};
        for (const auto& p : j.at("pair_models"))
            f.pair_models.emplace(std::pair{p.at("lat_cluster").get<int>(), p.at("lon_cluster").get<int>()},
                                  CoordinateModels{fof_model_from_json(p.at("lat_model")),
                                                   fof_model_from_json(p.at("lon_model"))});
        for (const auto& u : j.at("lat_union_models"))
            f.lat_union_models.emplace(u.at("cluster").get<int>(), fof_model_from_json(u.at("model")));
        for (const auto& u : j.at("lon_union_models"))
            f.lon_union_models.emplace(u.at("cluster").get<int>(), fof_model_from_json(u.at("model")));
        f.min_cluster_size = j.at("min_cluster_size").get<std::size_t>();
        f.fit_ridge = j.at("fit_ridge").get<double>();
        return f;
    });
}

Json to_json(const ExperimentReport& r) {
    Json reps = Json::array();
    for (const auto& rep : r.repetitions)
        reps.push_back({{"seed", rep.seed}, {"global_km", rep.global_km}, {"cells_km", matrix_to_json(rep.cells_km)}});
    return {{"type", "experiment_report"},
            {"config", to_json(r.config)},
            {"dataset_size", r.dataset_size},
            {"k_lat_values", r.k_lat_values},
            {"k_lon_values", r.k_lon_values},
            {"table_layout", "rows=k_lon, cols=k_lat"},
            {"mean_km", matrix_to_json(r.mean_km)},
            {"std_km", matrix_to_json(r.std_km)},
            {"best", {{"k_lat", r.best_k_lat}, {"k_lon", r.best_k_lon}, {"km", r.best_km}}},
            {"global", {{"mean_km", r.global_mean_km}, {"std_km", r.global_std_km}}},
            {"repetitions", reps}};
}

void write_grid_csv(std::ostream& out, const ExperimentReport& r) {
    out << "lon\\lat";
    for (int k : r.k_lat_values) out << ",k=" << k;
    out << '\n';
    char buf[32];
    for (std::size_t b = 0; b < r.k_lon_values.size(); ++b) {
        out << "k=" << r.k_lon_values[b];
        for (std::size_t a = 0; a < r.k_lat_values.size(); ++a) {
            std::snprintf(buf, sizeof buf, "%.2f", r.mean_km(Eigen::Index(b), Eigen::Index(a)));
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace trackfda
