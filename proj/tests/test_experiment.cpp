#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "trackfda/error.hpp"
#include "trackfda/experiment.hpp"

using namespace trackfda;
using namespace trackfda::testing;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.n_repetitions = 2;
    c.k_lat_max = 3;
    c.k_lon_max = 3;
    c.kmeans.n_restarts = 3;
    return c;
}

// Storms with curved tracks and a spread of lengths, as RSMC-parsed records.
std::vector<StormRecordSet> curved_storms(int n, std::size_t min_len, std::size_t max_len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<FixtureStorm> fx;
    for (int i = 0; i < n; ++i) {
        FixtureStorm s;
        s.id = std::to_string(1000 + i);
        s.name = "N" + s.id;
        const double lat0 = 15 + 3 * u(rng), lon0 = 140 + 8 * u(rng);
        const double vlat = 0.2 + 0.1 * u(rng), vlon = -0.4 + 0.15 * u(rng), curve = 0.004 * (1 + u(rng));
        const std::size_t m = len(rng);
        for (std::size_t k = 0; k < m; ++k) {
            const double t = double(k);
            s.track.emplace_back(lat0 + vlat * t + 0.05 * u(rng), lon0 + vlon * t + curve * t * t + 0.05 * u(rng));
        }
        fx.push_back(s);
    }
    std::istringstream in(rsmc_text(fx));
    return parse_rsmc(in);
}

}  // namespace

TEST_CASE("haversine exact cases and symmetry") {
    const GeoPoint a{0, 0}, b{0, 180};
    CHECK(haversine(a, b) == std::numbers::pi * kEarthRadiusKm);
    CHECK(haversine(a, a) == 0.0);
    CHECK(haversine({37.5665, 126.9780}, {37.5665, 126.9780}) == 0.0);
    CHECK(haversine({90, 0}, {-90, 0}) == doctest::Approx(std::numbers::pi * kEarthRadiusKm).epsilon(1e-15));
    const GeoPoint seoul{37.5665, 126.9780}, tokyo{35.6762, 139.6503};
    const double d = haversine(seoul, tokyo);
    CHECK(std::abs(d - oracle::great_circle_km(seoul, tokyo)) <= 1e-6 * d);
    CHECK(d == doctest::Approx(1159).epsilon(0.01));

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lat(-90, 90), lon(0, 360);
    for (int i = 0; i < 2000; ++i) {
        const GeoPoint p{lat(rng), lon(rng)}, q{lat(rng), lon(rng)};
        const double pq = haversine(p, q);
        CHECK(pq == haversine(q, p));
        CHECK(pq >= 0.0);
        CHECK(pq <= std::numbers::pi * kEarthRadiusKm);
    }
}

TEST_CASE("trajectory error") {
    std::vector<GeoPoint> truth;
    for (int j = 0; j < 8; ++j) truth.push_back({20.0 + j, 130.0 - j});
    TrajectoryForecast same{"x", truth};
    CHECK(trajectory_error(same, truth) == 0.0);

    auto one_off = truth;
    one_off[3].lat += 1.0;
    const double d = haversine(one_off[3], truth[3]);
    CHECK(trajectory_error({"x", one_off}, truth) == doctest::Approx(d / 8).epsilon(1e-14));

    auto shifted = truth;
    double oracle_mean = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
        shifted[j].lat += 0.5;
        shifted[j].lon += 0.7;
        oracle_mean += oracle::great_circle_km(shifted[j], truth[j]) / 8;
    }
    CHECK(trajectory_error({"x", shifted}, truth) == doctest::Approx(oracle_mean).epsilon(1e-9));

    truth.pop_back();
    CHECK_THROWS_AS(trajectory_error(same, truth), Error);
}

TEST_CASE("config validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.predictor_len = 32;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.ratio = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.k_lat_min = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("grid cell (1,1) equals the global evaluation bit for bit") {
    const SyntheticWorld w;
    const auto regime = w.random_regime(20, 135, 3.0, 2);
    const auto windows = w.windows({regime}, 120, 0.3, 3);
    const ForecastProblem problem(windows, small_config());
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto split = train_test_split(problem.size(), 0.8, seed);
        const auto grid = grid_search(problem, split, seed);
        CHECK(grid.cells_km(0, 0) == evaluate_global(problem, split));
        CHECK(grid.global_km == evaluate_global(problem, split));
        CHECK(evaluate_clustered(problem, split, 1, 1, seed) == grid.global_km);
    }
}

TEST_CASE("two regimes: clustering beats the global model") {
    const SyntheticWorld w;
    auto a = w.random_regime(12, 125, 3.0, 10);
    auto b = w.random_regime(32, 155, 3.0, 11);
    b.lat.beta = -a.lat.beta;
    b.lon.beta = -a.lon.beta;
    const Eigen::VectorXd flat = Eigen::VectorXd::Ones(12);
    b.lat.alpha = Eigen::VectorXd::Constant(6, 32) - b.lat.beta * w.gram() * (32 * flat);
    b.lon.alpha = Eigen::VectorXd::Constant(6, 155) - b.lon.beta * w.gram() * (155 * flat);
    const auto windows = w.windows({a, b}, 300, 0.0, 12);
    const ForecastProblem problem(windows, small_config());
    const auto split = train_test_split(problem.size(), 0.8, 42);
    const double global = evaluate_global(problem, split);
    const double clustered = evaluate_clustered(problem, split, 2, 2, 42);
    CHECK(global > 1.0);
    CHECK(clustered < 0.5 * global);
    CHECK(clustered < evaluate_clustered(problem, split, 1, 1, 42));
}

TEST_CASE("global error approaches the noise floor as n grows") {
    const SyntheticWorld w;
    const auto regime = w.random_regime(20, 135, 3.0, 5);
    auto config = small_config();
    config.ridge = 0.0;
    const auto test_windows = w.windows({regime}, 200, 0.5, 100);
    auto error_with = [&](std::size_t n) {
        auto all = w.windows({regime}, n, 0.5, 7);
        const std::size_t n_train = all.size();
        all.insert(all.end(), test_windows.begin(), test_windows.end());
        const ForecastProblem problem(all, config);
        Split split;
        for (std::size_t i = 0; i < problem.size(); ++i) (i < n_train ? split.train : split.test).push_back(i);
        return evaluate_global(problem, split);
    };
    CHECK(error_with(400) < error_with(50));
}

TEST_CASE("fallback ladder") {
    const SyntheticWorld w;
    const auto regime = w.random_regime(20, 135, 3.0, 2);
    auto windows = w.windows({regime}, 100, 0.3, 3);
    auto config = small_config();
    config.min_cluster_size = 1000;
    const ForecastProblem big(windows, config);
    const auto split = train_test_split(big.size(), 0.8, 1);
    const auto f = fit_clustered(big, split.train, 3, 3, 1);
    CHECK(f.pair_models.empty());
    CHECK(f.lat_union_models.empty());
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const auto sel = f.select(a, b);
            CHECK(sel.lat_source == ModelSource::Global);
            CHECK(sel.lon_source == ModelSource::Global);
        }
    // Every test storm falls back to the global pair, so the error matches it.
    CHECK(evaluate_forecaster(big, split, f) == doctest::Approx(evaluate_global(big, split)).epsilon(1e-12));

    config.min_cluster_size = 15;
    const ForecastProblem mid(windows, config);
    const auto g = fit_clustered(mid, split.train, 2, 6, 1);
    std::map<std::pair<int, int>, int> counts;
    for (std::size_t i = 0; i < split.train.size(); ++i) counts[{g.lat_clusters.labels[i], g.lon_clusters.labels[i]}]++;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 6; ++b) {
            const auto sel = g.select(a, b);
            const int n = counts.count({a, b}) ? counts[{a, b}] : 0;
            CHECK((sel.lat_source == ModelSource::Pair) == (n >= 15));
            if (n < 15) {
                int lat_union = 0;
                for (int bb = 0; bb < 6; ++bb) lat_union += counts.count({a, bb}) ? counts[{a, bb}] : 0;
                CHECK((sel.lat_source == ModelSource::ClusterUnion) == (lat_union >= 15));
            }
        }
}

TEST_CASE("repeated simulation: determinism, reps, jobs and summary") {
    const SyntheticWorld w;
    const auto windows = w.windows({w.random_regime(15, 130, 3.0, 1), w.random_regime(28, 150, 3.0, 2)}, 160, 0.3, 4);
    auto config = small_config();
    const ForecastProblem p1(windows, config);
    const auto r1 = repeated_simulation(p1);
    const auto r1b = repeated_simulation(p1);
    CHECK(r1.mean_km == r1b.mean_km);
    CHECK(r1.mean_km.rows() == 3);
    CHECK(r1.mean_km.cols() == 3);
    CHECK((r1.mean_km.array() >= 0).all());
    CHECK((r1.std_km.array() >= 0).all());
    CHECK(r1.best_km == r1.mean_km.minCoeff());
    CHECK(r1.mean_km(r1.best_k_lon - 1, r1.best_k_lat - 1) == r1.best_km);
    CHECK(r1.dataset_size == 160);
    REQUIRE(r1.repetitions.size() == 2);
    for (const auto& rep : r1.repetitions) CHECK(rep.cells_km(0, 0) == rep.global_km);

    config.jobs = 4;
    const auto r4 = repeated_simulation(ForecastProblem(windows, config));
    CHECK(r4.mean_km == r1.mean_km);
    CHECK(r4.global_mean_km == r1.global_mean_km);

    config.jobs = 1;
    config.n_repetitions = 1;
    const ForecastProblem single(windows, config);
    const auto r = repeated_simulation(single);
    const auto split = train_test_split(single.size(), config.ratio, config.seed);
    const auto g = grid_search(single, split, config.seed);
    CHECK(r.mean_km == g.cells_km);
    CHECK(r.global_mean_km == g.global_km);
    CHECK((r.std_km.array() == 0).all());

    // Two identical repetitions: std exactly zero.
    const auto same = summarize(config, 160, {g, g});
    CHECK((same.std_km.array() == 0).all());
    CHECK(same.mean_km == g.cells_km);
}

TEST_CASE("summary ties go to the smallest pair") {
    ExperimentConfig c;
    c.k_lat_max = 2;
    c.k_lon_max = 2;
    GridResult g;
    g.cells_km = Eigen::MatrixXd::Constant(2, 2, 5.0);
    g.cells_km(0, 0) = 7.0;  // (1,1) worse; (k_lat=2,k_lon=1) and (1,2) and (2,2) tie
    const auto r = summarize(c, 10, {g});
    CHECK(r.best_k_lat == 1);
    CHECK(r.best_k_lon == 2);
    CHECK(r.best_km == 5.0);
}

TEST_CASE("length study layout") {
    const auto storms = curved_storms(150, 30, 56, 9);
    auto config = small_config();
    config.n_repetitions = 1;
    config.k_lat_max = config.k_lon_max = 2;
    const auto entries = length_study(storms, {32, 40, 48}, 8, config);
    REQUIRE(entries.size() == 6);
    std::size_t n32 = 0, n40 = 0, n48 = 0;
    for (const auto& s : storms) {
        n32 += s.records.size() >= 32;
        n40 += s.records.size() >= 40;
        n48 += s.records.size() >= 48;
    }
    const std::vector<std::pair<std::size_t, std::size_t>> expect{{32, 32}, {40, 32}, {40, 40},
                                                                  {48, 32}, {48, 40}, {48, 48}};
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CHECK(entries[i].data_min_length == expect[i].first);
        CHECK(entries[i].total_len == expect[i].second);
        CHECK(entries[i].report.config.predictor_len == entries[i].total_len - 8);
        const auto size = expect[i].first == 32 ? n32 : expect[i].first == 40 ? n40 : n48;
        CHECK(entries[i].data_size == size);
        CHECK(entries[i].report.best_km > 0);
    }
}

TEST_CASE("forecaster forecast agrees with the evaluation path") {
    const SyntheticWorld w;
    const auto windows = w.windows({w.random_regime(15, 130, 3.0, 1), w.random_regime(28, 150, 3.0, 2)}, 120, 0.3, 4);
    const ForecastProblem p(windows, small_config());
    const auto split = train_test_split(p.size(), 0.8, 3);
    const auto f = fit_clustered(p, split.train, 2, 2, 3);
    double total = 0.0;
    for (auto i : split.test) total += trajectory_error(f.forecast(windows[i]), p.truth(i));
    CHECK(total / double(split.test.size()) ==
          doctest::Approx(evaluate_forecaster(p, split, f)).epsilon(1e-9));
}
