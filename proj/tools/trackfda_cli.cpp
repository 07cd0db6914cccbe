// trackfda: command-line front end for best-track ingestion, function-on-function
// forecasting, cluster grid search and the trajectory-length study.
//
// Exit codes: 0 success, 2 input/validation, 3 numerical failure, 4 unknown storm.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "trackfda/curve.hpp"
#include "trackfda/error.hpp"
#include "trackfda/experiment.hpp"
#include "trackfda/geojson.hpp"
#include "trackfda/ingest.hpp"
#include "trackfda/serialize.hpp"

namespace fs = std::filesystem;
using namespace trackfda;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitLookup = 4;

// Records everything needed to replay a command.
class RunManifest {
public:
    RunManifest(std::string command, int argc, char** argv) : command_(std::move(command)) {
        for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
    }

    void input(const std::string& path) { inputs_.push_back(path); }
    void config(Json c) { config_ = std::move(c); }
    void note(const std::string& key, Json value) { extra_[key] = std::move(value); }

    template <typename Fn>
    auto stage(const std::string& name, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(name, start);
        } else {
            auto result = fn();
            record(name, start);
            return result;
        }
    }

    void write(const fs::path& out_dir) const {
        Json j{{"tool", "trackfda"},
               {"version", TRACKFDA_VERSION},
               {"command", command_},
               {"argv", argv_},
               {"inputs", inputs_},
               {"output_dir", out_dir.string()},
               {"config", config_},
               {"timings_s", timings_}};
        for (const auto& [k, v] : extra_.items()) j[k] = v;
        std::ofstream f(out_dir / "manifest.json");
        f << j.dump(2) << '\n';
    }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point start) {
        timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    std::string command_;
    std::vector<std::string> argv_;
    std::vector<std::string> inputs_;
    Json config_ = Json::object();
    Json timings_ = Json::object();
    Json extra_ = Json::object();
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open input file '" + path + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
}

std::vector<StormRecordSet> read_storms(const std::string& path, const std::string& format) {
    auto in = open_input(path);
    if (format == "rsmc") return parse_rsmc(in);
    std::vector<std::string> warnings;
    auto storms = parse_csv(in, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return storms;
}

// "N" -> 1..N, "A..B" -> A..B.
std::pair<int, int> parse_k_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) return {1, std::stoi(text)};
        return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "invalid cluster range '" + text + "' (expected N or A..B)");
    }
}

struct ConfigFlags {
    ExperimentConfig config;
    std::string k_lat = "1..10";
    std::string k_lon = "1..10";
};

void add_model_flags(CLI::App& app, ExperimentConfig& c) {
    app.add_option("--total-len", c.total_len, "Trajectory window length L");
    app.add_option("--predictor-len", c.predictor_len, "Predictor segment length P (0 < P < L)");
    app.add_option("--k-t", c.predictor_basis_dim, "Predictor B-spline basis dimension");
    app.add_option("--k-s", c.response_basis_dim, "Response B-spline basis dimension");
    app.add_option("--basis-order", c.basis_order, "B-spline order (4 = cubic)");
    app.add_option("--lambda-b", c.ridge, "Ridge penalty on the coefficient surface");
    app.add_option("--fit-ridge", c.fit_ridge, "Ridge for curve representation");
}

void add_experiment_flags(CLI::App& app, ConfigFlags& f) {
    auto& c = f.config;
    add_model_flags(app, c);
    app.add_option("--ratio", c.ratio, "Training fraction of the random split");
    app.add_option("--seed", c.seed, "Base seed (repetition r uses seed + r)");
    app.add_option("--k-lat", f.k_lat, "Latitude cluster counts: N (1..N) or A..B");
    app.add_option("--k-lon", f.k_lon, "Longitude cluster counts: N (1..N) or A..B");
    app.add_option("--reps", c.n_repetitions, "Number of repeated random splits");
    app.add_option("--min-cluster-size", c.min_cluster_size, "Minimum training storms for a cluster-local model");
    app.add_option("--kmeans-max-iter", c.kmeans.max_iter, "Lloyd iterations per restart");
    app.add_option("--kmeans-restarts", c.kmeans.n_restarts, "k-means++ restarts");
    app.add_option("--jobs", c.jobs, "Worker threads (affects wall time only)");
}

void finalize(ConfigFlags& f) {
    std::tie(f.config.k_lat_min, f.config.k_lat_max) = parse_k_range(f.k_lat);
    std::tie(f.config.k_lon_min, f.config.k_lon_max) = parse_k_range(f.k_lon);
    f.config.validate();
}

struct LoadedDataset {
    std::vector<TrajectoryWindow> windows;
    std::size_t total_len = 0;
    std::size_t predictor_len = 0;
};

LoadedDataset load_dataset(const fs::path& dir, RunManifest& manifest) {
    const auto manifest_path = dir / "manifest.json";
    Json meta;
    {
        auto in = open_input(manifest_path.string());
        try {
            meta = Json::parse(in);
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Parse, "invalid dataset manifest '" + manifest_path.string() + "': " + e.what());
        }
    }
    DatasetMatrices m;
    {
        auto in = open_input((dir / "lat.csv").string());
        m.lat = read_matrix_csv(in);
    }
    {
        auto in = open_input((dir / "lon.csv").string());
        m.lon = read_matrix_csv(in);
    }
    manifest.input((dir / "lat.csv").string());
    manifest.input((dir / "lon.csv").string());
    LoadedDataset d;
    try {
        d.total_len = meta.at("config").at("total_len").get<std::size_t>();
        d.predictor_len = meta.at("config").at("predictor_len").get<std::size_t>();
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Schema, "dataset manifest lacks total_len/predictor_len: " + std::string(e.what()));
    }
    if (std::size_t(m.lat.values.rows()) != d.total_len)
        throw Error(ErrorKind::Shape, "dataset matrices do not have total_len rows");
    d.windows = windows_from_matrices(m, d.predictor_len);
    return d;
}

void check_layout(const ExperimentConfig& c, const LoadedDataset& d) {
    if (c.total_len != d.total_len || c.predictor_len != d.predictor_len)
        throw Error(ErrorKind::Config, "the dataset was built with --total-len " + std::to_string(d.total_len) +
                                           " --predictor-len " + std::to_string(d.predictor_len));
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input;
    std::string format = "rsmc";
    std::size_t min_len = 32;
    std::size_t total_len = 32;
    std::size_t predictor_len = 24;
    std::string out;
};

int cmd_ingest(const IngestArgs& a, RunManifest& manifest) {
    if (!(a.predictor_len > 0 && a.predictor_len < a.total_len))
        throw Error(ErrorKind::Config, "--predictor-len must be positive and below --total-len (P < L required)");
    if (a.min_len < 1) throw Error(ErrorKind::Config, "--min-len must be at least 1");
    manifest.input(a.input);
    manifest.config({{"format", a.format},
                     {"min_len", a.min_len},
                     {"total_len", a.total_len},
                     {"predictor_len", a.predictor_len}});

    const auto storms = manifest.stage("parse", [&] { return read_storms(a.input, a.format); });
    std::size_t records = 0;
    for (const auto& s : storms) records += s.records.size();
    // Windows need total_len records, so the effective threshold is the larger one.
    const auto kept = filter_min_length(storms, std::max(a.min_len, a.total_len));
    const auto windows = extract_tails(kept, a.total_len, a.predictor_len);
    if (windows.empty()) throw Error(ErrorKind::Validation, "no storm has enough records");
    const auto matrices = build_matrices(windows);

    const fs::path out(a.out);
    ensure_dir(out);
    manifest.stage("write", [&] {
        auto lat = open_output(out / "lat.csv");
        write_matrix_csv(lat, matrices.lat);
        auto lon = open_output(out / "lon.csv");
        write_matrix_csv(lon, matrices.lon);
    });
    manifest.note("counts", {{"storms", storms.size()}, {"records", records}, {"windows", windows.size()}});
    manifest.write(out);
    std::cout << "parsed " << storms.size() << " storms (" << records << " records); " << windows.size()
              << " windows of " << a.total_len << " points written to " << out.string() << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string out;
    ExperimentConfig config;
    int k_lat = 1;
    int k_lon = 1;
    bool all = false;
};

int cmd_fit(FitArgs& a, RunManifest& manifest) {
    a.config.k_lat_min = a.config.k_lat_max = a.k_lat;
    a.config.k_lon_min = a.config.k_lon_max = a.k_lon;
    const auto data = load_dataset(a.data, manifest);
    a.config.total_len = data.total_len;
    a.config.predictor_len = data.predictor_len;
    a.config.validate();
    manifest.config(to_json(a.config));

    const ForecastProblem problem(data.windows, a.config);
    Split split;
    if (a.all) {
        for (std::size_t i = 0; i < problem.size(); ++i) split.train.push_back(i);
    } else {
        split = train_test_split(problem.size(), a.config.ratio, a.config.seed);
    }
    const auto forecaster = manifest.stage(
        "fit", [&] { return fit_clustered(problem, split.train, a.k_lat, a.k_lon, a.config.seed); });

    const fs::path out(a.out);
    ensure_dir(out);
    Json split_json{{"train", Json::array()}, {"test", Json::array()}};
    for (auto i : split.train) split_json["train"].push_back(data.windows[i].storm_id);
    for (auto i : split.test) split_json["test"].push_back(data.windows[i].storm_id);
    open_output(out / "forecaster.json") << to_json(forecaster).dump() << '\n';
    open_output(out / "split.json") << split_json.dump(2) << '\n';
    manifest.note("models", {{"pair_models", forecaster.pair_models.size()},
                             {"lat_union_models", forecaster.lat_union_models.size()},
                             {"lon_union_models", forecaster.lon_union_models.size()}});
    manifest.write(out);

    std::cout << "fitted k_lat=" << a.k_lat << " k_lon=" << a.k_lon << " on " << split.train.size() << " storms ("
              << forecaster.pair_models.size() << " pair models)";
    if (!split.test.empty()) std::cout << "; test error " << evaluate_forecaster(problem, split, forecaster) << " km";
    std::cout << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string model;
    std::string data;
    std::string input;
    std::string format = "rsmc";
    std::vector<std::string> storms;
    std::string out;
};

int cmd_predict(const PredictArgs& a, RunManifest& manifest) {
    const fs::path model_dir(a.model);
    Json model_json;
    {
        auto in = open_input((model_dir / "forecaster.json").string());
        try {
            model_json = Json::parse(in);
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::Parse, std::string("invalid forecaster file: ") + e.what());
        }
    }
    manifest.input((model_dir / "forecaster.json").string());
    const auto forecaster = forecaster_from_json(model_json);
    const auto shape = forecaster.global.lat.shape;
    if (shape.total_length == 0) throw Error(ErrorKind::Schema, "forecaster lacks its training window shape");
    const std::size_t L = shape.total_length, P = shape.predictor_length;

    // Candidate storms: full tracks (from --input) or fixed windows (from --data).
    std::map<std::string, std::vector<GeoPoint>> tracks;
    std::vector<std::string> order;
    if (!a.input.empty()) {
        manifest.input(a.input);
        for (const auto& s : read_storms(a.input, a.format)) {
            std::vector<GeoPoint> pts;
            for (const auto& r : s.records) pts.push_back({r.lat, r.lon});
            if (tracks.emplace(s.storm_id, std::move(pts)).second) order.push_back(s.storm_id);
        }
    } else if (!a.data.empty()) {
        const auto data = load_dataset(a.data, manifest);
        for (const auto& w : data.windows) {
            std::vector<GeoPoint> pts;
            for (std::size_t i = 0; i < w.total_length(); ++i) pts.push_back({w.lat[i], w.lon[i]});
            if (tracks.emplace(w.storm_id, std::move(pts)).second) order.push_back(w.storm_id);
        }
    } else {
        throw Error(ErrorKind::Config, "predict needs --input or --data");
    }

    std::vector<std::string> wanted = a.storms;
    if (wanted.empty()) {
        std::set<std::string> test_ids;
        std::ifstream split_in(model_dir / "split.json");
        if (split_in) {
            const Json split = Json::parse(split_in);
            for (const auto& id : split.at("test")) test_ids.insert(id.get<std::string>());
        }
        for (const auto& id : order)
            if (test_ids.empty() || test_ids.count(id)) wanted.push_back(id);
    }

    std::vector<ForecastTrack> out_tracks;
    for (const auto& id : wanted) {
        const auto it = tracks.find(id);
        if (it == tracks.end()) {
            std::string available;
            for (const auto& known : order) available += (available.empty() ? "" : ", ") + known;
            throw Error(ErrorKind::Lookup, "unknown storm id '" + id + "'; available: " + available);
        }
        const auto& pts = it->second;
        if (pts.size() < P)
            throw Error(ErrorKind::Length, "storm " + id + " has " + std::to_string(pts.size()) +
                                               " records; at least " + std::to_string(P) + " are needed");
        const bool has_truth = pts.size() >= L;
        // With truth: the final L points. Without: the final P points as predictor.
        const std::size_t start = has_truth ? pts.size() - L : pts.size() - P;

        TrajectoryWindow w;
        w.storm_id = id;
        w.predictor_length = P;
        for (std::size_t i = start; i < start + P; ++i) {
            w.lat.push_back(pts[i].lat);
            w.lon.push_back(pts[i].lon);
        }
        // The response slots are placeholders when truth is absent; only the
        // predictor segment enters the forecast.
        for (std::size_t i = P; i < L; ++i) {
            const auto& p = has_truth ? pts[start + i] : pts[start + P - 1];
            w.lat.push_back(p.lat);
            w.lon.push_back(p.lon);
        }
        const auto fc = forecaster.forecast(w);

        ForecastTrack t;
        t.storm_id = id;
        t.observed_x.assign(pts.begin() + std::ptrdiff_t(start), pts.begin() + std::ptrdiff_t(start + P));
        if (has_truth) t.observed_y = std::vector<GeoPoint>(pts.begin() + std::ptrdiff_t(start + P), pts.end());
        t.predicted_y = fc.points;
        if (t.observed_y) std::cout << id << ": avg_dist_km " << mean_haversine(t.predicted_y, *t.observed_y) << '\n';
        else std::cout << id << ": forecast without truth\n";
        out_tracks.push_back(std::move(t));
    }

    const fs::path out(a.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    open_output(out) << forecast_geojson(out_tracks).dump(2) << '\n';
    manifest.note("storms", wanted);
    if (out.has_parent_path()) manifest.write(out.parent_path());
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_grid(const std::string& data_dir, const std::string& out_dir, ConfigFlags& f, RunManifest& manifest) {
    const auto data = load_dataset(data_dir, manifest);
    f.config.total_len = data.total_len;
    f.config.predictor_len = data.predictor_len;
    finalize(f);
    manifest.config(to_json(f.config));

    const ForecastProblem problem(data.windows, f.config);
    const auto report = manifest.stage("grid", [&] { return repeated_simulation(problem); });

    const fs::path out(out_dir);
    ensure_dir(out);
    {
        auto csv = open_output(out / "grid.csv");
        write_grid_csv(csv, report);
    }
    open_output(out / "report.json") << to_json(report).dump(2) << '\n';
    manifest.write(out);
    std::cout << "dataset " << report.dataset_size << " storms, " << f.config.n_repetitions
              << " repetition(s): global " << report.global_mean_km << " km; best k_lat=" << report.best_k_lat
              << " k_lon=" << report.best_k_lon << " " << report.best_km << " km\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct LengthArgs {
    std::string input;
    std::string format = "rsmc";
    std::vector<std::size_t> lengths{32, 40, 48};
    std::size_t response_len = 8;
    std::string out;
};

int cmd_length_study(const LengthArgs& a, ConfigFlags& f, RunManifest& manifest) {
    std::tie(f.config.k_lat_min, f.config.k_lat_max) = parse_k_range(f.k_lat);
    std::tie(f.config.k_lon_min, f.config.k_lon_max) = parse_k_range(f.k_lon);
    manifest.input(a.input);
    Json cfg = to_json(f.config);
    cfg["lengths"] = a.lengths;
    cfg["response_len"] = a.response_len;
    manifest.config(cfg);

    const auto storms = manifest.stage("parse", [&] { return read_storms(a.input, a.format); });
    const auto entries =
        manifest.stage("study", [&] { return length_study(storms, a.lengths, a.response_len, f.config); });

    const fs::path out(a.out);
    ensure_dir(out);
    auto csv = open_output(out / "length_study.csv");
    csv << "data_size,data_min_length,total_len,best_km,best_k_lat,best_k_lon,global_km\n";
    Json all = Json::array();
    char buf[64];
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.2f", e.report.best_km);
        csv << e.data_size << ',' << e.data_min_length << ',' << e.total_len << ',' << buf << ','
            << e.report.best_k_lat << ',' << e.report.best_k_lon << ',';
        std::snprintf(buf, sizeof buf, "%.2f", e.report.global_mean_km);
        csv << buf << '\n';
        all.push_back({{"data_size", e.data_size},
                       {"data_min_length", e.data_min_length},
                       {"total_len", e.total_len},
                       {"report", to_json(e.report)}});
        std::cout << "size " << e.data_size << " L=" << e.total_len << ": best " << e.report.best_km
                  << " km (k_lat=" << e.report.best_k_lat << ", k_lon=" << e.report.best_k_lon << ")\n";
    }
    open_output(out / "length_study.json") << all.dump(2) << '\n';
    manifest.write(out);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_export(const std::string& data_dir, const std::string& out_dir, ExperimentConfig& c, RunManifest& manifest) {
    const auto data = load_dataset(data_dir, manifest);
    c.total_len = data.total_len;
    c.predictor_len = data.predictor_len;
    manifest.config(to_json(c));
    const auto matrices = build_matrices(data.windows);
    const auto pgrid = predictor_grid(c.total_len, c.predictor_len);
    const auto basis = BasisSystem::bspline(pgrid.front(), pgrid.back(), c.predictor_basis_dim, c.basis_order);
    const fs::path out(out_dir);
    ensure_dir(out);
    for (const bool lat : {true, false}) {
        DatasetMatrix x = lat ? matrices.lat : matrices.lon;
        x.values = x.values.topRows(Eigen::Index(c.predictor_len)).eval();
        x.time_grid = pgrid;
        const auto bundle = fit_bundle(basis, pgrid, x, c.fit_ridge);
        open_output(out / (lat ? "lat_curves.json" : "lon_curves.json")) << to_json(bundle).dump() << '\n';
    }
    manifest.write(out);
    std::cout << "exported " << data.windows.size() << " predictor curves per coordinate to " << out.string() << '\n';
    return 0;
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::Singular: return kExitNumerical;
    case ErrorKind::Lookup: return kExitLookup;
    default: return kExitInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tropical-cyclone track forecasting with function-on-function regression"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", TRACKFDA_VERSION);

    const int hw = int(std::max(1u, std::thread::hardware_concurrency()));

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse best tracks and write the p x n dataset matrices");
    ingest_cmd->add_option("--input", ingest.input, "Best-track file")->required();
    ingest_cmd->add_option("--format", ingest.format, "Input format")->check(CLI::IsMember({"rsmc", "csv"}));
    ingest_cmd->add_option("--min-len", ingest.min_len, "Keep storms with at least this many records");
    ingest_cmd->add_option("--total-len", ingest.total_len, "Window length L (tail of each storm)");
    ingest_cmd->add_option("--predictor-len", ingest.predictor_len, "Predictor length P (0 < P < L)");
    ingest_cmd->add_option("--out", ingest.out, "Output directory")->required();

    FitArgs fit;
    fit.config.jobs = hw;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a (clustered) forecaster on the training split");
    fit_cmd->add_option("--data", fit.data, "Dataset directory written by ingest")->required();
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    add_model_flags(*fit_cmd, fit.config);
    fit_cmd->add_option("--ratio", fit.config.ratio, "Training fraction of the random split");
    fit_cmd->add_option("--seed", fit.config.seed, "Split and k-means seed");
    fit_cmd->add_option("--k-lat", fit.k_lat, "Latitude clusters");
    fit_cmd->add_option("--k-lon", fit.k_lon, "Longitude clusters");
    fit_cmd->add_option("--min-cluster-size", fit.config.min_cluster_size,
                        "Minimum training storms for a cluster-local model");
    fit_cmd->add_option("--kmeans-max-iter", fit.config.kmeans.max_iter, "Lloyd iterations per restart");
    fit_cmd->add_option("--kmeans-restarts", fit.config.kmeans.n_restarts, "k-means++ restarts");
    fit_cmd->add_flag("--all", fit.all, "Train on every storm (no held-out test set)");

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Forecast storms and write GeoJSON");
    predict_cmd->add_option("--model", predict.model, "Directory written by fit")->required();
    predict_cmd->add_option("--input", predict.input, "Best-track file with the storms to forecast");
    predict_cmd->add_option("--format", predict.format, "Input format")->check(CLI::IsMember({"rsmc", "csv"}));
    predict_cmd->add_option("--data", predict.data, "Dataset directory (alternative to --input)");
    predict_cmd->add_option("--storms", predict.storms, "Storm ids (default: the test split)")->delimiter(',');
    predict_cmd->add_option("--out", predict.out, "Output GeoJSON file")->required();

    ConfigFlags grid;
    grid.config.jobs = hw;
    std::string grid_data, grid_out;
    auto* grid_cmd = app.add_subcommand("grid", "Repeated-split grid search over (k_lat, k_lon)");
    grid_cmd->add_option("--data", grid_data, "Dataset directory written by ingest")->required();
    grid_cmd->add_option("--out", grid_out, "Output directory")->required();
    add_experiment_flags(*grid_cmd, grid);

    LengthArgs length;
    ConfigFlags length_flags;
    length_flags.config.jobs = hw;
    auto* length_cmd = app.add_subcommand("length-study", "Error versus window length and data size");
    length_cmd->add_option("--input", length.input, "Best-track file")->required();
    length_cmd->add_option("--format", length.format, "Input format")->check(CLI::IsMember({"rsmc", "csv"}));
    length_cmd->add_option("--lengths", length.lengths, "Total window lengths")->delimiter(',');
    length_cmd->add_option("--response-len", length.response_len, "Response length (fixed)");
    length_cmd->add_option("--out", length.out, "Output directory")->required();
    add_experiment_flags(*length_cmd, length_flags);
    length_cmd->remove_option(length_cmd->get_option("--total-len"));
    length_cmd->remove_option(length_cmd->get_option("--predictor-len"));

    ExperimentConfig export_cfg;
    std::string export_data, export_out;
    auto* export_cmd = app.add_subcommand("export", "Write predictor curve bundles as JSON");
    export_cmd->add_option("--data", export_data, "Dataset directory written by ingest")->required();
    export_cmd->add_option("--out", export_out, "Output directory")->required();
    export_cmd->add_option("--k-t", export_cfg.predictor_basis_dim, "Predictor B-spline basis dimension");
    export_cmd->add_option("--basis-order", export_cfg.basis_order, "B-spline order (4 = cubic)");
    export_cmd->add_option("--fit-ridge", export_cfg.fit_ridge, "Ridge for curve representation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (ingest_cmd->parsed()) {
            RunManifest m("ingest", argc, argv);
            return cmd_ingest(ingest, m);
        }
        if (fit_cmd->parsed()) {
            RunManifest m("fit", argc, argv);
            return cmd_fit(fit, m);
        }
        if (predict_cmd->parsed()) {
            RunManifest m("predict", argc, argv);
            return cmd_predict(predict, m);
        }
        if (grid_cmd->parsed()) {
            RunManifest m("grid", argc, argv);
            return cmd_grid(grid_data, grid_out, grid, m);
        }
        if (length_cmd->parsed()) {
            RunManifest m("length-study", argc, argv);
            return cmd_length_study(length, length_flags, m);
        }
        if (export_cmd->parsed()) {
            RunManifest m("export", argc, argv);
            return cmd_export(export_data, export_out, export_cfg, m);
        }
    } catch (const Error& e) {
        std::cerr << "trackfda: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "trackfda: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
