#include "trackfda/geojson.hpp"

namespace trackfda {

namespace {

nlohmann::json line_string(const std::vector<GeoPoint>& points) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : points) coords.push_back({p.lon, p.lat});
    return {{"type", "LineString"}, {"coordinates", coords}};
}

}  // namespace

nlohmann::json forecast_geojson(const std::vector<ForecastTrack>& tracks) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& t : tracks) {
        std::optional<double> error;
        if (t.observed_y) error = mean_haversine(t.predicted_y, *t.observed_y);
        auto add = [&](const char* role, const std::vector<GeoPoint>& points) {
            nlohmann::json props{{"storm_id", t.storm_id}, {"role", role}};
            if (error) props["avg_dist_km"] = *error;
            features.push_back({{"type", "Feature"}, {"properties", props}, {"geometry", line_string(points)}});
        };
        add("observed_x", t.observed_x);
        if (t.observed_y) add("observed_y", *t.observed_y);
        add("predicted_y", t.predicted_y);
    }
    return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace trackfda
