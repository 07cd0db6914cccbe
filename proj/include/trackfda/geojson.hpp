#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trackfda/geo.hpp"

namespace trackfda {

/// Observed and predicted segments of one storm for map export.
struct ForecastTrack {
    std::string storm_id;
    std::vector<GeoPoint> observed_x;
    std::optional<std::vector<GeoPoint>> observed_y;
    std::vector<GeoPoint> predicted_y;
};

/// FeatureCollection with one LineString per segment (roles "observed_x",
/// "observed_y", "predicted_y"). Coordinates are [lon, lat] in degrees east as
/// stored. When truth is present every feature of the storm carries
/// `avg_dist_km`.
nlohmann::json forecast_geojson(const std::vector<ForecastTrack>& tracks);

}  // namespace trackfda
