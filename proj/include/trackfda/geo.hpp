#pragma once

#include <span>

namespace trackfda {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
    double lat = 0.0;  // degrees
    double lon = 0.0;  // degrees

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Great-circle distance in km on a sphere of radius 6371 km (haversine form).
double haversine(const GeoPoint& a, const GeoPoint& b);

/// Mean of index-aligned haversine distances. Throws a shape error when the
/// lengths differ or are zero.
double mean_haversine(std::span<const GeoPoint> predicted, std::span<const GeoPoint> truth);

}  // namespace trackfda
