#include "trackfda/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "trackfda/error.hpp"

namespace trackfda {

double haversine(const GeoPoint& a, const GeoPoint& b) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double phi1 = a.lat * rad;
    const double phi2 = b.lat * rad;
    const double dphi = phi2 - phi1;
    const double dlambda = (b.lon - a.lon) * rad;
    const double s1 = std::sin(0.5 * dphi);
    const double s2 = std::sin(0.5 * dlambda);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double mean_haversine(std::span<const GeoPoint> predicted, std::span<const GeoPoint> truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw Error(ErrorKind::Shape, "forecast has " + std::to_string(predicted.size()) + " points, truth has " +
                                          std::to_string(truth.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += haversine(predicted[i], truth[i]);
    return sum / double(predicted.size());
}

}  // namespace trackfda
