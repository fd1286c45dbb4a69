#include "aircal/geo.hpp"

#include "aircal/errors.hpp"

#include <numbers>

namespace aircal {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_lonlat(LonLat p, const char* what) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) {
        throw DataError(std::string(what) + ": non-finite coordinates");
    }
    if (std::abs(p.lat) >= 89.0) {
        throw DataError(std::string(what) + ": latitude out of range (|lat| must be < 89)");
    }
    if (std::abs(p.lon) > 360.0) {
        throw DataError(std::string(what) + ": longitude out of range");
    }
}
} // namespace

Position project(LonLat p, LonLat origin) {
    check_lonlat(p, "project point");
    check_lonlat(origin, "projection origin");
    double coslat0 = std::cos(origin.lat * kDegToRad);
    return Position{kEarthRadiusM * (p.lon - origin.lon) * coslat0 * kDegToRad,
                    kEarthRadiusM * (p.lat - origin.lat) * kDegToRad};
}

LonLat unproject(Position p, LonLat origin) {
    check_lonlat(origin, "projection origin");
    double coslat0 = std::cos(origin.lat * kDegToRad);
    return LonLat{origin.lon + p.x / (kEarthRadiusM * coslat0 * kDegToRad),
                  origin.lat + p.y / (kEarthRadiusM * kDegToRad)};
}

} // namespace aircal
