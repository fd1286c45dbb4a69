#pragma once

#include <cmath>

namespace aircal {

/// Planar position in the local study-area projection, meters east/north.
struct Position {
    double x = 0.0;
    double y = 0.0;
};

struct LonLat {
    double lon = 0.0; // degrees
    double lat = 0.0; // degrees
};

struct BoundingBox {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    bool contains(Position p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
};

inline constexpr double kEarthRadiusM = 6371000.0;

/// Equirectangular projection around a local origin. City-scale extents keep
/// the distortion well below the sensor siting accuracy.
Position project(LonLat p, LonLat origin);

/// Inverse of project for the same origin.
LonLat unproject(Position p, LonLat origin);

inline double squared_distance(Position a, Position b) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

inline double distance(Position a, Position b) {
    return std::sqrt(squared_distance(a, b));
}

} // namespace aircal
