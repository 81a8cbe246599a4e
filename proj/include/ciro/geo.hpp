#pragma once

#include <cmath>

namespace ciro {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoCoord {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    bool operator==(const GeoCoord&) const = default;
};

namespace detail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec3 {
    double x, y, z;
};

inline Vec3 to_unit(const GeoCoord& g) {
    double lat = deg2rad(g.lat_deg), lon = deg2rad(g.lon_deg);
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

inline GeoCoord from_unit(const Vec3& v) {
    double lat = std::atan2(v.z, std::sqrt(v.x * v.x + v.y * v.y));
    double lon = std::atan2(v.y, v.x);
    return {rad2deg(lat), rad2deg(lon)};
}

}  // namespace detail

// Haversine great-circle distance in km.
inline double great_circle_km(const GeoCoord& a, const GeoCoord& b) {
    using namespace detail;
    double lat1 = deg2rad(a.lat_deg), lat2 = deg2rad(b.lat_deg);
    double dlat = lat2 - lat1;
    double dlon = deg2rad(b.lon_deg - a.lon_deg);
    double s = std::sin(dlat / 2), t = std::sin(dlon / 2);
    double h = s * s + std::cos(lat1) * std::cos(lat2) * t * t;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

// Point at fraction f in [0,1] along the great circle from a to b.
// Coincident endpoints return a; exactly antipodal endpoints (ambiguous
// geodesic) fall back to the endpoint nearest to f.
inline GeoCoord geo_interpolate(const GeoCoord& a, const GeoCoord& b, double f) {
    using namespace detail;
    Vec3 u = to_unit(a), v = to_unit(b);
    double dot = u.x * v.x + u.y * v.y + u.z * v.z;
    if (dot > 1.0) dot = 1.0;
    if (dot < -1.0) dot = -1.0;
    double omega = std::acos(dot);
    double so = std::sin(omega);
    if (so < 1e-12) {
        if (dot > 0) return a;     // same point
        return f < 0.5 ? a : b;    // antipodal: no unique geodesic
    }
    double ca = std::sin((1.0 - f) * omega) / so;
    double cb = std::sin(f * omega) / so;
    Vec3 w{ca * u.x + cb * v.x, ca * u.y + cb * v.y, ca * u.z + cb * v.z};
    return from_unit(w);
}

}  // namespace ciro
