// SPDX-License-Identifier: Apache-2.0
#include "hoe/geometry.hpp"

#include "hoe/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hoe {

double wrap_degrees(double deg)
{
    double w = std::fmod(deg + 180.0, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    // fmod of a value just below a multiple of 360 can round up to 360.
    if (w >= 360.0) {
        w -= 360.0;
    }
    return w - 180.0;
}

void MicGeometry::validate() const
{
    if (mics.size() < 2) {
        throw ConfigError("geometry: at least two microphones are required");
    }
    for (std::size_t m = 0; m < mics.size(); ++m) {
        const auto& mic = mics[m];
        if (!(mic.distance_m > 0.0)) {
            throw ConfigError("geometry: microphone " + std::to_string(m) + " has non-positive distance");
        }
        if (!(mic.azimuth_deg >= -180.0 && mic.azimuth_deg < 180.0)) {
            throw ConfigError("geometry: microphone " + std::to_string(m) + " azimuth outside [-180, 180)");
        }
    }
}

MicGeometry geometry_from_positions(std::span<const Point3> mics, const Point3& talker)
{
    constexpr double kRadToDeg = 180.0 / std::numbers::pi;
    MicGeometry g;
    for (const auto& p : mics) {
        const double dx = p.x - talker.x;
        const double dy = p.y - talker.y;
        const double dz = p.z - talker.z;
        const double horizontal = std::hypot(dx, dy);
        Microphone mic;
        mic.azimuth_deg = wrap_degrees(std::atan2(dy, dx) * kRadToDeg);
        mic.elevation_deg = std::atan2(dz, horizontal) * kRadToDeg;
        mic.distance_m = std::sqrt(dx * dx + dy * dy + dz * dz);
        g.mics.push_back(mic);
    }
    return g;
}

}  // namespace hoe
