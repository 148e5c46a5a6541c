// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace hoe {

// Wraps an angle in degrees to [-180, 180).
double wrap_degrees(double deg);

// Microphone placement relative to the talker's mouth. Azimuth is measured
// in the horizontal plane from the scene's 0-degree reference axis,
// counter-clockwise positive.
struct Microphone {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double distance_m = 1.0;
    double gain_offset_db = 0.0;
};

struct MicGeometry {
    std::vector<Microphone> mics;

    std::size_t size() const { return mics.size(); }
    // Throws ConfigError: needs >= 2 mics, positive distances, azimuths in [-180, 180).
    void validate() const;
};

struct Point3 {
    double x = 0.0;  // towards the 0-degree reference direction
    double y = 0.0;  // towards +90 degrees
    double z = 0.0;  // up
};

MicGeometry geometry_from_positions(std::span<const Point3> mics, const Point3& talker);

}  // namespace hoe
