// SPDX-License-Identifier: Apache-2.0
#include "hoe/bands.hpp"

#include <array>
#include <cmath>

namespace hoe {

namespace {

constexpr std::array<double, 33> kNominalSeries = {
    10,   12.5, 16,   20,   25,   31.5,  40,    50,    63,    80,    100,
    125,  160,  200,  250,  315,  400,   500,   630,   800,   1000,  1250,
    1600, 2000, 2500, 3150, 4000, 5000,  6300,  8000,  10000, 12500, 16000};

}  // namespace

ThirdOctaveBand third_octave_band(double nominal_hz)
{
    const double k = std::round(3.0 * std::log2(nominal_hz / 1000.0));
    const double center = 1000.0 * std::exp2(k / 3.0);
    return {nominal_hz, center, center * std::exp2(-1.0 / 6.0), center * std::exp2(1.0 / 6.0)};
}

std::vector<double> nominal_band_centers(double lo_hz, double hi_hz)
{
    std::vector<double> out;
    for (double f : kNominalSeries) {
        if (f >= lo_hz * 0.99 && f <= hi_hz * 1.01) {
            out.push_back(f);
        }
    }
    return out;
}

std::vector<int> band_indices_in_range(const std::vector<double>& centers, double lo_hz, double hi_hz)
{
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(centers.size()); ++i) {
        if (centers[i] >= lo_hz * 0.99 && centers[i] <= hi_hz * 1.01) {
            out.push_back(i);
        }
    }
    return out;
}

int find_band(const std::vector<double>& centers, double nominal_hz)
{
    for (int i = 0; i < static_cast<int>(centers.size()); ++i) {
        if (std::abs(centers[i] - nominal_hz) <= 0.01 * nominal_hz) {
            return i;
        }
    }
    return -1;
}

}  // namespace hoe
