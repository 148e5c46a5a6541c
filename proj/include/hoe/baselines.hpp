// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hoe/geometry.hpp"
#include "hoe/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hoe {

// Frequency ranges of the individual-microphone features.
struct FeatureBandsHz {
    double hlbr_low_lo = 200.0;
    double hlbr_low_hi = 400.0;
    double hlbr_high_lo = 4000.0;
    double hlbr_high_hi = 8000.0;
    double variance_high_lo = 5000.0;  // HBV and SD
    double variance_high_hi = 8000.0;
};

struct FeatureBands {
    std::vector<int> low;        // HLBR low band
    std::vector<int> high_hlbr;  // HLBR high band
    std::vector<int> high_var;   // HBV / SD high band

    // Throws ConfigError when a set is empty or exceeds Nyquist.
    static FeatureBands from_hz(const StftConfig& cfg, const FeatureBandsHz& hz = {});
};

// High-to-low band energy ratio of a magnitude spectrum. std::nullopt when
// the low band carries no energy.
std::optional<double> hlbr(std::span<const double> magnitude, std::span<const int> low, std::span<const int> high);

// Distance-weighted variance of the magnitudes in the high band.
double hbv(std::span<const double> magnitude, double distance_m, std::span<const int> high);

// Mean deviation of each microphone's liftered high-band magnitude from the
// average over microphones. Sums to zero over microphones.
std::vector<double> spectral_difference(const std::vector<std::vector<double>>& liftered, std::span<const int> high);

// Angle of the feature-weighted sum of talker-to-microphone unit vectors in
// the horizontal plane, wrapped to [-180, 180). std::nullopt when the sum
// vanishes. Features may be negative.
std::optional<double> vectorial_decision(std::span<const double> features, const MicGeometry& geometry);

}  // namespace hoe
