// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace hoe {

// Base-2 one-third-octave bands. Bands are labelled by their nominal
// centre (100, 125, 160, ... Hz); edges derive from the exact midband
// frequency 1000 * 2^(k/3) nearest the label, so that adjacent bands
// share an edge and never overlap.
struct ThirdOctaveBand {
    double nominal_hz;
    double exact_center_hz;
    double lower_hz;
    double upper_hz;
};

ThirdOctaveBand third_octave_band(double nominal_hz);

// Nominal centres between lo_hz and hi_hz (inclusive) from the standard series.
std::vector<double> nominal_band_centers(double lo_hz = 100.0, double hi_hz = 8000.0);

// Nominal centres in `centers` that fall in [lo_hz, hi_hz], returned as indices.
std::vector<int> band_indices_in_range(const std::vector<double>& centers, double lo_hz, double hi_hz);

// Index of `nominal_hz` in `centers` (1% tolerance), or -1.
int find_band(const std::vector<double>& centers, double nominal_hz);

}  // namespace hoe
