// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hoe/directivity.hpp"
#include "hoe/geometry.hpp"
#include "hoe/spectral.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hoe {

// Candidate head orientations searched by the estimator.
struct CandidateGrid {
    std::vector<double> azimuth_deg;

    // start, start + step, ... <= stop, each wrapped into [-180, 180).
    static CandidateGrid range(double start_deg, double stop_deg, double step_deg);
    // Full circle [-180, 180) with the given step.
    static CandidateGrid full_circle(double step_deg = 1.0);

    void validate() const;
};

struct OrientationEstimate {
    double theta_hat_deg = 0.0;
    double confidence = 0.0;  // J(theta_hat), in [0, 1]
    int frame_index = 0;
    bool low_information = false;  // cost is flat over the grid
};

// Pairs the bands of a BandPowerFrame with the pattern bands used for matching.
struct BandSelection {
    std::vector<int> frame_band;
    std::vector<int> pattern_band;

    std::size_t size() const { return frame_band.size(); }
};

// Frame bands with nominal centres in [lo_hz, hi_hz]; each must exist in the
// pattern, else DataError.
BandSelection select_bands(const std::vector<double>& frame_centers_hz,
                           const DirectivityPattern& pattern,
                           double lo_hz,
                           double hi_hz);

// Expected radiation power [band][mic] for head orientation theta, i.e.
// |D_b(theta_m - theta, phi_m)|^2 over the selected pattern bands.
std::vector<std::vector<double>> expected_powers(const DirectivityPattern& pattern,
                                                 const MicGeometry& geometry,
                                                 double theta_deg,
                                                 std::span<const int> pattern_bands);

// Cosine of the angle between two nonnegative vectors, clamped to [0, 1];
// std::nullopt if either vector is zero.
std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b);

// Average per-band cosine similarity between observed and expected powers.
// Bands where either vector is zero are skipped; std::nullopt if all are.
std::optional<double> matching_cost(const BandPowerFrame& phi,
                                    const std::vector<std::vector<double>>& expected,
                                    std::span<const int> frame_bands);

std::optional<double> cost(const BandPowerFrame& phi,
                           const DirectivityPattern& pattern,
                           const MicGeometry& geometry,
                           double theta_deg,
                           const BandSelection& bands);

// Grid search with precomputed, normalized expected-power vectors.
// Ties resolve to the smallest |theta|, then the smallest theta.
class RapmEstimator {
public:
    RapmEstimator(const DirectivityPattern& pattern,
                  const MicGeometry& geometry,
                  CandidateGrid grid,
                  BandSelection bands);

    // std::nullopt when every band of the frame is degenerate.
    std::optional<OrientationEstimate> estimate(const BandPowerFrame& phi) const;

    // J(theta) for every grid candidate (NaN when undefined).
    std::vector<double> cost_curve(const BandPowerFrame& phi) const;

    const CandidateGrid& grid() const { return grid_; }

private:
    CandidateGrid grid_;
    BandSelection bands_;
    std::size_t mics_;
    // [candidate][band] unit vectors over mics, flattened; zero if degenerate.
    std::vector<double> unit_expected_;
    std::vector<char> expected_valid_;
};

std::optional<OrientationEstimate> estimate(const BandPowerFrame& phi,
                                            const DirectivityPattern& pattern,
                                            const MicGeometry& geometry,
                                            const CandidateGrid& grid,
                                            const BandSelection& bands);

// a_m = (d_m / d_ref)^2.
std::vector<double> distance_gains(const MicGeometry& geometry, int reference = 0);

struct LfaConfig {
    std::vector<int> frame_bands;  // low-frequency bands of the BandPowerFrame
    double lambda = 0.0;           // exp(-hop / (fs * tau_lfa))
    int reference = 0;
};

// Long-term low-band PSDs and the gains derived from them.
struct GainState {
    std::vector<std::vector<double>> long_term_psd;  // [mic][lfa band]
    std::vector<double> gains;
    bool initialized = false;

    static GainState unity(std::size_t mics);
};

// Updates the long-term PSDs on speech-active frames only; gains become
// sum_b PSD_ref,b / sum_b PSD_m,b. A zero denominator keeps the previous gain.
GainState lfa_update(GainState state, const BandPowerFrame& phi, const LfaConfig& cfg);

// Scales every band power of microphone m by gains[m].
BandPowerFrame apply_gains(const BandPowerFrame& phi, std::span<const double> gains);

}  // namespace hoe
