// SPDX-License-Identifier: Apache-2.0
#include "hoe/rapm.hpp"

#include "hoe/bands.hpp"
#include "hoe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hoe {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kFlatTolerance = 1e-9;

// Orders candidates for tie-breaking: smaller |theta| first, then smaller theta.
bool preferred(double a, double b)
{
    if (std::abs(a) != std::abs(b)) {
        return std::abs(a) < std::abs(b);
    }
    return a < b;
}

}  // namespace

CandidateGrid CandidateGrid::range(double start_deg, double stop_deg, double step_deg)
{
    if (!(step_deg > 0.0) || stop_deg < start_deg) {
        throw ConfigError("candidate grid: invalid range or step");
    }
    CandidateGrid g;
    const auto count = static_cast<long>(std::floor((stop_deg - start_deg) / step_deg + 1e-9));
    for (long i = 0; i <= count; ++i) {
        const double theta = wrap_degrees(start_deg + static_cast<double>(i) * step_deg);
        if (std::find(g.azimuth_deg.begin(), g.azimuth_deg.end(), theta) == g.azimuth_deg.end()) {
            g.azimuth_deg.push_back(theta);
        }
    }
    return g;
}

CandidateGrid CandidateGrid::full_circle(double step_deg)
{
    if (!(step_deg > 0.0)) {
        throw ConfigError("candidate grid: step must be positive");
    }
    CandidateGrid g;
    for (double theta = -180.0; theta < 180.0 - 1e-9; theta += step_deg) {
        g.azimuth_deg.push_back(theta);
    }
    return g;
}

void CandidateGrid::validate() const
{
    if (azimuth_deg.empty()) {
        throw ConfigError("candidate grid is empty");
    }
    for (double theta : azimuth_deg) {
        if (!(theta >= -180.0 && theta < 180.0)) {
            throw ConfigError("candidate grid: azimuths must lie in [-180, 180)");
        }
    }
}

BandSelection select_bands(const std::vector<double>& frame_centers_hz,
                           const DirectivityPattern& pattern,
                           double lo_hz,
                           double hi_hz)
{
    BandSelection sel;
    for (int b : band_indices_in_range(frame_centers_hz, lo_hz, hi_hz)) {
        const int p = pattern.band_index(frame_centers_hz[b]);
        if (p < 0) {
            throw DataError("pattern does not cover the " + std::to_string(frame_centers_hz[b]) + " Hz band");
        }
        sel.frame_band.push_back(b);
        sel.pattern_band.push_back(p);
    }
    if (sel.frame_band.empty()) {
        throw ConfigError("no analysis band lies in the matching range");
    }
    return sel;
}

std::vector<std::vector<double>> expected_powers(const DirectivityPattern& pattern,
                                                 const MicGeometry& geometry,
                                                 double theta_deg,
                                                 std::span<const int> pattern_bands)
{
    std::vector<std::vector<double>> p(pattern_bands.size(), std::vector<double>(geometry.size()));
    for (std::size_t b = 0; b < pattern_bands.size(); ++b) {
        if (pattern_bands[b] < 0 || static_cast<std::size_t>(pattern_bands[b]) >= pattern.band_count()) {
            throw DataError("expected_powers: band not covered by the pattern");
        }
        for (std::size_t m = 0; m < geometry.size(); ++m) {
            const auto& mic = geometry.mics[m];
            p[b][m] = pattern.interpolate(mic.azimuth_deg - theta_deg, mic.elevation_deg,
                                          static_cast<std::size_t>(pattern_bands[b]));
        }
    }
    return p;
}

std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine_similarity: length mismatch");
    }
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (!(aa > 0.0) || !(bb > 0.0)) {
        return std::nullopt;
    }
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), 0.0, 1.0);
}

std::optional<double> matching_cost(const BandPowerFrame& phi,
                                    const std::vector<std::vector<double>>& expected,
                                    std::span<const int> frame_bands)
{
    if (expected.size() != frame_bands.size()) {
        throw std::invalid_argument("matching_cost: one expected vector per band required");
    }
    std::vector<double> observed(phi.mics());
    double sum = 0.0;
    int used = 0;
    for (std::size_t b = 0; b < frame_bands.size(); ++b) {
        for (std::size_t m = 0; m < phi.mics(); ++m) {
            observed[m] = phi.phi[m][frame_bands[b]];
        }
        if (const auto c = cosine_similarity(observed, expected[b])) {
            sum += *c;
            ++used;
        }
    }
    if (used == 0) {
        return std::nullopt;
    }
    return std::clamp(sum / used, 0.0, 1.0);
}

std::optional<double> cost(const BandPowerFrame& phi,
                           const DirectivityPattern& pattern,
                           const MicGeometry& geometry,
                           double theta_deg,
                           const BandSelection& bands)
{
    return matching_cost(phi, expected_powers(pattern, geometry, theta_deg, bands.pattern_band), bands.frame_band);
}

RapmEstimator::RapmEstimator(const DirectivityPattern& pattern,
                             const MicGeometry& geometry,
                             CandidateGrid grid,
                             BandSelection bands)
    : grid_(std::move(grid)), bands_(std::move(bands)), mics_(geometry.size())
{
    grid_.validate();
    const std::size_t nb = bands_.size();
    unit_expected_.assign(grid_.azimuth_deg.size() * nb * mics_, 0.0);
    expected_valid_.assign(grid_.azimuth_deg.size() * nb, 0);
    for (std::size_t c = 0; c < grid_.azimuth_deg.size(); ++c) {
        const auto p = expected_powers(pattern, geometry, grid_.azimuth_deg[c], bands_.pattern_band);
        for (std::size_t b = 0; b < nb; ++b) {
            double norm = 0.0;
            for (double v : p[b]) {
                norm += v * v;
            }
            norm = std::sqrt(norm);
            if (!(norm > 0.0)) {
                continue;
            }
            expected_valid_[c * nb + b] = 1;
            for (std::size_t m = 0; m < mics_; ++m) {
                unit_expected_[(c * nb + b) * mics_ + m] = p[b][m] / norm;
            }
        }
    }
}

std::vector<double> RapmEstimator::cost_curve(const BandPowerFrame& phi) const
{
    if (phi.mics() != mics_) {
        throw std::invalid_argument("RapmEstimator: microphone count mismatch");
    }
    const std::size_t nb = bands_.size();
    std::vector<double> unit_observed(nb * mics_, 0.0);
    std::vector<char> observed_valid(nb, 0);
    for (std::size_t b = 0; b < nb; ++b) {
        double norm = 0.0;
        for (std::size_t m = 0; m < mics_; ++m) {
            const double v = phi.phi[m][bands_.frame_band[b]];
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) {
            continue;
        }
        observed_valid[b] = 1;
        for (std::size_t m = 0; m < mics_; ++m) {
            unit_observed[b * mics_ + m] = phi.phi[m][bands_.frame_band[b]] / norm;
        }
    }

    std::vector<double> curve(grid_.azimuth_deg.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < curve.size(); ++c) {
        double sum = 0.0;
        int used = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            if (!observed_valid[b] || !expected_valid_[c * nb + b]) {
                continue;
            }
            const double* e = &unit_expected_[(c * nb + b) * mics_];
            const double* o = &unit_observed[b * mics_];
            double dot = 0.0;
            for (std::size_t m = 0; m < mics_; ++m) {
                dot += e[m] * o[m];
            }
            sum += std::clamp(dot, 0.0, 1.0);
            ++used;
        }
        if (used > 0) {
            curve[c] = std::clamp(sum / used, 0.0, 1.0);
        }
    }
    return curve;
}

std::optional<OrientationEstimate> RapmEstimator::estimate(const BandPowerFrame& phi) const
{
    const auto curve = cost_curve(phi);
    int best = -1;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < curve.size(); ++c) {
        const double j = curve[c];
        if (std::isnan(j)) {
            continue;
        }
        lo = std::min(lo, j);
        hi = std::max(hi, j);
        if (best < 0 || j > curve[best] + kTieTolerance ||
            (std::abs(j - curve[best]) <= kTieTolerance && preferred(grid_.azimuth_deg[c], grid_.azimuth_deg[best]))) {
            best = static_cast<int>(c);
        }
    }
    if (best < 0) {
        return std::nullopt;
    }
    OrientationEstimate est;
    est.theta_hat_deg = grid_.azimuth_deg[best];
    est.confidence = curve[best];
    est.frame_index = phi.frame_index;
    est.low_information = (hi - lo) < kFlatTolerance;
    return est;
}

std::optional<OrientationEstimate> estimate(const BandPowerFrame& phi,
                                            const DirectivityPattern& pattern,
                                            const MicGeometry& geometry,
                                            const CandidateGrid& grid,
                                            const BandSelection& bands)
{
    return RapmEstimator(pattern, geometry, grid, bands).estimate(phi);
}

std::vector<double> distance_gains(const MicGeometry& geometry, int reference)
{
    if (reference < 0 || static_cast<std::size_t>(reference) >= geometry.size()) {
        throw ConfigError("distance gains: reference microphone out of range");
    }
    const double d0 = geometry.mics[reference].distance_m;
    std::vector<double> gains(geometry.size());
    for (std::size_t m = 0; m < geometry.size(); ++m) {
        const double r = geometry.mics[m].distance_m / d0;
        gains[m] = r * r;
    }
    gains[reference] = 1.0;
    return gains;
}

GainState GainState::unity(std::size_t mics)
{
    GainState s;
    s.gains.assign(mics, 1.0);
    return s;
}

GainState lfa_update(GainState state, const BandPowerFrame& phi, const LfaConfig& cfg)
{
    if (!phi.speech_active) {
        return state;
    }
    const std::size_t mics = phi.mics();
    if (cfg.reference < 0 || static_cast<std::size_t>(cfg.reference) >= mics) {
        throw ConfigError("LFA: reference microphone out of range");
    }
    if (state.gains.size() != mics) {
        state.gains.assign(mics, 1.0);
    }
    if (!state.initialized) {
        state.long_term_psd.assign(mics, std::vector<double>(cfg.frame_bands.size(), 0.0));
    }
    for (std::size_t m = 0; m < mics; ++m) {
        for (std::size_t i = 0; i < cfg.frame_bands.size(); ++i) {
            const double current = phi.phi[m][cfg.frame_bands[i]];
            double& avg = state.long_term_psd[m][i];
            avg = state.initialized ? cfg.lambda * avg + (1.0 - cfg.lambda) * current : current;
        }
    }
    state.initialized = true;

    auto low_band_sum = [&](std::size_t m) {
        double s = 0.0;
        for (double v : state.long_term_psd[m]) {
            s += v;
        }
        return s;
    };
    const double reference_sum = low_band_sum(static_cast<std::size_t>(cfg.reference));
    for (std::size_t m = 0; m < mics; ++m) {
        const double denom = low_band_sum(m);
        if (denom > 0.0 && reference_sum > 0.0) {
            state.gains[m] = reference_sum / denom;
        }
    }
    state.gains[cfg.reference] = 1.0;
    return state;
}

BandPowerFrame apply_gains(const BandPowerFrame& phi, std::span<const double> gains)
{
    if (gains.size() != phi.mics()) {
        throw std::invalid_argument("apply_gains: one gain per microphone required");
    }
    BandPowerFrame out = phi;
    for (std::size_t m = 0; m < out.mics(); ++m) {
        if (!(gains[m] > 0.0)) {
            throw std::invalid_argument("apply_gains: gains must be positive");
        }
        for (double& v : out.phi[m]) {
            v *= gains[m];
        }
    }
    return out;
}

}  // namespace hoe
