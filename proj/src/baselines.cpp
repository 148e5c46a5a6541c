// SPDX-License-Identifier: Apache-2.0
#include "hoe/baselines.hpp"

#include "hoe/error.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hoe {

FeatureBands FeatureBands::from_hz(const StftConfig& cfg, const FeatureBandsHz& hz)
{
    const double nyquist = cfg.sample_rate / 2.0;
    auto make = [&](double lo, double hi, const char* name) {
        if (!(lo < hi) || lo > nyquist) {
            throw ConfigError(std::string("feature band ") + name + " is empty or above Nyquist");
        }
        auto bins = bins_in_range(cfg, lo, hi);
        if (bins.empty()) {
            throw ConfigError(std::string("feature band ") + name + " contains no STFT bin");
        }
        return bins;
    };
    FeatureBands fb;
    fb.low = make(hz.hlbr_low_lo, hz.hlbr_low_hi, "hlbr-low");
    fb.high_hlbr = make(hz.hlbr_high_lo, hz.hlbr_high_hi, "hlbr-high");
    fb.high_var = make(hz.variance_high_lo, hz.variance_high_hi, "variance-high");
    return fb;
}

std::optional<double> hlbr(std::span<const double> magnitude, std::span<const int> low, std::span<const int> high)
{
    double lo = 0.0;
    double hi = 0.0;
    for (int k : low) {
        lo += magnitude[k] * magnitude[k];
    }
    for (int k : high) {
        hi += magnitude[k] * magnitude[k];
    }
    if (!(lo > 0.0)) {
        return std::nullopt;
    }
    return hi / lo;
}

double hbv(std::span<const double> magnitude, double distance_m, std::span<const int> high)
{
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("hbv: distance must be positive");
    }
    if (high.empty()) {
        throw std::invalid_argument("hbv: empty band");
    }
    double mean = 0.0;
    for (int k : high) {
        mean += magnitude[k];
    }
    mean /= static_cast<double>(high.size());
    double var = 0.0;
    for (int k : high) {
        const double d = magnitude[k] - mean;
        var += d * d;
    }
    return var / static_cast<double>(high.size()) / distance_m;
}

std::vector<double> spectral_difference(const std::vector<std::vector<double>>& liftered, std::span<const int> high)
{
    const std::size_t mics = liftered.size();
    if (mics < 2) {
        throw std::invalid_argument("spectral_difference: at least two microphones required");
    }
    if (high.empty()) {
        throw std::invalid_argument("spectral_difference: empty band");
    }
    // Accumulate per-bin deviations so that the features sum to zero up to
    // rounding of a single mean per bin.
    std::vector<double> sd(mics, 0.0);
    for (int k : high) {
        double mean = 0.0;
        for (std::size_t m = 0; m < mics; ++m) {
            mean += liftered[m][k];
        }
        mean /= static_cast<double>(mics);
        for (std::size_t m = 0; m < mics; ++m) {
            sd[m] += liftered[m][k] - mean;
        }
    }
    for (double& v : sd) {
        v /= static_cast<double>(high.size());
    }
    return sd;
}

std::optional<double> vectorial_decision(std::span<const double> features, const MicGeometry& geometry)
{
    if (features.size() != geometry.size()) {
        throw std::invalid_argument("vectorial_decision: one feature per microphone required");
    }
    constexpr double kDegToRad = std::numbers::pi / 180.0;
    double x = 0.0;
    double y = 0.0;
    double scale = 0.0;
    for (std::size_t m = 0; m < features.size(); ++m) {
        const double az = geometry.mics[m].azimuth_deg * kDegToRad;
        x += features[m] * std::cos(az);
        y += features[m] * std::sin(az);
        scale += std::abs(features[m]);
    }
    if (!(scale > 0.0) || std::hypot(x, y) <= 1e-12 * scale) {
        return std::nullopt;
    }
    return wrap_degrees(std::atan2(y, x) / kDegToRad);
}

}  // namespace hoe
