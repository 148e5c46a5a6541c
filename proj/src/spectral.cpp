// SPDX-License-Identifier: Apache-2.0
#include "hoe/spectral.hpp"

#include "hoe/bands.hpp"
#include "hoe/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hoe {

void StftConfig::validate() const
{
    if (!(sample_rate > 0.0)) {
        throw ConfigError("stft: sample rate must be positive");
    }
    if (frame_size < 2 || (frame_size & (frame_size - 1)) != 0) {
        throw ConfigError("stft: frame size must be a power of two");
    }
    if (hop_size < 1 || hop_size > frame_size) {
        throw ConfigError("stft: hop size must be in [1, frame_size]");
    }
}

int StftConfig::frame_count(std::size_t length) const
{
    if (length < static_cast<std::size_t>(frame_size)) {
        return 0;
    }
    return static_cast<int>((length - frame_size) / hop_size) + 1;
}

void SmoothingConfig::validate() const
{
    if (!(tau_psd > 0.0) || !(tau_lfa > 0.0)) {
        throw ConfigError("smoothing: time constants must be positive");
    }
}

std::vector<double> hann_window(int length)
{
    std::vector<double> w(length);
    for (int n = 0; n < length; ++n) {
        w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
    }
    return w;
}

FrameTransform::FrameTransform(const StftConfig& cfg)
    : window_(hann_window(cfg.frame_size)), buffer_(cfg.frame_size), fft_(cfg.frame_size)
{
}

void FrameTransform::transform(std::span<const double> frame, std::span<std::complex<double>> out)
{
    if (frame.size() != window_.size()) {
        throw std::invalid_argument("FrameTransform: frame length mismatch");
    }
    for (std::size_t n = 0; n < window_.size(); ++n) {
        buffer_[n] = frame[n] * window_[n];
    }
    fft_.forward(buffer_, out);
}

std::vector<Spectrum> stft(std::span<const double> signal, const StftConfig& cfg)
{
    cfg.validate();
    const int frames = cfg.frame_count(signal.size());
    if (frames == 0) {
        throw DataError("stft: signal shorter than one frame");
    }
    FrameTransform transform(cfg);
    std::vector<Spectrum> out(frames, Spectrum(cfg.bins()));
    for (int t = 0; t < frames; ++t) {
        transform.transform(signal.subspan(static_cast<std::size_t>(t) * cfg.hop_size, cfg.frame_size), out[t]);
    }
    return out;
}

double smoothing_coefficient(int hop_size, double sample_rate, double tau_seconds)
{
    if (tau_seconds <= 0.0) {
        return 0.0;
    }
    return std::exp(-static_cast<double>(hop_size) / (sample_rate * tau_seconds));
}

std::vector<double> smooth_psd(std::span<const double> previous, std::span<const double> instantaneous, double lambda)
{
    if (previous.empty()) {
        return {instantaneous.begin(), instantaneous.end()};
    }
    if (previous.size() != instantaneous.size()) {
        throw std::invalid_argument("smooth_psd: length mismatch");
    }
    std::vector<double> out(previous.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = lambda * previous[k] + (1.0 - lambda) * instantaneous[k];
    }
    return out;
}

const std::vector<double>& RecursiveSmoother::update(std::span<const double> instantaneous)
{
    if (state_.empty()) {
        state_.assign(instantaneous.begin(), instantaneous.end());
        return state_;
    }
    if (state_.size() != instantaneous.size()) {
        throw std::invalid_argument("RecursiveSmoother: length mismatch");
    }
    for (std::size_t k = 0; k < state_.size(); ++k) {
        state_[k] = lambda_ * state_[k] + (1.0 - lambda_) * instantaneous[k];
    }
    return state_;
}

BandLayout band_bins(const StftConfig& cfg, const std::vector<double>& centers_hz)
{
    cfg.validate();
    const double nyquist = cfg.sample_rate / 2.0;
    const double df = cfg.bin_hz();
    const int last_bin = cfg.frame_size / 2;

    BandLayout layout;
    layout.centers_hz = centers_hz;
    layout.bins.resize(centers_hz.size());
    layout.merged_into.assign(centers_hz.size(), -1);
    for (std::size_t b = 0; b < centers_hz.size(); ++b) {
        if (centers_hz[b] > nyquist * (1.0 + 1e-9)) {
            throw ConfigError("band " + std::to_string(centers_hz[b]) + " Hz lies above Nyquist");
        }
        const auto band = third_octave_band(centers_hz[b]);
        for (int k = static_cast<int>(std::ceil(band.lower_hz / df)); k <= last_bin; ++k) {
            if (k * df >= band.upper_hz) {
                break;
            }
            if (k * df >= band.lower_hz) {
                layout.bins[b].push_back(k);
            }
        }
    }
    for (std::size_t b = 0; b < centers_hz.size(); ++b) {
        if (!layout.bins[b].empty()) {
            continue;
        }
        int donor = -1;
        for (std::size_t u = b + 1; u < centers_hz.size() && donor < 0; ++u) {
            if (!layout.bins[u].empty()) {
                donor = static_cast<int>(u);
            }
        }
        for (int d = static_cast<int>(b) - 1; d >= 0 && donor < 0; --d) {
            if (layout.merged_into[d] < 0 && !layout.bins[d].empty()) {
                donor = d;
            }
        }
        if (donor < 0) {
            throw ConfigError("band layout: no band contains any frequency bin");
        }
        layout.bins[b] = layout.bins[donor];
        layout.merged_into[b] = donor;
        spdlog::warn("band {} Hz has no STFT bins; merged into band {} Hz", centers_hz[b], centers_hz[donor]);
    }
    return layout;
}

std::vector<int> bins_in_range(const StftConfig& cfg, double lo_hz, double hi_hz)
{
    std::vector<int> out;
    const double df = cfg.bin_hz();
    for (int k = 0; k <= cfg.frame_size / 2; ++k) {
        const double f = k * df;
        if (f >= lo_hz && f <= hi_hz) {
            out.push_back(k);
        }
    }
    return out;
}

double band_power(std::span<const double> psd, std::span<const int> bins)
{
    if (bins.empty()) {
        throw std::invalid_argument("band_power: empty bin set");
    }
    double sum = 0.0;
    for (int k : bins) {
        sum += psd[static_cast<std::size_t>(k)];
    }
    return sum / static_cast<double>(bins.size());
}

std::vector<double> band_powers(std::span<const double> psd, const BandLayout& layout)
{
    std::vector<double> out(layout.bins.size());
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b] = band_power(psd, layout.bins[b]);
    }
    return out;
}

CepstralSmoother::CepstralSmoother(int bins, int lifter_len)
    : bins_(bins), lifter_len_(lifter_len), fft_(2 * static_cast<std::size_t>(bins - 1)),
      spectrum_(bins), cepstrum_(2 * static_cast<std::size_t>(bins - 1))
{
    if (bins < 2 || lifter_len < 1) {
        throw std::invalid_argument("CepstralSmoother: need >= 2 bins and lifter length >= 1");
    }
}

std::vector<double> CepstralSmoother::smooth(std::span<const double> magnitudes)
{
    if (static_cast<int>(magnitudes.size()) != bins_) {
        throw std::invalid_argument("CepstralSmoother: spectrum length mismatch");
    }
    const std::size_t n = fft_.size();
    for (int k = 0; k < bins_; ++k) {
        spectrum_[k] = std::log(std::max(magnitudes[k], 1e-12));
    }
    // The log spectrum is real and even, so its cepstrum is real and even.
    fft_.inverse(spectrum_, cepstrum_);
    for (std::size_t q = 0; q < n; ++q) {
        if (static_cast<int>(std::min(q, n - q)) >= lifter_len_) {
            cepstrum_[q] = 0.0;
        }
    }
    fft_.forward(cepstrum_, spectrum_);
    std::vector<double> out(bins_);
    for (int k = 0; k < bins_; ++k) {
        out[k] = std::exp(spectrum_[k].real() / static_cast<double>(n));
    }
    return out;
}

std::vector<double> cepstral_smooth(std::span<const double> magnitudes, int lifter_len)
{
    CepstralSmoother smoother(static_cast<int>(magnitudes.size()), lifter_len);
    return smoother.smooth(magnitudes);
}

SpectralFrontEnd::SpectralFrontEnd(const StftConfig& stft, const SmoothingConfig& smoothing, BandLayout layout,
                                   int channels)
    : stft_(stft), layout_(std::move(layout)), transform_(stft), spectrum_(stft.bins())
{
    stft_.validate();
    smoothing.validate();
    const double lambda = smoothing_coefficient(stft.hop_size, stft.sample_rate, smoothing.tau_psd);
    psd_smoothers_.assign(channels, RecursiveSmoother(lambda));
    magnitude_smoothers_.assign(channels, RecursiveSmoother(lambda));
    psd_.resize(channels);
    magnitude_.resize(channels);
    band_power_.resize(channels);
}

void SpectralFrontEnd::process(const std::vector<std::span<const double>>& frames)
{
    if (frames.size() != psd_.size()) {
        throw std::invalid_argument("SpectralFrontEnd: channel count mismatch");
    }
    std::vector<double> power(stft_.bins());
    std::vector<double> mag(stft_.bins());
    for (std::size_t m = 0; m < frames.size(); ++m) {
        transform_.transform(frames[m], spectrum_);
        for (std::size_t k = 0; k < spectrum_.size(); ++k) {
            power[k] = std::norm(spectrum_[k]);
            mag[k] = std::abs(spectrum_[k]);
        }
        psd_[m] = psd_smoothers_[m].update(power);
        magnitude_[m] = magnitude_smoothers_[m].update(mag);
        band_power_[m] = band_powers(psd_[m], layout_);
    }
}

}  // namespace hoe
