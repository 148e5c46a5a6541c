// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hoe/fft.hpp"

#include <complex>
#include <span>
#include <vector>

namespace hoe {

enum class WindowType { Hann };

struct StftConfig {
    double sample_rate = 16000.0;
    int frame_size = 512;
    int hop_size = 256;
    WindowType window = WindowType::Hann;

    // Throws ConfigError.
    void validate() const;
    int bins() const { return frame_size / 2 + 1; }
    double bin_hz() const { return sample_rate / frame_size; }
    // Number of full frames in a signal of `length` samples.
    int frame_count(std::size_t length) const;
};

struct SmoothingConfig {
    double tau_psd = 0.25;
    double tau_lfa = 5.0;

    void validate() const;
};

using Spectrum = std::vector<std::complex<double>>;

// Periodic Hann window.
std::vector<double> hann_window(int length);

// Windowed one-sided spectra of consecutive hop-advanced frames.
// Throws DataError when the signal is shorter than one frame.
std::vector<Spectrum> stft(std::span<const double> signal, const StftConfig& cfg);

// Reusable single-frame transform (owns its FFT plan).
class FrameTransform {
public:
    explicit FrameTransform(const StftConfig& cfg);
    void transform(std::span<const double> frame, std::span<std::complex<double>> out);

private:
    std::vector<double> window_;
    std::vector<double> buffer_;
    Fft fft_;
};

// lambda = exp(-hop / (fs * tau)); 0 for tau -> 0.
double smoothing_coefficient(int hop_size, double sample_rate, double tau_seconds);

// One recursive smoothing step: lambda * previous + (1 - lambda) * instantaneous.
// An empty `previous` initializes with the instantaneous value.
std::vector<double> smooth_psd(std::span<const double> previous, std::span<const double> instantaneous, double lambda);

class RecursiveSmoother {
public:
    explicit RecursiveSmoother(double lambda) : lambda_(lambda) {}

    const std::vector<double>& update(std::span<const double> instantaneous);
    const std::vector<double>& value() const { return state_; }
    bool initialized() const { return !state_.empty(); }
    double lambda() const { return lambda_; }

private:
    double lambda_;
    std::vector<double> state_;
};

// Bin sets of one-third-octave bands for an STFT layout.
struct BandLayout {
    std::vector<double> centers_hz;
    std::vector<std::vector<int>> bins;
    // Index of the band whose bins an originally empty band borrowed, else -1.
    std::vector<int> merged_into;
};

// Bin k belongs to band b iff k * fs / N lies in [lower, upper) of the band,
// clipped at Nyquist. Empty bands take the bins of the nearest nonempty band
// above them (logged). Throws ConfigError for a centre above Nyquist.
BandLayout band_bins(const StftConfig& cfg, const std::vector<double>& centers_hz);

// Bins with centre frequency in [lo_hz, hi_hz].
std::vector<int> bins_in_range(const StftConfig& cfg, double lo_hz, double hi_hz);

// Mean of psd over the bin set. Throws std::invalid_argument on an empty set.
double band_power(std::span<const double> psd, std::span<const int> bins);
std::vector<double> band_powers(std::span<const double> psd, const BandLayout& layout);

// Low-quefrency liftering of a one-sided magnitude spectrum (K = N/2 + 1
// values). Quefrencies q with min(q, N - q) < lifter_len are kept.
class CepstralSmoother {
public:
    CepstralSmoother(int bins, int lifter_len);
    std::vector<double> smooth(std::span<const double> magnitudes);

private:
    int bins_;
    int lifter_len_;
    Fft fft_;
    std::vector<std::complex<double>> spectrum_;
    std::vector<double> cepstrum_;
};

std::vector<double> cepstral_smooth(std::span<const double> magnitudes, int lifter_len = 24);

// Per-frame, per-microphone band PSDs.
struct BandPowerFrame {
    int frame_index = 0;
    std::vector<std::vector<double>> phi;  // [mic][band]
    bool speech_active = false;

    std::size_t mics() const { return phi.size(); }
    std::size_t bands() const { return phi.empty() ? 0 : phi.front().size(); }
};

// Streaming multichannel front end: STFT, PSD and magnitude smoothing
// (both with tau_psd), band aggregation. One instance per session.
class SpectralFrontEnd {
public:
    SpectralFrontEnd(const StftConfig& stft, const SmoothingConfig& smoothing, BandLayout layout, int channels);

    // frames[m] holds frame_size samples of microphone m.
    void process(const std::vector<std::span<const double>>& frames);

    const std::vector<std::vector<double>>& psd() const { return psd_; }
    const std::vector<std::vector<double>>& magnitude() const { return magnitude_; }
    const std::vector<std::vector<double>>& band_power() const { return band_power_; }
    const BandLayout& layout() const { return layout_; }

private:
    StftConfig stft_;
    BandLayout layout_;
    FrameTransform transform_;
    std::vector<RecursiveSmoother> psd_smoothers_;
    std::vector<RecursiveSmoother> magnitude_smoothers_;
    std::vector<std::vector<double>> psd_;
    std::vector<std::vector<double>> magnitude_;
    std::vector<std::vector<double>> band_power_;
    std::vector<std::complex<double>> spectrum_;
};

}  // namespace hoe
